//! Scalar kernel moments `m_r = ∫ tʳ kernel(t) dt`.

use statrs::function::{beta::beta, gamma::gamma};

use crate::error::{Error, Result};
use crate::matpoly::Kernel;

/// `m₀` of the kernel: `√π`, `Γ(α+1)` or `B(α+1, β+1)`.
pub fn kernel_mass(kernel: &Kernel) -> Result<f64> {
    if !kernel.is_integrable() {
        return Err(Error::DivergentMoment { order: 0 });
    }
    Ok(match *kernel {
        Kernel::HermiteExp => std::f64::consts::PI.sqrt(),
        Kernel::LaguerreExp { alpha } => gamma(alpha + 1.0),
        Kernel::JacobiBeta { alpha, beta: b } => beta(alpha + 1.0, b + 1.0),
    })
}

/// `m_0 … m_r_max`, built by the exact ratio recurrences of each kernel so
/// that only `m₀` goes through the gamma function.
pub fn kernel_moments(kernel: &Kernel, r_max: usize) -> Result<Vec<f64>> {
    let m0 = kernel_mass(kernel)?;
    let mut out = Vec::with_capacity(r_max + 1);
    out.push(m0);
    for r in 0..r_max {
        let rf = r as f64;
        let next = match *kernel {
            Kernel::HermiteExp => {
                if r % 2 == 0 {
                    0.0
                } else {
                    // m_{2m+2} = (m + ½) m_{2m}, here r = 2m + 1.
                    out[r - 1] * ((rf - 1.0) / 2.0 + 0.5)
                }
            }
            Kernel::LaguerreExp { alpha } => out[r] * (rf + alpha + 1.0),
            Kernel::JacobiBeta { alpha, beta } => {
                out[r] * (rf + alpha + 1.0) / (rf + alpha + beta + 2.0)
            }
        };
        out.push(next);
    }
    Ok(out)
}

/// Single kernel moment `m_r`.
pub fn kernel_moment(kernel: &Kernel, r: usize) -> Result<f64> {
    Ok(kernel_moments(kernel, r)?[r])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn hermite_moments_are_half_integer_gammas() {
        let m = kernel_moments(&Kernel::HermiteExp, 12).unwrap();
        for k in 0..=6 {
            assert!(close(m[2 * k], gamma(k as f64 + 0.5), 1e-13));
            if 2 * k + 1 <= 12 {
                assert_eq!(m[2 * k + 1], 0.0);
            }
        }
    }

    #[test]
    fn laguerre_moments_are_gammas() {
        let k = Kernel::LaguerreExp { alpha: 0.7 };
        let m = kernel_moments(&k, 15).unwrap();
        for (r, v) in m.iter().enumerate() {
            assert!(close(*v, gamma(r as f64 + 1.7), 1e-12));
        }
    }

    #[test]
    fn jacobi_moments_match_beta() {
        let k = Kernel::JacobiBeta { alpha: 0.3, beta: 1.5 };
        let m = kernel_moments(&k, 10).unwrap();
        for (r, v) in m.iter().enumerate() {
            assert!(close(*v, beta(r as f64 + 1.3, 2.5), 1e-12));
        }
    }

    #[test]
    fn uniform_kernel_mass_is_one() {
        let k = Kernel::JacobiBeta { alpha: 0.0, beta: 0.0 };
        assert!(close(kernel_mass(&k).unwrap(), 1.0, 1e-15));
        assert!(close(kernel_moment(&k, 3).unwrap(), 0.25, 1e-15));
    }

    #[test]
    fn divergent_kernels_rejected() {
        let k = Kernel::LaguerreExp { alpha: -1.0 };
        assert_eq!(kernel_mass(&k), Err(Error::DivergentMoment { order: 0 }));
    }
}
