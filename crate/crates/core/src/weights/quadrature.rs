//! Gauss rules for the three classical kernels.
//!
//! Nodes come from the Golub–Welsch eigenproblem and are polished by Newton
//! steps on the three-term recurrence. Weights use the Christoffel form
//! `1 / Σ p̂ₖ(x)²`, which keeps small outer weights accurate relative to
//! their size.

use nalgebra::SymmetricEigen;

use crate::error::Result;
use crate::matpoly::Kernel;
use crate::numkernel::Matrix;
use crate::weights::special::kernel_mass;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// `Σ wᵢ f(xᵢ)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Monic recurrence `p_{k+1} = (t - a_k) p_k - b_k p_{k-1}` for the kernel,
/// returned as `(a_0..a_{n-1}, b_1..b_{n-1})`.
fn recurrence(kernel: &Kernel, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n.saturating_sub(1));
    match *kernel {
        Kernel::HermiteExp => {
            a.resize(n, 0.0);
            b.extend((1..n).map(|k| k as f64 / 2.0));
        }
        Kernel::LaguerreExp { alpha } => {
            a.extend((0..n).map(|k| 2.0 * k as f64 + alpha + 1.0));
            b.extend((1..n).map(|k| k as f64 * (k as f64 + alpha)));
        }
        Kernel::JacobiBeta { alpha, beta } => {
            // Jacobi on (-1, 1) with weight (1-x)^p (1+x)^q, then t = (1+x)/2.
            let (p, q) = (beta, alpha);
            let s = p + q;
            for k in 0..n {
                let kf = k as f64;
                let ax = if k == 0 {
                    (q - p) / (s + 2.0)
                } else {
                    (q * q - p * p) / ((2.0 * kf + s) * (2.0 * kf + s + 2.0))
                };
                a.push((1.0 + ax) / 2.0);
            }
            for k in 1..n {
                let kf = k as f64;
                let bx = if k == 1 {
                    4.0 * (1.0 + p) * (1.0 + q) / ((2.0 + s).powi(2) * (3.0 + s))
                } else {
                    let c = 2.0 * kf + s;
                    4.0 * kf * (kf + p) * (kf + q) * (kf + s) / (c * c * (c + 1.0) * (c - 1.0))
                };
                b.push(bx / 4.0);
            }
        }
    }
    (a, b)
}

/// `(p_n(x), p_n'(x))` for the monic recurrence.
fn monic_eval(a: &[f64], b: &[f64], x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (0.0, 1.0);
    let (mut d0, mut d1) = (0.0, 0.0);
    for k in 0..a.len() {
        let bk = if k == 0 { 0.0 } else { b[k - 1] };
        let p2 = (x - a[k]) * p1 - bk * p0;
        let d2 = p1 + (x - a[k]) * d1 - bk * d0;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// `n`-point Gauss rule for `kernel`.
pub fn gauss_rule(kernel: &Kernel, n: usize) -> Result<GaussRule> {
    let m0 = kernel_mass(kernel)?;
    if n == 0 {
        return Ok(GaussRule {
            nodes: vec![],
            weights: vec![],
        });
    }
    let (a, b) = recurrence(kernel, n);
    let mut jm = Matrix::zeros(n, n);
    for k in 0..n {
        jm[(k, k)] = a[k];
        if k + 1 < n {
            let off = b[k].sqrt();
            jm[(k, k + 1)] = off;
            jm[(k + 1, k)] = off;
        }
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(jm).eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = monic_eval(&a, &b, *x);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            *x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            // Orthonormal values p̂ₖ(x) with p̂₀ = 1/√m₀.
            let mut prev = 0.0;
            let mut cur = 1.0 / m0.sqrt();
            let mut sum = cur * cur;
            for k in 0..n - 1 {
                let bk = if k == 0 { 0.0 } else { b[k - 1].sqrt() };
                let next = ((x - a[k]) * cur - bk * prev) / b[k].sqrt();
                prev = cur;
                cur = next;
                sum += cur * cur;
            }
            1.0 / sum
        })
        .collect();
    Ok(GaussRule { nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::special::kernel_moments;

    fn check_exactness(kernel: Kernel, n: usize) {
        let rule = gauss_rule(&kernel, n).unwrap();
        let m = kernel_moments(&kernel, 2 * n - 1).unwrap();
        for (r, mr) in m.iter().enumerate() {
            let q = rule.integrate(|x| x.powi(r as i32));
            let scale = mr.abs().max(m[r - r % 2].abs());
            assert!((q - mr).abs() <= 1e-11 * scale, "{kernel:?} r={r}: {q} vs {mr}");
        }
    }

    #[test]
    fn hermite_rule_is_exact() {
        check_exactness(Kernel::HermiteExp, 12);
    }

    #[test]
    fn laguerre_rule_is_exact() {
        check_exactness(Kernel::LaguerreExp { alpha: 0.5 }, 10);
    }

    #[test]
    fn jacobi_rule_is_exact() {
        check_exactness(Kernel::JacobiBeta { alpha: 0.0, beta: 0.0 }, 8);
        check_exactness(Kernel::JacobiBeta { alpha: 1.5, beta: -0.5 }, 8);
    }

    #[test]
    fn two_point_hermite_nodes() {
        let rule = gauss_rule(&Kernel::HermiteExp, 2).unwrap();
        let x = 0.5_f64.sqrt();
        assert!((rule.nodes[0] + x).abs() < 1e-15);
        assert!((rule.nodes[1] - x).abs() < 1e-15);
    }
}
