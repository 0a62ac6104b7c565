//! Monic orthogonal matrix polynomials from moments.

use nalgebra::Cholesky;
use serde::Serialize;

use crate::diffop::DiffOperator;
use crate::error::{Error, Result};
use crate::matpoly::MatrixPolynomial;
use crate::numkernel::{condition_number, max_abs, serialize_matrix, symmetrize, Matrix};
use crate::weights::{MomentSequence, WeightMatrix};

/// Moment matrices whose equilibrated condition number exceeds this are
/// rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

pub const DEFAULT_EIGEN_TOLERANCE: f64 = 1e-8;

/// `⟨P, Q⟩ = Σᵢⱼ Pᵢ μ_{i+j} Qⱼᵀ` and the largest summand norm.
pub fn inner_product_with_scale(
    p: &MatrixPolynomial,
    mu: &MomentSequence,
    q: &MatrixPolynomial,
) -> Result<(Matrix, f64)> {
    let size = p.size();
    if q.size() != size {
        return Err(Error::DimensionMismatch("polynomial sizes differ".into()));
    }
    let mut acc = Matrix::zeros(size, size);
    let mut scale = 0.0_f64;
    for (i, pi) in p.coeffs().iter().enumerate() {
        for (j, qj) in q.coeffs().iter().enumerate() {
            let term = pi * mu.get(i + j)? * qj.transpose();
            scale = scale.max(term.norm());
            acc += term;
        }
    }
    Ok((acc, scale))
}

/// `⟨P, Q⟩` from precomputed moments.
pub fn inner_product_from_moments(
    p: &MatrixPolynomial,
    mu: &MomentSequence,
    q: &MatrixPolynomial,
) -> Result<Matrix> {
    inner_product_with_scale(p, mu, q).map(|(m, _)| m)
}

/// `⟨P, Q⟩ = ∫ P dW Q*`.
pub fn inner_product(p: &MatrixPolynomial, w: &WeightMatrix, q: &MatrixPolynomial) -> Result<Matrix> {
    let deg = p.degree().unwrap_or(0) + q.degree().unwrap_or(0);
    inner_product_from_moments(p, &w.moments(deg)?, q)
}

/// Monic `P₀ … P_n` with their norms `Δₖ = ⟨Pₖ, Pₖ⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoSequence {
    pub polys: Vec<MatrixPolynomial>,
    pub norms: Vec<Matrix>,
    moments: MomentSequence,
}

impl OrthoSequence {
    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    /// Moments the sequence was built from (`μ₀ … μ_{2n+1}`).
    pub fn moments(&self) -> &MomentSequence {
        &self.moments
    }
}

/// Monic orthogonal polynomials up to degree `n_max` for `w`.
pub fn monic_sequence(w: &WeightMatrix, n_max: usize) -> Result<OrthoSequence> {
    monic_sequence_from_moments(&w.moments(2 * n_max + 1)?, n_max)
}

/// For each degree `n`, solves `⟨Pₙ, tᵐI⟩ = 0` (`m < n`) for the lower
/// coefficients of `Pₙ` through the block Hankel matrix `[μ_{j+m}]`, after
/// diagonal equilibration.
pub fn monic_sequence_from_moments(mu: &MomentSequence, n_max: usize) -> Result<OrthoSequence> {
    let size = mu.get(0)?.nrows();
    mu.get(2 * n_max)?;
    let mut polys = vec![MatrixPolynomial::identity(size)];
    let mut norms = vec![mu.get(0)?.clone()];
    check_positive(&norms[0], 0)?;
    for n in 1..=n_max {
        let dim = n * size;
        let mut h = Matrix::zeros(dim, dim);
        for j in 0..n {
            for m in 0..n {
                h.view_mut((j * size, m * size), (size, size)).copy_from(mu.get(j + m)?);
            }
        }
        // Right-hand side: rows of −[μ_n … μ_{2n-1}]ᵀ.
        let mut rhs = Matrix::zeros(dim, size);
        for m in 0..n {
            rhs.view_mut((m * size, 0), (size, size))
                .copy_from(&(-mu.get(n + m)?.transpose()));
        }
        let d: Vec<f64> = (0..dim)
            .map(|i| {
                let v = h[(i, i)];
                if v > 0.0 {
                    1.0 / v.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let scaled = Matrix::from_fn(dim, dim, |r, c| h[(r, c)] * d[r] * d[c]);
        let condition = condition_number(&scaled);
        if !(condition <= CONDITION_LIMIT) {
            return Err(Error::IllConditionedMoments { degree: n, condition });
        }
        let chol = Cholesky::new(symmetrize(&scaled))
            .ok_or(Error::IllConditionedMoments { degree: n, condition })?;
        let srhs = Matrix::from_fn(dim, size, |r, c| rhs[(r, c)] * d[r]);
        let y = chol.solve(&srhs);
        let xt = Matrix::from_fn(dim, size, |r, c| y[(r, c)] * d[r]);
        let mut coeffs: Vec<Matrix> = (0..n)
            .map(|j| xt.view((j * size, 0), (size, size)).transpose())
            .collect();
        coeffs.push(Matrix::identity(size, size));
        let p = MatrixPolynomial::new(size, coeffs)?;
        let delta = symmetrize(&inner_product_from_moments(&p, mu, &MatrixPolynomial::monomial(size, n))?);
        check_positive(&delta, n)?;
        polys.push(p);
        norms.push(delta);
    }
    Ok(OrthoSequence {
        polys,
        norms,
        moments: mu.truncate(2 * n_max + 1),
    })
}

fn check_positive(delta: &Matrix, degree: usize) -> Result<()> {
    if Cholesky::new(symmetrize(delta)).is_none() {
        return Err(Error::IllConditionedMoments {
            degree,
            condition: f64::INFINITY,
        });
    }
    Ok(())
}

/// `(Eₙ, Fₙ)` with `tPₙ = P_{n+1} + EₙPₙ + FₙP_{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceStep {
    pub n: usize,
    #[serde(serialize_with = "serialize_matrix")]
    pub e: Matrix,
    #[serde(serialize_with = "serialize_matrix")]
    pub f: Matrix,
    /// Coefficientwise relative residual of the recurrence identity; zero
    /// when `P_{n+1}` is not part of the sequence.
    pub residual: f64,
}

/// Recurrence coefficients for `n = 0 … len-1`. `F₀` is zero.
pub fn recurrence_coeffs(s: &OrthoSequence) -> Result<Vec<RecurrenceStep>> {
    let mu = s.moments();
    let Some(first) = s.polys.first() else {
        return Ok(Vec::new());
    };
    let size = first.size();
    let t = MatrixPolynomial::monomial(size, 1);
    let mut out = Vec::with_capacity(s.len());
    for n in 0..s.len() {
        let tp = t.mul(&s.polys[n])?;
        let inv = |m: &Matrix, k: usize| {
            m.clone()
                .try_inverse()
                .ok_or(Error::IllConditionedMoments { degree: k, condition: f64::INFINITY })
        };
        let e = inner_product_from_moments(&tp, mu, &s.polys[n])? * inv(&s.norms[n], n)?;
        let f = if n == 0 {
            Matrix::zeros(size, size)
        } else {
            inner_product_from_moments(&tp, mu, &s.polys[n - 1])? * inv(&s.norms[n - 1], n - 1)?
        };
        let residual = match s.polys.get(n + 1) {
            Some(next) => {
                let mut rhs = next.add(&s.polys[n].left_mul(&e)?)?;
                if n > 0 {
                    rhs = rhs.add(&s.polys[n - 1].left_mul(&f)?)?;
                }
                let diff = tp.sub(&rhs)?.max_abs_coeff();
                let scale = tp.max_abs_coeff().max(rhs.max_abs_coeff());
                crate::numkernel::relative(diff, scale)
            }
            None => 0.0,
        };
        out.push(RecurrenceStep { n, e, f, residual });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenEntry {
    pub n: usize,
    pub residual: f64,
    #[serde(serialize_with = "serialize_matrix")]
    pub gamma_n: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenReport {
    pub max_residual: f64,
    pub tolerance: f64,
    pub verdict: bool,
    pub entries: Vec<EigenEntry>,
}

/// Relative coefficientwise residual of `PₙD − ΓₙPₙ` for each `n`.
pub fn verify_eigen(s: &OrthoSequence, d: &DiffOperator) -> Result<EigenReport> {
    verify_eigen_with(s, d, DEFAULT_EIGEN_TOLERANCE)
}

pub fn verify_eigen_with(s: &OrthoSequence, d: &DiffOperator, tolerance: f64) -> Result<EigenReport> {
    let mut entries = Vec::with_capacity(s.len());
    for (n, p) in s.polys.iter().enumerate() {
        let gamma_n = d.eigenvalue(n);
        let lhs = d.right_apply(p)?;
        let rhs = p.left_mul(&gamma_n)?;
        let diff = lhs.sub(&rhs)?.max_abs_coeff();
        let scale = lhs.max_abs_coeff().max(rhs.max_abs_coeff());
        entries.push(EigenEntry {
            n,
            residual: crate::numkernel::relative(diff, scale),
            gamma_n,
        });
    }
    let max_residual = entries.iter().fold(0.0_f64, |m, e| m.max(e.residual));
    Ok(EigenReport {
        max_residual,
        tolerance,
        verdict: max_residual <= tolerance,
        entries,
    })
}

/// Largest `‖⟨Pₙ, Pₘ⟩‖ / ‖Δₙ‖` over `n ≠ m`.
pub fn orthogonality_defect(s: &OrthoSequence) -> Result<f64> {
    let mut worst = 0.0_f64;
    for n in 0..s.len() {
        for m in 0..s.len() {
            if n != m {
                let ip = inner_product_from_moments(&s.polys[n], s.moments(), &s.polys[m])?;
                worst = worst.max(max_abs(&ip) / max_abs(&s.norms[n].clone()).max(max_abs(&s.norms[m])));
            }
        }
    }
    Ok(worst)
}
