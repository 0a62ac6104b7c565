//! Symmetry of a differential operator with respect to a weight matrix.
//!
//! The moment equations are the authoritative test: they are equivalent to
//! symmetry and need no smoothness or boundary hypotheses. The pointwise
//! differential equations, the boundary expressions and the bilinear pairing
//! check are cross-checks.

pub mod catalog;
pub mod discovery;

use serde::Serialize;

use crate::diffop::{binomial, falling_factorial, DiffOperator};
use crate::error::{Error, Result};
use crate::matpoly::{MatrixPolynomial, QuasiDensity};
use crate::numkernel::{norm, psd_check, relative, Matrix};
use crate::orthopoly::inner_product_with_scale;
use crate::weights::{MomentSequence, WeightMatrix};

pub use catalog::{catalog, Branch, CatalogEntry, CatalogOptions, LimitRule};
pub use discovery::{
    find_eigen_operator_basis, find_mass, find_mass_detailed, find_operator_and_mass, find_operator_basis,
    find_operator_basis_with, find_operator_mass_pairs, BasisOptions, MassCandidate,
};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Relative residual of one moment equation, indexed by `(l, n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquationResidual {
    pub l: usize,
    pub n: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub max_residual: f64,
    pub tolerance: f64,
    pub verdict: bool,
    pub entries: Vec<EquationResidual>,
}

impl SymmetryReport {
    fn from_entries(entries: Vec<EquationResidual>, tolerance: f64) -> Self {
        let max_residual = entries.iter().fold(0.0_f64, |m, e| m.max(e.residual));
        Self {
            max_residual,
            tolerance,
            verdict: max_residual <= tolerance,
            entries,
        }
    }

    pub fn residual(&self, l: usize, n: usize) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.l == l && e.n == n)
            .map(|e| e.residual)
    }
}

/// Unnormalized difference `LHS − (−1)ˡ (Bₙˡ)ᵀ` of one moment equation and
/// the largest summand norm that entered it.
#[derive(Debug, Clone, PartialEq)]
pub struct EquationTerm {
    pub l: usize,
    pub n: usize,
    pub difference: Matrix,
    pub scale: f64,
}

impl EquationTerm {
    pub fn residual(&self) -> f64 {
        relative(norm(&self.difference), self.scale)
    }
}

/// `Bₙˡ = Σ_{i=0}^{l} F_{l-i}^l μ_{n-i}` and its largest summand norm.
fn b_with_scale(d: &DiffOperator, mu: &MomentSequence, n: usize, l: usize) -> Result<(Matrix, f64)> {
    if n < l {
        return Err(Error::InvalidParameter(format!("B_n^l needs n >= l, got n = {n}, l = {l}")));
    }
    let size = d.size();
    let mut b = Matrix::zeros(size, size);
    let mut scale = 0.0_f64;
    for i in 0..=l {
        let f = d.coeff_matrix(l, l - i);
        let term = f * mu.get(n - i)?;
        scale = scale.max(norm(&term));
        b += term;
    }
    Ok((b, scale))
}

/// `Bₙˡ = Σ_{i=0}^{l} F_{l-i}^l μ_{n-i}`.
pub fn b_matrix(d: &DiffOperator, mu: &MomentSequence, n: usize, l: usize) -> Result<Matrix> {
    b_with_scale(d, mu, n, l).map(|(b, _)| b)
}

/// Every moment equation `(l, n)` for `l = 0..=k`, `n = l..=n_max`.
pub fn moment_equation_terms(
    d: &DiffOperator,
    mu: &MomentSequence,
    n_max: usize,
) -> Result<Vec<EquationTerm>> {
    let k = d.order();
    let mut out = Vec::new();
    for l in 0..=k {
        for n in l..=n_max {
            out.push(moment_equation_term(d, mu, l, n)?);
        }
    }
    Ok(out)
}

/// `Σ_{i=0}^{k-l} C(k-i, l) (n-l)_{k-l-i} Bₙ^{k-i} − (−1)ˡ (Bₙˡ)ᵀ`.
pub fn moment_equation_term(
    d: &DiffOperator,
    mu: &MomentSequence,
    l: usize,
    n: usize,
) -> Result<EquationTerm> {
    let k = d.order();
    let size = d.size();
    let mut lhs = Matrix::zeros(size, size);
    let mut scale = 0.0_f64;
    for i in 0..=k - l {
        let coef = binomial(k - i, l) * falling_factorial((n - l) as f64, k - l - i);
        if coef == 0.0 {
            // Also keeps the moment index n-(k-i) nonnegative.
            continue;
        }
        let (b, s) = b_with_scale(d, mu, n, k - i)?;
        scale = scale.max(coef.abs() * s);
        lhs += b * coef;
    }
    let (bl, s) = b_with_scale(d, mu, n, l)?;
    scale = scale.max(s);
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
    Ok(EquationTerm {
        l,
        n,
        difference: lhs - bl.transpose() * sign,
        scale,
    })
}

/// Moment-equation check against precomputed moments.
pub fn moment_equation_report(
    d: &DiffOperator,
    mu: &MomentSequence,
    n_max: usize,
    tolerance: f64,
) -> Result<SymmetryReport> {
    let entries = moment_equation_terms(d, mu, n_max)?
        .into_iter()
        .map(|t| EquationResidual {
            l: t.l,
            n: t.n,
            residual: t.residual(),
        })
        .collect();
    Ok(SymmetryReport::from_entries(entries, tolerance))
}

/// Moment equations for `l = 0..=k`, `n = l..=n_max` at the default
/// tolerance.
pub fn moment_equation_residual(
    w: &WeightMatrix,
    d: &DiffOperator,
    n_max: usize,
) -> Result<SymmetryReport> {
    moment_equation_residual_with(w, d, n_max, DEFAULT_TOLERANCE)
}

pub fn moment_equation_residual_with(
    w: &WeightMatrix,
    d: &DiffOperator,
    n_max: usize,
    tolerance: f64,
) -> Result<SymmetryReport> {
    check_sizes(w, d)?;
    if n_max < d.order() {
        return Err(Error::InvalidParameter(format!(
            "n_max = {n_max} must be at least the order {}",
            d.order()
        )));
    }
    let mu = w.moments(n_max)?;
    moment_equation_report(d, &mu, n_max, tolerance)
}

fn check_sizes(w: &WeightMatrix, d: &DiffOperator) -> Result<()> {
    if w.size() != d.size() {
        return Err(Error::DimensionMismatch(format!(
            "weight size {} vs operator size {}",
            w.size(),
            d.size()
        )));
    }
    Ok(())
}

/// Largest relative residual of `⟨PD, Q⟩ = ⟨P, QD⟩` over `P = tⁱI`,
/// `Q = tʲI` with `i, j ≤ deg`.
pub fn bilinear_symmetry_residual(w: &WeightMatrix, d: &DiffOperator, deg: usize) -> Result<f64> {
    check_sizes(w, d)?;
    let mu = w.moments(2 * deg)?;
    let size = d.size();
    let monos: Vec<MatrixPolynomial> = (0..=deg).map(|i| MatrixPolynomial::monomial(size, i)).collect();
    let applied = monos
        .iter()
        .map(|p| d.right_apply(p))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0_f64;
    for i in 0..=deg {
        for j in 0..=deg {
            let (lhs, s1) = inner_product_with_scale(&applied[i], &mu, &monos[j])?;
            let (rhs, s2) = inner_product_with_scale(&monos[i], &mu, &applied[j])?;
            worst = worst.max(relative(norm(&(lhs - rhs)), s1.max(s2)));
        }
    }
    Ok(worst)
}

/// `(F_{k-i} W)^{(m)}` for every continuous part, keyed by `(i, m)`.
struct DensityProducts {
    parts: Vec<(f64, Vec<Vec<QuasiDensity>>)>,
}

impl DensityProducts {
    fn new(w: &WeightMatrix, d: &DiffOperator) -> Result<Self> {
        let k = d.order();
        let mut parts = Vec::new();
        for c in w.continuous() {
            let mut by_index = Vec::with_capacity(k + 1);
            for i in 0..=k {
                let base = c.density.left_mul(&d.coefficient(k - i))?;
                let mut derivs = Vec::with_capacity(k + 1);
                let mut cur = base;
                for _ in 0..=k {
                    let next = cur.derivative();
                    derivs.push(cur);
                    cur = next;
                }
                by_index.push(derivs);
            }
            parts.push((c.scale, by_index));
        }
        Ok(Self { parts })
    }

    /// `Σ_parts γ (F_{k-i} W)^{(m)}(t)`.
    fn eval(&self, i: usize, m: usize, t: f64, size: usize) -> Matrix {
        self.parts
            .iter()
            .fold(Matrix::zeros(size, size), |acc, (s, by_index)| {
                acc + by_index[i][m].eval(t) * *s
            })
    }
}

fn in_interior(w: &WeightMatrix, t: f64) -> bool {
    w.continuous().iter().all(|c| c.density.kernel.contains(t))
}

/// Largest relative residual of
/// `Σ_{i=0}^{k-l} (−1)^{k-i} C(k-i, l) (F_{k-i} W)^{(k-i-l)} = W F_lᵀ`
/// over `l = 0..=k` and the grid. Atoms are ignored.
pub fn differential_equation_residual(w: &WeightMatrix, d: &DiffOperator, grid: &[f64]) -> Result<f64> {
    check_sizes(w, d)?;
    if !w.has_continuous_part() {
        return Err(Error::NoContinuousPart);
    }
    if let Some(t) = grid.iter().find(|&&t| !in_interior(w, t)) {
        return Err(Error::InvalidParameter(format!(
            "grid point {t} is outside the interior of the support"
        )));
    }
    let k = d.order();
    let size = d.size();
    let prods = DensityProducts::new(w, d)?;
    let mut worst = 0.0_f64;
    for &t in grid {
        let wt = w.density(t);
        for l in 0..=k {
            let mut lhs = Matrix::zeros(size, size);
            let mut scale = 0.0_f64;
            for i in 0..=k - l {
                let sign = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
                let term = prods.eval(i, k - i - l, t, size) * (sign * binomial(k - i, l));
                scale = scale.max(norm(&term));
                lhs += term;
            }
            let rhs = &wt * d.eval_coefficient(l, t).transpose();
            scale = scale.max(norm(&rhs));
            worst = worst.max(relative(norm(&(lhs - rhs)), scale));
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndpointReport {
    pub endpoint: f64,
    /// `(t, max |expression|)` for each approach sample.
    pub samples: Vec<(f64, f64)>,
    pub last_magnitude: f64,
    pub vanishing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryReport {
    pub endpoints: Vec<EndpointReport>,
    pub passes: bool,
}

/// Default approach parameters for [`boundary_limit_check`].
pub const DEFAULT_APPROACH: [f64; 8] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

/// Evaluates the boundary expressions
/// `Σ_{i=0}^{p-1} (−1)^{k-i+p-1} C(k-i, l) (F_{k-i} W)^{(p-1-i)}`,
/// `p = 1..=k`, `l = 0..=k-p`, while approaching each support endpoint. A
/// finite end `e` is sampled at `e ± s`, an infinite one at `±1/s`, for each
/// `s` in `approach`. Diagnostic only.
pub fn boundary_limit_check(w: &WeightMatrix, d: &DiffOperator, approach: &[f64]) -> Result<BoundaryReport> {
    check_sizes(w, d)?;
    let k = d.order();
    let size = d.size();
    let mut endpoints = Vec::new();
    for c in w.continuous() {
        let single = WeightMatrix::from_density(c.density.clone())?.scaled(c.scale);
        let prods = DensityProducts::new(&single, d)?;
        let (lo, hi) = c.density.kernel.support();
        for (end, inward) in [(lo, 1.0), (hi, -1.0)] {
            let samples: Vec<(f64, f64)> = approach
                .iter()
                .map(|&s| {
                    let t = if end.is_finite() { end + inward * s } else { -inward / s };
                    let mut mag = 0.0_f64;
                    for p in 1..=k {
                        for l in 0..=k - p {
                            let mut expr = Matrix::zeros(size, size);
                            for i in 0..p {
                                let sign = if (k - i + p - 1) % 2 == 0 { 1.0 } else { -1.0 };
                                expr += prods.eval(i, p - 1 - i, t, size) * (sign * binomial(k - i, l));
                            }
                            mag = mag.max(expr.amax());
                        }
                    }
                    (t, mag)
                })
                .collect();
            let peak = samples.iter().fold(0.0_f64, |m, s| m.max(s.1));
            let last = samples.last().map_or(0.0, |s| s.1);
            endpoints.push(EndpointReport {
                endpoint: end,
                samples,
                last_magnitude: last,
                vanishing: last <= 1e-12 || last <= 1e-3 * peak,
            });
        }
    }
    let passes = endpoints.iter().all(|e| e.vanishing);
    Ok(BoundaryReport { endpoints, passes })
}

/// Residuals of `Fⱼ(t₀) M = 0` (`j ≥ 1`) and `F₀ M = M F₀ᵀ`, each relative
/// to the product of the norms involved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassConditionReport {
    pub psd: bool,
    pub coefficient_residuals: Vec<f64>,
    pub invariance_residual: f64,
    pub max_residual: f64,
    pub tolerance: f64,
    pub verdict: bool,
}

pub fn mass_conditions(d: &DiffOperator, t0: f64, m: &Matrix, tolerance: f64) -> Result<MassConditionReport> {
    if m.nrows() != d.size() || m.ncols() != d.size() {
        return Err(Error::DimensionMismatch("mass and operator sizes differ".into()));
    }
    let mn = norm(m);
    let psd = psd_check(m, 1e-12);
    let coefficient_residuals: Vec<f64> = (1..=d.order())
        .map(|j| {
            let f = d.eval_coefficient(j, t0);
            relative(norm(&(&f * m)), norm(&f) * mn)
        })
        .collect();
    let f0 = d.eval_coefficient(0, t0);
    let invariance_residual = relative(norm(&(&f0 * m - m * f0.transpose())), norm(&f0) * mn);
    let max_residual = coefficient_residuals
        .iter()
        .fold(invariance_residual, |a, &b| a.max(b));
    Ok(MassConditionReport {
        psd,
        coefficient_residuals,
        invariance_residual,
        max_residual,
        tolerance,
        verdict: psd && max_residual <= tolerance,
    })
}

/// Whether `(D, t₀, M)` satisfies the hypotheses of the mass-point theorem.
pub fn theorem22_check(d: &DiffOperator, t0: f64, m: &Matrix) -> bool {
    mass_conditions(d, t0, m, DEFAULT_TOLERANCE).is_ok_and(|r| r.verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::Family;

    fn d_a(a: f64) -> DiffOperator {
        catalog(&Family::Hermite { a }, 0.0, Branch::Plus, &CatalogOptions::default())
            .unwrap()
            .operator
    }

    #[test]
    fn b_matrix_l_zero_is_f0_mu_n() {
        let d = d_a(1.0);
        let mu = Family::Hermite { a: 1.0 }.weight().unwrap().moments(6).unwrap();
        let b = b_matrix(&d, &mu, 4, 0).unwrap();
        assert_eq!(b, d.coeff_matrix(0, 0) * mu.get(4).unwrap());
    }

    #[test]
    fn b_matrix_hand_expansion() {
        let d = d_a(1.5);
        let mu = Family::Hermite { a: 1.5 }.weight().unwrap().moments(3).unwrap();
        let expect = d.coeff_matrix(2, 2) * mu.get(2).unwrap()
            + d.coeff_matrix(2, 1) * mu.get(1).unwrap()
            + d.coeff_matrix(2, 0) * mu.get(0).unwrap();
        let b = b_matrix(&d, &mu, 2, 2).unwrap();
        assert!((b - expect).amax() < 1e-14);
    }

    #[test]
    fn zero_operator_gives_zero_b() {
        let d = DiffOperator::zero(2, 2);
        let mu = Family::Hermite { a: 1.0 }.weight().unwrap().moments(4).unwrap();
        assert_eq!(b_matrix(&d, &mu, 3, 2).unwrap(), Matrix::zeros(2, 2));
        let r = moment_equation_residual(&Family::Hermite { a: 1.0 }.weight().unwrap(), &d, 6).unwrap();
        assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn intro_pair_is_symmetric() {
        let w = Family::Hermite { a: 1.0 }.weight().unwrap();
        let r = moment_equation_residual(&w, &d_a(1.0), 30).unwrap();
        assert!(r.verdict && r.max_residual < 1e-10, "{}", r.max_residual);
    }

    #[test]
    fn perturbed_f0_breaks_symmetry() {
        let w = Family::Hermite { a: 1.0 }.weight().unwrap();
        let d = d_a(1.0);
        let mut bump = Matrix::zeros(2, 2);
        bump[(0, 0)] = 1e-3;
        let pert = d.add(&DiffOperator::from_coefficients(2, vec![vec![bump]]).unwrap()).unwrap();
        let r = moment_equation_residual(&w, &pert, 30).unwrap();
        assert!(!r.verdict && r.max_residual > 1e-4);
        assert!(bilinear_symmetry_residual(&w, &pert, 4).unwrap() > DEFAULT_TOLERANCE);
    }

    #[test]
    fn bilinear_agrees_on_intro_pair() {
        let w = Family::Hermite { a: 2.0 }.weight().unwrap();
        assert!(bilinear_symmetry_residual(&w, &d_a(2.0), 6).unwrap() < 1e-10);
        assert_eq!(bilinear_symmetry_residual(&w, &DiffOperator::zero(2, 2), 3).unwrap(), 0.0);
    }

    #[test]
    fn differential_equations_hold_for_intro_pair() {
        let w = Family::Hermite { a: 1.0 }.weight().unwrap();
        let grid: Vec<f64> = (0..50).map(|i| -3.0 + 6.0 * i as f64 / 49.0).collect();
        assert!(differential_equation_residual(&w, &d_a(1.0), &grid).unwrap() < 1e-9);
        assert_eq!(
            differential_equation_residual(&w, &DiffOperator::zero(2, 2), &grid).unwrap(),
            0.0
        );
    }

    #[test]
    fn boundary_expressions_vanish_for_hermite() {
        let w = Family::Hermite { a: 1.0 }.weight().unwrap();
        let r = boundary_limit_check(&w, &d_a(1.0), &[0.5, 0.25, 0.125]).unwrap();
        assert!(r.passes);
        assert!(r.endpoints.iter().all(|e| e.last_magnitude < 1e-12));
    }

    #[test]
    fn atom_only_weight_passes_boundary_check() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let w = WeightMatrix::atom(0.0, m, 1.0).unwrap();
        let r = boundary_limit_check(&w, &d_a(1.0), &DEFAULT_APPROACH).unwrap();
        assert!(r.passes && r.endpoints.is_empty());
    }

    #[test]
    fn intro_mass_conditions() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(theorem22_check(&d_a(1.0), 0.0, &m));
        assert!(!theorem22_check(&d_a(1.0), 0.0, &Matrix::identity(2, 2)));
    }
}
