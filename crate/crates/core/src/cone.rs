//! The cone of weights sharing a symmetric second-order operator: admissible
//! zeroth moments, the moment recursion they determine, reconstruction of
//! `γ W + ζ δ_{t₀} M` from moments, and a Fourier-transform cross-check.

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::diffop::DiffOperator;
use crate::error::{Error, Result};
use crate::numkernel::{
    ensure_square, norm, nullspace, relative, serialize_matrix, solve_sylvester_with, symmetrize, Matrix,
    SylvesterOptions,
};
use crate::symmetry::{catalog, moment_equation_report, Branch, CatalogOptions};
use crate::weights::{Family, MomentSequence, WeightMatrix};

pub const RECURSION_TOLERANCE: f64 = 1e-9;

/// Symmetric unit matrices `E_ii` and `(E_ij + E_ji)/√2`, `i < j`.
fn symmetric_basis(n: usize) -> Vec<Matrix> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            let mut m = Matrix::zeros(n, n);
            if i == j {
                m[(i, i)] = 1.0;
            } else {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                m[(i, j)] = s;
                m[(j, i)] = s;
            }
            out.push(m);
        }
    }
    out
}

/// Basis of the symmetric `X` with `F₀ X = X F₀ᵀ`.
pub fn solve_mu0_space(f0: &Matrix) -> Result<Vec<Matrix>> {
    let n = ensure_square(f0, "F0")?;
    let basis = symmetric_basis(n);
    let mut sys = Matrix::zeros(n * n, basis.len());
    for (c, s) in basis.iter().enumerate() {
        let img = f0 * s - s * f0.transpose();
        for (r, x) in img.iter().enumerate() {
            sys[(r, c)] = *x;
        }
    }
    Ok(nullspace(&sys, 1e-10)
        .into_iter()
        .map(|v| {
            basis
                .iter()
                .zip(v.iter())
                .fold(Matrix::zeros(n, n), |acc, (b, c)| acc + b * *c)
        })
        .collect())
}

/// Per-order residuals of the second-order moment identities, recorded by
/// [`moment_recursion_report`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecursionStep {
    pub n: usize,
    /// Leading-coefficient identity, `n ≥ 2`.
    pub leading: Option<f64>,
    /// First-derivative identity, `n ≥ 1`.
    pub first: Option<f64>,
    /// Combined identity with `F₀`, all `n`.
    pub combined: f64,
}

/// Accumulates `Σ A μ + μ Bᵀ`-style terms with a scale built from norm
/// products, so cancellation to zero still yields a small relative residual.
struct Identity {
    value: Matrix,
    scale: f64,
}

impl Identity {
    fn new(n: usize) -> Self {
        Self {
            value: Matrix::zeros(n, n),
            scale: 0.0,
        }
    }

    fn left(&mut self, c: f64, f: &Matrix, mu: &Matrix) {
        if c != 0.0 {
            self.value += f * mu * c;
            self.scale = self.scale.max(c.abs() * norm(f) * norm(mu));
        }
    }

    fn right(&mut self, c: f64, mu: &Matrix, f: &Matrix) {
        if c != 0.0 {
            self.value += mu * f.transpose() * c;
            self.scale = self.scale.max(c.abs() * norm(f) * norm(mu));
        }
    }

    fn residual(&self) -> f64 {
        relative(norm(&self.value), self.scale)
    }
}

fn check_second_order(d: &DiffOperator) -> Result<()> {
    if d.order() != 2 {
        return Err(Error::InvalidParameter(format!(
            "the moment recursion needs a second-order operator, got order {}",
            d.order()
        )));
    }
    Ok(())
}

fn identities(d: &DiffOperator, mus: &[Matrix], n: usize) -> RecursionStep {
    let size = d.size();
    let f = |i: usize, j: usize| d.coeff_matrix(i, j);
    let nf = n as f64;
    let mu = |k: usize| &mus[k];
    let leading = (n >= 2).then(|| {
        let mut id = Identity::new(size);
        id.left(1.0, &f(2, 2), mu(n));
        id.left(1.0, &f(2, 1), mu(n - 1));
        id.left(1.0, &f(2, 0), mu(n - 2));
        id.right(-1.0, mu(n), &f(2, 2));
        id.right(-1.0, mu(n - 1), &f(2, 1));
        id.right(-1.0, mu(n - 2), &f(2, 0));
        id.residual()
    });
    let first = (n >= 1).then(|| {
        let mut id = Identity::new(size);
        let c = 2.0 * (nf - 1.0);
        id.left(c, &f(2, 2), mu(n));
        id.left(c, &f(2, 1), mu(n - 1));
        if n >= 2 {
            id.left(c, &f(2, 0), mu(n - 2));
        }
        id.left(1.0, &f(1, 1), mu(n));
        id.left(1.0, &f(1, 0), mu(n - 1));
        id.right(1.0, mu(n), &f(1, 1));
        id.right(1.0, mu(n - 1), &f(1, 0));
        id.residual()
    });
    let mut id = Identity::new(size);
    let c = nf * (nf - 1.0);
    id.left(c, &f(2, 2), mu(n));
    if n >= 2 {
        id.left(c, &f(2, 1), mu(n - 1));
        id.left(c, &f(2, 0), mu(n - 2));
    }
    id.left(nf, &f(1, 1), mu(n));
    if n >= 1 {
        id.left(nf, &f(1, 0), mu(n - 1));
    }
    id.left(1.0, &f(0, 0), mu(n));
    id.right(-1.0, mu(n), &f(0, 0));
    RecursionStep {
        n,
        leading,
        first,
        combined: id.residual(),
    }
}

/// `μ₀ … μ_{n_max}` determined by `μ₀` for a second-order operator.
pub fn moment_recursion(d: &DiffOperator, mu0: &Matrix, n_max: usize) -> Result<MomentSequence> {
    moment_recursion_report(d, mu0, n_max).map(|(m, _)| m)
}

/// For `n ≥ 1` solves the Sylvester equation
/// `Λₙ μₙ + μₙ Λₙᵀ = Rₙ` with `Λₙ = (n-1)F₂² + F₁¹` and
/// `Rₙ = Cₙ μ_{n-1} + μ_{n-1} Cₙᵀ + (1-n)(F₀² μ_{n-2} + μ_{n-2} (F₀²)ᵀ)`,
/// `Cₙ = (1-n)F₁² − F₀¹`. Every step is accepted only if the underlying
/// identities hold to [`RECURSION_TOLERANCE`].
pub fn moment_recursion_report(
    d: &DiffOperator,
    mu0: &Matrix,
    n_max: usize,
) -> Result<(MomentSequence, Vec<RecursionStep>)> {
    check_second_order(d)?;
    let size = d.size();
    if mu0.nrows() != size || mu0.ncols() != size {
        return Err(Error::DimensionMismatch("mu_0 and operator sizes differ".into()));
    }
    let f = |i: usize, j: usize| d.coeff_matrix(i, j);
    let mut mus = vec![symmetrize(mu0)];
    let mut steps = Vec::with_capacity(n_max + 1);
    let first = identities(d, &mus, 0);
    if first.combined > RECURSION_TOLERANCE {
        return Err(Error::Inconsistent {
            order: 0,
            residual: first.combined,
        });
    }
    steps.push(first);
    for n in 1..=n_max {
        let nf = n as f64;
        let lambda = f(2, 2) * (nf - 1.0) + f(1, 1);
        let c = f(2, 1) * (1.0 - nf) - f(1, 0);
        let prev = &mus[n - 1];
        let mut rhs = &c * prev + prev * c.transpose();
        if n >= 2 {
            let pp = &mus[n - 2];
            rhs += (f(2, 0) * pp + pp * f(2, 0).transpose()) * (1.0 - nf);
        }
        let mu = solve_sylvester_with(&lambda, &lambda.transpose(), &rhs, SylvesterOptions::default())
            .map_err(|e| match e {
                Error::SharedSpectrum { distance, tolerance, .. } => Error::SharedSpectrum {
                    order: Some(n),
                    distance,
                    tolerance,
                },
                other => other,
            })?;
        mus.push(symmetrize(&mu));
        let step = identities(d, &mus, n);
        let worst = [step.leading, step.first, Some(step.combined)]
            .into_iter()
            .flatten()
            .fold(0.0_f64, f64::max);
        if worst > RECURSION_TOLERANCE {
            return Err(Error::Inconsistent { order: n, residual: worst });
        }
        steps.push(step);
    }
    Ok((MomentSequence::new(mus)?, steps))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeDecomposition {
    pub gamma: f64,
    pub zeta: f64,
    pub t0: f64,
    #[serde(serialize_with = "serialize_matrix")]
    pub mass: Matrix,
    /// Relative distance of `μ₀` from `span{μ₀(W_ref), M}`.
    pub span_residual: f64,
    /// Largest relative deviation of `μₙ` from `γ μₙ(W_ref) + ζ t₀ⁿ M`.
    pub match_residual: f64,
    /// Largest moment-equation residual of the candidate for `D`.
    pub symmetry_residual: f64,
    /// `γ > 0` and `ζ ≥ 0`.
    pub is_weight: bool,
}

pub const SPAN_TOLERANCE: f64 = 1e-8;

/// Least-squares `(γ, ζ)` with `μ₀ ≈ γ μ₀(W_ref) + ζ M`, then the match of
/// every later moment.
pub fn cone_reconstruct(
    d: &DiffOperator,
    candidate: &MomentSequence,
    w_ref: &WeightMatrix,
    t0: f64,
    mass: &Matrix,
) -> Result<ConeDecomposition> {
    let Some(n_max) = candidate.max_order() else {
        return Err(Error::MissingMoment { index: 0 });
    };
    let reference = w_ref.moments(n_max)?;
    let mu0 = candidate.get(0)?;
    let r0 = reference.get(0)?;
    let mut a = Matrix::zeros(mu0.len(), 2);
    for (i, (x, y)) in r0.iter().zip(mass.iter()).enumerate() {
        a[(i, 0)] = *x;
        a[(i, 1)] = *y;
    }
    let b = Matrix::from_iterator(mu0.len(), 1, mu0.iter().copied());
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let (gamma, zeta) = (sol[(0, 0)], sol[(1, 0)]);
    let span_residual = relative(norm(&(&a * &sol - &b)), norm(&b));
    if span_residual > SPAN_TOLERANCE {
        return Err(Error::OutsideSpan { residual: span_residual });
    }
    let mut match_residual = 0.0_f64;
    let mut p = 1.0;
    for n in 0..=n_max {
        let model_w = reference.get(n)? * gamma;
        let model_m = mass * (zeta * p);
        let scale = norm(candidate.get(n)?).max(norm(&model_w) + norm(&model_m));
        let diff = norm(&(candidate.get(n)? - model_w - model_m));
        match_residual = match_residual.max(relative(diff, scale));
        p *= t0;
    }
    let symmetry_residual = if n_max >= d.order() {
        moment_equation_report(d, candidate, n_max, 0.0)?.max_residual
    } else {
        0.0
    };
    Ok(ConeDecomposition {
        gamma,
        zeta,
        t0,
        mass: mass.clone(),
        span_residual,
        match_residual,
        symmetry_residual,
        is_weight: gamma > 0.0 && zeta >= -1e-12 * gamma.abs().max(1.0),
    })
}

pub type ComplexMatrix = DMatrix<Complex<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct FourierCheck {
    pub x: f64,
    pub closed_form: ComplexMatrix,
    pub series: ComplexMatrix,
    /// Largest entrywise distance between the two.
    pub deviation: f64,
    /// `Tr(μ_{2m}) r^{2m} / (2m)!` at `r = |x|`.
    pub growth: Vec<f64>,
    pub growth_peak: usize,
    /// Whether `growth` is nonincreasing after its peak.
    pub decays_after_peak: bool,
}

/// Parameters of the Hermite-type cone member `γ W_a + ζ δ_{t₀} M(a, t₀)`,
/// with `M` from the plus branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourierParams {
    pub a: f64,
    pub gamma: f64,
    pub zeta: f64,
    pub t0: f64,
}

/// `∫ e^{ixt} dW(t)` in closed form:
/// `γ√π e^{-x²/4} [[1 + a²(2-x²)/4, iax/2], [iax/2, 1]] + ζ e^{it₀x} M`.
pub fn fourier_closed_form(p: &FourierParams, mass: &Matrix, x: f64) -> ComplexMatrix {
    let g = p.gamma * std::f64::consts::PI.sqrt() * (-x * x / 4.0).exp();
    let a = p.a;
    let off = Complex::new(0.0, g * a * x / 2.0);
    let mut out = ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            Complex::new(g * (1.0 + a * a * (2.0 - x * x) / 4.0), 0.0),
            off,
            off,
            Complex::new(g, 0.0),
        ],
    );
    let phase = Complex::new(0.0, p.t0 * x).exp() * p.zeta;
    for (o, m) in out.iter_mut().zip(mass.iter()) {
        *o += phase * *m;
    }
    out
}

/// `Σ_{n<terms} μₙ (ix)ⁿ / n!`.
pub fn moment_series(mu: &MomentSequence, x: f64, terms: usize) -> Result<ComplexMatrix> {
    let size = mu.get(0)?.nrows();
    let mut out = ComplexMatrix::zeros(size, size);
    let mut coef = Complex::new(1.0, 0.0);
    for n in 0..terms {
        let m = mu.get(n)?;
        for (o, v) in out.iter_mut().zip(m.iter()) {
            *o += coef * *v;
        }
        coef *= Complex::new(0.0, x) / (n + 1) as f64;
    }
    Ok(out)
}

/// Compares the closed-form Fourier transform with the truncated moment
/// series and tabulates the growth sequence.
pub fn fourier_check(p: &FourierParams, x: f64, terms: usize) -> Result<FourierCheck> {
    if terms == 0 || terms > 80 {
        return Err(Error::InvalidParameter(format!("terms = {terms} must lie in 1..=80")));
    }
    let family = Family::Hermite { a: p.a };
    let entry = catalog(&family, p.t0, Branch::Plus, &CatalogOptions::default())?;
    let w = family.weight()?.with_atom_signed(p.t0, entry.mass.clone(), p.gamma, p.zeta)?;
    let mu = w.moments(terms - 1)?;
    let closed_form = fourier_closed_form(p, &entry.mass, x);
    let series = moment_series(&mu, x, terms)?;
    let deviation = closed_form
        .iter()
        .zip(series.iter())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()));
    let r = x.abs();
    let mut growth = Vec::new();
    let mut fact_pow = 1.0;
    for m in 0..terms.div_ceil(2) {
        let k = 2 * m;
        if k > 0 {
            fact_pow *= r * r / ((k - 1) as f64 * k as f64);
        }
        growth.push(mu.get(k)?.trace() * fact_pow);
    }
    let growth_peak = growth
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &g)| if g > acc.1 { (i, g) } else { acc })
        .0;
    let decays_after_peak = growth[growth_peak..].windows(2).all(|w| w[1] <= w[0]);
    Ok(FourierCheck {
        x,
        closed_form,
        series,
        deviation,
        growth,
        growth_peak,
        decays_after_peak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::catalog::intro_operator;

    #[test]
    fn trivial_f0_gives_all_symmetric() {
        assert_eq!(solve_mu0_space(&Matrix::zeros(2, 2)).unwrap().len(), 3);
        assert_eq!(solve_mu0_space(&Matrix::identity(2, 2)).unwrap().len(), 3);
    }

    #[test]
    fn intro_mu0_space_is_two_dimensional() {
        let d = intro_operator(1.0).unwrap();
        let space = solve_mu0_space(&d.coeff_matrix(0, 0)).unwrap();
        assert_eq!(space.len(), 2);
    }

    #[test]
    fn atom_at_origin_has_vanishing_higher_moments() {
        let d = intro_operator(1.0).unwrap();
        let m = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let mu = moment_recursion(&d, &m, 10).unwrap();
        for n in 1..=10 {
            assert!(mu.get(n).unwrap().amax() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn inadmissible_mu0_is_inconsistent_at_zero() {
        let d = intro_operator(1.0).unwrap();
        let bad = Matrix::identity(2, 2);
        assert!(matches!(
            moment_recursion(&d, &bad, 5),
            Err(Error::Inconsistent { order: 0, .. })
        ));
    }

    #[test]
    fn recursion_rejects_other_orders() {
        assert!(moment_recursion(&DiffOperator::identity(2), &Matrix::identity(2, 2), 3).is_err());
    }

    #[test]
    fn negative_zeta_flagged() {
        let a = 1.0;
        let d = intro_operator(a).unwrap();
        let w = Family::Hermite { a }.weight().unwrap();
        let m = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let synth = w.with_atom_signed(0.0, m.clone(), 1.0, -0.1).unwrap().moments(8).unwrap();
        let dec = cone_reconstruct(&d, &synth, &w, 0.0, &m).unwrap();
        assert!((dec.zeta + 0.1).abs() < 1e-12);
        assert!(!dec.is_weight);
    }

    #[test]
    fn fourier_at_zero_is_mu0() {
        let p = FourierParams { a: 1.5, gamma: 2.0, zeta: 0.5, t0: 0.0 };
        let c = fourier_check(&p, 0.0, 10).unwrap();
        assert_eq!(c.deviation, 0.0);
        let sp = std::f64::consts::PI.sqrt();
        assert!((c.closed_form[(0, 0)].re - (2.0 * sp * (1.0 + 1.125) + 0.5)).abs() < 1e-13);
    }
}
