//! Weight matrices: continuous quasi-polynomial parts plus Dirac atoms, the
//! four example families, and their moments.

pub mod quadrature;
pub mod special;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matpoly::{Kernel, MatrixPolynomial, QuasiDensity};
use crate::numkernel::{max_abs, psd_check, Matrix};

pub use quadrature::{gauss_rule, GaussRule};
pub use special::{kernel_mass, kernel_moment, kernel_moments};

/// Moment orders past this lose too much headroom in double precision for
/// the Hermite-type families.
pub const DEFAULT_MAX_MOMENT_ORDER: usize = 40;

const PSD_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;

/// `μ₀ … μ_N`, each symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    moments: Vec<Matrix>,
}

impl MomentSequence {
    /// Rejects entries that are not symmetric to `1e-12` relative.
    pub fn new(moments: Vec<Matrix>) -> Result<Self> {
        for (i, m) in moments.iter().enumerate() {
            if m.nrows() != m.ncols() {
                return Err(Error::DimensionMismatch(format!("mu_{i} is not square")));
            }
            let scale = max_abs(m);
            if max_abs(&(m - m.transpose())) > SYMMETRY_TOL * scale {
                return Err(Error::NotSymmetric { index: i });
            }
        }
        Ok(Self { moments })
    }

    pub fn get(&self, n: usize) -> Result<&Matrix> {
        self.moments.get(n).ok_or(Error::MissingMoment { index: n })
    }

    pub fn len(&self) -> usize {
        self.moments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moments.is_empty()
    }

    /// Largest available index, if any.
    pub fn max_order(&self) -> Option<usize> {
        self.moments.len().checked_sub(1)
    }

    pub fn as_slice(&self) -> &[Matrix] {
        &self.moments
    }

    pub fn truncate(&self, n_max: usize) -> Self {
        Self {
            moments: self.moments.iter().take(n_max + 1).cloned().collect(),
        }
    }

    /// `γ·self + ζ·other` over the common index range.
    pub fn combine(&self, gamma: f64, other: &Self, zeta: f64) -> Self {
        Self {
            moments: self
                .moments
                .iter()
                .zip(&other.moments)
                .map(|(a, b)| a * gamma + b * zeta)
                .collect(),
        }
    }
}

/// `ζ · δ_{t₀} · M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: Matrix,
    pub scale: f64,
}

/// `γ · density`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousPart {
    pub scale: f64,
    pub density: QuasiDensity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    size: usize,
    continuous: Vec<ContinuousPart>,
    atoms: Vec<Atom>,
    signed: bool,
}

impl WeightMatrix {
    pub fn from_density(density: QuasiDensity) -> Result<Self> {
        if !density.kernel.is_integrable() {
            return Err(Error::InvalidParameter(format!(
                "kernel {:?} is not integrable",
                density.kernel
            )));
        }
        Ok(Self {
            size: density.size(),
            continuous: vec![ContinuousPart { scale: 1.0, density }],
            atoms: Vec::new(),
            signed: false,
        })
    }

    /// Scalar classical weight `kernel(t)` as a `1 × 1` weight matrix.
    pub fn scalar(kernel: Kernel) -> Result<Self> {
        Self::from_density(QuasiDensity::new(kernel, MatrixPolynomial::identity(1)))
    }

    /// `ζ δ_{t₀} M` alone.
    pub fn atom(location: f64, mass: Matrix, scale: f64) -> Result<Self> {
        let size = mass.nrows();
        Self {
            size,
            continuous: Vec::new(),
            atoms: Vec::new(),
            signed: false,
        }
        .with_atom(location, mass, 0.0, scale)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn continuous(&self) -> &[ContinuousPart] {
        &self.continuous
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Whether negative coefficients were allowed in building this weight.
    pub fn is_signed(&self) -> bool {
        self.signed
    }

    pub fn has_continuous_part(&self) -> bool {
        self.continuous.iter().any(|c| c.scale != 0.0)
    }

    /// `γ · self + ζ δ_{t₀} M`. Requires `M` positive semidefinite, `γ ≥ 0`
    /// and `ζ ≥ 0`.
    pub fn with_atom(&self, location: f64, mass: Matrix, gamma: f64, zeta: f64) -> Result<Self> {
        if !psd_check(&mass, PSD_TOL) {
            return Err(Error::NotPsd);
        }
        if gamma < 0.0 || zeta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma = {gamma} and zeta = {zeta} must be nonnegative"
            )));
        }
        let mut w = self.appended(location, mass, gamma, zeta)?;
        w.signed = self.signed;
        Ok(w)
    }

    /// Like [`with_atom`](Self::with_atom) but allowing any signs, for
    /// algebra inside the cone's linear span. The result is flagged signed.
    pub fn with_atom_signed(
        &self,
        location: f64,
        mass: Matrix,
        gamma: f64,
        zeta: f64,
    ) -> Result<Self> {
        let mut w = self.appended(location, mass, gamma, zeta)?;
        w.signed = true;
        Ok(w)
    }

    fn appended(&self, location: f64, mass: Matrix, gamma: f64, zeta: f64) -> Result<Self> {
        if mass.nrows() != self.size || mass.ncols() != self.size {
            return Err(Error::DimensionMismatch(format!(
                "mass is {}x{}, weight has size {}",
                mass.nrows(),
                mass.ncols(),
                self.size
            )));
        }
        let mut w = self.scaled(gamma);
        w.atoms.push(Atom {
            location,
            mass,
            scale: zeta,
        });
        Ok(w)
    }

    /// `γ · self`.
    pub fn scaled(&self, gamma: f64) -> Self {
        let mut w = self.clone();
        for c in &mut w.continuous {
            c.scale *= gamma;
        }
        for a in &mut w.atoms {
            a.scale *= gamma;
        }
        w
    }

    /// `γ · self + ζ · other`, flagged signed when a coefficient is negative.
    pub fn combine(&self, gamma: f64, other: &Self, zeta: f64) -> Result<Self> {
        if other.size != self.size {
            return Err(Error::DimensionMismatch("weight sizes differ".into()));
        }
        let mut w = self.scaled(gamma);
        let o = other.scaled(zeta);
        w.continuous.extend(o.continuous);
        w.atoms.extend(o.atoms);
        w.signed = self.signed || other.signed || gamma < 0.0 || zeta < 0.0;
        Ok(w)
    }

    /// Density of the continuous part at `t` (atoms excluded).
    pub fn density(&self, t: f64) -> Matrix {
        self.continuous
            .iter()
            .fold(Matrix::zeros(self.size, self.size), |acc, c| {
                acc + c.density.eval(t) * c.scale
            })
    }

    /// `μₙ = γ Σⱼ Qⱼ m_{n+j} + Σ ζ t₀ⁿ M`.
    pub fn moment(&self, n: usize) -> Result<Matrix> {
        let mut mu = Matrix::zeros(self.size, self.size);
        for c in &self.continuous {
            let poly = &c.density.poly;
            let deg = poly.degree().unwrap_or(0);
            let m = kernel_moments(&c.density.kernel, n + deg)
                .map_err(|_| Error::DivergentMoment { order: n })?;
            for (j, q) in poly.coeffs().iter().enumerate() {
                mu += q * (c.scale * m[n + j]);
            }
        }
        for a in &self.atoms {
            mu += &a.mass * (a.scale * a.location.powi(n as i32));
        }
        Ok(mu)
    }

    /// `μ₀ … μ_{n_max}`.
    pub fn moments(&self, n_max: usize) -> Result<MomentSequence> {
        if n_max > DEFAULT_MAX_MOMENT_ORDER {
            log::warn!(
                "moment order {n_max} exceeds {DEFAULT_MAX_MOMENT_ORDER}; expect loss of precision"
            );
        }
        let mut out: Vec<Matrix> = vec![Matrix::zeros(self.size, self.size); n_max + 1];
        for c in &self.continuous {
            let poly = &c.density.poly;
            let deg = poly.degree().unwrap_or(0);
            let m = kernel_moments(&c.density.kernel, n_max + deg)?;
            for (n, mu) in out.iter_mut().enumerate() {
                for (j, q) in poly.coeffs().iter().enumerate() {
                    *mu += q * (c.scale * m[n + j]);
                }
            }
        }
        for a in &self.atoms {
            let mut p = 1.0;
            for mu in out.iter_mut() {
                *mu += &a.mass * (a.scale * p);
                p *= a.location;
            }
        }
        MomentSequence::new(out)
    }
}

/// `μₙ` by Gauss quadrature on each continuous part, plus exact atom terms.
/// Serves as an independent check of [`WeightMatrix::moment`].
pub fn moment_quadrature_oracle(w: &WeightMatrix, n: usize, nodes: usize) -> Result<Matrix> {
    let mut mu = Matrix::zeros(w.size(), w.size());
    for c in w.continuous() {
        let deg = c.density.poly.degree().unwrap_or(0);
        let needed = (n + deg + 2).div_ceil(2);
        if nodes < needed {
            return Err(Error::InsufficientNodes { needed, given: nodes });
        }
        let rule = gauss_rule(&c.density.kernel, nodes)?;
        for (&x, &wt) in rule.nodes.iter().zip(&rule.weights) {
            mu += c.density.poly.eval(x) * (c.scale * wt * x.powi(n as i32));
        }
    }
    for a in w.atoms() {
        mu += &a.mass * (a.scale * a.location.powi(n as i32));
    }
    Ok(mu)
}

/// The example weight families.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `e^{-t²} [[1 + a²t², at], [at, 1]]` on `ℝ`.
    Hermite { a: f64 },
    /// `t^α e^{-t} [[t² + a²(t-1)², a(t-1)], [a(t-1), 1]]` on `(0, ∞)`.
    Laguerre { a: f64, alpha: f64 },
    /// `t^α (1-t)^β [[kt² + c, c(1-t)], [c(1-t), c(1-t)²]]` on `(0, 1)`
    /// with `c = β - k + 1`.
    Jacobi { alpha: f64, beta: f64, k: f64 },
    /// `t^α e^{-t} e^{At} t^J e^{Aᵀt}` of size `N = nu.len() + 1`.
    ArbitrarySize { alpha: f64, nu: Vec<f64> },
}

impl Family {
    /// Size-`N` family with `ν₁ … ν_{N-2}` solved from the chain condition.
    pub fn arbitrary_size(n: usize, alpha: f64, nu_last: f64) -> Result<Self> {
        Ok(Family::ArbitrarySize {
            alpha,
            nu: nu_chain_solve(n, nu_last)?,
        })
    }

    pub fn size(&self) -> usize {
        match self {
            Family::ArbitrarySize { nu, .. } => nu.len() + 1,
            _ => 2,
        }
    }

    /// Short identifier used on the command line.
    pub fn id(&self) -> &'static str {
        match self {
            Family::Hermite { .. } => "hermite31",
            Family::Laguerre { .. } => "laguerre32",
            Family::Jacobi { .. } => "jacobi33",
            Family::ArbitrarySize { .. } => "general34",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let finite = |x: f64| x.is_finite();
        match self {
            Family::Hermite { a } => {
                if !finite(*a) || *a == 0.0 {
                    return bad(format!("a = {a} must be finite and nonzero"));
                }
            }
            Family::Laguerre { a, alpha } => {
                if !finite(*a) || *a == 0.0 {
                    return bad(format!("a = {a} must be finite and nonzero"));
                }
                if !finite(*alpha) || *alpha <= -1.0 {
                    return bad(format!("alpha = {alpha} must exceed -1"));
                }
            }
            Family::Jacobi { alpha, beta, k } => {
                if !finite(*alpha) || *alpha <= -1.0 || !finite(*beta) || *beta <= -1.0 {
                    return bad(format!("alpha = {alpha}, beta = {beta} must exceed -1"));
                }
                if !finite(*k) || *k <= 0.0 || *k >= beta + 1.0 {
                    return bad(format!("k = {k} must lie in (0, beta + 1)"));
                }
            }
            Family::ArbitrarySize { alpha, nu } => {
                if nu.is_empty() {
                    return bad("need at least one nu (N >= 2)".into());
                }
                if !finite(*alpha) || *alpha <= -1.0 {
                    return bad(format!("alpha = {alpha} must exceed -1"));
                }
                if nu.iter().any(|v| !finite(*v) || *v == 0.0) {
                    return bad("every nu must be finite and nonzero".into());
                }
            }
        }
        Ok(())
    }

    pub fn density(&self) -> Result<QuasiDensity> {
        self.validate()?;
        Ok(match self {
            Family::Hermite { a } => {
                let a = *a;
                let poly = MatrixPolynomial::from_rows(
                    2,
                    &[&[1.0, 0.0, 0.0, 1.0], &[0.0, a, a, 0.0], &[a * a, 0.0, 0.0, 0.0]],
                )?;
                QuasiDensity::new(Kernel::HermiteExp, poly)
            }
            Family::Laguerre { a, alpha } => {
                let a = *a;
                let a2 = a * a;
                let poly = MatrixPolynomial::from_rows(
                    2,
                    &[&[a2, -a, -a, 1.0], &[-2.0 * a2, a, a, 0.0], &[1.0 + a2, 0.0, 0.0, 0.0]],
                )?;
                QuasiDensity::new(Kernel::LaguerreExp { alpha: *alpha }, poly)
            }
            Family::Jacobi { alpha, beta, k } => {
                let c = beta - k + 1.0;
                let poly = MatrixPolynomial::from_rows(
                    2,
                    &[&[c, c, c, c], &[0.0, -c, -c, -2.0 * c], &[*k, 0.0, 0.0, c]],
                )?;
                QuasiDensity::new(
                    Kernel::JacobiBeta {
                        alpha: *alpha,
                        beta: *beta,
                    },
                    poly,
                )
            }
            Family::ArbitrarySize { alpha, nu } => {
                let n = nu.len() + 1;
                let a = shift_matrix(nu);
                let e = nilpotent_exp(&a)?;
                let mut tj = vec![Matrix::zeros(n, n); n];
                for i in 0..n {
                    tj[n - 1 - i][(i, i)] = 1.0;
                }
                let tj = MatrixPolynomial::new(n, tj)?;
                let poly = e.mul(&tj)?.mul(&e.adjoint())?;
                QuasiDensity::new(Kernel::LaguerreExp { alpha: *alpha }, poly)
            }
        })
    }

    pub fn weight(&self) -> Result<WeightMatrix> {
        WeightMatrix::from_density(self.density()?)
    }
}

/// `A = Σ νᵢ E_{i,i+1}`.
pub fn shift_matrix(nu: &[f64]) -> Matrix {
    let n = nu.len() + 1;
    let mut a = Matrix::zeros(n, n);
    for (i, v) in nu.iter().enumerate() {
        a[(i, i + 1)] = *v;
    }
    a
}

/// `e^{At}` as a polynomial, for nilpotent `A`.
fn nilpotent_exp(a: &Matrix) -> Result<MatrixPolynomial> {
    let n = a.nrows();
    let mut coeffs = Vec::with_capacity(n);
    let mut term = Matrix::identity(n, n);
    for k in 0..n {
        coeffs.push(term.clone());
        term = &term * a / (k + 1) as f64;
    }
    MatrixPolynomial::new(n, coeffs)
}

/// `make_family(f)` is `f.weight()`.
pub fn make_family(family: &Family) -> Result<WeightMatrix> {
    family.weight()
}

/// `ν₁ … ν_{N-1}` satisfying `i(N-i)ν_{N-1}² = (N-1)νᵢ² + (N-i-1)νᵢ²ν_{N-1}²`
/// for `i < N-1`, taking the positive roots.
pub fn nu_chain_solve(n: usize, nu_last: f64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("N = {n} must be at least 2")));
    }
    if nu_last == 0.0 || !nu_last.is_finite() {
        return Err(Error::InvalidParameter("nu_last must be finite and nonzero".into()));
    }
    let nf = n as f64;
    let l2 = nu_last * nu_last;
    let mut out: Vec<f64> = (1..n - 1)
        .map(|i| {
            let i = i as f64;
            (i * (nf - i) * l2 / ((nf - 1.0) + (nf - i - 1.0) * l2)).sqrt()
        })
        .collect();
    out.push(nu_last);
    Ok(out)
}
