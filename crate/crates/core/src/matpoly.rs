//! Matrix polynomials and densities of the form "classical scalar kernel ×
//! matrix polynomial".

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkernel::{max_abs, Matrix};

/// `Σⱼ Aⱼ tʲ` with square `N × N` coefficients.
///
/// Trailing zero coefficients are trimmed, so the zero polynomial has no
/// coefficients and `degree()` returns `None` for it.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial {
    size: usize,
    coeffs: Vec<Matrix>,
}

impl MatrixPolynomial {
    pub fn new(size: usize, coeffs: Vec<Matrix>) -> Result<Self> {
        if let Some(bad) = coeffs.iter().find(|c| c.shape() != (size, size)) {
            return Err(Error::DimensionMismatch(format!(
                "coefficient is {}x{}, expected {size}x{size}",
                bad.nrows(),
                bad.ncols()
            )));
        }
        let mut p = Self { size, coeffs };
        p.trim();
        Ok(p)
    }

    /// Builds from row-major coefficient slices, lowest degree first.
    pub fn from_rows(size: usize, coeffs: &[&[f64]]) -> Result<Self> {
        let mats = coeffs
            .iter()
            .map(|c| {
                if c.len() != size * size {
                    return Err(Error::DimensionMismatch(format!(
                        "coefficient has {} entries, expected {}",
                        c.len(),
                        size * size
                    )));
                }
                Ok(Matrix::from_row_slice(size, size, c))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(size, mats)
    }

    pub fn zero(size: usize) -> Self {
        Self {
            size,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(m: Matrix) -> Self {
        let size = m.nrows();
        let mut p = Self {
            size,
            coeffs: vec![m],
        };
        p.trim();
        p
    }

    pub fn identity(size: usize) -> Self {
        Self::constant(Matrix::identity(size, size))
    }

    /// `tⁿ · I`.
    pub fn monomial(size: usize, n: usize) -> Self {
        let mut coeffs = vec![Matrix::zeros(size, size); n + 1];
        coeffs[n] = Matrix::identity(size, size);
        Self { size, coeffs }
    }

    /// `Σⱼ cⱼ tʲ · I` for a scalar polynomial with coefficients `c`.
    pub fn scalar(size: usize, c: &[f64]) -> Self {
        let id = Matrix::identity(size, size);
        let mut p = Self {
            size,
            coeffs: c.iter().map(|&x| &id * x).collect(),
        };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self
            .coeffs
            .last()
            .is_some_and(|c| c.iter().all(|&x| x == 0.0))
        {
            self.coeffs.pop();
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Matrix] {
        &self.coeffs
    }

    /// The `tʲ` coefficient; zero beyond the degree.
    pub fn coeff(&self, j: usize) -> Matrix {
        self.coeffs
            .get(j)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.size, self.size))
    }

    pub fn leading_coeff(&self) -> Option<&Matrix> {
        self.coeffs.last()
    }

    /// Horner evaluation at `t`.
    pub fn eval(&self, t: f64) -> Matrix {
        let mut acc = Matrix::zeros(self.size, self.size);
        for c in self.coeffs.iter().rev() {
            acc *= t;
            acc += c;
        }
        acc
    }

    fn check_size(&self, other: &Self) -> Result<()> {
        if self.size != other.size {
            return Err(Error::DimensionMismatch(format!(
                "polynomial sizes {} and {} differ",
                self.size, other.size
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|j| self.coeff(j) + other.coeff(j)).collect();
        Self::new(self.size, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Noncommutative product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.size));
        }
        let mut coeffs =
            vec![Matrix::zeros(self.size, self.size); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::new(self.size, coeffs)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = Self {
            size: self.size,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        };
        p.trim();
        p
    }

    /// `M · self`.
    pub fn left_mul(&self, m: &Matrix) -> Result<Self> {
        self.mul_const(m, true)
    }

    /// `self · M`.
    pub fn right_mul(&self, m: &Matrix) -> Result<Self> {
        self.mul_const(m, false)
    }

    fn mul_const(&self, m: &Matrix, left: bool) -> Result<Self> {
        if m.shape() != (self.size, self.size) {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, polynomial size {}",
                m.nrows(),
                m.ncols(),
                self.size
            )));
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| if left { m * c } else { c * m })
            .collect();
        Self::new(self.size, coeffs)
    }

    /// Product with the scalar polynomial `Σⱼ cⱼ tʲ`.
    pub fn mul_scalar_poly(&self, c: &[f64]) -> Self {
        if self.is_zero() || c.is_empty() {
            return Self::zero(self.size);
        }
        let mut coeffs = vec![Matrix::zeros(self.size, self.size); self.coeffs.len() + c.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, &s) in c.iter().enumerate() {
                coeffs[i + j] += a * s;
            }
        }
        let mut p = Self {
            size: self.size,
            coeffs,
        };
        p.trim();
        p
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| c * j as f64)
            .collect();
        let mut p = Self {
            size: self.size,
            coeffs,
        };
        p.trim();
        p
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    /// Coefficientwise adjoint `P*(t)`.
    pub fn adjoint(&self) -> Self {
        Self {
            size: self.size,
            coeffs: self.coeffs.iter().map(|c| c.transpose()).collect(),
        }
    }

    /// Largest absolute coefficient entry.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |acc, c| acc.max(max_abs(c)))
    }

    /// Largest Frobenius norm among the coefficients.
    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |acc, c| acc.max(c.norm()))
    }
}

/// Classical scalar kernel multiplying the matrix polynomial of a
/// [`QuasiDensity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    /// `e^{-t²}` on `ℝ`.
    HermiteExp,
    /// `t^α e^{-t}` on `(0, ∞)`.
    LaguerreExp { alpha: f64 },
    /// `t^α (1-t)^β` on `(0, 1)`.
    JacobiBeta { alpha: f64, beta: f64 },
}

impl Kernel {
    /// Open support interval; infinite ends are `±∞`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Kernel::HermiteExp => (f64::NEG_INFINITY, f64::INFINITY),
            Kernel::LaguerreExp { .. } => (0.0, f64::INFINITY),
            Kernel::JacobiBeta { .. } => (0.0, 1.0),
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = self.support();
        t > lo && t < hi
    }

    /// Kernel value; zero outside the open support.
    pub fn value(&self, t: f64) -> f64 {
        if !self.contains(t) {
            return 0.0;
        }
        match *self {
            Kernel::HermiteExp => (-t * t).exp(),
            Kernel::LaguerreExp { alpha } => t.powf(alpha) * (-t).exp(),
            Kernel::JacobiBeta { alpha, beta } => t.powf(alpha) * (1.0 - t).powf(beta),
        }
    }

    /// Whether the kernel has finite mass on its support.
    pub fn is_integrable(&self) -> bool {
        match *self {
            Kernel::HermiteExp => true,
            Kernel::LaguerreExp { alpha } => alpha > -1.0,
            Kernel::JacobiBeta { alpha, beta } => alpha > -1.0 && beta > -1.0,
        }
    }
}

/// `kernel(t) · poly(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiDensity {
    pub kernel: Kernel,
    pub poly: MatrixPolynomial,
}

impl QuasiDensity {
    pub fn new(kernel: Kernel, poly: MatrixPolynomial) -> Self {
        Self { kernel, poly }
    }

    pub fn size(&self) -> usize {
        self.poly.size()
    }

    pub fn eval(&self, t: f64) -> Matrix {
        let k = self.kernel.value(t);
        if k == 0.0 {
            return Matrix::zeros(self.size(), self.size());
        }
        self.poly.eval(t) * k
    }

    /// Exact derivative, staying in the kernel × polynomial class. The
    /// Laguerre and Jacobi exponents drop by one.
    pub fn derivative(&self) -> Self {
        let p = &self.poly;
        let dp = p.derivative();
        let (kernel, poly) = match self.kernel {
            Kernel::HermiteExp => (
                Kernel::HermiteExp,
                dp.add(&p.mul_scalar_poly(&[0.0, -2.0])),
            ),
            Kernel::LaguerreExp { alpha } => (
                Kernel::LaguerreExp { alpha: alpha - 1.0 },
                p.mul_scalar_poly(&[alpha, -1.0])
                    .add(&dp.mul_scalar_poly(&[0.0, 1.0])),
            ),
            Kernel::JacobiBeta { alpha, beta } => (
                Kernel::JacobiBeta {
                    alpha: alpha - 1.0,
                    beta: beta - 1.0,
                },
                p.mul_scalar_poly(&[alpha, -alpha - beta])
                    .add(&dp.mul_scalar_poly(&[0.0, 1.0, -1.0])),
            ),
        };
        Self {
            kernel,
            poly: poly.expect("sizes agree"),
        }
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |d, _| d.derivative())
    }

    /// `F(t) · density(t)`.
    pub fn left_mul(&self, f: &MatrixPolynomial) -> Result<Self> {
        Ok(Self {
            kernel: self.kernel,
            poly: f.mul(&self.poly)?,
        })
    }

    /// `density(t) · F(t)`.
    pub fn right_mul(&self, f: &MatrixPolynomial) -> Result<Self> {
        Ok(Self {
            kernel: self.kernel,
            poly: self.poly.mul(f)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hermite_poly(a: f64) -> MatrixPolynomial {
        MatrixPolynomial::from_rows(
            2,
            &[&[1.0, 0.0, 0.0, 1.0], &[0.0, a, a, 0.0], &[a * a, 0.0, 0.0, 0.0]],
        )
        .unwrap()
    }

    #[test]
    fn hermite_poly_at_zero_is_identity() {
        for a in [0.5, 1.0, -3.0] {
            assert_eq!(hermite_poly(a).eval(0.0), Matrix::identity(2, 2));
        }
    }

    #[test]
    fn hermite_poly_at_one() {
        let v = hermite_poly(1.0).eval(1.0);
        assert_eq!(v, Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]));
    }

    #[test]
    fn derivative_of_t_is_identity() {
        let t = MatrixPolynomial::monomial(3, 1);
        assert_eq!(t.derivative(), MatrixPolynomial::identity(3));
        assert!(MatrixPolynomial::identity(2).derivative().is_zero());
    }

    #[test]
    fn trimming_and_degree() {
        let p = MatrixPolynomial::new(2, vec![Matrix::identity(2, 2), Matrix::zeros(2, 2)]).unwrap();
        assert_eq!(p.degree(), Some(0));
        assert_eq!(MatrixPolynomial::zero(2).degree(), None);
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let p = MatrixPolynomial::identity(2);
        let q = MatrixPolynomial::identity(3);
        assert!(matches!(p.add(&q), Err(Error::DimensionMismatch(_))));
        assert!(matches!(p.mul(&q), Err(Error::DimensionMismatch(_))));
        assert!(MatrixPolynomial::new(2, vec![Matrix::zeros(3, 3)]).is_err());
    }

    #[test]
    fn mul_is_noncommutative() {
        let a = MatrixPolynomial::constant(Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]));
        let b = MatrixPolynomial::constant(Matrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]));
        assert_ne!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
    }

    #[test]
    fn hermite_kernel_derivative() {
        let d = QuasiDensity::new(Kernel::HermiteExp, MatrixPolynomial::identity(2)).derivative();
        assert_eq!(d.kernel, Kernel::HermiteExp);
        assert_eq!(d.poly, MatrixPolynomial::scalar(2, &[0.0, -2.0]));
    }

    #[test]
    fn laguerre_kernel_derivative() {
        let alpha = 0.7;
        let d = QuasiDensity::new(Kernel::LaguerreExp { alpha }, MatrixPolynomial::identity(2))
            .derivative();
        assert_eq!(d.kernel, Kernel::LaguerreExp { alpha: alpha - 1.0 });
        assert_eq!(d.poly, MatrixPolynomial::scalar(2, &[alpha, -1.0]));
    }

    #[test]
    fn jacobi_derivative_may_leave_integrable_range() {
        let d = QuasiDensity::new(
            Kernel::JacobiBeta { alpha: 0.0, beta: 0.0 },
            MatrixPolynomial::identity(1),
        )
        .derivative();
        assert!(!d.kernel.is_integrable());
        // d/dt of the constant 1 is zero pointwise.
        assert!(d.eval(0.3).abs().max() < 1e-16);
    }

    #[test]
    fn support_is_explicit() {
        let k = Kernel::LaguerreExp { alpha: 0.0 };
        assert_eq!(k.value(-1.0), 0.0);
        assert_eq!(k.value(0.0), 0.0);
        assert!(k.value(1e-9) > 0.0);
        let j = Kernel::JacobiBeta { alpha: 1.0, beta: 1.0 };
        assert_eq!(j.value(1.5), 0.0);
    }
}
