//! Right-hand-side differential operators `D = Σᵢ ∂ⁱ Fᵢ(t)`.
//!
//! The operator acts on the right: `P·D = Σᵢ P⁽ⁱ⁾(t) Fᵢ(t)`. Every `Fᵢ` has
//! degree at most `i`.

use crate::error::{Error, Result};
use crate::matpoly::MatrixPolynomial;
use crate::numkernel::Matrix;

/// `x (x-1) ⋯ (x-n+1)`, with `(x)₀ = 1`.
pub fn falling_factorial(x: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (x - i as f64))
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffOperator {
    coeffs: Vec<MatrixPolynomial>,
}

impl DiffOperator {
    /// `coeffs[i]` is `Fᵢ`. Rejects `deg Fᵢ > i`.
    pub fn new(coeffs: Vec<MatrixPolynomial>) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return Err(Error::InvalidParameter("operator needs F_0".into()));
        };
        let size = first.size();
        for (i, f) in coeffs.iter().enumerate() {
            if f.size() != size {
                return Err(Error::DimensionMismatch(format!(
                    "F_{i} has size {}, F_0 has size {size}",
                    f.size()
                )));
            }
            if let Some(d) = f.degree().filter(|&d| d > i) {
                return Err(Error::DegreeBound { index: i, degree: d });
            }
        }
        Ok(Self { coeffs })
    }

    /// Builds from coefficient matrices: `coeffs[i][j]` is `Fⱼⁱ`, the `tʲ`
    /// coefficient of `Fᵢ`.
    pub fn from_coefficients(size: usize, coeffs: Vec<Vec<Matrix>>) -> Result<Self> {
        let polys = coeffs
            .into_iter()
            .map(|c| MatrixPolynomial::new(size, c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(polys)
    }

    pub fn identity(size: usize) -> Self {
        Self {
            coeffs: vec![MatrixPolynomial::identity(size)],
        }
    }

    pub fn zero(size: usize, order: usize) -> Self {
        Self {
            coeffs: vec![MatrixPolynomial::zero(size); order + 1],
        }
    }

    pub fn size(&self) -> usize {
        self.coeffs[0].size()
    }

    /// Nominal order `k` (the number of coefficient slots minus one).
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `Fᵢ`, zero past the order.
    pub fn coefficient(&self, i: usize) -> MatrixPolynomial {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| MatrixPolynomial::zero(self.size()))
    }

    pub fn coefficients(&self) -> &[MatrixPolynomial] {
        &self.coeffs
    }

    /// `Fⱼⁱ`: the `tʲ` coefficient of `Fᵢ`.
    pub fn coeff_matrix(&self, i: usize, j: usize) -> Matrix {
        match self.coeffs.get(i) {
            Some(f) => f.coeff(j),
            None => Matrix::zeros(self.size(), self.size()),
        }
    }

    /// `Fᵢ(t)`.
    pub fn eval_coefficient(&self, i: usize, t: f64) -> Matrix {
        match self.coeffs.get(i) {
            Some(f) => f.eval(t),
            None => Matrix::zeros(self.size(), self.size()),
        }
    }

    /// `P·D = Σᵢ P⁽ⁱ⁾ Fᵢ`.
    pub fn right_apply(&self, p: &MatrixPolynomial) -> Result<MatrixPolynomial> {
        if p.size() != self.size() {
            return Err(Error::DimensionMismatch(format!(
                "polynomial size {} vs operator size {}",
                p.size(),
                self.size()
            )));
        }
        let mut acc = MatrixPolynomial::zero(self.size());
        let mut deriv = p.clone();
        for f in &self.coeffs {
            acc = acc.add(&deriv.mul(f)?)?;
            deriv = deriv.derivative();
        }
        Ok(acc)
    }

    /// `Γₙ = Σᵢ (n)ᵢ Fᵢⁱ`, the matrix with `Pₙ·D = Γₙ Pₙ` for any monic
    /// degree-`n` eigenfunction.
    pub fn eigenvalue(&self, n: usize) -> Matrix {
        let mut g = Matrix::zeros(self.size(), self.size());
        for (i, f) in self.coeffs.iter().enumerate() {
            let ff = falling_factorial(n as f64, i);
            if ff != 0.0 {
                g += f.coeff(i) * ff;
            }
        }
        g
    }

    fn pad_to(&self, order: usize) -> Vec<MatrixPolynomial> {
        (0..=order.max(self.order()))
            .map(|i| self.coefficient(i))
            .collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.size() != self.size() {
            return Err(Error::DimensionMismatch("operator sizes differ".into()));
        }
        let order = self.order().max(other.order());
        let a = self.pad_to(order);
        let b = other.pad_to(order);
        let coeffs = a
            .iter()
            .zip(&b)
            .map(|(x, y)| x.add(y))
            .collect::<Result<Vec<_>>>()?;
        Self::new(coeffs)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|f| f.scale(s)).collect(),
        }
    }

    /// `Σ cᵢ Dᵢ`.
    pub fn linear_combination(ops: &[DiffOperator], c: &[f64]) -> Result<Self> {
        let Some(first) = ops.first() else {
            return Err(Error::InvalidParameter("no operators to combine".into()));
        };
        if ops.len() != c.len() {
            return Err(Error::DimensionMismatch(
                "operator and coefficient counts differ".into(),
            ));
        }
        let order = ops.iter().map(|d| d.order()).max().unwrap_or(0);
        let mut acc = Self::zero(first.size(), order);
        for (d, &ci) in ops.iter().zip(c) {
            acc = acc.add(&d.scale(ci))?;
        }
        Ok(acc)
    }

    /// Number of real unknowns `{Fⱼⁱ}` for an order-`k` operator of size `N`.
    pub fn unknown_count(size: usize, order: usize) -> usize {
        (order + 1) * (order + 2) / 2 * size * size
    }

    /// Flattens `{Fⱼⁱ}` in the order `i = 0..=k`, `j = 0..=i`, row, column.
    pub fn to_coefficient_vector(&self, order: usize) -> Vec<f64> {
        let n = self.size();
        let mut out = Vec::with_capacity(Self::unknown_count(n, order));
        for i in 0..=order {
            for j in 0..=i {
                let m = self.coeff_matrix(i, j);
                for r in 0..n {
                    for c in 0..n {
                        out.push(m[(r, c)]);
                    }
                }
            }
        }
        out
    }

    /// Inverse of [`to_coefficient_vector`](Self::to_coefficient_vector).
    pub fn from_coefficient_vector(size: usize, order: usize, x: &[f64]) -> Result<Self> {
        if x.len() != Self::unknown_count(size, order) {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients, got {}",
                Self::unknown_count(size, order),
                x.len()
            )));
        }
        let mut it = x.iter().copied();
        let mut coeffs = Vec::with_capacity(order + 1);
        for i in 0..=order {
            let mats = (0..=i)
                .map(|_| Matrix::from_fn(size, size, |_, _| 0.0))
                .map(|mut m| {
                    for r in 0..size {
                        for c in 0..size {
                            m[(r, c)] = it.next().expect("length checked");
                        }
                    }
                    m
                })
                .collect();
            coeffs.push(MatrixPolynomial::new(size, mats)?);
        }
        Self::new(coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The intro operator `D_a`.
    fn d_a(a: f64) -> DiffOperator {
        let m = |v: [f64; 4]| Matrix::from_row_slice(2, 2, &v);
        DiffOperator::from_coefficients(
            2,
            vec![
                vec![m([-1.0, 2.0 * (2.0 + a * a) / (a * a), 4.0 / (a * a), 1.0])],
                vec![
                    m([-2.0 * a, 2.0 * a, 0.0, 0.0]),
                    m([-2.0, 2.0 * (2.0 + a * a), 0.0, -2.0]),
                ],
                vec![
                    m([1.0, -1.0, -1.0, 1.0]),
                    m([-a, 0.0, 0.0, a]),
                    m([0.0, a * a, 0.0, 0.0]),
                ],
            ],
        )
        .unwrap()
    }

    #[test]
    fn falling_factorial_examples() {
        assert_eq!(falling_factorial(5.0, 3), 60.0);
        assert_eq!(falling_factorial(2.5, 0), 1.0);
        assert_eq!(falling_factorial(3.0, 5), 0.0);
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(2, 3), 0.0);
        assert_eq!(binomial(0, 0), 1.0);
    }

    #[test]
    fn degree_bound_enforced() {
        let bad = DiffOperator::new(vec![MatrixPolynomial::monomial(2, 1)]);
        assert_eq!(bad, Err(Error::DegreeBound { index: 0, degree: 1 }));
    }

    #[test]
    fn identity_input_returns_f0() {
        let d = d_a(1.3);
        let out = d.right_apply(&MatrixPolynomial::identity(2)).unwrap();
        assert_eq!(out, d.coefficient(0));
    }

    #[test]
    fn t_input_returns_f1_plus_t_f0() {
        let d = d_a(0.8);
        let out = d.right_apply(&MatrixPolynomial::monomial(2, 1)).unwrap();
        let expect = d
            .coefficient(1)
            .add(&d.coefficient(0).mul(&MatrixPolynomial::monomial(2, 1)).unwrap())
            .unwrap();
        assert_eq!(out, expect);
    }

    #[test]
    fn eigenvalue_at_zero_is_f0() {
        let d = d_a(2.0);
        assert_eq!(d.eigenvalue(0), d.coeff_matrix(0, 0));
    }

    #[test]
    fn intro_eigenvalues_match_closed_form() {
        for a in [0.5, 1.0, 2.0] {
            let d = d_a(a);
            for n in 0..15 {
                let nf = n as f64;
                let g = d.eigenvalue(n);
                let expect = Matrix::from_row_slice(
                    2,
                    2,
                    &[
                        -(2.0 * nf + 1.0),
                        (2.0 + nf * a * a) * (2.0 + (nf + 1.0) * a * a) / (a * a),
                        4.0 / (a * a),
                        -2.0 * nf + 1.0,
                    ],
                );
                assert!((g - &expect).abs().max() <= 1e-12 * expect.abs().max());
            }
        }
    }

    #[test]
    fn coefficient_vector_round_trip() {
        let d = d_a(1.7);
        let x = d.to_coefficient_vector(2);
        assert_eq!(x.len(), DiffOperator::unknown_count(2, 2));
        assert_eq!(DiffOperator::from_coefficient_vector(2, 2, &x).unwrap(), d);
    }

    #[test]
    fn mismatched_sizes_rejected() {
        let d = d_a(1.0);
        assert!(d.right_apply(&MatrixPolynomial::identity(3)).is_err());
        assert!(d.add(&DiffOperator::identity(3)).is_err());
    }
}
