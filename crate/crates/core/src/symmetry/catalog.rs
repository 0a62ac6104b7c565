//! Closed-form operator and mass pairs `(D, M(t₀))` for the example
//! families.

use serde::{Deserialize, Serialize};

use crate::diffop::DiffOperator;
use crate::error::{Error, Result};
use crate::numkernel::Matrix;
use crate::weights::{shift_matrix, Family};

/// Which root of the family's quadratic gives the mass direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

/// Value used for `(1 - t₀)/φ` in the Jacobi-type operator when `t₀ = 1`
/// on the minus branch, where `φ⁻(1) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitRule {
    /// The published value 1. The operator stays symmetric for the weight
    /// but no longer satisfies the mass conditions.
    #[default]
    Printed,
    /// The limit of `(1 - t₀)/φ⁻(t₀)` as `t₀ → 1`, which is 2.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CatalogOptions {
    pub limit_rule: LimitRule,
    /// Builds the operator from the other root than the canonical pairing.
    /// Only useful to demonstrate that the other pairing fails.
    pub swap_pairing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub operator: DiffOperator,
    pub mass: Matrix,
    pub t0: f64,
    /// Root entering the mass matrix (`ξ` or `φ`); `None` when the family
    /// has no root parameter.
    pub root: Option<f64>,
}

fn m2(a: f64, b: f64, c: f64, d: f64) -> Matrix {
    Matrix::from_row_slice(2, 2, &[a, b, c, d])
}

/// `ξ^± = (at₀ ± √(4 + a²t₀²))/2`. Computed without cancellation, using
/// `ξ⁺ξ⁻ = −1`.
pub fn xi(a: f64, t0: f64, branch: Branch) -> f64 {
    let at = a * t0;
    let s = (4.0 + at * at).sqrt();
    // The root whose sign matches at₀ has no cancellation.
    let big = if at >= 0.0 { (at + s) / 2.0 } else { (at - s) / 2.0 };
    let big_branch = if at >= 0.0 { Branch::Plus } else { Branch::Minus };
    if branch == big_branch {
        big
    } else {
        -1.0 / big
    }
}

/// `φ^±` for the Laguerre-type family.
pub fn phi_laguerre(a: f64, alpha: f64, t0: f64, branch: Branch) -> f64 {
    let a2 = a * a;
    let p = (a2 + 1.0) * (t0 + alpha) - a2 + 1.0;
    let disc = ((a2 + 1.0) * (a2 * (t0 - alpha - 1.0).powi(2) + (t0 + alpha + 1.0).powi(2))).sqrt();
    0.5 * (p + branch.sign() * disc) / a
}

/// `φ^±(t₀) = (2 − t₀ ± √(2t₀² − 2t₀ + 1))/(t₀ + 3)` for the Jacobi-type
/// family with `α = β = 0`, `k = ½`.
pub fn phi_jacobi(t0: f64, branch: Branch) -> Result<f64> {
    if t0 == -3.0 {
        return Err(Error::ExcludedPoint { t0 });
    }
    let s = (2.0 * t0 * t0 - 2.0 * t0 + 1.0).sqrt();
    let p = 2.0 - t0;
    // φ⁺φ⁻ = (1 − t₀)/(t₀ + 3); take the larger-magnitude root directly.
    let (big, big_branch) = if p >= 0.0 { (p + s, Branch::Plus) } else { (p - s, Branch::Minus) };
    let big = big / (t0 + 3.0);
    if branch == big_branch {
        Ok(big)
    } else {
        Ok((1.0 - t0) / ((t0 + 3.0) * big))
    }
}

/// The operator and mass for `family` at `t₀`. `branch` selects the root
/// used in the mass matrix; the operator's root follows the pairing that
/// satisfies the mass conditions.
pub fn catalog(family: &Family, t0: f64, branch: Branch, opts: &CatalogOptions) -> Result<CatalogEntry> {
    family.validate()?;
    if !t0.is_finite() {
        return Err(Error::InvalidParameter(format!("t0 = {t0} must be finite")));
    }
    match family {
        Family::Hermite { a } => hermite_entry(*a, t0, branch, opts),
        Family::Laguerre { a, alpha } => laguerre_entry(*a, *alpha, t0, branch, opts),
        Family::Jacobi { alpha, beta, k } => jacobi_entry(*alpha, *beta, *k, t0, branch, opts),
        Family::ArbitrarySize { alpha, nu } => {
            if t0 != 0.0 {
                return Err(Error::Unsupported(format!(
                    "the arbitrary-size family has its mass at t0 = 0, got {t0}"
                )));
            }
            arbitrary_size_entry(*alpha, nu)
        }
    }
}

/// The intro operator `D_a`, i.e. the Hermite entry at `t₀ = 0`.
pub fn intro_operator(a: f64) -> Result<DiffOperator> {
    Ok(catalog(&Family::Hermite { a }, 0.0, Branch::Plus, &CatalogOptions::default())?.operator)
}

fn hermite_entry(a: f64, t0: f64, branch: Branch, opts: &CatalogOptions) -> Result<CatalogEntry> {
    let root = xi(a, t0, branch);
    // Canonical pairing: the operator uses the opposite root.
    let x = if opts.swap_pairing { root } else { xi(a, t0, branch.other()) };
    let a2 = a * a;
    let operator = DiffOperator::from_coefficients(
        2,
        vec![
            vec![m2(x + 2.0 * t0 / a, 2.0 * (2.0 + a2) / a2, 4.0 / a2, -x - 2.0 * t0 / a)],
            vec![
                m2(-2.0 * a, -2.0 * t0 - 2.0 * a * x, 2.0 * t0, 0.0),
                m2(2.0 * x, 2.0 * (2.0 + a2), 0.0, 2.0 * (x - a * t0)),
            ],
            vec![
                m2(-x + a * t0, -1.0, -1.0, -x),
                m2(-a, -a2 * t0, 0.0, a),
                m2(0.0, a2, 0.0, 0.0),
            ],
        ],
    )?;
    Ok(CatalogEntry {
        operator,
        mass: m2(root * root, root, root, 1.0),
        t0,
        root: Some(root),
    })
}

fn laguerre_entry(a: f64, alpha: f64, t0: f64, branch: Branch, opts: &CatalogOptions) -> Result<CatalogEntry> {
    let root = phi_laguerre(a, alpha, t0, branch);
    // Canonical pairing: operator and mass share the root.
    let phi = if opts.swap_pairing { phi_laguerre(a, alpha, t0, branch.other()) } else { root };
    let a2 = a * a;
    let b = 1.0 + a2;
    let f2 = vec![
        m2(a * t0, a2 * t0, -t0, -a * t0),
        m2(phi - (1.0 + (alpha + t0) * b) / a, -(alpha + t0 + 1.0) * b, 0.0, phi + a),
        m2(0.0, b * (1.0 + alpha), 0.0, 0.0),
    ];
    let f1 = vec![
        m2(
            -a * (3.0 * t0 - 2.0 + (alpha + 1.0).powi(2)) + (alpha + 3.0) * (phi - (t0 + alpha + 1.0) / a),
            2.0 * a * phi - b * (alpha * alpha + 2.0 * t0 + 3.0 * alpha) + alpha * t0 * (a2 - 1.0)
                - (t0 + alpha + 3.0),
            t0 - alpha - 1.0,
            phi * (alpha + 1.0) - a * alpha * t0,
        ),
        m2(
            -phi + a * (t0 - 1.0) + (t0 + alpha + 1.0) / a,
            // The published entry reads 2(α − 1); 2(α + 1) is what makes the
            // operator symmetric.
            b * (alpha * alpha + 3.0 * alpha - t0 * alpha + 2.0) + 2.0 * (alpha + 1.0),
            0.0,
            -phi + a * alpha,
        ),
    ];
    let x = -phi / 2.0 + a * (t0 - 1.0) / 2.0 + (alpha + 2.0) * (t0 + alpha + 1.0) / (2.0 * a)
        - a * (1.0 + alpha) / b;
    let f0 = vec![m2(
        x,
        1.0 + a * alpha * phi - alpha * (t0 - 1.0) * (a2 + alpha + 2.0) + (1.0 + alpha) / b,
        (1.0 + alpha) / b,
        -x,
    )];
    Ok(CatalogEntry {
        operator: DiffOperator::from_coefficients(2, vec![f0, f1, f2])?,
        mass: m2(root * root, root, root, 1.0),
        t0,
        root: Some(root),
    })
}

fn jacobi_entry(
    alpha: f64,
    beta: f64,
    k: f64,
    t0: f64,
    branch: Branch,
    opts: &CatalogOptions,
) -> Result<CatalogEntry> {
    if alpha != 0.0 || beta != 0.0 || k != 0.5 {
        return Err(Error::Unsupported(
            "closed forms exist only for alpha = beta = 0, k = 1/2; use the numeric finders".into(),
        ));
    }
    let excluded = -(alpha + beta - k + 2.0) / k;
    if t0 == excluded {
        return Err(Error::ExcludedPoint { t0 });
    }
    let root = phi_jacobi(t0, branch)?;
    let op_branch = if opts.swap_pairing { branch.other() } else { branch };
    // r = (1 − t₀)/φ, written as (t₀ + 3)φ^∓ to stay finite at φ⁻(1) = 0.
    let r = if t0 == 1.0 && op_branch == Branch::Minus {
        match opts.limit_rule {
            LimitRule::Printed => 1.0,
            LimitRule::Continuous => (t0 + 3.0) * phi_jacobi(t0, op_branch.other())?,
        }
    } else {
        (t0 + 3.0) * phi_jacobi(t0, op_branch.other())?
    };
    let f2 = vec![
        m2(-t0, t0, -t0, t0),
        m2(3.0 * t0 - 3.0 + r, 2.0 - 2.0 * t0, 2.0 * t0, -1.0 - t0 + r),
        m2(3.0 - 2.0 * t0 - r, -t0, -t0, 1.0 - r),
    ];
    let f1 = vec![
        m2(-10.0 + 8.0 * t0 + 3.0 * r, 9.0 - 8.0 * t0 - 2.0 * r, 4.0 * t0 - 1.0, -4.0 * t0 + r),
        m2(12.0 - 8.0 * t0 - 4.0 * r, -1.0 - 4.0 * t0, 1.0 - 4.0 * t0, 4.0 - 4.0 * r),
    ];
    let d = r / 2.0 + (1.0 - t0);
    let f0 = vec![m2(d, -t0 - 3.0 + r / 2.0, -t0 + r / 2.0, -d)];
    Ok(CatalogEntry {
        operator: DiffOperator::from_coefficients(2, vec![f0, f1, f2])?,
        mass: m2(1.0, root, root, root * root),
        t0,
        root: Some(root),
    })
}

/// `J = diag(N-1, …, 0)`.
fn j_matrix(n: usize) -> Matrix {
    Matrix::from_fn(n, n, |i, j| if i == j { (n - 1 - i) as f64 } else { 0.0 })
}

/// `Y = Σ i(N-i)/νᵢ E_{i+1,i}`.
fn y_matrix(nu: &[f64]) -> Matrix {
    let n = nu.len() + 1;
    let mut y = Matrix::zeros(n, n);
    for (idx, v) in nu.iter().enumerate() {
        let i = (idx + 1) as f64;
        y[(idx + 1, idx)] = i * (n as f64 - i) / v;
    }
    y
}

/// The two second-order operators `D₁` and `D₂` of the arbitrary-size
/// family. `D₂` needs `ν` to satisfy the chain condition.
pub fn arbitrary_size_operators(alpha: f64, nu: &[f64]) -> Result<(DiffOperator, DiffOperator)> {
    Family::ArbitrarySize { alpha, nu: nu.to_vec() }.validate()?;
    let n = nu.len() + 1;
    let id = Matrix::identity(n, n);
    let j = j_matrix(n);
    let a = shift_matrix(nu);
    let y = y_matrix(nu);
    let zero = Matrix::zeros(n, n);
    let d1 = DiffOperator::from_coefficients(
        n,
        vec![
            vec![(&j + &id * alpha) * &a - &j],
            vec![&id * (alpha + 1.0) + &j, &a - &id],
            vec![zero.clone(), id.clone()],
        ],
    )?;
    let nl = nu[n - 2];
    let d2 = DiffOperator::from_coefficients(
        n,
        vec![
            vec![(&j - (&id * alpha + &j) * &a) * ((n - 1) as f64 / (nl * nl))],
            vec![
                (&id * (1.0 + alpha) + &j) * &j + &y,
                -(&j + &a * (alpha + 2.0) + y.transpose() - &a * &y + &y * &a),
            ],
            vec![zero, j.clone(), -a.clone()],
        ],
    )?;
    Ok((d1, d2))
}

/// `v` with `vⱼ = Π_{k=1}^{N-j} ν_{N-k}(α+k)/k` and `v_N = 1`.
pub fn arbitrary_size_mass_vector(alpha: f64, nu: &[f64]) -> Vec<f64> {
    let n = nu.len() + 1;
    (1..=n)
        .map(|j| {
            (1..=n - j)
                .map(|k| nu[n - k - 1] * (alpha + k as f64) / k as f64)
                .product()
        })
        .collect()
}

fn arbitrary_size_entry(alpha: f64, nu: &[f64]) -> Result<CatalogEntry> {
    let n = nu.len() + 1;
    let nf = n as f64;
    let id = Matrix::identity(n, n);
    let j = j_matrix(n);
    let a = shift_matrix(nu);
    let y = y_matrix(nu);
    let nl = nu[n - 2];
    let diag = Matrix::from_fn(n, n, |r, c| {
        if r == c {
            let i = (r + 1) as f64;
            (i - 1.0) * (alpha + nf - i + 1.0)
        } else {
            0.0
        }
    });
    let operator = DiffOperator::from_coefficients(
        n,
        vec![
            vec![(&j - (&id * alpha + &j) * &a) * ((nf - 1.0) * (1.0 + nl * nl) / (nl * nl))],
            vec![&y - diag, &j - &a * (alpha + nf + 1.0) - y.transpose()],
            vec![Matrix::zeros(n, n), &j - &id * (nf - 1.0), -a],
        ],
    )?;
    let v = crate::numkernel::Vector::from_vec(arbitrary_size_mass_vector(alpha, nu));
    Ok(CatalogEntry {
        operator,
        mass: &v * v.transpose(),
        t0: 0.0,
        root: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::{mass_conditions, theorem22_check};

    #[test]
    fn xi_roots_multiply_to_minus_one() {
        for (a, t0) in [(1.0, 0.0), (0.5, -1.0), (2.0, 3.5), (1.0, -40.0)] {
            let p = xi(a, t0, Branch::Plus);
            let m = xi(a, t0, Branch::Minus);
            assert!((p * m + 1.0).abs() < 1e-12);
            assert!(p > m);
        }
    }

    #[test]
    fn hermite_at_zero_is_intro_display() {
        let a = 1.3;
        let d = intro_operator(a).unwrap();
        let f2 = d.coefficient(2);
        for t in [-1.0, 0.5, 2.0] {
            let expect = m2(1.0 - a * t, -1.0 + a * a * t * t, -1.0, 1.0 + a * t);
            assert!((f2.eval(t) - expect).amax() < 1e-14);
        }
    }

    #[test]
    fn swapped_pairing_fails_mass_conditions() {
        for (fam, t0) in [
            (Family::Hermite { a: 1.0 }, 0.7),
            (Family::Laguerre { a: 1.0, alpha: 0.0 }, 0.5),
            (Family::Jacobi { alpha: 0.0, beta: 0.0, k: 0.5 }, 0.3),
        ] {
            for branch in [Branch::Plus, Branch::Minus] {
                let good = catalog(&fam, t0, branch, &CatalogOptions::default()).unwrap();
                assert!(theorem22_check(&good.operator, t0, &good.mass));
                let opts = CatalogOptions { swap_pairing: true, ..Default::default() };
                let bad = catalog(&fam, t0, branch, &opts).unwrap();
                assert!(!theorem22_check(&bad.operator, t0, &bad.mass));
            }
        }
    }

    #[test]
    fn jacobi_excluded_point() {
        let fam = Family::Jacobi { alpha: 0.0, beta: 0.0, k: 0.5 };
        assert_eq!(
            catalog(&fam, -3.0, Branch::Plus, &CatalogOptions::default()).unwrap_err(),
            Error::ExcludedPoint { t0: -3.0 }
        );
    }

    #[test]
    fn jacobi_limit_rule_at_one() {
        let fam = Family::Jacobi { alpha: 0.0, beta: 0.0, k: 0.5 };
        assert_eq!(phi_jacobi(1.0, Branch::Minus).unwrap(), 0.0);
        let printed = catalog(&fam, 1.0, Branch::Minus, &CatalogOptions::default()).unwrap();
        let cont = catalog(
            &fam,
            1.0,
            Branch::Minus,
            &CatalogOptions { limit_rule: LimitRule::Continuous, ..Default::default() },
        )
        .unwrap();
        // r enters F₂¹ at (0,0) as 3t₀ − 3 + r.
        assert_eq!(printed.operator.coeff_matrix(2, 1)[(0, 0)], 1.0);
        assert_eq!(cont.operator.coeff_matrix(2, 1)[(0, 0)], 2.0);
        assert!(mass_conditions(&cont.operator, 1.0, &cont.mass, 1e-12).unwrap().verdict);
    }

    #[test]
    fn arbitrary_size_two_matches_display() {
        let (a, alpha) = (0.9, 0.4);
        let e = catalog(
            &Family::ArbitrarySize { alpha, nu: vec![a] },
            0.0,
            Branch::Plus,
            &CatalogOptions::default(),
        )
        .unwrap();
        let f2 = e.operator.coefficient(2);
        for t in [0.3, 1.0, 2.5] {
            assert!((f2.eval(t) - m2(0.0, -a * t * t, 0.0, -t)).amax() < 1e-14);
        }
        let f1 = e.operator.coefficient(1);
        for t in [0.3, 1.0] {
            let expect = m2(t, -(1.0 + a * a * (alpha + 3.0)) * t / a, 1.0 / a, -(alpha + 1.0));
            assert!((f1.eval(t) - expect).amax() < 1e-14);
        }
        let c = a * (alpha + 1.0);
        assert!((&e.mass - m2(c * c, c, c, 1.0)).amax() < 1e-14);
    }

    #[test]
    fn arbitrary_size_is_combination_of_d1_d2() {
        let nu = crate::weights::nu_chain_solve(4, 1.5).unwrap();
        let alpha = 0.3;
        let (d1, d2) = arbitrary_size_operators(alpha, &nu).unwrap();
        let combo = d1.scale(-3.0).add(&d2).unwrap();
        let e = catalog(
            &Family::ArbitrarySize { alpha, nu },
            0.0,
            Branch::Plus,
            &CatalogOptions::default(),
        )
        .unwrap();
        let diff = combo.add(&e.operator.scale(-1.0)).unwrap();
        for i in 0..=2 {
            assert!(diff.coefficient(i).max_abs_coeff() < 1e-12, "F_{i}");
        }
    }
}
