//! Dense real-matrix primitives: PSD tests, Sylvester solves, numerical
//! nullspaces.
//!
//! Scalars are real `f64`. The conjugate transpose is spelled [`adjoint`] so
//! callers read the same way they would for complex data.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Default relative separation between `eig(A)` and `eig(-B)` for
/// [`solve_sylvester`].
pub const DEFAULT_SPECTRUM_SEPARATION: f64 = 1e-8;

/// Conjugate transpose. Real scalars, so this is the transpose.
pub fn adjoint(m: &Matrix) -> Matrix {
    m.transpose()
}

/// Frobenius norm.
pub fn norm(m: &Matrix) -> f64 {
    m.norm()
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// `‖diff‖ / scale`, or `‖diff‖` itself when `scale` is zero (in which case
/// the difference is normally zero too).
pub fn relative(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

pub fn ensure_square(m: &Matrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// Options for [`solve_sylvester_with`].
#[derive(Debug, Clone, Copy)]
pub struct SylvesterOptions {
    /// Spectra of `A` and `-B` must be at least `separation * ρ` apart, with
    /// `ρ` the larger spectral radius of the two.
    pub separation: f64,
}

impl Default for SylvesterOptions {
    fn default() -> Self {
        Self {
            separation: DEFAULT_SPECTRUM_SEPARATION,
        }
    }
}

/// Solves `A·X + X·B = C` for square matrices of a common size.
pub fn solve_sylvester(a: &Matrix, b: &Matrix, c: &Matrix) -> Result<Matrix> {
    solve_sylvester_with(a, b, c, SylvesterOptions::default())
}

pub fn solve_sylvester_with(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    opts: SylvesterOptions,
) -> Result<Matrix> {
    let n = ensure_square(a, "A")?;
    if b.shape() != (n, n) || c.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "Sylvester operands must all be {n}x{n}"
        )));
    }

    let (distance, radius) = spectral_gap(a, b);
    let tolerance = opts.separation * radius;
    if distance <= tolerance {
        return Err(Error::SharedSpectrum {
            order: None,
            distance,
            tolerance,
        });
    }

    // Column-major vec: vec(AX + XB) = (I ⊗ A + Bᵀ ⊗ I) vec(X).
    let dim = n * n;
    let mut k = Matrix::zeros(dim, dim);
    for j in 0..n {
        for i in 0..n {
            let row = j * n + i;
            for p in 0..n {
                k[(row, j * n + p)] += a[(i, p)];
                k[(row, p * n + i)] += b[(p, j)];
            }
        }
    }
    let rhs = Vector::from_iterator(dim, c.iter().copied());
    let x = k.lu().solve(&rhs).ok_or(Error::SharedSpectrum {
        order: None,
        distance,
        tolerance,
    })?;
    Ok(Matrix::from_column_slice(n, n, x.as_slice()))
}

/// Minimum distance between `eig(a)` and `eig(-b)`, and the larger spectral
/// radius of the two.
pub fn spectral_gap(a: &Matrix, b: &Matrix) -> (f64, f64) {
    let ea = a.clone().complex_eigenvalues();
    let eb = b.clone().complex_eigenvalues();
    let radius = ea
        .iter()
        .chain(eb.iter())
        .fold(0.0_f64, |acc, z| acc.max(z.norm()));
    let mut distance = f64::INFINITY;
    for za in ea.iter() {
        for zb in eb.iter() {
            distance = distance.min((za + zb).norm());
        }
    }
    (distance, radius)
}

/// Orthonormal basis of `ker(m)` from right singular vectors whose singular
/// value is at most `rel_tol · σ_max`. A zero matrix yields the full
/// standard basis.
pub fn nullspace(m: &Matrix, rel_tol: f64) -> Vec<Vector> {
    let (sv, vt) = full_svd(m);
    let cols = m.ncols();
    let smax = sv.iter().fold(0.0_f64, |acc, &s| acc.max(s));
    if smax == 0.0 {
        return standard_basis(cols);
    }
    let cutoff = rel_tol * smax;
    collect_null(&sv, &vt, cutoff)
}

/// Orthonormal basis of `∩ⱼ ker(Mⱼ)`.
///
/// Each nonzero block is scaled to unit Frobenius norm before stacking, and
/// singular values `≤ tol` of the stacked matrix count as zero. Every
/// returned `v` therefore satisfies `‖Mⱼ v‖ ≤ tol · ‖Mⱼ‖` for all `j`.
pub fn common_nullspace(ms: &[Matrix], tol: f64) -> Result<Vec<Vector>> {
    let Some(first) = ms.first() else {
        return Err(Error::DimensionMismatch("no matrices given".into()));
    };
    let cols = first.ncols();
    if ms.iter().any(|m| m.ncols() != cols) {
        return Err(Error::DimensionMismatch(
            "all matrices need the same column count".into(),
        ));
    }
    let blocks: Vec<Matrix> = ms
        .iter()
        .filter(|m| norm(m) > 0.0)
        .map(|m| m / norm(m))
        .collect();
    if blocks.is_empty() {
        return Ok(standard_basis(cols));
    }
    let rows: usize = blocks.iter().map(|m| m.nrows()).sum();
    let mut stacked = Matrix::zeros(rows, cols);
    let mut r0 = 0;
    for b in &blocks {
        stacked.view_mut((r0, 0), b.shape()).copy_from(b);
        r0 += b.nrows();
    }
    let (sv, vt) = full_svd(&stacked);
    Ok(collect_null(&sv, &vt, tol))
}

fn standard_basis(n: usize) -> Vec<Vector> {
    (0..n)
        .map(|i| {
            let mut v = Vector::zeros(n);
            v[i] = 1.0;
            v
        })
        .collect()
}

/// Singular values (padded with zeros to `ncols`) and the full `ncols × ncols`
/// right factor `Vᵀ`.
fn full_svd(m: &Matrix) -> (Vec<f64>, Matrix) {
    let cols = m.ncols();
    let padded = if m.nrows() < cols {
        let mut p = Matrix::zeros(cols, cols);
        p.view_mut((0, 0), m.shape()).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let vt = svd.v_t.expect("v_t requested");
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.resize(cols, 0.0);
    (sv, vt)
}

fn collect_null(sv: &[f64], vt: &Matrix, cutoff: f64) -> Vec<Vector> {
    let mut idx: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= cutoff).collect();
    // Smallest singular values first so the order is reproducible.
    idx.sort_by(|&i, &j| sv[i].total_cmp(&sv[j]));
    idx.into_iter().map(|i| vt.row(i).transpose()).collect()
}

/// Singular values in descending order.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let mut sv: Vec<f64> = SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// 2-norm condition number; infinite for singular input.
pub fn condition_number(m: &Matrix) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// True iff `m` is symmetric within `tol · ‖m‖` and its smallest eigenvalue is
/// at least `-tol · ‖m‖`.
pub fn psd_check(m: &Matrix, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let scale = norm(m);
    if scale == 0.0 {
        return true;
    }
    if norm(&(m - m.transpose())) > tol * scale {
        return false;
    }
    min_symmetric_eigenvalue(m) >= -tol * scale
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_symmetric_eigenvalue(m: &Matrix) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |acc, &x| acc.min(x))
}

/// `(m + mᵀ)/2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Row-major nested rows, for reports.
pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| m.row(r).iter().copied().collect())
        .collect()
}

/// Serializes a matrix as row-major nested arrays.
pub fn serialize_matrix<S: serde::Serializer>(m: &Matrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize;
    to_rows(m).serialize(s)
}

/// Serializes a list of matrices as a list of row-major nested arrays.
pub fn serialize_matrices<S: serde::Serializer>(ms: &[Matrix], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize;
    ms.iter().map(to_rows).collect::<Vec<_>>().serialize(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn sylvester_identity_halves_rhs() {
        let i2 = Matrix::identity(2, 2);
        let c = Matrix::from_row_slice(2, 2, &[1.0, -2.0, 3.5, 4.0]);
        let x = solve_sylvester(&i2, &i2, &c).unwrap();
        assert!((x - &c / 2.0).norm() < 1e-15);
    }

    #[test]
    fn sylvester_diagonal_decouples() {
        let a = Matrix::from_diagonal(&Vector::from_vec(vec![2.0, 3.0]));
        let b = Matrix::from_diagonal(&Vector::from_vec(vec![4.0, 5.0]));
        let c = Matrix::from_element(2, 2, 1.0);
        let x = solve_sylvester(&a, &b, &c).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(x[(i, j)], 1.0 / (a[(i, i)] + b[(j, j)]), 1e-15));
            }
        }
    }

    #[test]
    fn sylvester_rejects_shared_spectrum() {
        let a = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 2.0]));
        let b = Matrix::from_diagonal(&Vector::from_vec(vec![-2.0, 7.0]));
        let err = solve_sylvester(&a, &b, &Matrix::identity(2, 2)).unwrap_err();
        assert!(matches!(err, Error::SharedSpectrum { .. }));
        let z = Matrix::zeros(2, 2);
        assert!(matches!(
            solve_sylvester(&z, &z, &z),
            Err(Error::SharedSpectrum { .. })
        ));
    }

    #[test]
    fn sylvester_rejects_bad_shapes() {
        let a = Matrix::identity(2, 2);
        let b = Matrix::identity(3, 3);
        assert!(matches!(
            solve_sylvester(&a, &b, &a),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn nullspace_of_zero_and_identity() {
        let z = common_nullspace(&[Matrix::zeros(3, 3)], 1e-12).unwrap();
        assert_eq!(z.len(), 3);
        assert!(common_nullspace(&[Matrix::identity(3, 3)], 1e-12)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn nullspace_wide_matrix_keeps_all_directions() {
        // 1x3 row: kernel is 2-dimensional.
        let m = Matrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = nullspace(&m, 1e-12);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((&m * v).norm() < 1e-14);
        }
    }

    #[test]
    fn common_nullspace_intersects() {
        let m1 = Matrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let m2 = Matrix::from_row_slice(1, 3, &[0.0, 1e6, 0.0]);
        let ns = common_nullspace(&[m1, m2], 1e-12).unwrap();
        assert_eq!(ns.len(), 1);
        assert!((ns[0][2].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn psd_examples() {
        assert!(psd_check(&Matrix::from_element(2, 2, 1.0), 1e-12));
        assert!(!psd_check(
            &Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]),
            1e-12
        ));
        assert!(psd_check(&Matrix::zeros(2, 2), 1e-12));
        assert!(!psd_check(
            &Matrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]),
            1e-12
        ));
        assert!(!psd_check(&Matrix::zeros(2, 3), 1e-12));
    }

    #[test]
    fn condition_number_of_diagonal() {
        let m = Matrix::from_diagonal(&Vector::from_vec(vec![4.0, 0.5]));
        assert!(close(condition_number(&m), 8.0, 1e-14));
        assert!(condition_number(&Matrix::zeros(2, 2)).is_infinite());
    }
}
