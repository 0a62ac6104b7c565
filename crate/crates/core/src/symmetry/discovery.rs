//! Numerical discovery: all symmetric operators of a given order for a
//! weight, and masses satisfying the mass-point conditions.

use nalgebra::SVD;

use crate::diffop::DiffOperator;
use crate::error::{Error, Result};
use crate::numkernel::{common_nullspace, max_abs, nullspace, Matrix, Vector};
use crate::orthopoly::monic_sequence;
use crate::symmetry::moment_equation_term;
use crate::weights::{MomentSequence, WeightMatrix};

/// Options for [`find_operator_basis_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisOptions {
    /// Largest `n` of the moment equations used. `None` picks
    /// `min(2(k+1)N² + k, 40)`.
    pub n_max: Option<usize>,
    /// Singular values at most `rel_tol · σ_max` count as zero.
    pub rel_tol: f64,
}

impl Default for BasisOptions {
    fn default() -> Self {
        Self {
            n_max: None,
            rel_tol: 1e-9,
        }
    }
}

pub fn default_basis_n_max(size: usize, order: usize) -> usize {
    (2 * (order + 1) * size * size + order).min(40)
}

/// Stacked moment equations as a real linear system in the coefficient
/// vector of the operator. Each `(l, n)` block is scaled by its largest
/// entry. Returns the system and the row count contributed by each `n`.
fn moment_system(mu: &MomentSequence, size: usize, order: usize, n_max: usize) -> Result<(Matrix, Vec<usize>)> {
    let unknowns = DiffOperator::unknown_count(size, order);
    let mut columns: Vec<Vec<Vec<f64>>> = Vec::with_capacity(unknowns);
    for u in 0..unknowns {
        let mut e = vec![0.0; unknowns];
        e[u] = 1.0;
        let d = DiffOperator::from_coefficient_vector(size, order, &e)?;
        let mut blocks = Vec::new();
        for n in 0..=n_max {
            for l in 0..=order.min(n) {
                let t = moment_equation_term(&d, mu, l, n)?;
                blocks.push(t.difference.iter().copied().collect::<Vec<f64>>());
            }
        }
        columns.push(blocks);
    }
    let nblocks = columns[0].len();
    let bsize = size * size;
    let mut sys = Matrix::zeros(nblocks * bsize, unknowns);
    for b in 0..nblocks {
        let scale = columns
            .iter()
            .flat_map(|c| c[b].iter())
            .fold(0.0_f64, |m, x| m.max(x.abs()));
        let s = if scale > 0.0 { 1.0 / scale } else { 1.0 };
        for (u, col) in columns.iter().enumerate() {
            for (r, x) in col[b].iter().enumerate() {
                sys[(b * bsize + r, u)] = x * s;
            }
        }
    }
    let rows_per_n = (0..=n_max).map(|n| (order.min(n) + 1) * bsize).collect();
    Ok((sys, rows_per_n))
}

/// Orthonormal basis (in coefficient space) of the order-`≤ k` operators
/// symmetric for `w`, at default options.
pub fn find_operator_basis(w: &WeightMatrix, order: usize) -> Result<Vec<DiffOperator>> {
    find_operator_basis_with(w, order, &BasisOptions::default())
}

/// Numerical nullspace of the stacked moment equations. Fails with
/// [`Error::RankInstability`] when dropping the equations of the largest `n`
/// changes the dimension.
pub fn find_operator_basis_with(w: &WeightMatrix, order: usize, opts: &BasisOptions) -> Result<Vec<DiffOperator>> {
    let size = w.size();
    let n_max = opts.n_max.unwrap_or_else(|| default_basis_n_max(size, order));
    if n_max < order + 1 {
        return Err(Error::InvalidParameter(format!("n_max = {n_max} is too small for order {order}")));
    }
    let mu = w.moments(n_max)?;
    let (sys, rows_per_n) = moment_system(&mu, size, order, n_max)?;
    let full = nullspace(&sys, opts.rel_tol);
    let last = *rows_per_n.last().expect("n_max >= 1");
    let head = sys.rows(0, sys.nrows() - last).into_owned();
    let reduced = nullspace(&head, opts.rel_tol);
    if reduced.len() != full.len() {
        return Err(Error::RankInstability {
            with_last: full.len(),
            without_last: reduced.len(),
        });
    }
    full.iter()
        .map(|v| DiffOperator::from_coefficient_vector(size, order, v.as_slice()))
        .collect()
}

/// Basis of the order-`≤ k` operators having the monic orthogonal
/// polynomials `P₀ … P_{n_max}` of `w` as eigenfunctions. Contains the
/// symmetric operators and may be strictly larger.
pub fn find_eigen_operator_basis(w: &WeightMatrix, order: usize, n_max: usize) -> Result<Vec<DiffOperator>> {
    let size = w.size();
    let seq = monic_sequence(w, n_max)?;
    let unknowns = DiffOperator::unknown_count(size, order);
    let block = size * size;
    let rows: usize = (0..=n_max).map(|n| (n + 1) * block).sum();
    let mut sys = Matrix::zeros(rows, unknowns);
    for u in 0..unknowns {
        let mut e = vec![0.0; unknowns];
        e[u] = 1.0;
        let d = DiffOperator::from_coefficient_vector(size, order, &e)?;
        let mut r0 = 0;
        for (n, p) in seq.polys.iter().enumerate() {
            let defect = d.right_apply(p)?.sub(&p.left_mul(&d.eigenvalue(n))?)?;
            let scale = p.max_abs_coeff();
            for j in 0..=n {
                for (r, x) in defect.coeff(j).iter().enumerate() {
                    sys[(r0 + j * block + r, u)] = x / scale;
                }
            }
            r0 += (n + 1) * block;
        }
    }
    nullspace(&sys, BasisOptions::default().rel_tol)
        .iter()
        .map(|v| DiffOperator::from_coefficient_vector(size, order, v.as_slice()))
        .collect()
}

/// A mass `M = v vᵀ` together with its unit direction and the residual of
/// `F₀ v = λ v` inside the common kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct MassCandidate {
    pub direction: Vector,
    pub mass: Matrix,
    pub eigenvalue: f64,
    pub residual: f64,
}

const MASS_TOL: f64 = 1e-9;

/// Mass `M` (unit trace) with `Fⱼ(t₀)M = 0` for `j ≥ 1` and `F₀M = MF₀ᵀ`,
/// if one exists.
pub fn find_mass(d: &DiffOperator, t0: f64) -> Option<Matrix> {
    find_mass_detailed(d, t0, MASS_TOL).map(|c| c.mass)
}

/// Like [`find_mass`], exposing the direction and residual.
///
/// `F₀ vvᵀ = vvᵀ F₀ᵀ` holds exactly when `v` is an eigenvector of `F₀`, so
/// the search runs over real eigenvalues `λ` of `F₀` and looks for `v` in
/// the common kernel of `F₁(t₀) … F_k(t₀)` and `F₀ − λI`.
pub fn find_mass_detailed(d: &DiffOperator, t0: f64, tol: f64) -> Option<MassCandidate> {
    let n = d.size();
    let mut ms: Vec<Matrix> = (1..=d.order()).map(|j| d.eval_coefficient(j, t0)).collect();
    if ms.is_empty() {
        ms.push(Matrix::zeros(n, n));
    }
    let basis = common_nullspace(&ms, tol).ok()?;
    if basis.is_empty() {
        return None;
    }
    let vb = Matrix::from_columns(&basis);
    let f0 = d.eval_coefficient(0, t0);
    let f0_scale = max_abs(&f0).max(1.0);
    let mut best: Option<MassCandidate> = None;
    for lambda in real_eigenvalues(&f0, tol) {
        let shifted = (&f0 - Matrix::identity(n, n) * lambda) * &vb;
        let (_, c) = smallest_singular(&shifted);
        let mut v = &vb * c;
        let vn = v.norm();
        if vn == 0.0 {
            continue;
        }
        v /= vn;
        let residual = (&f0 * &v - &v * lambda).norm() / f0_scale;
        if residual > tol.sqrt().min(1e-6) {
            continue;
        }
        if best.as_ref().is_none_or(|b| residual < b.residual) {
            let v = canonical_sign(v);
            let mass = &v * v.transpose();
            best = Some(MassCandidate {
                direction: v,
                mass,
                eigenvalue: lambda,
                residual,
            });
        }
    }
    best
}

/// Flips `v` so its largest-magnitude entry is positive.
fn canonical_sign(v: Vector) -> Vector {
    let (idx, _) = v
        .iter()
        .enumerate()
        .fold((0, -1.0), |acc, (i, &x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
    if v[idx] < 0.0 {
        -v
    } else {
        v
    }
}

fn real_eigenvalues(m: &Matrix, tol: f64) -> Vec<f64> {
    let scale = max_abs(m).max(1.0);
    let ev = m.clone().complex_eigenvalues();
    let mut out: Vec<f64> = ev
        .iter()
        .filter(|z| z.im.abs() <= tol.sqrt() * scale)
        .map(|z| z.re)
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * scale);
    out
}

/// Removes the identity operator from `basis` and re-orthonormalizes.
fn without_identity(basis: &[DiffOperator]) -> Result<Vec<Vec<f64>>> {
    let Some(first) = basis.first() else {
        return Ok(Vec::new());
    };
    let size = first.size();
    let order = basis.iter().map(|d| d.order()).max().unwrap_or(0);
    let id = DiffOperator::identity(size).to_coefficient_vector(order);
    let idn = Vector::from_vec(id.clone()).normalize();
    let cols: Vec<Vector> = basis
        .iter()
        .map(|d| {
            let v = Vector::from_vec(d.to_coefficient_vector(order));
            let p = v.dot(&idn);
            v - &idn * p
        })
        .collect();
    let m = Matrix::from_columns(&cols);
    let svd = SVD::new(m, true, false);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &b| a.max(b));
    Ok(svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 1e-8 * smax.max(1.0))
        .map(|(i, _)| u.column(i).iter().copied().collect())
        .collect())
}

/// Linear system in the basis coefficients `c` for a fixed direction `v`:
/// rows `Fⱼ(t₀)v` (`j ≥ 1`) and `wᵀF₀v` for each `w ⟂ v`.
fn direction_system(ops: &[DiffOperator], t0: f64, v: &Vector) -> Matrix {
    let n = v.len();
    let order = ops.iter().map(|d| d.order()).max().unwrap_or(0);
    let perp = perpendicular_basis(v);
    let rows = order * n + perp.len();
    let mut g = Matrix::zeros(rows, ops.len());
    for (c, d) in ops.iter().enumerate() {
        let mut r = 0;
        for j in 1..=order {
            let fv = d.eval_coefficient(j, t0) * v;
            for x in fv.iter() {
                g[(r, c)] = *x;
                r += 1;
            }
        }
        let f0v = d.eval_coefficient(0, t0) * v;
        for w in &perp {
            g[(r, c)] = w.dot(&f0v);
            r += 1;
        }
    }
    g
}

fn perpendicular_basis(v: &Vector) -> Vec<Vector> {
    let n = v.len();
    let p = Matrix::identity(n, n) - v * v.transpose() / v.norm_squared();
    let svd = SVD::new(p, true, false);
    let u = svd.u.expect("u requested");
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0.5)
        .map(|(i, _)| u.column(i).into_owned())
        .collect()
}

/// Smallest singular value relative to the largest, and its right singular
/// vector.
fn smallest_singular(g: &Matrix) -> (f64, Vector) {
    let cols = g.ncols();
    let padded = if g.nrows() < cols {
        let mut p = Matrix::zeros(cols, cols);
        p.view_mut((0, 0), g.shape()).copy_from(g);
        p
    } else {
        g.clone()
    };
    let svd = SVD::new(padded, false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &b| a.max(b));
    let (idx, smin) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let rel = if smax > 0.0 { smin / smax } else { 0.0 };
    (rel, vt.row(idx).transpose())
}

const THETA_GRID: usize = 2048;
const PAIR_TOL: f64 = 1e-6;

fn unit_direction(theta: f64) -> Vector {
    Vector::from_vec(vec![theta.cos(), theta.sin()])
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo < 1e-15 {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    (lo + hi) / 2.0
}

/// Every `(D, M)` found from `basis` at `t₀`, best residual first. `D` is a
/// unit-norm combination of the basis with the identity direction removed;
/// `M = vvᵀ` has unit trace.
pub fn find_operator_mass_pairs(basis: &[DiffOperator], t0: f64) -> Result<Vec<(DiffOperator, Matrix, f64)>> {
    let Some(first) = basis.first() else {
        return Ok(Vec::new());
    };
    let size = first.size();
    let order = basis.iter().map(|d| d.order()).max().unwrap_or(0);
    let reduced = without_identity(basis)?;
    if reduced.is_empty() {
        return Ok(Vec::new());
    }
    let ops = reduced
        .iter()
        .map(|c| DiffOperator::from_coefficient_vector(size, order, c))
        .collect::<Result<Vec<_>>>()?;
    let build = |c: &Vector| DiffOperator::linear_combination(&ops, c.as_slice());
    let mut found = Vec::new();
    match size {
        1 => {
            let v = Vector::from_vec(vec![1.0]);
            let (res, c) = smallest_singular(&direction_system(&ops, t0, &v));
            if res <= PAIR_TOL {
                found.push((build(&c)?, Matrix::identity(1, 1), res));
            }
        }
        2 => {
            let sigma = |theta: f64| smallest_singular(&direction_system(&ops, t0, &unit_direction(theta))).0;
            let h = std::f64::consts::PI / THETA_GRID as f64;
            let vals: Vec<f64> = (0..THETA_GRID).map(|i| sigma(i as f64 * h)).collect();
            for i in 0..THETA_GRID {
                let prev = vals[(i + THETA_GRID - 1) % THETA_GRID];
                let next = vals[(i + 1) % THETA_GRID];
                if vals[i] <= prev && vals[i] < next {
                    let theta = golden_min(sigma, (i as f64 - 1.0) * h, (i as f64 + 1.0) * h);
                    let v = unit_direction(theta);
                    let (res, c) = smallest_singular(&direction_system(&ops, t0, &v));
                    if res <= PAIR_TOL {
                        found.push((build(&c)?, &v * v.transpose(), res));
                    }
                }
            }
        }
        _ => {
            for start in 0..size {
                if let Some(pair) = alternate(&ops, t0, start)? {
                    found.push(pair);
                }
            }
        }
    }
    found.sort_by(|a, b| a.2.total_cmp(&b.2));
    Ok(found)
}

/// Alternating heuristic for `N > 2`: solve for `c` given `v`, then refresh
/// `v` as the best mass direction of the resulting operator.
fn alternate(ops: &[DiffOperator], t0: f64, start: usize) -> Result<Option<(DiffOperator, Matrix, f64)>> {
    let n = ops[0].size();
    let mut v = Vector::from_fn(n, |i, _| if i == start { 1.0 } else { 0.1 });
    v /= v.norm();
    for _ in 0..50 {
        let (res, c) = smallest_singular(&direction_system(ops, t0, &v));
        let d = DiffOperator::linear_combination(ops, c.as_slice())?;
        if res <= PAIR_TOL {
            return Ok(Some((d, &v * v.transpose(), res)));
        }
        let mut stacked: Vec<Matrix> = (1..=d.order()).map(|j| d.eval_coefficient(j, t0)).collect();
        let f0 = d.eval_coefficient(0, t0);
        let lambda = (v.transpose() * &f0 * &v)[(0, 0)];
        stacked.push(f0 - Matrix::identity(n, n) * lambda);
        let rows: usize = stacked.iter().map(|m| m.nrows()).sum();
        let mut s = Matrix::zeros(rows, n);
        let mut r0 = 0;
        for m in &stacked {
            s.view_mut((r0, 0), m.shape()).copy_from(m);
            r0 += m.nrows();
        }
        v = smallest_singular(&s).1;
    }
    Ok(None)
}

/// Best `(D, M)` pair from `basis` at `t₀`, or `None`.
pub fn find_operator_and_mass(basis: &[DiffOperator], t0: f64) -> Result<Option<(DiffOperator, Matrix)>> {
    Ok(find_operator_mass_pairs(basis, t0)?
        .into_iter()
        .next()
        .map(|(d, m, _)| (d, m)))
}
