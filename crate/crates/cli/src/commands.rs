use anyhow::Result;
use matorth::cone::{cone_reconstruct, fourier_check, moment_recursion_report, FourierParams};
use matorth::numkernel::{serialize_matrix, to_rows, Matrix};
use matorth::orthopoly::{monic_sequence, orthogonality_defect, recurrence_coeffs, verify_eigen_with};
use matorth::symmetry::{
    boundary_limit_check, catalog, find_eigen_operator_basis, find_mass_detailed, find_operator_basis_with,
    mass_conditions, moment_equation_residual_with, BasisOptions, CatalogEntry, CatalogOptions, DEFAULT_APPROACH,
};
use matorth::{DiffOperator, Family, WeightMatrix};
use serde::Serialize;

use crate::args::{Format, OutputArgs, RunConfig, Setup, UsageError};
use crate::report::{csv_header, csv_row, emit, number, to_json, Envelope};

pub struct Resolved {
    pub family: Family,
    pub entry: CatalogEntry,
    /// `γW + ζδ_{t0}M`.
    pub weight: WeightMatrix,
    /// `W` alone.
    pub base: WeightMatrix,
}

pub fn resolve(setup: &Setup) -> matorth::Result<Resolved> {
    let family = setup.family()?;
    let opts = CatalogOptions {
        limit_rule: setup.limit_rule.into(),
        ..Default::default()
    };
    let entry = catalog(&family, setup.t0, setup.branch.into(), &opts)?;
    let base = family.weight()?;
    let weight = base.with_atom(setup.t0, entry.mass.clone(), setup.gamma, setup.zeta)?;
    Ok(Resolved {
        family,
        entry,
        weight,
        base,
    })
}

/// Emits a report and returns its verdict.
struct Out<'a> {
    command: &'a str,
    args: &'a OutputArgs,
    config: RunConfig,
}

impl<'a> Out<'a> {
    fn new(command: &'a str, args: &'a OutputArgs, setup: Option<(&Setup, &Family)>, default_format: Format) -> Self {
        let format = args.format.unwrap_or(default_format);
        Self {
            command,
            args,
            config: RunConfig::new(setup, args, format),
        }
    }

    fn json<T: Serialize>(&self, verdict: bool, result: T) -> Result<bool> {
        let env = Envelope {
            command: self.command,
            config: &self.config,
            verdict,
            result,
        };
        emit(self.args.out.as_deref(), &to_json(&env)?)?;
        Ok(verdict)
    }

    /// CSV body; when written to a file the envelope without the data goes
    /// to `<file>.config.json`.
    fn csv(&self, verdict: bool, text: String) -> Result<bool> {
        emit(self.args.out.as_deref(), &text)?;
        if let Some(p) = &self.args.out {
            let mut side = p.clone().into_os_string();
            side.push(".config.json");
            let env = Envelope {
                command: self.command,
                config: &self.config,
                verdict,
                result: (),
            };
            emit(Some(std::path::Path::new(&side)), &to_json(&env)?)?;
        }
        Ok(verdict)
    }

    fn format(&self) -> Format {
        self.config.format
    }
}

fn unsupported_csv(command: &str) -> anyhow::Error {
    UsageError(format!("{command} has no CSV output")).into()
}

#[derive(Serialize)]
struct FamilyInfo {
    id: &'static str,
    weight: &'static str,
    parameters: &'static str,
    atoms: &'static str,
}

pub fn families(args: &OutputArgs) -> Result<bool> {
    let out = Out::new("families", args, None, Format::Json);
    if out.format() == Format::Csv {
        return Err(unsupported_csv("families"));
    }
    let list = vec![
        FamilyInfo {
            id: "hermite31",
            weight: "e^{-t^2} [[1 + a^2 t^2, a t], [a t, 1]] on R",
            parameters: "--a (nonzero, default 1)",
            atoms: "any t0; mass from the root xi(a, t0)",
        },
        FamilyInfo {
            id: "laguerre32",
            weight: "t^alpha e^{-t} [[t^2 + a^2 (t-1)^2, a (t-1)], [a (t-1), 1]] on (0, inf)",
            parameters: "--a (nonzero, default 1), --alpha (> -1, default 0)",
            atoms: "any t0; mass from the root phi(a, alpha, t0)",
        },
        FamilyInfo {
            id: "jacobi33",
            weight: "t^alpha (1-t)^beta [[k t^2 + c, c (1-t)], [c (1-t), c (1-t)^2]], c = beta - k + 1, on (0, 1)",
            parameters: "--alpha, --beta (> -1, default 0), --k (in (0, beta + 1), default 0.5)",
            atoms: "operator only for alpha = beta = 0, k = 1/2; t0 != -3; --limit-rule at t0 = 1",
        },
        FamilyInfo {
            id: "general34",
            weight: "t^alpha e^{-t} e^{At} t^J e^{A^T t} of size N on (0, inf)",
            parameters: "--size N (>= 2, default 2), --alpha (> -1, default 0), --nu (nonzero, default 1)",
            atoms: "t0 = 0 only; mass v v^T",
        },
    ];
    out.json(true, list)
}

#[derive(Serialize)]
struct SymmetryResult {
    symmetry: matorth::symmetry::SymmetryReport,
    mass_conditions: matorth::symmetry::MassConditionReport,
    boundary: Option<matorth::symmetry::BoundaryReport>,
}

pub fn check_symmetry(setup: &Setup, nmax: usize, args: &OutputArgs) -> Result<bool> {
    let r = resolve(setup)?;
    let tol = args.tolerance(matorth::symmetry::DEFAULT_TOLERANCE)?;
    let mut out = Out::new("check-symmetry", args, Some((setup, &r.family)), Format::Json);
    out.config.n_max = Some(nmax);
    out.config.tolerance = Some(tol);
    let d = &r.entry.operator;
    let symmetry = moment_equation_residual_with(&r.weight, d, nmax, tol)?;
    let mass = mass_conditions(d, setup.t0, &r.entry.mass, tol)?;
    let verdict = symmetry.verdict;
    match out.format() {
        Format::Json => {
            let boundary = Some(boundary_limit_check(&r.base, d, &DEFAULT_APPROACH)?);
            out.json(
                verdict,
                SymmetryResult {
                    symmetry,
                    mass_conditions: mass,
                    boundary,
                },
            )
        }
        Format::Csv => {
            let mut text = String::from("l,n,residual\n");
            for e in &symmetry.entries {
                text.push_str(&format!("{},{},{}\n", e.l, e.n, number(e.residual)));
            }
            out.csv(verdict, text)
        }
    }
}

#[derive(Serialize)]
struct Poly {
    degree: usize,
    /// Coefficients, lowest degree first.
    coefficients: Vec<Vec<Vec<f64>>>,
    #[serde(serialize_with = "serialize_matrix")]
    norm: Matrix,
}

#[derive(Serialize)]
struct OrthoResult {
    polynomials: Vec<Poly>,
    recurrence: Vec<matorth::orthopoly::RecurrenceStep>,
    orthogonality_defect: f64,
}

pub fn orthopoly(setup: &Setup, n: usize, args: &OutputArgs) -> Result<bool> {
    let r = resolve(setup)?;
    let tol = args.tolerance(1e-9)?;
    let mut out = Out::new("orthopoly", args, Some((setup, &r.family)), Format::Json);
    out.config.n_max = Some(n);
    out.config.tolerance = Some(tol);
    if out.format() == Format::Csv {
        return Err(unsupported_csv("orthopoly"));
    }
    let s = monic_sequence(&r.weight, n)?;
    let defect = orthogonality_defect(&s)?;
    let polynomials = s
        .polys
        .iter()
        .zip(&s.norms)
        .enumerate()
        .map(|(degree, (p, norm))| Poly {
            degree,
            coefficients: (0..=degree).map(|j| to_rows(&p.coeff(j))).collect(),
            norm: norm.clone(),
        })
        .collect();
    out.json(
        defect <= tol,
        OrthoResult {
            polynomials,
            recurrence: recurrence_coeffs(&s)?,
            orthogonality_defect: defect,
        },
    )
}

pub fn verify_eigen(setup: &Setup, n: usize, args: &OutputArgs) -> Result<bool> {
    let r = resolve(setup)?;
    let tol = args.tolerance(matorth::orthopoly::DEFAULT_EIGEN_TOLERANCE)?;
    let mut out = Out::new("verify-eigen", args, Some((setup, &r.family)), Format::Json);
    out.config.n_max = Some(n);
    out.config.tolerance = Some(tol);
    let s = monic_sequence(&r.weight, n)?;
    let report = verify_eigen_with(&s, &r.entry.operator, tol)?;
    match out.format() {
        Format::Json => out.json(report.verdict, report),
        Format::Csv => {
            let mut text = String::from("n,residual\n");
            for e in &report.entries {
                text.push_str(&format!("{},{}\n", e.n, number(e.residual)));
            }
            out.csv(report.verdict, text)
        }
    }
}

#[derive(Serialize)]
struct OperatorJson {
    /// `coefficients[i][j]` is the `t^j` coefficient of `F_i`.
    coefficients: Vec<Vec<Vec<Vec<f64>>>>,
}

impl From<&DiffOperator> for OperatorJson {
    fn from(d: &DiffOperator) -> Self {
        Self {
            coefficients: (0..=d.order())
                .map(|i| (0..=i).map(|j| to_rows(&d.coeff_matrix(i, j))).collect())
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct BasisResult {
    order: usize,
    dimension: usize,
    eigenfunction_dimension: usize,
    basis: Vec<OperatorJson>,
}

pub fn find_basis(setup: &Setup, order: usize, nmax: Option<usize>, args: &OutputArgs) -> Result<bool> {
    let r = resolve(setup)?;
    let tol = args.tolerance(BasisOptions::default().rel_tol)?;
    let mut out = Out::new("find-basis", args, Some((setup, &r.family)), Format::Json);
    out.config.n_max = nmax;
    out.config.tolerance = Some(tol);
    if out.format() == Format::Csv {
        return Err(unsupported_csv("find-basis"));
    }
    let basis = find_operator_basis_with(&r.weight, order, &BasisOptions { n_max: nmax, rel_tol: tol })?;
    let eig = find_eigen_operator_basis(&r.weight, order, 12)?;
    out.json(
        true,
        BasisResult {
            order,
            dimension: basis.len(),
            eigenfunction_dimension: eig.len(),
            basis: basis.iter().map(OperatorJson::from).collect(),
        },
    )
}

#[derive(Serialize)]
struct MassResult {
    found: bool,
    direction: Option<Vec<f64>>,
    #[serde(serialize_with = "serialize_opt")]
    mass: Option<Matrix>,
    #[serde(serialize_with = "serialize_matrix")]
    expected_mass: Matrix,
    deviation: Option<f64>,
    eigenvalue: Option<f64>,
    residual: Option<f64>,
}

fn serialize_opt<S: serde::Serializer>(m: &Option<Matrix>, s: S) -> Result<S::Ok, S::Error> {
    m.as_ref().map(to_rows).serialize(s)
}

pub fn find_mass(setup: &Setup, args: &OutputArgs) -> Result<bool> {
    let r = resolve(setup)?;
    let tol = args.tolerance(1e-8)?;
    let mut out = Out::new("find-mass", args, Some((setup, &r.family)), Format::Json);
    out.config.tolerance = Some(tol);
    if out.format() == Format::Csv {
        return Err(unsupported_csv("find-mass"));
    }
    let expected = &r.entry.mass / r.entry.mass.trace();
    let found = find_mass_detailed(&r.entry.operator, setup.t0, 1e-9);
    let deviation = found.as_ref().map(|c| (&c.mass - &expected).amax());
    let verdict = deviation.is_some_and(|d| d <= tol);
    out.json(
        verdict,
        MassResult {
            found: found.is_some(),
            direction: found.as_ref().map(|c| c.direction.iter().copied().collect()),
            mass: found.as_ref().map(|c| c.mass.clone()),
            expected_mass: expected,
            deviation,
            eigenvalue: found.as_ref().map(|c| c.eigenvalue),
            residual: found.as_ref().map(|c| c.residual),
        },
    )
}

#[derive(Serialize)]
struct ConeResult {
    decomposition: matorth::cone::ConeDecomposition,
    recursion: Vec<matorth::cone::RecursionStep>,
}

pub fn cone_reconstruct_cmd(setup: &Setup, nmax: usize, args: &OutputArgs) -> Result<bool> {
    let r = resolve(setup)?;
    let tol = args.tolerance(1e-8)?;
    let mut out = Out::new("cone-reconstruct", args, Some((setup, &r.family)), Format::Json);
    out.config.n_max = Some(nmax);
    out.config.tolerance = Some(tol);
    if out.format() == Format::Csv {
        return Err(unsupported_csv("cone-reconstruct"));
    }
    let mu0 = r.weight.moment(0)?;
    let (candidate, recursion) = moment_recursion_report(&r.entry.operator, &mu0, nmax)?;
    let dec = cone_reconstruct(&r.entry.operator, &candidate, &r.base, setup.t0, &r.entry.mass)?;
    let verdict = dec.is_weight && dec.match_residual <= tol;
    out.json(
        verdict,
        ConeResult {
            decomposition: dec,
            recursion,
        },
    )
}

#[derive(Serialize)]
struct MomentsResult {
    #[serde(serialize_with = "matorth::numkernel::serialize_matrices")]
    moments: Vec<Matrix>,
}

pub fn moments(setup: &Setup, nmax: usize, args: &OutputArgs) -> Result<bool> {
    let r = resolve(setup)?;
    let mut out = Out::new("moments", args, Some((setup, &r.family)), Format::Json);
    out.config.n_max = Some(nmax);
    let mu = r.weight.moments(nmax)?;
    match out.format() {
        Format::Json => out.json(
            true,
            MomentsResult {
                moments: mu.as_slice().to_vec(),
            },
        ),
        Format::Csv => {
            let mut text = csv_header("n", r.weight.size()) + "\n";
            for (n, m) in mu.as_slice().iter().enumerate() {
                text.push_str(&csv_row(n.to_string(), m));
                text.push('\n');
            }
            out.csv(true, text)
        }
    }
}

#[derive(Serialize)]
struct GridPoint {
    t: f64,
    #[serde(serialize_with = "serialize_matrix")]
    density: Matrix,
}

fn default_range(w: &WeightMatrix) -> (f64, f64) {
    let (lo, hi) = w
        .continuous()
        .first()
        .map(|c| c.density.kernel.support())
        .unwrap_or((-1.0, 1.0));
    let lo = if lo.is_finite() { lo } else { -4.0 };
    let hi = if hi.is_finite() { hi } else if lo >= 0.0 { 20.0 } else { 4.0 };
    (lo, hi)
}

pub fn density_grid(setup: &Setup, from: Option<f64>, to: Option<f64>, points: usize, args: &OutputArgs) -> Result<bool> {
    let r = resolve(setup)?;
    let out = Out::new("density-grid", args, Some((setup, &r.family)), Format::Csv);
    let (lo, hi) = default_range(&r.weight);
    let (lo, hi) = (from.unwrap_or(lo), to.unwrap_or(hi));
    if points < 2 || !(hi > lo) {
        return Err(UsageError(format!("need points >= 2 and to > from, got {points} points on [{lo}, {hi}]")).into());
    }
    let grid: Vec<GridPoint> = (0..points)
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            GridPoint {
                t,
                density: r.weight.density(t),
            }
        })
        .collect();
    match out.format() {
        Format::Json => out.json(true, grid),
        Format::Csv => {
            let mut text = csv_header("t", r.weight.size()) + "\n";
            for g in &grid {
                text.push_str(&csv_row(number(g.t), &g.density));
                text.push('\n');
            }
            out.csv(true, text)
        }
    }
}

#[derive(Serialize)]
struct ComplexJson {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl From<&matorth::cone::ComplexMatrix> for ComplexJson {
    fn from(m: &matorth::cone::ComplexMatrix) -> Self {
        Self {
            re: to_rows(&m.map(|z| z.re)),
            im: to_rows(&m.map(|z| z.im)),
        }
    }
}

#[derive(Serialize)]
struct FourierPoint {
    x: f64,
    closed_form: ComplexJson,
    series: ComplexJson,
    deviation: f64,
    growth: Vec<f64>,
    growth_peak: usize,
    decays_after_peak: bool,
}

pub fn fourier(setup: &Setup, xs: &[f64], terms: usize, args: &OutputArgs) -> Result<bool> {
    let r = resolve(setup)?;
    let Family::Hermite { a } = r.family else {
        return Err(UsageError("fourier-check needs --family hermite31".into()).into());
    };
    let tol = args.tolerance(1e-8)?;
    let mut out = Out::new("fourier-check", args, Some((setup, &r.family)), Format::Json);
    out.config.n_max = Some(terms.saturating_sub(1));
    out.config.tolerance = Some(tol);
    if out.format() == Format::Csv {
        return Err(unsupported_csv("fourier-check"));
    }
    let p = FourierParams {
        a,
        gamma: setup.gamma,
        zeta: setup.zeta,
        t0: setup.t0,
    };
    let mut points = Vec::with_capacity(xs.len());
    let mut verdict = true;
    for &x in xs {
        let c = fourier_check(&p, x, terms)?;
        // The growth hypothesis is only claimed for |x| <= 1.
        verdict &= c.deviation <= tol && (x.abs() > 1.0 || c.decays_after_peak);
        points.push(FourierPoint {
            x,
            closed_form: (&c.closed_form).into(),
            series: (&c.series).into(),
            deviation: c.deviation,
            growth: c.growth,
            growth_peak: c.growth_peak,
            decays_after_peak: c.decays_after_peak,
        });
    }
    out.json(verdict, points)
}
