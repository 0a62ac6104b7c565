use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use matorth::symmetry::{Branch, LimitRule};
use matorth::Family;
use serde::Serialize;

pub const TOL_ENV: &str = "MATORTH_TOL";

#[derive(Debug, Parser)]
#[command(name = "matorth", version)]
#[command(about = "Matrix orthogonal polynomials, symmetric operators and Dirac-mass weights")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the weight families and their parameters
    Families(OutputArgs),
    /// Moment-equation check of the catalog operator for γW + ζδ_{t0}M
    CheckSymmetry {
        #[command(flatten)]
        setup: Setup,
        #[arg(long, default_value_t = 30)]
        nmax: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monic orthogonal polynomials, their norms and recurrence coefficients
    Orthopoly {
        #[command(flatten)]
        setup: Setup,
        /// Highest degree.
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Check that the monic polynomials are eigenfunctions of the operator
    VerifyEigen {
        #[command(flatten)]
        setup: Setup,
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Basis of the symmetric operators of a given order
    FindBasis {
        #[command(flatten)]
        setup: Setup,
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Highest moment order used; defaults to twice the unknown count.
        #[arg(long)]
        nmax: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Recover the mass matrix of the catalog operator at t0
    FindMass {
        #[command(flatten)]
        setup: Setup,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Rebuild moments from μ0 and decompose them as γW + ζδ_{t0}M
    ConeReconstruct {
        #[command(flatten)]
        setup: Setup,
        #[arg(long, default_value_t = 20)]
        nmax: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Moments μ0 … μ_nmax of γW + ζδ_{t0}M
    Moments {
        #[command(flatten)]
        setup: Setup,
        #[arg(long, default_value_t = 10)]
        nmax: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Continuous density of γW on a uniform grid
    DensityGrid {
        #[command(flatten)]
        setup: Setup,
        #[arg(long, allow_negative_numbers = true)]
        from: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        to: Option<f64>,
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Fourier transform in closed form against the moment series (hermite31)
    FourierCheck {
        #[command(flatten)]
        setup: Setup,
        /// Evaluation points, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = [0.0, 0.25, 0.5, 1.0])]
        x: Vec<f64>,
        #[arg(long, default_value_t = 60)]
        terms: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum FamilyId {
    Hermite31,
    Laguerre32,
    Jacobi33,
    General34,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchArg {
    Plus,
    Minus,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Plus => Branch::Plus,
            BranchArg::Minus => Branch::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitArg {
    Printed,
    Continuous,
}

impl From<LimitArg> for LimitRule {
    fn from(l: LimitArg) -> Self {
        match l {
            LimitArg::Printed => LimitRule::Printed,
            LimitArg::Continuous => LimitRule::Continuous,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Family, atom and operator selection shared by the computing subcommands.
#[derive(Debug, Clone, Args)]
pub struct Setup {
    #[arg(long, value_enum)]
    pub family: FamilyId,
    /// Coupling `a` (hermite31, laguerre32). Default 1.
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Exponent α (laguerre32, jacobi33, general34). Default 0.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Exponent β (jacobi33). Default 0.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Parameter k (jacobi33). Default 0.5.
    #[arg(long)]
    pub k: Option<f64>,
    /// Matrix size N (general34). Default 2.
    #[arg(long)]
    pub size: Option<usize>,
    /// Last chain parameter ν_{N-1} (general34). Default 1.
    #[arg(long, allow_negative_numbers = true)]
    pub nu: Option<f64>,
    /// Atom location.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub t0: f64,
    /// Root entering the mass matrix.
    #[arg(long, value_enum, default_value_t = BranchArg::Plus)]
    pub branch: BranchArg,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub zeta: f64,
    /// Value of (1 - t0)/φ⁻ at t0 = 1 (jacobi33).
    #[arg(long, value_enum, default_value_t = LimitArg::Printed)]
    pub limit_rule: LimitArg,
}

impl Setup {
    pub fn family(&self) -> matorth::Result<Family> {
        let fam = match self.family {
            FamilyId::Hermite31 => Family::Hermite { a: self.a.unwrap_or(1.0) },
            FamilyId::Laguerre32 => Family::Laguerre {
                a: self.a.unwrap_or(1.0),
                alpha: self.alpha.unwrap_or(0.0),
            },
            FamilyId::Jacobi33 => Family::Jacobi {
                alpha: self.alpha.unwrap_or(0.0),
                beta: self.beta.unwrap_or(0.0),
                k: self.k.unwrap_or(0.5),
            },
            FamilyId::General34 => {
                Family::arbitrary_size(self.size.unwrap_or(2), self.alpha.unwrap_or(0.0), self.nu.unwrap_or(1.0))?
            }
        };
        fam.validate()?;
        if !self.t0.is_finite() {
            return Err(matorth::Error::InvalidParameter("t0 must be finite".into()));
        }
        if !(self.gamma > 0.0) || !(self.zeta >= 0.0) || !self.gamma.is_finite() || !self.zeta.is_finite() {
            return Err(matorth::Error::InvalidParameter(format!(
                "need gamma > 0 and zeta >= 0, got gamma = {}, zeta = {}",
                self.gamma, self.zeta
            )));
        }
        Ok(fam)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Verdict tolerance. Falls back to MATORTH_TOL, then the command default.
    #[arg(long)]
    pub tol: Option<f64>,
}

impl OutputArgs {
    pub fn tolerance(&self, default: f64) -> anyhow::Result<f64> {
        let tol = match self.tol {
            Some(t) => t,
            None => match std::env::var(TOL_ENV) {
                Ok(s) => s
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| anyhow::Error::new(UsageError(format!("{TOL_ENV}={s:?} is not a number"))))?,
                Err(_) => default,
            },
        };
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(UsageError(format!("tolerance {tol} must be positive")).into());
        }
        Ok(tol)
    }
}

/// Bad flags or parameters; maps to exit code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// The fully resolved configuration, embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub family_id: Option<&'static str>,
    pub parameters: Option<Family>,
    pub t0: Option<f64>,
    pub branch: Option<BranchArg>,
    pub gamma: Option<f64>,
    pub zeta: Option<f64>,
    pub limit_rule: Option<LimitArg>,
    pub n_max: Option<usize>,
    pub tolerance: Option<f64>,
    pub output: Option<String>,
    pub format: Format,
}

impl RunConfig {
    pub fn new(setup: Option<(&Setup, &Family)>, out: &OutputArgs, format: Format) -> Self {
        Self {
            family_id: setup.map(|(_, f)| f.id()),
            parameters: setup.map(|(_, f)| f.clone()),
            t0: setup.map(|(s, _)| s.t0),
            branch: setup.map(|(s, _)| s.branch),
            gamma: setup.map(|(s, _)| s.gamma),
            zeta: setup.map(|(s, _)| s.zeta),
            limit_rule: setup.map(|(s, _)| s.limit_rule),
            n_max: None,
            tolerance: None,
            output: out.out.as_ref().map(|p| p.display().to_string()),
            format,
        }
    }
}
