//! Command-line flags. Every value flag is an override of one
//! [`RunConfig`](crate::config::RunConfig) key and is parsed by the config
//! itself, so a flag and the matching config line always mean the same thing.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "hess2",
    version,
    about = "2-Hessian inequality campaigns, solves and P-function checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Sample symmetric matrices and check the cubic trace inequality.
    Ineq(IneqArgs),
    /// Solve a Dirichlet problem and write the solution.
    Solve(SolveArgs),
    /// Check P-function principles and a priori bounds on a solution.
    Verify(VerifyArgs),
    /// Check pointwise identities on synthetic fields.
    IdentityScan(ScanArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// `key = value` file; flags given on the command line override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Directory that receives the report files.
    #[arg(long, value_name = "DIR")]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct SeedArgs {
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub count: Option<String>,
}

#[derive(Debug, Args)]
pub struct IneqArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub seed: SeedArgs,
    /// `2..8`, `3` or `2,5`.
    #[arg(long)]
    pub dims: Option<String>,
    /// positive, negative, indefinite or mixed.
    #[arg(long)]
    pub sign: Option<String>,
    /// Whether to write every sample to the records CSV.
    #[arg(long, value_name = "BOOL")]
    pub records: Option<String>,
}

#[derive(Debug, Args)]
#[group(id = "problem", multiple = false)]
pub struct ProblemKind {
    #[arg(long)]
    pub radial: bool,
    #[arg(long)]
    pub grid2d: bool,
    #[arg(long)]
    pub eigen: bool,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    #[command(flatten)]
    pub kind: ProblemKind,
    #[arg(long)]
    pub dim: Option<String>,
    #[arg(long)]
    pub radius: Option<String>,
    /// `disk:R`, `ellipse:a,b`, `polygon:x,y;x,y;...`
    #[arg(long)]
    pub domain: Option<String>,
    /// `const:c`, `eigen:λ`, `power:λ,p`, `exp-dec` or `exp-inc`.
    #[arg(long)]
    pub f: Option<String>,
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub h: Option<String>,
    #[arg(long)]
    pub nodes: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long)]
    pub max_iter: Option<String>,
    #[arg(long)]
    pub damping: Option<String>,
    #[arg(long)]
    pub eigen_tol: Option<String>,
    #[arg(long)]
    pub eigen_max_iter: Option<String>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub problem: ProblemArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Application 1 (torsion), 2 (eigenvalue) or 3 (power source).
    #[arg(long)]
    pub app: Option<String>,
    /// Comma-separated `α` values.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Comma-separated exponents on `f` in the P-function integral (0.5, 1).
    #[arg(long)]
    pub gamma: Option<String>,
    /// auto, min or max.
    #[arg(long)]
    pub mode: Option<String>,
    /// Integral exponent of the a priori bound.
    #[arg(long)]
    pub bound_gamma: Option<String>,
    /// Verify a previously written solution file instead of solving.
    #[arg(long, value_name = "FILE")]
    pub solution: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub seed: SeedArgs,
}

/// `(key, value)` overrides in a fixed order.
pub type Overrides = Vec<(&'static str, String)>;

fn push(out: &mut Overrides, key: &'static str, v: &Option<String>) {
    if let Some(v) = v {
        out.push((key, v.clone()));
    }
}

impl CommonArgs {
    pub fn overrides(&self, out: &mut Overrides) {
        push(out, "out", &self.out);
    }
}

impl SeedArgs {
    pub fn overrides(&self, out: &mut Overrides) {
        push(out, "seed", &self.seed);
        push(out, "count", &self.count);
    }
}

impl IneqArgs {
    pub fn overrides(&self) -> Overrides {
        let mut out = Vec::new();
        self.common.overrides(&mut out);
        self.seed.overrides(&mut out);
        push(&mut out, "dims", &self.dims);
        push(&mut out, "sign", &self.sign);
        push(&mut out, "records", &self.records);
        out
    }
}

impl ProblemArgs {
    pub fn overrides(&self, out: &mut Overrides) {
        let k = &self.kind;
        for (set, name) in [(k.radial, "radial"), (k.grid2d, "grid2d"), (k.eigen, "eigen")] {
            if set {
                out.push(("problem", name.into()));
            }
        }
        push(out, "dim", &self.dim);
        push(out, "radius", &self.radius);
        push(out, "domain", &self.domain);
        push(out, "source", &self.f);
        push(out, "lambda", &self.lambda);
        push(out, "p", &self.p);
        push(out, "h", &self.h);
        push(out, "nodes", &self.nodes);
        push(out, "tol", &self.tol);
        push(out, "max_iter", &self.max_iter);
        push(out, "damping", &self.damping);
        push(out, "eigen_tol", &self.eigen_tol);
        push(out, "eigen_max_iter", &self.eigen_max_iter);
    }
}

impl SolveArgs {
    pub fn overrides(&self) -> Overrides {
        let mut out = Vec::new();
        self.common.overrides(&mut out);
        self.problem.overrides(&mut out);
        out
    }
}

impl VerifyArgs {
    pub fn overrides(&self) -> Overrides {
        let mut out = Vec::new();
        self.common.overrides(&mut out);
        self.problem.overrides(&mut out);
        push(&mut out, "app", &self.app);
        push(&mut out, "alpha", &self.alpha);
        push(&mut out, "gamma", &self.gamma);
        push(&mut out, "mode", &self.mode);
        push(&mut out, "bound_gamma", &self.bound_gamma);
        push(&mut out, "solution", &self.solution);
        out
    }
}

impl ScanArgs {
    pub fn overrides(&self) -> Overrides {
        let mut out = Vec::new();
        self.common.overrides(&mut out);
        self.seed.overrides(&mut out);
        out
    }
}
