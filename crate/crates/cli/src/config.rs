//! Run configuration: a plain-text `key = value` file, overridable from the
//! command line, with a canonical form that every report embeds.

use crate::error::{CliError, CliResult};
use hess2_core::analysis::{Application, Gamma};
use hess2_core::campaign::SampleKind;
use hess2_core::domain::DomainSpec;
use hess2_core::solver::{SolveConfig, SourceTerm};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ineq,
    Solve,
    Verify,
    IdentityScan,
}

impl Command {
    pub const ALL: [Command; 4] = [Command::Ineq, Command::Solve, Command::Verify, Command::IdentityScan];

    pub fn name(self) -> &'static str {
        match self {
            Command::Ineq => "ineq",
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::IdentityScan => "identity-scan",
        }
    }
}

impl FromStr for Command {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown command '{s}'")))
    }
}

/// Which problem an inline solve sets up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    /// Radial profile on the ball `B_R ⊂ ℝᴺ`.
    Radial,
    /// Newton solve on a 2D grid over `domain`.
    Grid2d,
    /// First eigenpair on the ball, by inverse iteration.
    Eigen,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::Radial => "radial",
            Problem::Grid2d => "grid2d",
            Problem::Eigen => "eigen",
        }
    }
}

impl FromStr for Problem {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "radial" => Ok(Problem::Radial),
            "grid2d" => Ok(Problem::Grid2d),
            "eigen" => Ok(Problem::Eigen),
            _ => Err(CliError::Config(format!(
                "unknown problem '{s}' (radial, grid2d or eigen)"
            ))),
        }
    }
}

/// Which principle `verify` checks for each `α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeChoice {
    /// Whatever the applicable theorems claim; nothing if none applies.
    Auto,
    Min,
    Max,
}

impl ModeChoice {
    pub fn name(self) -> &'static str {
        match self {
            ModeChoice::Auto => "auto",
            ModeChoice::Min => "min",
            ModeChoice::Max => "max",
        }
    }
}

impl FromStr for ModeChoice {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "auto" => Ok(ModeChoice::Auto),
            "min" => Ok(ModeChoice::Min),
            "max" => Ok(ModeChoice::Max),
            _ => Err(CliError::Config(format!("unknown mode '{s}' (auto, min or max)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub problem: Problem,
    pub dim: usize,
    pub radius: f64,
    pub domain: DomainSpec,
    /// Explicit source; `None` lets the application pick it.
    pub source: Option<SourceTerm>,
    pub app: Option<Application>,
    pub lambda: f64,
    pub p: Option<f64>,
    pub solver: SolveConfig,
    pub alphas: Vec<f64>,
    pub gammas: Vec<Gamma>,
    pub mode: ModeChoice,
    pub bound_gamma: Gamma,
    pub solution: Option<PathBuf>,
    pub seed: u64,
    pub count: usize,
    pub dims: Vec<usize>,
    pub sign: SampleKind,
    /// Whether `ineq` writes every sample to the records CSV.
    pub records: bool,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            problem: Problem::Radial,
            dim: 3,
            radius: 1.0,
            domain: DomainSpec::disk(1.0),
            source: None,
            app: None,
            lambda: 1.0,
            p: None,
            solver: SolveConfig::default(),
            alphas: vec![1.0],
            gammas: vec![Gamma::Half],
            mode: ModeChoice::Auto,
            bound_gamma: Gamma::One,
            solution: None,
            seed: 42,
            count: 1000,
            dims: (2..=8).collect(),
            sign: SampleKind::Positive,
            records: true,
            out: PathBuf::from("."),
        }
    }

    /// Parses `key = value` lines; `#` starts a comment. Keys not present
    /// keep their defaults. The `command` key, when present, must agree with
    /// `command`.
    pub fn parse(text: &str, command: Command) -> CliResult<Self> {
        let mut cfg = RunConfig::new(command);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            cfg.set(k.trim(), v.trim())
                .map_err(|e| CliError::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        if cfg.command != command {
            return Err(CliError::Config(format!(
                "config is for '{}' but the command is '{}'",
                cfg.command.name(),
                command.name()
            )));
        }
        Ok(cfg)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match key {
            "command" => self.command = value.parse()?,
            "problem" => self.problem = value.parse()?,
            "dim" => self.dim = num(key, value)?,
            "radius" => self.radius = num(key, value)?,
            "domain" => self.domain = value.parse()?,
            "source" => self.source = optional(value, |v| Ok(v.parse()?))?,
            "app" => self.app = optional(value, |v| Ok(Application::from_index(num("app", v)?)?))?,
            "lambda" => self.lambda = num(key, value)?,
            "p" => self.p = optional(value, |v| num("p", v))?,
            "h" => self.solver.h = num(key, value)?,
            "nodes" => self.solver.nodes = num(key, value)?,
            "tol" => self.solver.tol = num(key, value)?,
            "max_iter" => self.solver.max_iter = num(key, value)?,
            "damping" => self.solver.damping = num(key, value)?,
            "eigen_tol" => self.solver.eigen_tol = num(key, value)?,
            "eigen_max_iter" => self.solver.eigen_max_iter = num(key, value)?,
            "alpha" => self.alphas = list(value, |v| num("alpha", v))?,
            "gamma" => self.gammas = list(value, gamma)?,
            "mode" => self.mode = value.parse()?,
            "bound_gamma" => self.bound_gamma = gamma(value)?,
            "solution" => self.solution = optional(value, |v| Ok(PathBuf::from(v)))?,
            "seed" => self.seed = num(key, value)?,
            "count" => self.count = num(key, value)?,
            "dims" => self.dims = parse_dims(value)?,
            "sign" => self.sign = value.parse()?,
            "records" => self.records = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            _ => return Err(CliError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Every key, in a fixed order, with shortest round-trip numbers.
    pub fn canonical(&self) -> String {
        self.to_string()
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.count == 0 {
            return bad("count must be at least 1".into());
        }
        if self.alphas.is_empty() || self.gammas.is_empty() {
            return bad("alpha and gamma lists must be non-empty".into());
        }
        if let Some(&d) = self.dims.iter().find(|&&d| !(2..=8).contains(&d)) {
            return bad(format!("dimension {d} outside 2..=8"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad(format!("radius must be positive, got {}", self.radius));
        }
        self.solver.validate()?;
        Ok(())
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let none = |o: Option<String>| o.unwrap_or_else(|| "none".into());
        let join = |v: Vec<String>| v.join(",");
        let s = &self.solver;
        writeln!(f, "command = {}", self.command.name())?;
        writeln!(f, "problem = {}", self.problem.name())?;
        writeln!(f, "dim = {}", self.dim)?;
        writeln!(f, "radius = {}", self.radius)?;
        writeln!(f, "domain = {}", self.domain)?;
        writeln!(f, "source = {}", none(self.source.map(|x| x.to_string())))?;
        writeln!(f, "app = {}", none(self.app.map(|a| a.to_string())))?;
        writeln!(f, "lambda = {}", self.lambda)?;
        writeln!(f, "p = {}", none(self.p.map(|x| x.to_string())))?;
        writeln!(f, "h = {}", s.h)?;
        writeln!(f, "nodes = {}", s.nodes)?;
        writeln!(f, "tol = {}", s.tol)?;
        writeln!(f, "max_iter = {}", s.max_iter)?;
        writeln!(f, "damping = {}", s.damping)?;
        writeln!(f, "eigen_tol = {}", s.eigen_tol)?;
        writeln!(f, "eigen_max_iter = {}", s.eigen_max_iter)?;
        writeln!(f, "alpha = {}", join(self.alphas.iter().map(f64::to_string).collect()))?;
        writeln!(
            f,
            "gamma = {}",
            join(self.gammas.iter().map(Gamma::to_string).collect())
        )?;
        writeln!(f, "mode = {}", self.mode.name())?;
        writeln!(f, "bound_gamma = {}", self.bound_gamma)?;
        writeln!(
            f,
            "solution = {}",
            none(self.solution.as_ref().map(|p| p.display().to_string()))
        )?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "count = {}", self.count)?;
        writeln!(f, "dims = {}", join(self.dims.iter().map(usize::to_string).collect()))?;
        writeln!(f, "sign = {}", self.sign)?;
        writeln!(f, "records = {}", self.records)?;
        writeln!(f, "out = {}", self.out.display())
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.parse()
        .map_err(|_| CliError::Config(format!("bad value '{v}' for '{key}'")))
}

fn optional<T>(v: &str, parse: impl Fn(&str) -> CliResult<T>) -> CliResult<Option<T>> {
    if v == "none" {
        Ok(None)
    } else {
        parse(v).map(Some)
    }
}

fn list<T>(v: &str, parse: impl Fn(&str) -> CliResult<T>) -> CliResult<Vec<T>> {
    v.split(',').map(|t| parse(t.trim())).collect()
}

fn gamma(v: &str) -> CliResult<Gamma> {
    match v {
        "1/2" | "half" => Ok(Gamma::Half),
        _ => Ok(Gamma::from_value(num("gamma", v)?)?),
    }
}

/// `a..b` (inclusive), a comma list, or a single dimension.
pub fn parse_dims(v: &str) -> CliResult<Vec<usize>> {
    if let Some((a, b)) = v.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b): (usize, usize) = (num("dims", a.trim())?, num("dims", b.trim())?);
        if a > b {
            return Err(CliError::Config(format!("empty dimension range '{v}'")));
        }
        Ok((a..=b).collect())
    } else {
        list(v, |t| num("dims", t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_round_trip() {
        let mut cfg = RunConfig::new(Command::Verify);
        cfg.set("domain", "ellipse:2,1").unwrap();
        cfg.set("source", "power:1,1.5").unwrap();
        cfg.set("app", "3").unwrap();
        cfg.set("p", "1.5").unwrap();
        cfg.set("alpha", "1,0.5,-1").unwrap();
        cfg.set("gamma", "0.5,1").unwrap();
        cfg.set("h", "0.015625").unwrap();
        let text = cfg.canonical();
        let back = RunConfig::parse(&text, Command::Verify).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.canonical(), text);
    }

    #[test]
    fn comments_defaults_and_errors() {
        let cfg = RunConfig::parse("# torsion\n\ndim = 4   # four\nsign = negative\n", Command::Ineq).unwrap();
        assert_eq!(cfg.dim, 4);
        assert_eq!(cfg.sign, SampleKind::Negative);
        assert_eq!(cfg.radius, 1.0);
        assert!(RunConfig::parse("bogus = 1", Command::Ineq).is_err());
        assert!(RunConfig::parse("command = solve", Command::Ineq).is_err());
        assert!(RunConfig::parse("dim 3", Command::Ineq).is_err());
    }

    #[test]
    fn dims_forms() {
        assert_eq!(parse_dims("2..8").unwrap(), (2..=8).collect::<Vec<_>>());
        assert_eq!(parse_dims("3").unwrap(), vec![3]);
        assert_eq!(parse_dims("2,5").unwrap(), vec![2, 5]);
        assert!(parse_dims("5..2").is_err());
    }
}
