//! Solvers for `S₂(D²u) = f(u)` with zero Dirichlet data: a radial
//! quadrature solver on balls, a nonlinear eigen-solver built on it, and a
//! damped Newton solver on 2D grids.

mod admissibility;
mod grid2d;
pub mod io;
mod radial;

pub use admissibility::{admissibility_report, AdmissibilityReport};
pub use grid2d::{solve_grid2d, BoundaryGradient, ScalarField2D, Stencils};
pub use radial::{solve_eigen_radial, solve_eigen_radial_from, solve_radial, RadialProfile};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Right-hand side `f(u)` of the equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum SourceTerm {
    /// `f = c`
    Constant { value: f64 },
    /// `f = λ(−t)²`
    Eigen { lambda: f64 },
    /// `f = λ(−t)^p`
    Power { lambda: f64, p: f64 },
    /// `f = e^{−t}`
    ExpDecreasing,
    /// `f = e^{t}`
    ExpIncreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotonicity {
    /// Both nonincreasing and nondecreasing.
    Constant,
    Nonincreasing,
    Nondecreasing,
    Other,
}

impl SourceTerm {
    pub fn constant(value: f64) -> Self {
        SourceTerm::Constant { value }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SourceTerm::Constant { value } => value > 0.0 && value.is_finite(),
            SourceTerm::Eigen { lambda } => lambda > 0.0 && lambda.is_finite(),
            SourceTerm::Power { lambda, p } => lambda > 0.0 && lambda.is_finite() && p > 0.0 && p.is_finite(),
            SourceTerm::ExpDecreasing | SourceTerm::ExpIncreasing => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Source(format!("invalid source parameters: {self}")))
        }
    }

    /// `f(t)` for `t ≤ 0`.
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            SourceTerm::Constant { value } => value,
            SourceTerm::Eigen { lambda } => lambda * t * t,
            SourceTerm::Power { lambda, p } => lambda * (-t).max(0.0).powf(p),
            SourceTerm::ExpDecreasing => (-t).exp(),
            SourceTerm::ExpIncreasing => t.exp(),
        }
    }

    /// `f′(t)` for `t ≤ 0`.
    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            SourceTerm::Constant { .. } => 0.0,
            SourceTerm::Eigen { lambda } => 2.0 * lambda * t,
            SourceTerm::Power { lambda, p } => {
                let m = (-t).max(0.0);
                if m == 0.0 {
                    if p > 1.0 {
                        0.0
                    } else if p == 1.0 {
                        -lambda
                    } else {
                        f64::NEG_INFINITY
                    }
                } else {
                    -lambda * p * m.powf(p - 1.0)
                }
            }
            SourceTerm::ExpDecreasing => -(-t).exp(),
            SourceTerm::ExpIncreasing => t.exp(),
        }
    }

    pub fn monotonicity(&self) -> Monotonicity {
        match self {
            SourceTerm::Constant { .. } => Monotonicity::Constant,
            SourceTerm::Eigen { .. } | SourceTerm::Power { .. } | SourceTerm::ExpDecreasing => {
                Monotonicity::Nonincreasing
            }
            SourceTerm::ExpIncreasing => Monotonicity::Nondecreasing,
        }
    }

    pub fn is_nonincreasing(&self) -> bool {
        matches!(
            self.monotonicity(),
            Monotonicity::Constant | Monotonicity::Nonincreasing
        )
    }

    pub fn is_nondecreasing(&self) -> bool {
        matches!(
            self.monotonicity(),
            Monotonicity::Constant | Monotonicity::Nondecreasing
        )
    }

    /// Whether `f(0) > 0`; the power-type presets vanish on the boundary.
    pub fn positive_at_zero(&self) -> bool {
        self.value(0.0) > 0.0
    }

    /// Checks `f > 0` on the sampled values `t < 0` and `f ≥ 0` at `t = 0`.
    pub fn check_positive(&self, samples: &[f64]) -> Result<()> {
        for &t in samples {
            let v = self.value(t);
            let bad = !v.is_finite() || v < 0.0 || (t < 0.0 && v <= 0.0);
            if bad {
                return Err(Error::Source(format!("f({t}) = {v} is not positive")));
            }
        }
        Ok(())
    }

    /// Checks the monotonicity tag against the sign of `f′` on samples.
    pub fn check_monotonicity(&self, samples: &[f64]) -> bool {
        samples.iter().all(|&t| {
            let d = self.derivative(t);
            match self.monotonicity() {
                Monotonicity::Constant => d == 0.0,
                Monotonicity::Nonincreasing => d <= 0.0,
                Monotonicity::Nondecreasing => d >= 0.0,
                Monotonicity::Other => true,
            }
        })
    }
}

impl fmt::Display for SourceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceTerm::Constant { value } => write!(f, "const:{value}"),
            SourceTerm::Eigen { lambda } => write!(f, "eigen:{lambda}"),
            SourceTerm::Power { lambda, p } => write!(f, "power:{lambda},{p}"),
            SourceTerm::ExpDecreasing => write!(f, "exp-dec"),
            SourceTerm::ExpIncreasing => write!(f, "exp-inc"),
        }
    }
}

impl FromStr for SourceTerm {
    type Err = Error;

    /// `const:c`, `eigen:λ`, `power:λ,p`, `exp-dec`, `exp-inc`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = match s.split_once(':') {
            Some((k, r)) => (k.trim(), Some(r)),
            None => (s.trim(), None),
        };
        let num = |t: &str| -> Result<f64> {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::input(format!("bad number '{t}' in source '{s}'")))
        };
        let need = || rest.ok_or_else(|| Error::input(format!("source '{s}' needs parameters")));
        let term = match kind {
            "const" | "constant" => SourceTerm::Constant { value: num(need()?)? },
            "eigen" => SourceTerm::Eigen { lambda: num(need()?)? },
            "power" => {
                let (l, p) = need()?
                    .split_once(',')
                    .ok_or_else(|| Error::input("power source needs 'lambda,p'"))?;
                SourceTerm::Power {
                    lambda: num(l)?,
                    p: num(p)?,
                }
            }
            "exp-dec" => SourceTerm::ExpDecreasing,
            "exp-inc" => SourceTerm::ExpIncreasing,
            other => return Err(Error::input(format!("unknown source preset '{other}'"))),
        };
        term.validate()?;
        Ok(term)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Grid spacing for 2D solves.
    pub h: f64,
    /// Number of radial intervals.
    pub nodes: usize,
    /// Picard defect (relative sup-norm) or Newton residual (sup-norm) target.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial Newton step length, halved on rejection.
    pub damping: f64,
    /// Stop the eigen-iteration when successive eigenvalue estimates differ
    /// by less than this.
    pub eigen_tol: f64,
    pub eigen_max_iter: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            h: 1.0 / 64.0,
            nodes: 1024,
            tol: 1e-10,
            max_iter: 200,
            damping: 1.0,
            eigen_tol: 1e-11,
            eigen_max_iter: 2000,
        }
    }
}

/// Largest radial node count.
pub const MAX_RADIAL_NODES: usize = 4096;
/// Largest number of 2D grid unknowns.
pub const MAX_GRID_UNKNOWNS: usize = 256 * 256;

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Configuration(m.to_string()));
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad("h must be positive");
        }
        if !(8..=MAX_RADIAL_NODES).contains(&self.nodes) {
            return bad("radial node count must lie in 8..=4096");
        }
        if !(self.tol > 0.0 && self.eigen_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping must lie in (0, 1]");
        }
        if self.max_iter == 0 || self.eigen_max_iter == 0 {
            return bad("iteration limits must be positive");
        }
        Ok(())
    }
}

/// A solved problem, radial or on a 2D grid.
#[derive(Debug, Clone)]
pub enum Solution {
    Radial(RadialProfile),
    Grid(ScalarField2D),
}

impl Solution {
    pub fn dim(&self) -> usize {
        match self {
            Solution::Radial(p) => p.dim,
            Solution::Grid(_) => 2,
        }
    }

    pub fn source(&self) -> SourceTerm {
        match self {
            Solution::Radial(p) => p.source,
            Solution::Grid(g) => g.source,
        }
    }

    pub fn u_min(&self) -> f64 {
        match self {
            Solution::Radial(p) => p.u_min(),
            Solution::Grid(g) => g.u_min(),
        }
    }

    /// `(min, max)` of `|∇u|` over the boundary samples.
    pub fn boundary_gradient_range(&self) -> (f64, f64) {
        match self {
            Solution::Radial(p) => (p.boundary_gradient(), p.boundary_gradient()),
            Solution::Grid(g) => g
                .boundary_gradients()
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), b| {
                    (lo.min(b.value), hi.max(b.value))
                }),
        }
    }

    /// Hessian spectra at the strictly interior nodes.
    pub fn hessian_spectra(&self) -> Vec<Vec<f64>> {
        match self {
            Solution::Radial(p) => p.hessian_spectra(),
            Solution::Grid(g) => g.hessian_spectra(),
        }
    }

    pub fn iterations(&self) -> usize {
        match self {
            Solution::Radial(p) => p.iterations,
            Solution::Grid(g) => g.newton_steps,
        }
    }

    pub fn final_residual(&self) -> f64 {
        match self {
            Solution::Radial(p) => p.defect,
            Solution::Grid(g) => g.residual,
        }
    }
}
