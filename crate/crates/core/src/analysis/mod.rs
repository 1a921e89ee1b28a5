//! P-functions and their principles, a priori bounds, and critical-point
//! diagnostics for computed solutions.

mod bounds;
mod critical;
mod report;
mod theorems;

pub use bounds::{bounds_report, lhs_closed_form, transform_preset, Application, BoundsReport};
pub use critical::{critical_point_report, CriticalPointReport};
pub use report::{domain_label, principle_case, rows_to_csv, CaseRow, CSV_HEADER};
pub use theorems::{applicable_theorems, convexity_witness, isotropic_alpha, Theorem, CONVEXITY_CANDIDATES};

use crate::domain::signed_distance;
use crate::error::{Error, Result};
use crate::fields::Jet;
use crate::quad::adaptive_simpson;
use crate::solver::{Solution, SourceTerm};
use crate::symmat::SymmetricMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Exponent applied to `f` inside the P-function integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gamma {
    /// `∫ f^{1/2}`: the P-function's definition.
    Half,
    /// `∫ f`: the form the a priori bounds are written in.
    One,
}

impl Gamma {
    pub fn value(self) -> f64 {
        match self {
            Gamma::Half => 0.5,
            Gamma::One => 1.0,
        }
    }

    pub fn from_value(g: f64) -> Result<Self> {
        if g == 0.5 {
            Ok(Gamma::Half)
        } else if g == 1.0 {
            Ok(Gamma::One)
        } else {
            Err(Error::input(format!("gamma must be 1/2 or 1, got {g}")))
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PFunctionSpec {
    pub alpha: f64,
    pub gamma: Gamma,
}

/// Relative tolerance of the P-function integral.
pub const INTEGRAL_TOL: f64 = 1e-10;

/// `∫_u^0 f(s)^γ ds`.
pub fn source_integral(f: &SourceTerm, gamma: Gamma, u: f64) -> Result<f64> {
    if u > 0.0 {
        return Err(Error::input(format!("P-function needs u ≤ 0, got {u}")));
    }
    let g = gamma.value();
    adaptive_simpson(|s| f.value(s).powf(g), u, 0.0, INTEGRAL_TOL)
}

/// One sample of a P-function: `Φ = |∇u|² + 2α·integral`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PSample {
    pub location: Vec<f64>,
    pub grad_sq: f64,
    pub integral: f64,
    pub value: f64,
    pub boundary_distance: f64,
}

/// P-function samples at interior nodes and on the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PField {
    pub spec: PFunctionSpec,
    /// Discretisation step, for tolerances.
    pub h: f64,
    pub interior: Vec<PSample>,
    pub boundary: Vec<PSample>,
}

impl PField {
    /// Same samples with a different `α`; the integral is reused, so
    /// `Φ_α − Φ_α′ = 2(α − α′)·integral` holds to rounding.
    pub fn with_alpha(&self, alpha: f64) -> PField {
        let re = |s: &PSample| PSample {
            value: s.grad_sq + 2.0 * alpha * s.integral,
            ..s.clone()
        };
        PField {
            spec: PFunctionSpec {
                alpha,
                gamma: self.spec.gamma,
            },
            h: self.h,
            interior: self.interior.iter().map(re).collect(),
            boundary: self.boundary.iter().map(re).collect(),
        }
    }

    pub fn samples(&self) -> impl Iterator<Item = &PSample> {
        self.interior.iter().chain(&self.boundary)
    }

    /// `max |Φ|`, floored at `1e-300`.
    pub fn scale(&self) -> f64 {
        self.samples().fold(1e-300, |m, s| m.max(s.value.abs()))
    }

    /// `max Φ − min Φ` over all samples.
    pub fn sup_variation(&self) -> f64 {
        let (lo, hi) = self.samples().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.value), hi.max(s.value))
        });
        hi - lo
    }

    /// Discrete attainment tolerance `5·h²·scale`.
    pub fn default_tolerance(&self) -> f64 {
        5.0 * self.h * self.h * self.scale()
    }
}

pub fn pfunction_field(sol: &Solution, f: &SourceTerm, spec: PFunctionSpec) -> Result<PField> {
    if !spec.alpha.is_finite() {
        return Err(Error::input("alpha must be finite"));
    }
    let integral = |u: f64| source_integral(f, spec.gamma, u.min(0.0));
    let sample = |location: Vec<f64>, grad_sq: f64, u: f64, dist: f64| -> Result<PSample> {
        let integral = integral(u)?;
        Ok(PSample {
            location,
            grad_sq,
            integral,
            value: grad_sq + 2.0 * spec.alpha * integral,
            boundary_distance: dist,
        })
    };
    match sol {
        Solution::Radial(p) => {
            let n = p.intervals();
            let interior = (0..n)
                .map(|j| sample(vec![p.r[j]], p.up[j] * p.up[j], p.u[j], p.radius - p.r[j]))
                .collect::<Result<Vec<_>>>()?;
            let g = p.boundary_gradient();
            let boundary = vec![sample(vec![p.radius], g * g, 0.0, 0.0)?];
            Ok(PField {
                spec,
                h: p.h(),
                interior,
                boundary,
            })
        }
        Solution::Grid(g) => {
            let interior = (0..g.u.len())
                .map(|k| {
                    let x = g.coords(k);
                    let [ux, uy] = g.gradient(k);
                    let d = -signed_distance(g.spec(), &x);
                    sample(x.to_vec(), ux * ux + uy * uy, g.u[k], d)
                })
                .collect::<Result<Vec<_>>>()?;
            let boundary = g
                .boundary_gradients()
                .into_iter()
                .map(|b| sample(b.point.to_vec(), b.value * b.value, 0.0, 0.0))
                .collect::<Result<Vec<_>>>()?;
            if boundary.is_empty() {
                return Err(Error::Numerical("no boundary gradient samples".into()));
            }
            Ok(PField {
                spec,
                h: g.h(),
                interior,
                boundary,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrincipleMode {
    Min,
    Max,
}

impl fmt::Display for PrincipleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrincipleMode::Min => "min",
            PrincipleMode::Max => "max",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extreme {
    pub value: f64,
    pub location: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipleVerdict {
    pub mode: PrincipleMode,
    pub interior_extreme: Extreme,
    pub boundary_extreme: Extreme,
    /// How far the interior stays on the right side of the boundary
    /// extreme: `min_int − min_∂` for `min`, `max_∂ − max_int` for `max`.
    pub margin: f64,
    pub tolerance: f64,
    pub holds: bool,
    /// Distance to the boundary of the overall extreme point.
    pub distance_of_argextreme_to_boundary: f64,
}

fn extreme<'a>(samples: impl Iterator<Item = &'a PSample>, mode: PrincipleMode) -> Option<&'a PSample> {
    samples.fold(None, |best: Option<&PSample>, s| match best {
        None => Some(s),
        Some(b) => {
            let better = match mode {
                PrincipleMode::Min => s.value < b.value,
                PrincipleMode::Max => s.value > b.value,
            };
            Some(if better { s } else { b })
        }
    })
}

/// Whether `Φ` attains its `mode`-extreme on the boundary, up to `tol_margin`.
pub fn verify_principle(phi: &PField, mode: PrincipleMode, tol_margin: f64) -> PrincipleVerdict {
    let inner = extreme(phi.interior.iter(), mode).expect("P-field has interior samples");
    let outer = extreme(phi.boundary.iter(), mode).expect("P-field has boundary samples");
    let margin = match mode {
        PrincipleMode::Min => inner.value - outer.value,
        PrincipleMode::Max => outer.value - inner.value,
    };
    let overall = if margin >= 0.0 { outer } else { inner };
    PrincipleVerdict {
        mode,
        interior_extreme: Extreme {
            value: inner.value,
            location: inner.location.clone(),
        },
        boundary_extreme: Extreme {
            value: outer.value,
            location: outer.location.clone(),
        },
        margin,
        tolerance: tol_margin,
        holds: margin >= -tol_margin,
        distance_of_argextreme_to_boundary: overall.boundary_distance,
    }
}

/// Value, gradient and Hessian of the solution at its sampled interior
/// points, for convexity scans. Radial profiles are sampled along the first
/// axis; rotations do not change the eigenvalues of any transformed Hessian.
pub fn solution_jets(sol: &Solution) -> Result<Vec<(Vec<f64>, Jet)>> {
    match sol {
        Solution::Radial(p) => {
            let eig = p.radial_eigenvalues();
            (0..p.intervals())
                .map(|j| {
                    let mut x = vec![0.0; p.dim];
                    x[0] = p.r[j];
                    let mut grad = vec![0.0; p.dim];
                    grad[0] = p.up[j];
                    let (a, g) = eig[j];
                    let mut diag = vec![g; p.dim];
                    diag[0] = a;
                    Ok((
                        x,
                        Jet {
                            value: p.u[j],
                            gradient: grad,
                            hessian: SymmetricMatrix::from_diagonal(&diag)?,
                        },
                    ))
                })
                .collect()
        }
        Solution::Grid(g) => (0..g.u.len())
            .map(|k| {
                let [xx, yy, xy] = g.hessian(k);
                let hessian = SymmetricMatrix::from_rows(&[vec![xx, xy], vec![xy, yy]])?;
                Ok((
                    g.coords(k).to_vec(),
                    Jet {
                        value: g.u[k],
                        gradient: g.gradient(k).to_vec(),
                        hessian,
                    },
                ))
            })
            .collect(),
    }
}
