use super::{pfunction_field, solution_jets, source_integral, Gamma, PFunctionSpec};
use crate::error::{Error, Result};
use crate::fields::{convexity_scan_jets, ConvexityReport};
use crate::solver::{Solution, SourceTerm};
use crate::transform::Transform;
use serde::{Deserialize, Serialize};
use std::fmt;

/// The three model problems: `S₂ = 1`, `S₂ = λ₁(−u)²`, `S₂ = λ(−u)^p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Application {
    Torsion,
    Eigen,
    Power,
}

impl Application {
    pub fn from_index(i: u32) -> Result<Self> {
        match i {
            1 => Ok(Application::Torsion),
            2 => Ok(Application::Eigen),
            3 => Ok(Application::Power),
            _ => Err(Error::input(format!("application must be 1, 2 or 3, got {i}"))),
        }
    }

    pub fn index(self) -> u32 {
        match self {
            Application::Torsion => 1,
            Application::Eigen => 2,
            Application::Power => 3,
        }
    }

    /// The integral convention each bound is written in.
    pub fn default_gamma(self) -> Gamma {
        Gamma::One
    }
}

impl fmt::Display for Application {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

const PROBE_GRID: [f64; 7] = [-1e-3, -0.1, -0.5, -1.0, -2.0, -10.0, -1e3];

/// The transform `U` whose composition with the solution is known to be
/// convex for each application: `−√(−t)`, `−log(−t)`, `−(−t)^{(2−p)/4}`.
pub fn transform_preset(app: Application, p: Option<f64>) -> Result<Transform> {
    let tr = match app {
        Application::Torsion => Transform::NegSqrt,
        Application::Eigen => Transform::NegLog,
        Application::Power => {
            let p = p.ok_or_else(|| Error::input("application 3 needs the exponent p"))?;
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::input(format!("exponent p must be positive, got {p}")));
            }
            if p >= 2.0 {
                return Err(Error::Hypothesis(format!(
                    "p = {p} ≥ 2: the exponent (2−p)/4 is not positive, so U(t) = −(−t)^((2−p)/4) \
                     is not strictly increasing on (−∞,0) and the minimum principle cannot be \
                     applied directly"
                )));
            }
            Transform::NegPower {
                exponent: (2.0 - p) / 4.0,
            }
        }
    };
    for t in PROBE_GRID {
        let (_, up, _) = tr.derivatives(t)?;
        if !(up > 0.0) {
            return Err(Error::Hypothesis(format!(
                "{} is not strictly increasing at t = {t}",
                tr.name()
            )));
        }
    }
    Ok(tr)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub application: u32,
    pub gamma: Gamma,
    pub transform: String,
    pub convexity: ConvexityReport,
    /// `2∫_{u_min}^0 f^γ`
    pub lhs: f64,
    /// `|∇u|²_min` over the boundary.
    pub rhs: f64,
    pub slack: f64,
    /// `min_x [2∫_{u(x)}^0 f^γ − (|∇u|²_min − |∇u(x)|²)]` over interior nodes.
    pub pointwise_min_slack: f64,
    pub tolerance: f64,
    pub hypothesis_met: bool,
    pub holds: bool,
    pub reason: Option<String>,
}

/// `2∫_u^0 f^γ` in closed form for the three applications' sources.
pub fn lhs_closed_form(f: &SourceTerm, gamma: Gamma, u: f64) -> Option<f64> {
    let (lambda, p) = match *f {
        SourceTerm::Constant { value } => (value, 0.0),
        SourceTerm::Eigen { lambda } => (lambda, 2.0),
        SourceTerm::Power { lambda, p } => (lambda, p),
        _ => return None,
    };
    let g = gamma.value();
    let e = p * g + 1.0;
    Some(2.0 * lambda.powf(g) * (-u).powf(e) / e)
}

/// Global and pointwise a priori bounds for one application, after checking
/// that the application's transform makes the solution convex.
pub fn bounds_report(sol: &Solution, f: &SourceTerm, app: Application, gamma: Gamma) -> Result<BoundsReport> {
    let p = match (app, f) {
        (Application::Torsion, SourceTerm::Constant { .. }) => None,
        (Application::Eigen, SourceTerm::Eigen { .. }) => None,
        (Application::Power, SourceTerm::Power { p, .. }) => Some(*p),
        _ => return Err(Error::input(format!("source {f} does not belong to application {app}"))),
    };
    let tr = transform_preset(app, p)?;
    let jets = solution_jets(sol)?;
    let convexity = convexity_scan_jets(&tr, jets.iter().map(|(x, j)| (x.as_slice(), j.clone())))?;

    let phi = pfunction_field(sol, f, PFunctionSpec { alpha: 1.0, gamma })?;
    let rhs = phi.boundary.iter().fold(f64::INFINITY, |m, s| m.min(s.grad_sq));
    let lhs = 2.0 * source_integral(f, gamma, sol.u_min())?;
    let slack = lhs - rhs;
    let pointwise_min_slack = phi.interior.iter().fold(f64::INFINITY, |m, s| m.min(s.value - rhs));
    let tolerance = 1e-6 * lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);

    let mut reason = None;
    if !convexity.convex {
        reason = Some(format!(
            "{} composed with the solution is not convex (relative eigenvalue {:e} at {:?})",
            tr.name(),
            convexity.min_relative_eigenvalue,
            convexity.argmin
        ));
    } else if !f.is_nonincreasing() {
        reason = Some(format!("source {f} is not nonincreasing"));
    }
    let hypothesis_met = reason.is_none();
    Ok(BoundsReport {
        application: app.index(),
        gamma,
        transform: tr.name(),
        convexity,
        lhs,
        rhs,
        slack,
        pointwise_min_slack,
        tolerance,
        hypothesis_met,
        holds: hypothesis_met && slack >= -tolerance && pointwise_min_slack >= -tolerance,
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;
    use crate::solver::{solve_eigen_radial, solve_grid2d, solve_radial, SolveConfig};
    use approx::assert_relative_eq;

    #[test]
    fn presets_at_minus_one() {
        let ev = |tr: Transform| tr.derivatives(-1.0).unwrap();
        assert_eq!(
            ev(transform_preset(Application::Torsion, None).unwrap()),
            (-1.0, 0.5, 0.25)
        );
        assert_eq!(ev(transform_preset(Application::Eigen, None).unwrap()), (0.0, 1.0, 1.0));
        assert_eq!(
            ev(transform_preset(Application::Power, Some(1.0)).unwrap()),
            (-1.0, 0.25, 0.1875)
        );
        let err = transform_preset(Application::Power, Some(2.5)).unwrap_err();
        assert!(matches!(err, Error::Hypothesis(ref m) if m.contains("not strictly increasing")));
    }

    #[test]
    fn torsion_ball_closed_form() {
        let sol = Solution::Radial(solve_radial(3, 1.0, SourceTerm::constant(1.0), &SolveConfig::default()).unwrap());
        let r = bounds_report(&sol, &SourceTerm::constant(1.0), Application::Torsion, Gamma::One).unwrap();
        assert!(r.holds && r.convexity.convex);
        assert_relative_eq!(r.lhs, 1.0 / 3f64.sqrt(), max_relative = 1e-9);
        assert_relative_eq!(r.rhs, 1.0 / 3.0, max_relative = 1e-9);
        assert!((r.slack - (1.0 / 3f64.sqrt() - 1.0 / 3.0)).abs() < 1e-8);
    }

    #[test]
    fn torsion_disk_is_sharp() {
        let cfg = SolveConfig {
            h: 1.0 / 32.0,
            ..SolveConfig::default()
        };
        let sol = Solution::Grid(solve_grid2d(&DomainSpec::disk(1.0), SourceTerm::constant(1.0), &cfg).unwrap());
        let r = bounds_report(&sol, &SourceTerm::constant(1.0), Application::Torsion, Gamma::One).unwrap();
        assert!(r.holds);
        assert!(r.slack.abs() <= 1e-6, "{}", r.slack);
    }

    #[test]
    fn eigen_bound_both_conventions() {
        let cfg = SolveConfig {
            nodes: 512,
            ..SolveConfig::default()
        };
        let (lambda, p) = solve_eigen_radial(3, 1.0, &cfg).unwrap();
        let f = SourceTerm::Eigen { lambda };
        let sol = Solution::Radial(p);
        for gamma in [Gamma::One, Gamma::Half] {
            let r = bounds_report(&sol, &f, Application::Eigen, gamma).unwrap();
            assert!(r.holds, "{r:?}");
            assert_relative_eq!(r.lhs, lhs_closed_form(&f, gamma, -1.0).unwrap(), max_relative = 1e-9);
        }
    }

    #[test]
    fn power_bounds() {
        for p in [0.5, 1.0, 1.5] {
            let f = SourceTerm::Power { lambda: 1.0, p };
            let sol = Solution::Radial(solve_radial(3, 1.0, f, &SolveConfig::default()).unwrap());
            for gamma in [Gamma::One, Gamma::Half] {
                let r = bounds_report(&sol, &f, Application::Power, gamma).unwrap();
                assert!(r.convexity.convex);
                let closed = lhs_closed_form(&f, gamma, sol.u_min()).unwrap();
                assert_relative_eq!(r.lhs, closed, max_relative = 1e-9);
            }
            // the f^{1/2} integral is the one homogeneous with |∇u|²
            assert!(bounds_report(&sol, &f, Application::Power, Gamma::Half).unwrap().holds);
        }
    }

    #[test]
    fn mismatched_source_is_rejected() {
        let sol = Solution::Radial(solve_radial(3, 1.0, SourceTerm::constant(1.0), &SolveConfig::default()).unwrap());
        assert!(bounds_report(&sol, &SourceTerm::constant(1.0), Application::Eigen, Gamma::One).is_err());
    }
}
