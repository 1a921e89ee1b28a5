use crate::domain::NodeClass;
use crate::error::{Error, Result};
use crate::solver::{Solution, SourceTerm};
use crate::symmat::{binomial, elem_sym_values};
use serde::{Deserialize, Serialize};

/// Quantities at the interior minimum of `u`, where `∇u = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointReport {
    pub location: Vec<f64>,
    pub u_value: f64,
    /// Hessian eigenvalues at the critical point, ascending.
    pub spectrum: Vec<f64>,
    /// `max_i u,ᵢᵢ / f^{1/2}` in the principal frame.
    pub max_diag_ratio: f64,
    /// `C(N,2)^{−1/2}`
    pub binom_bound: f64,
    pub alpha: f64,
    /// Whether `max_diag_ratio ≤ α`.
    pub below_alpha: bool,
    pub s2_value: f64,
    pub f_value: f64,
    /// Discrete minima further than two grid steps from the argmin.
    pub separated_minima: usize,
    pub unique: bool,
}

pub fn critical_point_report(sol: &Solution, f: &SourceTerm, alpha: f64) -> Result<CriticalPointReport> {
    let (location, u_value, mut spectrum, separated) = match sol {
        Solution::Radial(p) => {
            let k = p.argmin();
            if k == p.intervals() {
                return Err(Error::Numerical(
                    "no interior minimum: u is smallest on the boundary".into(),
                ));
            }
            let (a, g) = p.radial_eigenvalues()[k];
            let mut spec = vec![g; p.dim];
            spec[0] = a;
            let mut x = vec![0.0; p.dim];
            x[0] = p.r[k];
            // u is monotone along the radius iff there is one minimum shell
            let minima = (1..p.intervals())
                .filter(|&j| p.u[j] < p.u[j - 1] && p.u[j] <= p.u[j + 1] && j.abs_diff(k) > 2)
                .count();
            (x, p.u[k], spec, minima)
        }
        Solution::Grid(g) => {
            let k = g.argmin();
            if g.mask.class[g.mask.nodes[k]] != NodeClass::Interior {
                return Err(Error::Numerical(
                    "no interior minimum: argmin touches the boundary layer".into(),
                ));
            }
            let x = g.coords(k);
            let [xx, yy, xy] = g.hessian(k);
            let mean = 0.5 * (xx + yy);
            let rad = (0.25 * (xx - yy) * (xx - yy) + xy * xy).sqrt();
            let reach = 2.0 * g.h() * (1.0 + 1e-9);
            let minima = (0..g.u.len())
                .filter(|&m| {
                    let (i, j) = g.mask.node_ij(g.mask.nodes[m]);
                    let local = crate::domain::DIRECTIONS.iter().all(|&(di, dj)| {
                        g.mask
                            .unknown_at(i as i64 + di, j as i64 + dj)
                            .is_none_or(|n| g.u[m] <= g.u[n])
                    });
                    let y = g.coords(m);
                    local && (y[0] - x[0]).hypot(y[1] - x[1]) > reach
                })
                .count();
            (x.to_vec(), g.u[k], vec![mean - rad, mean + rad], minima)
        }
    };
    spectrum.sort_by(f64::total_cmp);
    let f_value = f.value(u_value);
    if !(f_value > 0.0) {
        return Err(Error::Source(format!("f(u_min) = {f_value} is not positive")));
    }
    let n = sol.dim();
    let max_diag_ratio = spectrum[n - 1] / f_value.sqrt();
    Ok(CriticalPointReport {
        location,
        u_value,
        s2_value: elem_sym_values(&spectrum, 2),
        spectrum,
        max_diag_ratio,
        binom_bound: binomial(n, 2).powf(-0.5),
        alpha,
        below_alpha: max_diag_ratio <= alpha,
        f_value,
        separated_minima: separated,
        unique: separated == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;
    use crate::solver::{solve_grid2d, solve_radial, SolveConfig};

    #[test]
    fn isotropic_cases_saturate() {
        for dim in [2, 3, 4] {
            let sol =
                Solution::Radial(solve_radial(dim, 1.0, SourceTerm::constant(1.0), &SolveConfig::default()).unwrap());
            let r = critical_point_report(&sol, &SourceTerm::constant(1.0), 1.0).unwrap();
            assert!((r.max_diag_ratio - r.binom_bound).abs() <= 1e-8, "dim {dim}: {r:?}");
            assert!((r.s2_value - 1.0).abs() <= 1e-8);
            assert!(r.unique && r.below_alpha);
        }
    }

    #[test]
    fn ellipse_critical_point() {
        let cfg = SolveConfig {
            h: 1.0 / 32.0,
            ..SolveConfig::default()
        };
        let sol = Solution::Grid(
            solve_grid2d(&DomainSpec::Ellipse { a: 2.0, b: 1.0 }, SourceTerm::constant(1.0), &cfg).unwrap(),
        );
        let r = critical_point_report(&sol, &SourceTerm::constant(1.0), 1.0).unwrap();
        assert!((r.s2_value - 1.0).abs() <= 5e-3);
        assert!(r.unique);
        assert!(r.location[0].abs() < 1e-12 && r.location[1].abs() < 1e-12);
        assert!(r.spectrum.iter().all(|&l| l > 0.0));
    }
}
