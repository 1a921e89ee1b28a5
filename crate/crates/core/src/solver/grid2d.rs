use super::{SolveConfig, SourceTerm, MAX_GRID_UNKNOWNS};
use crate::domain::{rasterize, DomainSpec, GridMask, DIRECTIONS};
use crate::error::{Error, Result};
use faer::col::Col;
use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use std::f64::consts::FRAC_1_SQRT_2;

/// A sparse linear functional over the unknowns.
pub type Row = Vec<(usize, f64)>;

/// Discrete first and second derivatives at every unknown. Central
/// differences where all eight neighbours carry unknowns, Shortley–Weller
/// differences with exact boundary distances otherwise. The mixed derivative
/// comes from the two diagonal second derivatives,
/// `u_xy = (u_{d₁d₁} − u_{d₂d₂})/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencils {
    pub dx: Vec<Row>,
    pub dy: Vec<Row>,
    pub dxx: Vec<Row>,
    pub dyy: Vec<Row>,
    pub dxy: Vec<Row>,
}

fn push(row: &mut Row, idx: usize, c: f64) {
    match row.iter_mut().find(|(i, _)| *i == idx) {
        Some(e) => e.1 += c,
        None => row.push((idx, c)),
    }
}

/// Second- and first-derivative rows along the line through directions
/// `plus`/`minus` with step `step`.
fn line_rows(mask: &GridMask, k: usize, plus: usize, minus: usize, step: f64) -> (Row, Row) {
    let tp = mask.arms[k][plus];
    let tm = mask.arms[k][minus];
    let np = mask.neighbour(k, plus);
    let nm = mask.neighbour(k, minus);
    let sum = tp + tm;
    let cp = 2.0 / (step * step * tp * sum);
    let cm = 2.0 / (step * step * tm * sum);
    let mut second = vec![(k, -(cp + cm))];
    let den = step * tp * tm * sum;
    let mut first = vec![(k, (tp * tp - tm * tm) / den)];
    if let Some(p) = np {
        push(&mut second, p, cp);
        push(&mut first, p, tm * tm / den);
    }
    if let Some(m) = nm {
        push(&mut second, m, cm);
        push(&mut first, m, -tp * tp / den);
    }
    (second, first)
}

impl Stencils {
    pub fn new(mask: &GridMask) -> Self {
        let n = mask.unknowns();
        let h = mask.h;
        let diag = h * std::f64::consts::SQRT_2;
        let mut s = Stencils {
            dx: Vec::with_capacity(n),
            dy: Vec::with_capacity(n),
            dxx: Vec::with_capacity(n),
            dyy: Vec::with_capacity(n),
            dxy: Vec::with_capacity(n),
        };
        for k in 0..n {
            let (xx, x) = line_rows(mask, k, 0, 1, h);
            let (yy, y) = line_rows(mask, k, 2, 3, h);
            let (d1, _) = line_rows(mask, k, 4, 5, diag);
            let (d2, _) = line_rows(mask, k, 6, 7, diag);
            let mut xy = Row::new();
            for (i, c) in d1 {
                push(&mut xy, i, 0.5 * c);
            }
            for (i, c) in d2 {
                push(&mut xy, i, -0.5 * c);
            }
            s.dx.push(x);
            s.dy.push(y);
            s.dxx.push(xx);
            s.dyy.push(yy);
            s.dxy.push(xy);
        }
        s
    }
}

fn apply(row: &Row, u: &[f64]) -> f64 {
    row.iter().map(|&(i, c)| c * u[i]).sum()
}

fn sparse_solve(n: usize, rows: &[Row], rhs: &[f64]) -> Result<Vec<f64>> {
    let triplets: Vec<Triplet<usize, usize, f64>> = rows
        .iter()
        .enumerate()
        .flat_map(|(r, row)| row.iter().map(move |&(c, v)| Triplet::new(r, c, v)))
        .collect();
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::Numerical(format!("sparse assembly failed: {e:?}")))?;
    let lu = mat
        .sp_lu()
        .map_err(|e| Error::Numerical(format!("sparse LU failed: {e:?}")))?;
    let b = Col::from_fn(n, |i| rhs[i]);
    let x = lu.solve(&b);
    let out: Vec<f64> = (0..n).map(|i| x[i]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("sparse solve produced non-finite values".into()));
    }
    Ok(out)
}

/// `|∇u|` at a point where a grid axis crosses `∂Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryGradient {
    pub point: [f64; 2],
    pub normal: [f64; 2],
    pub value: f64,
}

/// Grid solution: `u` at every unknown, zero on `∂Ω`.
#[derive(Debug, Clone)]
pub struct ScalarField2D {
    pub mask: GridMask,
    pub stencils: Stencils,
    pub u: Vec<f64>,
    pub source: SourceTerm,
    pub newton_steps: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
}

/// Below this arm length the node next to the crossing is skipped in the
/// one-sided boundary derivative.
const NEAR_ARM: f64 = 0.1;

impl ScalarField2D {
    /// Wraps nodal values on a mask; used when reading solutions back.
    pub fn from_values(mask: GridMask, u: Vec<f64>, source: SourceTerm) -> Result<Self> {
        if u.len() != mask.unknowns() {
            return Err(Error::input(format!(
                "expected {} nodal values, got {}",
                mask.unknowns(),
                u.len()
            )));
        }
        let stencils = Stencils::new(&mask);
        let mut field = ScalarField2D {
            mask,
            stencils,
            u,
            source,
            newton_steps: 0,
            residual: 0.0,
            residual_history: Vec::new(),
        };
        field.residual = field.residual_vector().iter().fold(0.0, |m: f64, r| m.max(r.abs()));
        Ok(field)
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.mask.spec
    }

    pub fn h(&self) -> f64 {
        self.mask.h
    }

    pub fn coords(&self, k: usize) -> [f64; 2] {
        self.mask.coords(self.mask.nodes[k])
    }

    pub fn argmin(&self) -> usize {
        (0..self.u.len())
            .min_by(|&a, &b| self.u[a].total_cmp(&self.u[b]))
            .unwrap()
    }

    pub fn u_min(&self) -> f64 {
        self.u[self.argmin()]
    }

    /// `(u_x, u_y)` at unknown `k`.
    pub fn gradient(&self, k: usize) -> [f64; 2] {
        [
            apply(&self.stencils.dx[k], &self.u),
            apply(&self.stencils.dy[k], &self.u),
        ]
    }

    /// `(u_xx, u_yy, u_xy)` at unknown `k`.
    pub fn hessian(&self, k: usize) -> [f64; 3] {
        [
            apply(&self.stencils.dxx[k], &self.u),
            apply(&self.stencils.dyy[k], &self.u),
            apply(&self.stencils.dxy[k], &self.u),
        ]
    }

    pub fn hessian_spectra(&self) -> Vec<Vec<f64>> {
        (0..self.u.len())
            .map(|k| {
                let [a, b, c] = self.hessian(k);
                let mean = 0.5 * (a + b);
                let rad = (0.25 * (a - b) * (a - b) + c * c).sqrt();
                vec![mean - rad, mean + rad]
            })
            .collect()
    }

    /// `det D²u − f(u)` at every unknown.
    pub fn residual_vector(&self) -> Vec<f64> {
        equation_residual(&self.stencils, &self.u, &self.source)
    }

    /// Boundary `|∇u|` from one-sided quadratic differences along grid axes
    /// meeting `∂Ω` at no more than 45° from the normal, where
    /// `|∇u| = ∂_d u / (n·d)`.
    pub fn boundary_gradients(&self) -> Vec<BoundaryGradient> {
        let h = self.mask.h;
        let mut out = Vec::new();
        for c in &self.mask.crossings {
            let (di, dj) = DIRECTIONS[c.direction];
            let nd = c.normal[0] * di as f64 + c.normal[1] * dj as f64;
            if nd < FRAC_1_SQRT_2 - 1e-12 {
                continue;
            }
            let back = c.direction ^ 1;
            let mut near = Some(c.node);
            let mut t = c.theta * h;
            if c.theta < NEAR_ARM {
                near = self.mask.neighbour(c.node, back);
                t += h;
            }
            let Some(k1) = near else { continue };
            let Some(k2) = self.mask.neighbour(k1, back) else {
                continue;
            };
            let (t1, t2) = (t, t + h);
            let (u1, u2) = (self.u[k1], self.u[k2]);
            // slope at the crossing of the quadratic through (0,0), (t1,u1), (t2,u2), going inward
            let inward = (u1 * t2 * t2 - u2 * t1 * t1) / (t1 * t2 * (t2 - t1));
            out.push(BoundaryGradient {
                point: [c.point[0], c.point[1]],
                normal: [c.normal[0], c.normal[1]],
                value: -inward / nd,
            });
        }
        out
    }
}

fn equation_residual(st: &Stencils, u: &[f64], f: &SourceTerm) -> Vec<f64> {
    (0..u.len())
        .map(|k| {
            let a = apply(&st.dxx[k], u);
            let b = apply(&st.dyy[k], u);
            let c = apply(&st.dxy[k], u);
            a * b - c * c - f.value(u[k])
        })
        .collect()
}

/// Per-node admissibility flags: discrete `Δu > 0` and `det D²u > 0`.
fn admissible_nodes(st: &Stencils, u: &[f64]) -> Vec<bool> {
    (0..u.len())
        .map(|k| {
            let a = apply(&st.dxx[k], u);
            let b = apply(&st.dyy[k], u);
            let c = apply(&st.dxy[k], u);
            a + b > 0.0 && a * b - c * c > 0.0
        })
        .collect()
}

const MIN_STEP: f64 = 1.0 / (1u64 << 30) as f64;

/// Damped Newton iteration for `det D²u = f(u)`, `u = 0` on `∂Ω`, on the
/// elliptic branch.
///
/// The first iterate solves `Δu₀ = 2√f(0)`, which starts inside the
/// admissible cone because `det ≤ (Δu/2)²`. A Newton step is halved until
/// no node that was admissible loses `Δu > 0` or `det > 0`.
pub fn solve_grid2d(spec: &DomainSpec, f: SourceTerm, cfg: &SolveConfig) -> Result<ScalarField2D> {
    cfg.validate()?;
    f.validate()?;
    spec.validate()?;
    if !f.positive_at_zero() {
        return Err(Error::Source(format!(
            "the grid solver starts from f(0) > 0; {f} vanishes on the boundary"
        )));
    }
    let mask = rasterize(spec, cfg.h)?;
    let n = mask.unknowns();
    if n > MAX_GRID_UNKNOWNS {
        return Err(Error::Configuration(format!(
            "{n} grid unknowns exceed the limit {MAX_GRID_UNKNOWNS}"
        )));
    }
    let st = Stencils::new(&mask);

    let laplace: Vec<Row> = (0..n)
        .map(|k| {
            let mut row = st.dxx[k].clone();
            for &(i, c) in &st.dyy[k] {
                push(&mut row, i, c);
            }
            row
        })
        .collect();
    let mut u = sparse_solve(n, &laplace, &vec![2.0 * f.value(0.0).sqrt(); n])?;

    let mut history = Vec::new();
    let mut steps = 0;
    loop {
        if u.iter().any(|&v| v >= 0.0) {
            return Err(Error::Solver {
                reason: "iterate is not negative inside the domain".into(),
                history,
            });
        }
        let res = equation_residual(&st, &u, &f);
        let norm = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        history.push(norm);
        if !norm.is_finite() {
            return Err(Error::Solver {
                reason: "residual is not finite".into(),
                history,
            });
        }
        if norm <= cfg.tol {
            break;
        }
        if steps == cfg.max_iter {
            return Err(Error::Solver {
                reason: format!("Newton did not converge in {} steps", cfg.max_iter),
                history,
            });
        }
        let jac: Vec<Row> = (0..n)
            .map(|k| {
                let a = apply(&st.dxx[k], &u);
                let b = apply(&st.dyy[k], &u);
                let c = apply(&st.dxy[k], &u);
                let mut row = Row::with_capacity(27);
                row.extend(st.dxx[k].iter().map(|&(i, v)| (i, v * b)));
                row.extend(st.dyy[k].iter().map(|&(i, v)| (i, v * a)));
                row.extend(st.dxy[k].iter().map(|&(i, v)| (i, -2.0 * c * v)));
                row.push((k, -f.derivative(u[k])));
                row
            })
            .collect();
        let rhs: Vec<f64> = res.iter().map(|r| -r).collect();
        let delta = sparse_solve(n, &jac, &rhs)?;
        let before = admissible_nodes(&st, &u);
        let mut t = cfg.damping;
        loop {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + t * d).collect();
            let after = admissible_nodes(&st, &trial);
            let kept = before.iter().zip(&after).all(|(&b, &a)| !b || a);
            if kept && trial.iter().all(|v| v.is_finite()) {
                u = trial;
                break;
            }
            t *= 0.5;
            if t < MIN_STEP {
                return Err(Error::Solver {
                    reason: "admissibility lost and not recovered by damping".into(),
                    history,
                });
            }
        }
        steps += 1;
    }
    if admissible_nodes(&st, &u).iter().any(|ok| !ok) {
        return Err(Error::Solver {
            reason: "converged iterate is not admissible at every node".into(),
            history,
        });
    }
    let residual = *history.last().unwrap();
    Ok(ScalarField2D {
        mask,
        stencils: st,
        u,
        source: f,
        newton_steps: steps,
        residual,
        residual_history: history,
    })
}
