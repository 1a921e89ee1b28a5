//! Versioned columnar text format for solutions, and a JSON summary.
//!
//! Numbers are written with the shortest representation that parses back
//! to the same `f64`, so a write/read cycle is bit-exact.

use super::{admissibility_report, RadialProfile, ScalarField2D, Solution, SolveConfig, SourceTerm};
use crate::domain::{rasterize, DomainSpec};
use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

pub const FORMAT_TAG: &str = "hess2-solution";
pub const FORMAT_VERSION: u32 = 1;
pub const SUMMARY_SCHEMA: &str = "hess2.solution-summary/1";

pub fn to_text(sol: &Solution, cfg: &SolveConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{FORMAT_TAG} {FORMAT_VERSION}");
    let kind = match sol {
        Solution::Radial(_) => "radial",
        Solution::Grid(_) => "grid2d",
    };
    let _ = writeln!(s, "kind {kind}");
    let _ = writeln!(s, "source {}", sol.source());
    let _ = writeln!(s, "tol {}", cfg.tol);
    let _ = writeln!(s, "max_iter {}", cfg.max_iter);
    let _ = writeln!(s, "damping {}", cfg.damping);
    let _ = writeln!(s, "eigen_tol {}", cfg.eigen_tol);
    let _ = writeln!(s, "eigen_max_iter {}", cfg.eigen_max_iter);
    let _ = writeln!(s, "iterations {}", sol.iterations());
    let _ = writeln!(s, "residual {}", sol.final_residual());
    match sol {
        Solution::Radial(p) => {
            let _ = writeln!(s, "dim {}", p.dim);
            let _ = writeln!(s, "radius {}", p.radius);
            let _ = writeln!(s, "nodes {}", p.intervals());
            let _ = writeln!(s, "order {}", p.order);
            let _ = writeln!(s, "columns r u up");
            for j in 0..p.r.len() {
                let _ = writeln!(s, "{} {} {}", p.r[j], p.u[j], p.up[j]);
            }
        }
        Solution::Grid(g) => {
            let _ = writeln!(s, "domain {}", g.spec());
            let _ = writeln!(s, "h {}", g.h());
            let _ = writeln!(s, "unknowns {}", g.u.len());
            let _ = writeln!(s, "columns i j u");
            for (k, &node) in g.mask.nodes.iter().enumerate() {
                let (i, j) = g.mask.node_ij(node);
                let _ = writeln!(s, "{i} {j} {}", g.u[k]);
            }
        }
    }
    s
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::input(format!("bad value '{v}' for '{key}'")))
}

pub fn from_text(text: &str) -> Result<(Solution, SolveConfig)> {
    let mut lines = text.lines();
    let head = lines.next().unwrap_or_default();
    if head != format!("{FORMAT_TAG} {FORMAT_VERSION}") {
        return Err(Error::input(format!("unrecognised solution header '{head}'")));
    }
    let mut meta = HashMap::new();
    for line in lines.by_ref() {
        let (k, v) = line
            .split_once(' ')
            .ok_or_else(|| Error::input(format!("malformed header line '{line}'")))?;
        if k == "columns" {
            break;
        }
        meta.insert(k.to_string(), v.to_string());
    }
    let get = |k: &str| {
        meta.get(k)
            .map(String::as_str)
            .ok_or_else(|| Error::input(format!("missing header field '{k}'")))
    };
    let source: SourceTerm = get("source")?.parse()?;
    let mut cfg = SolveConfig {
        tol: parse("tol", get("tol")?)?,
        max_iter: parse("max_iter", get("max_iter")?)?,
        damping: parse("damping", get("damping")?)?,
        eigen_tol: parse("eigen_tol", get("eigen_tol")?)?,
        eigen_max_iter: parse("eigen_max_iter", get("eigen_max_iter")?)?,
        ..SolveConfig::default()
    };
    let iterations: usize = parse("iterations", get("iterations")?)?;
    let residual: f64 = parse("residual", get("residual")?)?;
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split_whitespace().collect()).collect();
    if rows.iter().any(|r| r.len() != 3) {
        return Err(Error::input("every data row needs three columns"));
    }
    let sol = match get("kind")? {
        "radial" => {
            let nodes: usize = parse("nodes", get("nodes")?)?;
            cfg.nodes = nodes;
            if rows.len() != nodes + 1 {
                return Err(Error::input("radial row count does not match 'nodes'"));
            }
            let col = |c: usize| -> Result<Vec<f64>> { rows.iter().map(|r| parse("row", r[c])).collect() };
            Solution::Radial(RadialProfile {
                dim: parse("dim", get("dim")?)?,
                radius: parse("radius", get("radius")?)?,
                r: col(0)?,
                u: col(1)?,
                up: col(2)?,
                order: parse("order", get("order")?)?,
                source,
                iterations,
                defect: residual,
            })
        }
        "grid2d" => {
            let spec: DomainSpec = get("domain")?.parse()?;
            let h: f64 = parse("h", get("h")?)?;
            cfg.h = h;
            let mask = rasterize(&spec, h)?;
            if rows.len() != mask.unknowns() {
                return Err(Error::input("grid row count does not match the rasterized domain"));
            }
            let mut u = Vec::with_capacity(rows.len());
            for (k, r) in rows.iter().enumerate() {
                let (i, j): (usize, usize) = (parse("i", r[0])?, parse("j", r[1])?);
                if mask.node_index(i, j) != mask.nodes[k] {
                    return Err(Error::input(format!("row {k} is not at the expected grid node")));
                }
                u.push(parse("u", r[2])?);
            }
            let mut field = ScalarField2D::from_values(mask, u, source)?;
            field.newton_steps = iterations;
            field.residual = residual;
            Solution::Grid(field)
        }
        other => return Err(Error::input(format!("unknown solution kind '{other}'"))),
    };
    Ok((sol, cfg))
}

pub fn write_solution(path: &Path, sol: &Solution, cfg: &SolveConfig) -> Result<()> {
    std::fs::write(path, to_text(sol, cfg))?;
    Ok(())
}

pub fn read_solution(path: &Path) -> Result<(Solution, SolveConfig)> {
    from_text(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionSummary {
    pub schema: &'static str,
    pub kind: &'static str,
    pub source: String,
    pub dim: usize,
    pub u_min: f64,
    pub boundary_gradient_min: f64,
    pub boundary_gradient_max: f64,
    pub iterations: usize,
    pub residual: f64,
    pub admissibility: super::AdmissibilityReport,
    pub config: SolveConfig,
}

pub fn summary(sol: &Solution, cfg: &SolveConfig) -> SolutionSummary {
    let (gmin, gmax) = sol.boundary_gradient_range();
    SolutionSummary {
        schema: SUMMARY_SCHEMA,
        kind: match sol {
            Solution::Radial(_) => "radial",
            Solution::Grid(_) => "grid2d",
        },
        source: sol.source().to_string(),
        dim: sol.dim(),
        u_min: sol.u_min(),
        boundary_gradient_min: gmin,
        boundary_gradient_max: gmax,
        iterations: sol.iterations(),
        residual: sol.final_residual(),
        admissibility: admissibility_report(sol),
        config: *cfg,
    }
}

pub fn summary_json(sol: &Solution, cfg: &SolveConfig) -> String {
    serde_json::to_string_pretty(&summary(sol, cfg)).expect("summary is serializable")
}
