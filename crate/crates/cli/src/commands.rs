use crate::config::{ModeChoice, Problem, RunConfig};
use crate::error::{exit, CliError, CliResult};
use hess2_core::analysis::{
    applicable_theorems, bounds_report, convexity_witness, critical_point_report, domain_label, pfunction_field,
    principle_case, rows_to_csv, transform_preset, Application, CaseRow, PFunctionSpec, PrincipleMode,
    PrincipleVerdict, Theorem,
};
use hess2_core::campaign::{identity_scan, IneqCampaign};
use hess2_core::matineq::MatrixSign;
use hess2_core::solver::{io, solve_eigen_radial, solve_grid2d, solve_radial, Solution, SolveConfig, SourceTerm};
use hess2_core::Error;
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const INEQ_SCHEMA: &str = "hess2.ineq-summary/1";
pub const SOLVE_SCHEMA: &str = "hess2.solve/1";
pub const VERIFY_SCHEMA: &str = "hess2.verify/1";
pub const SCAN_SCHEMA: &str = "hess2.identity-scan/1";

/// Writes report files into the configured output directory.
struct Reporter {
    dir: PathBuf,
}

impl Reporter {
    fn new(cfg: &RunConfig) -> CliResult<Self> {
        let dir = cfg.out.clone();
        fs::create_dir_all(&dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        let rep = Reporter { dir };
        rep.write("config.txt", &cfg.canonical())?;
        Ok(rep)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.path(name);
        fs::write(&path, contents).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    fn write_json(&self, name: &str, value: &Value) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
        text.push('\n');
        self.write(name, &text)
    }
}

// ---------------------------------------------------------------------------
// ineq

#[derive(Serialize)]
struct RecordRow {
    seed: u64,
    dim: usize,
    sign: MatrixSign,
    lhs: f64,
    rhs: f64,
    residual_direct: f64,
    residual_closed: f64,
}

const RECORD_HEADER: [&str; 7] = [
    "seed",
    "dim",
    "sign",
    "lhs",
    "rhs",
    "residual_direct",
    "residual_closed",
];

pub fn ineq(cfg: &RunConfig) -> CliResult<i32> {
    let rep = Reporter::new(cfg)?;
    let campaign = IneqCampaign {
        seed: cfg.seed,
        dims: cfg.dims.clone(),
        count: cfg.count,
        kind: cfg.sign,
    };
    let outcome = campaign.run(cfg.records)?;

    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(RECORD_HEADER)?;
    for s in &outcome.samples {
        let r = &s.record;
        w.serialize(RecordRow {
            seed: s.seed,
            dim: s.dim,
            sign: r.matrix_sign,
            lhs: r.lhs,
            rhs: r.rhs,
            residual_direct: r.residual_direct,
            residual_closed: r.residual_closed,
        })?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io {
        path: "ineq_records.csv".into(),
        source: e.into_error(),
    })?;
    rep.write(
        "ineq_records.csv",
        &String::from_utf8(bytes).expect("CSV output is UTF-8"),
    )?;

    let passed = outcome.passed();
    rep.write_json(
        "ineq_summary.json",
        &json!({
            "schema": INEQ_SCHEMA,
            "config": cfg.canonical(),
            "seed": cfg.seed,
            "sign": cfg.sign,
            "count": cfg.count,
            "dims": outcome.stats,
            "passed": passed,
        }),
    )?;

    println!(
        "{:>4} {:>9} {:>13} {:>13} {:>13} {:>10}",
        "dim", "samples", "min rel res", "max rel res", "max discrep", "violations"
    );
    for s in &outcome.stats {
        println!(
            "{:>4} {:>9} {:>13.5e} {:>13.5e} {:>13.5e} {:>10}",
            s.dim, s.samples, s.min_rel_residual, s.max_rel_residual, s.max_rel_discrepancy, s.violations
        );
    }
    for s in outcome.stats.iter().filter(|s| s.violations > 0) {
        eprintln!(
            "violation: dim {} seed {}: {}",
            s.dim,
            s.first_violation_seed.unwrap_or_default(),
            s.first_violation.as_deref().unwrap_or("unknown")
        );
    }
    Ok(if passed { exit::PASS } else { exit::FAILURE })
}

// ---------------------------------------------------------------------------
// solve

struct Solved {
    sol: Solution,
    solver: SolveConfig,
    eigenvalue: Option<f64>,
}

impl Solved {
    fn source(&self) -> SourceTerm {
        self.sol.source()
    }
}

/// The source for an inline solve: the explicit one, else the application's.
fn resolve_source(cfg: &RunConfig) -> CliResult<SourceTerm> {
    if let Some(f) = cfg.source {
        return Ok(f);
    }
    Ok(match cfg.app {
        Some(Application::Power) => {
            let p = cfg
                .p
                .ok_or_else(|| CliError::Config("application 3 needs an exponent p".into()))?;
            let f = SourceTerm::Power { lambda: cfg.lambda, p };
            f.validate()?;
            f
        }
        _ => SourceTerm::constant(1.0),
    })
}

fn solve_inline(cfg: &RunConfig) -> CliResult<Solved> {
    if cfg.problem == Problem::Eigen || cfg.app == Some(Application::Eigen) {
        if cfg.problem == Problem::Grid2d {
            return Err(CliError::Config(
                "the eigenvalue problem is solved radially; drop --grid2d".into(),
            ));
        }
        let (lambda, p) = solve_eigen_radial(cfg.dim, cfg.radius, &cfg.solver)?;
        return Ok(Solved {
            sol: Solution::Radial(p),
            solver: cfg.solver,
            eigenvalue: Some(lambda),
        });
    }
    let f = resolve_source(cfg)?;
    let sol = match cfg.problem {
        Problem::Grid2d => Solution::Grid(solve_grid2d(&cfg.domain, f, &cfg.solver)?),
        _ => Solution::Radial(solve_radial(cfg.dim, cfg.radius, f, &cfg.solver)?),
    };
    Ok(Solved {
        sol,
        solver: cfg.solver,
        eigenvalue: None,
    })
}

fn load_or_solve(cfg: &RunConfig) -> CliResult<Solved> {
    match &cfg.solution {
        Some(path) => {
            let (sol, solver) = io::read_solution(path)?;
            let eigenvalue = match sol.source() {
                SourceTerm::Eigen { lambda } => Some(lambda),
                _ => None,
            };
            Ok(Solved {
                sol,
                solver,
                eigenvalue,
            })
        }
        None => solve_inline(cfg),
    }
}

fn profile_dat(sol: &Solution) -> String {
    let mut s = String::new();
    match sol {
        Solution::Radial(p) => {
            s.push_str("# r u u'\n");
            for j in 0..p.r.len() {
                let _ = writeln!(s, "{} {} {}", p.r[j], p.u[j], p.up[j]);
            }
        }
        Solution::Grid(g) => {
            s.push_str("# x y u\n");
            for k in 0..g.u.len() {
                let [x, y] = g.coords(k);
                let _ = writeln!(s, "{x} {y} {}", g.u[k]);
            }
        }
    }
    s
}

fn eigen_residual(s: &Solved) -> Option<f64> {
    match (&s.sol, s.eigenvalue) {
        (Solution::Radial(p), Some(lambda)) => Some(p.equation_residual(&SourceTerm::Eigen { lambda })),
        _ => None,
    }
}

/// Largest eigen-equation residual accepted from `solve --eigen`.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-6;

pub fn solve(cfg: &RunConfig) -> CliResult<i32> {
    let rep = Reporter::new(cfg)?;
    let solved = solve_inline(cfg)?;
    let sol = &solved.sol;
    rep.write("solution.txt", &io::to_text(sol, &solved.solver))?;
    rep.write("profile.dat", &profile_dat(sol))?;

    let summary = io::summary(sol, &solved.solver);
    let residual = eigen_residual(&solved);
    let eigen_ok = residual.is_none_or(|r| r <= EIGEN_RESIDUAL_TOL);
    let adm = &summary.admissibility;
    rep.write_json(
        "summary.json",
        &json!({
            "schema": SOLVE_SCHEMA,
            "config": cfg.canonical(),
            "domain": domain_label(sol),
            "solution": summary,
            "eigenvalue": solved.eigenvalue,
            "eigen_residual": residual,
        }),
    )?;

    println!("domain {}  source {}", domain_label(sol), solved.source());
    println!("u_min = {:.9}", summary.u_min);
    println!(
        "boundary |grad u|: min {:.9}  max {:.9}",
        summary.boundary_gradient_min, summary.boundary_gradient_max
    );
    println!(
        "admissibility: min S1 {:.6e}  min S2 {:.6e}  min cofactor eigenvalue {:.6e}  ({})",
        adm.min_s1,
        adm.min_s2,
        adm.min_cofactor_eigenvalue,
        if adm.admissible { "admissible" } else { "NOT admissible" }
    );
    if let (Some(l), Some(r)) = (solved.eigenvalue, residual) {
        let note = if r <= EIGEN_RESIDUAL_TOL {
            ""
        } else {
            " (exceeds 1e-6; refine --nodes)"
        };
        println!("lambda_1 = {l:.9}  eigen residual {r:.3e}{note}");
    }
    println!("iterations {}  residual {:.3e}", summary.iterations, summary.residual);
    Ok(if adm.admissible && eigen_ok {
        exit::PASS
    } else {
        exit::FAILURE
    })
}

// ---------------------------------------------------------------------------
// verify

#[derive(Serialize)]
struct Skipped {
    case: String,
    alpha: Option<f64>,
    reason: String,
}

#[derive(Serialize)]
struct Checked {
    case: String,
    alpha: f64,
    gamma: String,
    theorems: Vec<Theorem>,
    verdict: PrincipleVerdict,
}

/// The principle checks to run for one `α`: `(case, mode, theorems)`, or
/// the reason nothing applies.
fn plan(
    cfg: &RunConfig,
    sol: &Solution,
    f: &SourceTerm,
    alpha: f64,
    convex: &Result<String, String>,
) -> Result<Vec<(String, PrincipleMode, Vec<Theorem>)>, String> {
    let theorems = applicable_theorems(sol.dim(), f, alpha);
    let forced = |mode: PrincipleMode| {
        let names = theorems.iter().copied().filter(|t| t.mode() == mode).collect();
        vec![(format!("requested-{mode}"), mode, names)]
    };
    match cfg.mode {
        ModeChoice::Min => Ok(forced(PrincipleMode::Min)),
        ModeChoice::Max => Ok(forced(PrincipleMode::Max)),
        ModeChoice::Auto => {
            let mut out: Vec<(String, PrincipleMode, Vec<Theorem>)> = Vec::new();
            let mut reasons = Vec::new();
            for t in theorems {
                if t.needs_convexity() {
                    if let Err(r) = convex {
                        reasons.push(format!("{t}: {r}"));
                        continue;
                    }
                }
                match out.iter_mut().find(|(_, m, _)| *m == t.mode()) {
                    Some((case, _, ts)) => {
                        case.push('+');
                        case.push_str(&t.to_string());
                        ts.push(t);
                    }
                    None => out.push((t.to_string(), t.mode(), vec![t])),
                }
            }
            if out.is_empty() {
                if reasons.is_empty() {
                    reasons.push(format!(
                        "no principle is claimed for N = {}, f = {f}, alpha = {alpha}",
                        sol.dim()
                    ));
                }
                Err(reasons.join("; "))
            } else {
                Ok(out)
            }
        }
    }
}

fn pfunction_dat(sol: &Solution, f: &SourceTerm, cfg: &RunConfig) -> CliResult<String> {
    let mut fields = Vec::new();
    let mut header = match sol {
        Solution::Radial(_) => String::from("# r u"),
        Solution::Grid(_) => String::from("# x y u"),
    };
    for &gamma in &cfg.gammas {
        let base = pfunction_field(sol, f, PFunctionSpec { alpha: 0.0, gamma })?;
        for &alpha in &cfg.alphas {
            let _ = write!(header, " Phi[alpha={alpha},gamma={gamma}]");
            fields.push(base.with_alpha(alpha));
        }
    }
    let u: Vec<f64> = match sol {
        Solution::Radial(p) => p.u[..p.intervals()].to_vec(),
        Solution::Grid(g) => g.u.clone(),
    };
    let mut s = header;
    s.push('\n');
    let emit = |s: &mut String, loc: &[f64], u: f64, vals: Vec<f64>| {
        for x in loc {
            let _ = write!(s, "{x} ");
        }
        let _ = write!(s, "{u}");
        for v in vals {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    };
    let first = &fields[0];
    for (k, sample) in first.interior.iter().enumerate() {
        emit(
            &mut s,
            &sample.location,
            u[k],
            fields.iter().map(|p| p.interior[k].value).collect(),
        );
    }
    s.push_str("\n\n# boundary\n");
    for (k, sample) in first.boundary.iter().enumerate() {
        emit(
            &mut s,
            &sample.location,
            0.0,
            fields.iter().map(|p| p.boundary[k].value).collect(),
        );
    }
    Ok(s)
}

pub fn verify(cfg: &RunConfig) -> CliResult<i32> {
    let rep = Reporter::new(cfg)?;
    let mut skipped = Vec::new();

    // an application whose transform is not admissible is rejected before
    // anything is solved: none of its conclusions can be drawn
    if let Some(app) = cfg.app {
        let p = match (app, cfg.source) {
            (Application::Power, Some(SourceTerm::Power { p, .. })) => Some(p),
            (Application::Power, _) => cfg.p,
            _ => None,
        };
        if let Err(Error::Hypothesis(reason)) = transform_preset(app, p) {
            println!("skipped: application {app}: {reason}");
            rep.write("cases.csv", &rows_to_csv(&[]))?;
            rep.write_json(
                "verify.json",
                &json!({
                    "schema": VERIFY_SCHEMA,
                    "config": cfg.canonical(),
                    "skipped": [Skipped { case: format!("application-{app}"), alpha: None, reason }],
                    "cases": [],
                    "passed": false,
                    "exit_code": exit::HYPOTHESIS,
                }),
            )?;
            return Ok(exit::HYPOTHESIS);
        }
    }

    let solved = load_or_solve(cfg)?;
    let sol = &solved.sol;
    let f = solved.source();
    let mut rows: Vec<CaseRow> = Vec::new();

    let bounds = match cfg.app {
        Some(app) => {
            let b = bounds_report(sol, &f, app, cfg.bound_gamma)?;
            if let Some(reason) = &b.reason {
                skipped.push(Skipped {
                    case: format!("bound-app{app}"),
                    alpha: None,
                    reason: reason.clone(),
                });
            } else {
                rows.push(CaseRow {
                    case: format!("bound-app{app}"),
                    domain: domain_label(sol),
                    source: f.to_string(),
                    alpha: 1.0,
                    gamma: b.gamma,
                    mode: "bound".into(),
                    margin: None,
                    slack: Some(b.slack),
                    holds: b.holds,
                });
            }
            Some(b)
        }
        None => None,
    };

    let witness = convexity_witness(sol);
    let convex = match &witness {
        Ok(w) => Ok(w.transform.clone()),
        Err(e) => Err(e.to_string()),
    };

    let mut checked = Vec::new();
    for &alpha in &cfg.alphas {
        let cases = match plan(cfg, sol, &f, alpha, &convex) {
            Ok(c) => c,
            Err(reason) => {
                skipped.push(Skipped {
                    case: "principle".into(),
                    alpha: Some(alpha),
                    reason,
                });
                continue;
            }
        };
        for &gamma in &cfg.gammas {
            for (case, mode, theorems) in &cases {
                let (row, verdict) = principle_case(case, sol, &f, PFunctionSpec { alpha, gamma }, *mode)?;
                checked.push(Checked {
                    case: case.clone(),
                    alpha,
                    gamma: gamma.to_string(),
                    theorems: theorems.clone(),
                    verdict,
                });
                rows.push(row);
            }
        }
    }

    let critical = match critical_point_report(sol, &f, cfg.alphas[0]) {
        Ok(r) => json!(r),
        Err(e) => json!({ "unavailable": e.to_string() }),
    };

    rep.write("cases.csv", &rows_to_csv(&rows))?;
    rep.write("pfunction.dat", &pfunction_dat(sol, &f, cfg)?)?;

    let failed = rows.iter().filter(|r| !r.holds).count();
    let code = if failed > 0 {
        exit::FAILURE
    } else if !skipped.is_empty() {
        exit::HYPOTHESIS
    } else {
        exit::PASS
    };
    rep.write_json(
        "verify.json",
        &json!({
            "schema": VERIFY_SCHEMA,
            "config": cfg.canonical(),
            "solution": io::summary(sol, &solved.solver),
            "eigenvalue": solved.eigenvalue,
            "bounds": bounds,
            "convexity_witness": match &witness {
                Ok(w) => json!(w),
                Err(e) => json!({ "unavailable": e.to_string() }),
            },
            "principles": checked,
            "critical_point": critical,
            "cases": rows,
            "skipped": skipped,
            "passed": code == exit::PASS,
            "exit_code": code,
        }),
    )?;

    println!("domain {}  source {}", domain_label(sol), f);
    if let Some(b) = &bounds {
        println!(
            "bound (application {}, gamma {}): lhs {:.9}  rhs {:.9}  slack {:.9}  pointwise {:.3e}  {}",
            b.application,
            b.gamma,
            b.lhs,
            b.rhs,
            b.slack,
            b.pointwise_min_slack,
            if b.holds { "holds" } else { "FAILS" }
        );
    }
    for c in &checked {
        let v = &c.verdict;
        println!(
            "{:<28} alpha {:<8} gamma {:<4} {} margin {:+.6e} (tol {:.1e})  {}",
            c.case,
            c.alpha,
            c.gamma,
            v.mode,
            v.margin,
            v.tolerance,
            if v.holds { "holds" } else { "FAILS" }
        );
    }
    for s in &skipped {
        match s.alpha {
            Some(a) => println!("skipped {} (alpha {a}): {}", s.case, s.reason),
            None => println!("skipped {}: {}", s.case, s.reason),
        }
    }
    Ok(code)
}

// ---------------------------------------------------------------------------
// identity-scan

pub fn identity_scan_cmd(cfg: &RunConfig) -> CliResult<i32> {
    let rep = Reporter::new(cfg)?;
    let r = identity_scan(cfg.seed, cfg.count)?;
    rep.write_json(
        "identity_scan.json",
        &json!({
            "schema": SCAN_SCHEMA,
            "config": cfg.canonical(),
            "report": r,
            "passed": r.passed(),
        }),
    )?;
    let mark = |ok: bool| if ok { "pass" } else { "FAIL" };
    println!(
        "euler:            {} points, max gap/scale {:.3e}  {}",
        r.euler_points,
        r.euler_max_rel_gap,
        mark(r.euler_ok)
    );
    println!(
        "philippin-safoui: {} convex points, min gap/scale {:.3e}  {}",
        r.ps_points,
        r.ps_min_rel_gap,
        mark(r.ps_ok)
    );
    println!(
        "H2 convention:    factor {:.12} on |grad u| S2(kappa), max rel residual {:.3e} over {} probes  {}",
        r.h2_fit.factor,
        r.h2_fit.max_rel_residual,
        r.h2_fit.probes,
        mark(r.h2_ok)
    );
    Ok(if r.passed() { exit::PASS } else { exit::FAILURE })
}

pub fn read_config_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}
