use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn hess2(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hess2"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn solve_radial_torsion() {
    let dir = TempDir::new().unwrap();
    let o = hess2(&["solve", "--radial", "--dim", "3", "--f", "const:1"], dir.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let s = json(&dir.path().join("summary.json"));
    assert_eq!(s["schema"], "hess2.solve/1");
    assert!((f(&s["solution"]["u_min"]) + 1.0 / (2.0 * 3f64.sqrt())).abs() <= 1e-6);
    assert!(s["solution"]["admissibility"]["admissible"].as_bool().unwrap());
    assert!(stdout(&o).contains("u_min = -0.288675"));
    for name in ["solution.txt", "profile.dat", "config.txt"] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
}

#[test]
fn solve_grid_disk_centre_value() {
    let dir = TempDir::new().unwrap();
    let o = hess2(
        &[
            "solve", "--grid2d", "--domain", "disk:1", "--f", "const:1", "--h", "0.015625",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let centre = fs::read_to_string(dir.path().join("profile.dat"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            l.split_whitespace()
                .map(|t| t.parse::<f64>().unwrap())
                .collect::<Vec<_>>()
        })
        .find(|c| c[0].abs() < 1e-12 && c[1].abs() < 1e-12)
        .expect("grid contains the origin");
    assert!((centre[2] + 0.5).abs() <= 2e-3, "u(0,0) = {}", centre[2]);
}

#[test]
fn solve_eigen_ball() {
    let dir = TempDir::new().unwrap();
    let o = hess2(&["solve", "--eigen", "--dim", "3"], dir.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let s = json(&dir.path().join("summary.json"));
    assert!(f(&s["eigenvalue"]) > 0.0);
    assert!(f(&s["eigen_residual"]) <= 1e-6);
}

#[test]
fn coarse_eigen_solve_reports_its_residual() {
    let dir = TempDir::new().unwrap();
    let o = hess2(&["solve", "--eigen", "--dim", "3", "--nodes", "256"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("exceeds"));
}

#[test]
fn verify_torsion_ball_slack() {
    let dir = TempDir::new().unwrap();
    let o = hess2(
        &["verify", "--app", "1", "--radial", "--dim", "3", "--alpha", "1"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let rows = csv_rows(&dir.path().join("cases.csv"));
    let bound = rows.iter().find(|r| r[0] == "bound-app1").expect("bound row");
    let slack: f64 = bound[7].parse().unwrap();
    assert!((slack - 0.244017).abs() <= 1e-6, "slack {slack}");
    assert_eq!(bound[8], "true");
    assert!(rows.iter().all(|r| r[8] == "true"));
    let v = json(&dir.path().join("verify.json"));
    assert_eq!(v["exit_code"], 0);
    assert_eq!(v["convexity_witness"]["transform"], "identity");
    let pf = fs::read_to_string(dir.path().join("pfunction.dat")).unwrap();
    assert!(pf.starts_with("# r u Phi[alpha=1,gamma=0.5]"));
}

#[test]
fn verify_disk_equality_case() {
    let dir = TempDir::new().unwrap();
    let o = hess2(
        &["verify", "--app", "1", "--grid2d", "--domain", "disk:1", "--alpha", "1"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let rows = csv_rows(&dir.path().join("cases.csv"));
    let principles: Vec<_> = rows.iter().filter(|r| r[5] != "bound").collect();
    assert_eq!(principles.len(), 2, "one min and one max check");
    for r in principles {
        let margin: f64 = r[6].parse().unwrap();
        assert!(margin.abs() <= 1e-8, "{r:?}");
        assert_eq!(r[8], "true");
    }
}

#[test]
fn verify_power_beyond_two_is_a_hypothesis_failure() {
    let dir = TempDir::new().unwrap();
    let o = hess2(&["verify", "--app", "3", "--p", "2.5"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("cannot be applied directly"));
    let v = json(&dir.path().join("verify.json"));
    assert_eq!(v["exit_code"], 2);
    assert!(v["skipped"][0]["reason"]
        .as_str()
        .unwrap()
        .contains("not strictly increasing"));
}

#[test]
fn verify_without_applicable_theorem_is_skipped() {
    let dir = TempDir::new().unwrap();
    let o = hess2(
        &["verify", "--radial", "--dim", "3", "--f", "exp-inc", "--alpha", "2"],
        dir.path(),
    );
    assert_eq!(code(&o), 2, "{}", stdout(&o));
    assert!(stdout(&o).contains("no principle is claimed"));
}

#[test]
fn verify_reads_a_solution_file() {
    let dir = TempDir::new().unwrap();
    let solve_dir = dir.path().join("solve");
    assert_eq!(code(&hess2(&["solve", "--eigen", "--dim", "3"], &solve_dir)), 0);
    let file = solve_dir.join("solution.txt");
    let o = hess2(
        &[
            "verify",
            "--app",
            "2",
            "--solution",
            file.to_str().unwrap(),
            "--bound-gamma",
            "0.5",
        ],
        &dir.path().join("verify"),
    );
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v = json(&dir.path().join("verify/verify.json"));
    assert!(f(&v["eigenvalue"]) > 0.0);
    assert!(v["bounds"]["holds"].as_bool().unwrap());
}

#[test]
fn ineq_campaigns() {
    let dir = TempDir::new().unwrap();
    let pos = dir.path().join("pos");
    let o = hess2(
        &[
            "ineq", "--dims", "2..8", "--count", "300", "--sign", "positive", "--seed", "42",
        ],
        &pos,
    );
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let s = json(&pos.join("ineq_summary.json"));
    assert_eq!(s["schema"], "hess2.ineq-summary/1");
    let dims = s["dims"].as_array().unwrap();
    assert_eq!(dims.len(), 7);
    assert!(dims.iter().all(|d| f(&d["min_rel_residual"]) >= -1e-9));
    let rows = csv_rows(&pos.join("ineq_records.csv"));
    assert_eq!(rows.len(), 7 * 300);
    assert!(rows.iter().all(|r| r[2] == "positive"));

    let neg = dir.path().join("neg");
    assert_eq!(code(&hess2(&["ineq", "--count", "300", "--sign", "negative"], &neg)), 0);
    let s = json(&neg.join("ineq_summary.json"));
    assert!(s["dims"]
        .as_array()
        .unwrap()
        .iter()
        .all(|d| f(&d["max_rel_residual"]) <= 1e-9));

    let three = dir.path().join("three");
    assert_eq!(
        code(&hess2(
            &["ineq", "--dims", "3", "--count", "500", "--sign", "indefinite"],
            &three
        )),
        0
    );
    let s = json(&three.join("ineq_summary.json"));
    assert!(f(&s["dims"][0]["max_rel_abs_residual"]) <= 1e-10);
}

#[test]
fn identity_scan_defaults() {
    let dir = TempDir::new().unwrap();
    let o = hess2(&["identity-scan", "--count", "200"], dir.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r = &json(&dir.path().join("identity_scan.json"))["report"];
    assert!(f(&r["euler_max_rel_gap"]) <= 1e-10);
    assert!(f(&r["ps_min_rel_gap"]) >= -1e-9);
    assert!(f(&r["h2_fit"]["max_rel_residual"]) <= 1e-8);
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let runs: [&[&str]; 3] = [
        &[
            "verify",
            "--app",
            "1",
            "--grid2d",
            "--domain",
            "ellipse:2,1",
            "--h",
            "0.0625",
            "--alpha",
            "1,-1",
            "--mode",
            "min",
        ],
        &[
            "ineq", "--dims", "2..5", "--count", "200", "--sign", "mixed", "--seed", "7",
        ],
        &["identity-scan", "--count", "50", "--seed", "3"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let out = dir.path().join(i.to_string());
        hess2(args, &out);
        let first = snapshot(&out);
        hess2(args, &out);
        assert_eq!(first, snapshot(&out), "{args:?}");
    }
}

#[test]
fn config_file_round_trips_and_flags_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("a");
    fs::write(
        &cfg,
        format!(
            "# torsion on a ball\ncommand = solve\nproblem = radial\ndim = 4\nnodes = 128\nsource = const:2\nout = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let run = |args: &[&str]| Command::new(env!("CARGO_BIN_EXE_hess2")).args(args).output().unwrap();
    let o = run(&["solve", "--config", cfg.to_str().unwrap(), "--dim", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let canonical = fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(canonical.contains("dim = 2\n"), "the flag wins over the file");
    assert!(canonical.contains("nodes = 128\n"));
    assert!(canonical.contains("source = const:2\n"));
    assert!(canonical.contains("tol = 0.0000000001\n"), "defaults are spelled out");
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["config"].as_str().unwrap(), canonical);

    // feeding the canonical form back reproduces it exactly
    let o = run(&["solve", "--config", out.join("config.txt").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(out.join("config.txt")).unwrap(), canonical);
}

#[test]
fn exit_codes_for_bad_input_and_solver_failure() {
    let dir = TempDir::new().unwrap();
    let o = hess2(&["solve", "--f", "nonsense"], dir.path());
    assert_eq!(code(&o), 1);
    let o = hess2(&["solve", "--radial", "--grid2d"], dir.path());
    assert_eq!(code(&o), 1);
    let o = hess2(
        &[
            "solve",
            "--grid2d",
            "--domain",
            "ellipse:2,1",
            "--f",
            "exp-dec",
            "--h",
            "0.125",
            "--max-iter",
            "5",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}
