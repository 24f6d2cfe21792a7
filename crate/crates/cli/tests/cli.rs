use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use envelope_cli::config::RunConfig;
use envelope_cli::scan::fmt17;
use envelope_cli::solve::solve_system;
use envelope_core::SolverConfig;
use tempfile::TempDir;

const HO3: &str = "
system.kind = identical
system.dim = 3
species.a.count = 3
species.a.kinetic = nonrel
species.a.mass = 1
potential.aa.form = harmonic
potential.aa.coef = 0.5
";

const COULOMB2: &str = "
system.kind = identical
species.a.count = 2
species.a.mass = 1
potential.aa.form = coulomb
potential.aa.coef = 1
";

const LINEAR2: &str = "
system.kind = identical
species.a.count = 2
species.a.mass = 1
potential.aa.form = linear
potential.aa.coef = 1
";

struct Env {
    dir: TempDir,
}

impl Env {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn envelope(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_envelope"));
    cmd.args(args)
        .env_remove("ET_SOLVER_TOL")
        .env_remove("ET_VALIDATE_CORRUPT_DERIVATIVE");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn run(args: &[&str]) -> Output {
    envelope(args, &[])
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn field(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in {out}"))
        .parse()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_reports_oscillator_energy() {
    let env = Env::new();
    let cfg = env.file("ho.conf", HO3);
    let o = run(&["solve", "--config", s(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!((field(&out, "energy") - 5.1961524).abs() < 1e-7);
    assert!(field(&out, "p0") > 0.0);
    assert!(field(&out, "residual_norm") < 1e-10);
}

#[test]
fn solve_reports_coulomb_energy() {
    let env = Env::new();
    let cfg = env.file("c.conf", COULOMB2);
    let o = run(&["solve", "--config", s(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!((field(&stdout(&o), "energy") + 0.1111111).abs() < 1e-7);
}

#[test]
fn outputs_key_limits_report() {
    let env = Env::new();
    let cfg = env.file("ho.conf", &format!("{HO3}\noutputs = energy"));
    let out = stdout(&run(&["solve", "--config", s(&cfg)]));
    assert!(out.contains("energy = "));
    assert!(!out.contains("p0 = "));
    assert!(!out.contains("residual_norm"));
}

#[test]
fn config_errors_exit_2() {
    let env = Env::new();
    for (name, text) in [
        ("neg.conf", HO3.replace("mass = 1", "mass = -1")),
        ("unknown.conf", format!("{HO3}\nsolver.speed = 3")),
        ("tol.conf", format!("{HO3}\nsolver.tol = -1")),
    ] {
        let cfg = env.file(name, &text);
        let o = run(&["solve", "--config", s(&cfg)]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        assert!(
            stderr(&o).starts_with("error: config error"),
            "{}",
            stderr(&o)
        );
        assert!(o.stdout.is_empty());
    }
    let o = run(&["solve", "--config", s(&env.path("absent.conf"))]);
    assert_eq!(o.status.code(), Some(2));
    let o = envelope(
        &["solve", "--config", s(&env.file("ho.conf", HO3))],
        &[("ET_SOLVER_TOL", "tight")],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ET_SOLVER_TOL"));
}

#[test]
fn non_convergence_exits_3() {
    let env = Env::new();
    let cfg = env.file("ho.conf", HO3);
    let o = run(&["solve", "--config", s(&cfg), "--max-iter", "1"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("no convergence"));
}

#[test]
fn unbound_system_exits_4() {
    let env = Env::new();
    let text = COULOMB2.replace("species.a.mass = 1", "species.a.kinetic = ultra");
    let cfg = env.file("uc.conf", &text);
    let o = run(&["solve", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn solve_writes_json_record() {
    let env = Env::new();
    let cfg = env.file("ho.conf", HO3);
    let out = env.path("rec.json");
    let o = run(&["solve", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success());
    let rec: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(
        rec["energy"].as_f64().unwrap(),
        field(&stdout(&o), "energy")
    );
    assert_eq!(rec["method"], "compact-identical");
    assert!(rec["means"]["rho0"].as_f64().unwrap() > 0.0);
}

#[test]
fn tolerance_precedence() {
    let env = Env::new();
    let tol_of = |cfg: &Path, extra: &[&str], vars: &[(&str, &str)]| {
        let out = env.path("rec.json");
        let mut args = vec!["solve", "--config", s(cfg), "--out", s(&out)];
        args.extend_from_slice(extra);
        let o = envelope(&args, vars);
        assert!(o.status.success(), "{}", stderr(&o));
        let rec: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        rec["tol"].as_f64().unwrap()
    };
    let plain = env.file("ho.conf", HO3);
    let pinned = env.file("pinned.conf", &format!("{HO3}\nsolver.tol = 1e-11"));
    let var = [("ET_SOLVER_TOL", "1e-7")];
    assert_eq!(tol_of(&plain, &[], &[]), SolverConfig::default().tol);
    assert_eq!(tol_of(&plain, &[], &var), 1e-7);
    assert_eq!(tol_of(&pinned, &[], &var), 1e-11);
    assert_eq!(tol_of(&pinned, &["--tol", "1e-9"], &var), 1e-9);
}

#[test]
fn solve_is_deterministic() {
    let env = Env::new();
    let cfg = env.file("mixed.conf", include_str!("../configs/mixed.conf"));
    let a = run(&["solve", "--config", s(&cfg)]);
    let b = run(&["solve", "--config", s(&cfg)]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn particle_count_scan_matches_closed_form() {
    let env = Env::new();
    let cfg = env.file("ho.conf", HO3);
    let out = env.path("scan.csv");
    let o = run(&[
        "scan",
        "--config",
        s(&cfg),
        "--scan-var",
        "n",
        "--from",
        "2",
        "--to",
        "10",
        "--steps",
        "9",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = read_csv(&out);
    assert_eq!(rows.len(), 9);
    for (i, row) in rows.iter().enumerate() {
        let n = row[col(&h, "n")].parse::<f64>().unwrap();
        assert_eq!(n, (i + 2) as f64);
        let e: f64 = row[col(&h, "energy")].parse().unwrap();
        // Q(N) sqrt(2 N k / m) with Q = 3(N-1)/2, k = 0.5, m = 1
        let exact = 1.5 * (n - 1.0) * n.sqrt();
        assert!((e - exact).abs() <= 1e-10 * exact, "N={n}: {e} vs {exact}");
        assert!(row[col(&h, "error")].is_empty());
    }
}

#[test]
fn quantum_number_scan_is_increasing() {
    let env = Env::new();
    let cfg = env.file("lin.conf", LINEAR2);
    let o = run(&[
        "scan",
        "--config",
        s(&cfg),
        "--scan-var",
        "q",
        "--from",
        "1.5",
        "--to",
        "3.5",
        "--steps",
        "9",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = env.file("stdout.csv", &stdout(&o));
    let (h, rows) = read_csv(&out);
    let e: Vec<f64> = rows
        .iter()
        .map(|r| r[col(&h, "energy")].parse().unwrap())
        .collect();
    assert_eq!(e.len(), 9);
    assert!(e.windows(2).all(|w| w[1] > w[0]), "{e:?}");
}

#[test]
fn invalid_scan_point_becomes_error_row() {
    let env = Env::new();
    let cfg = env.file("ho.conf", HO3);
    let out = env.path("scan.csv");
    let o = run(&[
        "scan",
        "--config",
        s(&cfg),
        "--scan-var",
        "n",
        "--from",
        "1",
        "--to",
        "3",
        "--steps",
        "3",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("1 failed"));
    let (h, rows) = read_csv(&out);
    assert!(rows[0][col(&h, "energy")].is_empty());
    assert!(rows[0][col(&h, "error")].contains("particle count"));
    assert!(rows[1][col(&h, "error")].is_empty());
    assert!(rows[2][col(&h, "error")].is_empty());
}

#[test]
fn scan_rejects_inapplicable_variable() {
    let env = Env::new();
    let cfg = env.file("ho.conf", HO3);
    let o = run(&[
        "scan",
        "--config",
        s(&cfg),
        "--scan-var",
        "n_b",
        "--from",
        "1",
        "--to",
        "3",
        "--steps",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scan_rows_follow_index_order() {
    let env = Env::new();
    let cfg = env.file("mixed.conf", include_str!("../configs/mixed.conf"));
    let out = env.path("scan.csv");
    let o = run(&[
        "scan",
        "--config",
        s(&cfg),
        "--scan-var",
        "coupling",
        "--from",
        "0.5",
        "--to",
        "2",
        "--steps",
        "64",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = read_csv(&out);
    let idx: Vec<usize> = rows
        .iter()
        .map(|r| r[col(&h, "index")].parse().unwrap())
        .collect();
    assert_eq!(idx, (0..64).collect::<Vec<_>>());
    let g: Vec<f64> = rows
        .iter()
        .map(|r| r[col(&h, "coupling")].parse().unwrap())
        .collect();
    assert!(g.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn csv_round_trips_bit_exactly() {
    let env = Env::new();
    let text = include_str!("../configs/mixed.conf");
    let cfg = env.file("mixed.conf", text);
    let out = env.path("scan.csv");
    let o = run(&[
        "scan",
        "--config",
        s(&cfg),
        "--scan-var",
        "n_b",
        "--from",
        "1",
        "--to",
        "6",
        "--steps",
        "6",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = read_csv(&out);
    let numeric = |name: &str| name != "index" && name != "iterations" && name != "error";
    let base: RunConfig = text.parse().unwrap();
    let solver = base.solver.resolve(None, None).unwrap();
    for row in &rows {
        for (name, cell) in h.iter().zip(row) {
            if numeric(name) && !cell.is_empty() {
                let x: f64 = cell.parse().unwrap();
                assert_eq!(&fmt17(x), cell, "{name}");
            }
        }
        // recorded energies equal a fresh in-process solve to the last bit
        let mut d = base.system.clone();
        d.b.as_mut().unwrap().count = row[col(&h, "n_b")].parse::<f64>().unwrap() as u64;
        let sol = solve_system(&d.build().unwrap(), &solver).unwrap();
        let e: f64 = row[col(&h, "energy")].parse().unwrap();
        assert_eq!(e.to_bits(), sol.energy.to_bits());
    }
}

fn route_energy(out: &str, route: &str) -> f64 {
    out.lines()
        .find(|l| l.starts_with(route))
        .unwrap_or_else(|| panic!("no {route} row in {out}"))
        .split_whitespace()
        .find_map(|w| w.parse::<f64>().ok())
        .unwrap()
}

fn bound_side(out: &str) -> &str {
    out.lines()
        .find_map(|l| l.strip_prefix("bound_side = "))
        .and_then(|l| l.split_whitespace().next())
        .unwrap_or_else(|| panic!("no bound side in {out}"))
}

#[test]
fn compare_coulomb_pair() {
    let env = Env::new();
    let o = run(&["compare", "--config", s(&env.file("c.conf", COULOMB2))]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!((route_energy(&out, "compact") + 1.0 / 9.0).abs() < 1e-12);
    assert!((route_energy(&out, "extremization") + 1.0 / 9.0).abs() < 1e-12);
    assert!((route_energy(&out, "oracle") + 0.25).abs() < 1e-12);
    assert_eq!(bound_side(&out), "above");
}

#[test]
fn compare_linear_pair() {
    let env = Env::new();
    let o = run(&["compare", "--config", s(&env.file("l.conf", LINEAR2))]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!((route_energy(&out, "compact") - 2.4764).abs() < 1e-4);
    assert!((route_energy(&out, "oracle") - 2.3381).abs() < 1e-4);
    assert_eq!(bound_side(&out), "above");
}

#[test]
fn compare_oscillator_routes_coincide() {
    let env = Env::new();
    let two = "
        system.kind = two-species
        species.a.count = 2
        species.a.mass = 1
        species.b.count = 3
        species.b.mass = 2.5
        potential.aa.form = harmonic
        potential.aa.coef = 0.5
        potential.bb.form = harmonic
        potential.bb.coef = 1.5
        potential.ab.form = harmonic
        potential.ab.coef = 0.8
    ";
    for (name, text) in [("ho3.conf", HO3), ("ho23.conf", two)] {
        let o = run(&["compare", "--config", s(&env.file(name, text))]);
        assert!(o.status.success(), "{}", stderr(&o));
        let out = stdout(&o);
        let c = route_energy(&out, "compact");
        assert!((route_energy(&out, "extremization") - c).abs() <= 1e-10 * c);
        assert!((route_energy(&out, "oracle") - c).abs() <= 1e-10 * c);
        assert!(out.contains("exact-ho"));
        assert_eq!(bound_side(&out), "equal");
    }
}

#[test]
fn compare_two_body_uses_reduced_mass() {
    let env = Env::new();
    let text = "
        system.kind = two-species
        species.a.count = 1
        species.a.mass = 1
        species.b.count = 1
        species.b.mass = 2
        potential.ab.form = coulomb
        potential.ab.coef = 1
    ";
    let o = run(&["compare", "--config", s(&env.file("ab.conf", text))]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    // hydrogen-like ground state with mu = 2/3
    assert!((route_energy(&out, "oracle") + 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(bound_side(&out), "above");
}

#[test]
fn compare_radial_oracle_for_funnel() {
    let env = Env::new();
    let text = LINEAR2.replace(
        "potential.aa.form = linear\npotential.aa.coef = 1",
        "potential.aa.form = sum\npotential.aa.terms = 1:1, -0.5:-1",
    );
    let o = run(&["compare", "--config", s(&env.file("f.conf", &text))]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("radial-numeric"));
    assert_eq!(bound_side(&out), "above");
}

#[test]
fn compare_without_oracle_still_succeeds() {
    let env = Env::new();
    let cfg = env.file("mixed.conf", include_str!("../configs/mixed.conf"));
    let o = run(&["compare", "--config", s(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("unavailable"));
    assert!(!stdout(&o).contains("bound_side"));
}

#[test]
fn validate_passes_on_clean_build() {
    let o = run(&["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("result: 9/9 checks passed"));
}

#[test]
fn validate_passes_with_loosened_tolerance() {
    let o = envelope(&["validate"], &[("ET_SOLVER_TOL", "1e-6")]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("solver tol = 1e-6"));
}

#[test]
fn validate_reports_corrupted_derivative() {
    let o = envelope(&["validate"], &[("ET_VALIDATE_CORRUPT_DERIVATIVE", "1")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("finite-difference derivatives"),
        "{}",
        stderr(&o)
    );
    let out = stdout(&o);
    let failing: Vec<&str> = out.lines().filter(|l| l.contains("FAIL")).collect();
    assert_eq!(failing.len(), 1, "{failing:?}");
    assert!(failing[0].starts_with("finite-difference derivatives"));
}

#[test]
fn library_solve_matches_binary() {
    let run_cfg: RunConfig = HO3.parse().unwrap();
    let cfg = run_cfg.solver.resolve(None, None).unwrap();
    let sol = solve_system(&run_cfg.system.build().unwrap(), &cfg).unwrap();
    let env = Env::new();
    let o = run(&["solve", "--config", s(&env.file("ho.conf", HO3))]);
    assert_eq!(field(&stdout(&o), "energy").to_bits(), sol.energy.to_bits());
}
