use std::path::Path;
use std::process::{Command, Output};

fn symvar(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symvar")).args(args).current_dir(cwd).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn list_filters_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = symvar(&["list"], dir.path());
    assert!(o.status.success());
    let all = stdout(&o);
    assert!(all.lines().filter(|l| l.starts_with("scenario")).count() >= 12);

    let o = symvar(&["list", "spin"], dir.path());
    let spin = stdout(&o);
    assert!(spin.lines().all(|l| l.contains("spin")));
    assert!(spin.lines().any(|l| l.contains("spin-abs")));

    let o = symvar(&["list", "no-such-thing"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
}

#[test]
fn gap1d_abs_is_linear_in_m() {
    let dir = tempfile::tempdir().unwrap();
    let o = symvar(&["gap1d", "--potential", "abs", "--m-grid", "-10:10:0.1"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.starts_with("m,J,J2,cp\r\n"));
    let rows: Vec<Vec<f64>> = out.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 201);
    for r in &rows {
        assert!((r[1] - (r[0].abs() + 0.5)).abs() < 1e-8, "{r:?}");
        assert!((r[2] - r[1] * r[1]).abs() < 1e-9);
        assert!(r[3] > 0.0);
    }
}

#[test]
fn group_reports_cayley_gap() {
    let dir = tempfile::tempdir().unwrap();
    let o = symvar(&["group", "unconditional:3"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["cayley_gap"].as_f64().unwrap() - 0.25).abs() < 1e-9);
    assert_eq!(v["order"], 8);

    assert_eq!(symvar(&["group", "torus:3"], dir.path()).status.code(), Some(3));
    assert_eq!(symvar(&["sample", "torus:3"], dir.path()).status.code(), Some(3));
    assert_eq!(symvar(&["gap1d", "--potential", "sine"], dir.path()).status.code(), Some(3));
}

#[test]
fn sample_writes_header_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = symvar(&["sample", "cube:3", "--samples", "50", "--seed", "9", "--burnin", "100", "--thin", "2"], dir.path());
    let b = symvar(&["sample", "cube:3", "--samples", "50", "--seed", "9", "--burnin", "100", "--thin", "2"], dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert!(out.starts_with("x1,x2,x3\r\n"));
    assert_eq!(out.lines().count(), 51);
    for l in out.lines().skip(1) {
        assert!(l.split(',').all(|v| v.parse::<f64>().unwrap().abs() <= 1.0));
    }
}

#[test]
fn verify_builtin_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = symvar(&["verify", "gaussian-plane", "--out-dir", "out", "--samples", "4000", "--seed", "3"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.starts_with("name,lhs,lhs_err,rhs,rhs_err,ratio,verdict,seed\r\n"));
    assert!(out.lines().skip(1).all(|l| l.ends_with(",3")));
    for f in ["gaussian-plane.csv", "gaussian-plane.json", "gaussian-plane.invariants.csv", "gaussian-plane.timings.json"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/gaussian-plane.json")).unwrap()).unwrap();
    assert_eq!(json["scenario"]["sampler"]["samples"], 4000);
}

const MISCONFIGURED: &str = "seed = 5
[model]
name = \"gaussian:2\"
[group]
name = \"unconditional:2\"
[sampler]
samples = 5000
[bounds]
list = [\"invariance1\"]
rho = 10.0
[invariants]
trials = 20
";

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rho.toml");
    std::fs::write(&path, MISCONFIGURED).unwrap();
    let o = symvar(&["verify", "--scenario", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("violated"));
    assert!(dir.path().join("rho.csv").exists());

    std::fs::write(&path, MISCONFIGURED.replace("rho = 10.0", "rho = 1.0")).unwrap();
    assert_eq!(symvar(&["verify", "--scenario", path.to_str().unwrap()], dir.path()).status.code(), Some(0));

    let o = symvar(&["verify", "--scenario", path.to_str().unwrap(), "--constants", "nonsense=1"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(symvar(&["verify", "no-such-scenario"], dir.path()).status.code(), Some(3));

    std::fs::write(&path, "[model]\nname = \"gaussian:2\"\n").unwrap();
    let o = symvar(&["verify", "--scenario", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
}

#[test]
fn constants_override_changes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("split.toml");
    std::fs::write(
        &path,
        "seed = 2\n[model]\nname = \"isotropic-cube:4\"\n[group]\nname = \"unconditional:4\"\n[sampler]\nsamples = 2000\n[bounds]\nlist = [\"var-split\"]\n[invariants]\ntrials = 10\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let a = stdout(&symvar(&["verify", "--scenario", p], dir.path()));
    let b = stdout(&symvar(&["verify", "--scenario", p, "--constants", "var_split_c=24"], dir.path()));
    let rhs = |s: &str| s.lines().nth(1).unwrap().split(',').nth(3).unwrap().parse::<f64>().unwrap();
    assert!((rhs(&a) - rhs(&b) - 24.0 * 4.0).abs() < 1e-9, "{a}\n{b}");
}
