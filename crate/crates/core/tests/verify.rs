use std::collections::BTreeSet;

use symvar::bounds::Verdict;
use symvar::verify::*;
use symvar::Error;

fn run_builtin(name: &str) -> RunReport {
    run(&builtin_scenario(name).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn builtin_suite_is_clean() {
    for (name, _, _) in SCENARIOS {
        let r = run_builtin(name);
        let total: f64 = r.timings.iter().filter(|t| t.0 != "group" && t.0 != "sampling").map(|t| t.1).sum();
        println!("{name}: {} bounds, {} invariants, {total:.2}s", r.bounds.len(), r.invariants.len());
        for b in &r.bounds {
            println!("  {:<36} {:>12.5} {:>12.5} {}", b.name, b.lhs.value, b.rhs.value, b.verdict.as_str());
            assert_ne!(b.verdict, Verdict::Violated, "{name}: {b:?}");
        }
        for i in &r.invariants {
            assert!(i.passed, "{name}: {i:?}");
        }
        assert_eq!(r.exit_code(), 0);
    }
}

#[test]
fn unconditional_gaussian_is_verified() {
    let r = run_builtin("unconditional-gaussian");
    let g = r.group.as_ref().unwrap();
    assert!((g.cayley_gap - 0.25).abs() < 1e-12);
    for b in &r.bounds {
        assert!(matches!(b.verdict, Verdict::Verified | Verdict::Reported), "{b:?}");
    }
    assert!(r.bounds.iter().filter(|b| b.verdict == Verdict::Verified).count() >= 8);
}

#[test]
fn spin_abs_is_unbounded() {
    let r = run_builtin("spin-abs");
    let s = r.spin.as_ref().unwrap();
    assert!(s.unbounded);
    for row in &s.rows {
        assert!((row.j - (row.m.abs() + 0.5)).abs() < 1e-8, "{row:?}");
    }
    let gap = r.bounds.iter().find(|b| b.name == "spin-gap").unwrap();
    assert_eq!(gap.verdict, Verdict::Unbounded);
    assert!(gap.rhs.value.is_infinite());
    let csv = r.spin_csv().unwrap().unwrap();
    assert!(csv.starts_with("m,J,J2,cp\r\n"));
}

#[test]
fn empty_bound_list_runs_invariants() {
    let r = run_builtin("invariants-only");
    assert!(r.bounds.is_empty());
    let names: Vec<&str> = r.invariants.iter().map(|i| i.name.as_str()).collect();
    for n in ["decomposition-residual", "hilbert-schmidt-projection", "h-inversion", "centered-conditional", "mean-zero-mc", "averaging-contraction"] {
        assert!(names.contains(&n), "{names:?}");
    }
    assert_eq!(r.bounds_csv().unwrap(), format!("{}\r\n", BOUND_COLUMNS.join(",")));
}

#[test]
fn every_bound_is_reachable() {
    let mut seen = BTreeSet::new();
    for (name, _, _) in SCENARIOS {
        seen.extend(builtin_scenario(name).unwrap().bounds.list);
    }
    for b in BOUND_NAMES {
        assert!(seen.contains(*b), "bound '{b}' is not used by any built-in scenario");
    }
}

#[test]
fn reports_are_byte_identical() {
    for name in ["unconditional-gaussian", "spin-exchangeable", "isotropic-cube"] {
        let a = run_builtin(name);
        let b = run_builtin(name);
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap(), "{name}");
        assert_eq!(a.bounds_csv().unwrap(), b.bounds_csv().unwrap());
    }
}

#[test]
fn catalog() {
    let all = list_builtins(None);
    assert!(all.iter().filter(|e| e.kind == "scenario").count() >= 12);
    for kind in ["model", "group", "potential"] {
        assert!(all.iter().any(|e| e.kind == kind));
    }
    let spin: Vec<_> = list_builtins(Some("spin")).into_iter().filter(|e| e.kind == "scenario").collect();
    assert!(spin.len() >= 4);
    assert!(spin.iter().all(|e| e.name.contains("spin")));
    assert!(list_builtins(Some("no-such-thing")).is_empty());
}

#[test]
fn files_are_written_next_to_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plane.toml");
    std::fs::write(&path, builtin_scenario_text("gaussian-plane").unwrap()).unwrap();
    let r = run_scenario(&path, None).unwrap();
    for f in ["plane.csv", "plane.json", "plane.invariants.csv", "plane.timings.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("plane.csv")).unwrap();
    assert_eq!(csv.lines().count(), r.bounds.len() + 1);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("plane.json")).unwrap()).unwrap();
    assert_eq!(json["scenario"]["seed"], 33);
    assert_eq!(json["table"].as_array().unwrap().len(), r.bounds.len());

    let out = tempfile::tempdir().unwrap();
    run_scenario(&path, Some(out.path())).unwrap();
    assert!(out.path().join("plane.json").exists());
}

#[test]
fn scenario_errors_name_the_line() {
    let text = "seed = 1\n[model]\nname = \"gaussian:3\"\n[group]\nname = \"unconditional:2\"\n";
    let e = run(&Scenario::parse(text).unwrap()).unwrap_err();
    assert!(matches!(e, Error::Scenario { line: 5, .. }), "{e:?}");
    let text = "seed = 1\n[model]\nname = \"torus:3\"\n";
    assert!(matches!(run(&Scenario::parse(text).unwrap()), Err(Error::Scenario { line: 3, .. })));
    let text = "seed = 1\n[model]\nname = \"gaussian:2\"\n[bounds]\nlist = [\"varnorm\"]\n";
    assert!(matches!(run(&Scenario::parse(text).unwrap()), Err(Error::Scenario { line: 5, .. })));
    let text = "seed = 1\n[model]\nname = \"gaussian:2\"\n[bounds]\nfunctions = [\"x9\"]\n";
    assert!(matches!(run(&Scenario::parse(text).unwrap()), Err(Error::Scenario { line: 5, .. })));
}

#[test]
fn functions_by_name() {
    assert_eq!(parse_function("x2", 3).unwrap().eval(&[1.0, 2.0, 3.0]), 2.0);
    assert_eq!(parse_function("norm2", 2).unwrap().eval(&[1.0, 2.0]), 5.0);
    assert_eq!(parse_function("norm4", 2).unwrap().eval(&[1.0, 2.0]), 17.0);
    assert_eq!(parse_function("h2:1", 2).unwrap().eval(&[2.0, 0.0]), 3.0);
    assert!(parse_function("x0", 2).is_err());
    assert!(parse_function("sin", 2).is_err());
}
