use std::path::Path;
use std::process::{Command, Output};

fn witness(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_witness"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).expect("valid JSON")
}

#[test]
fn optimize_chsh_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "chsh.json",
        r#"{"schema":1,"n":2,"signs":[1,1,1,-1]}"#,
    );
    let out = witness(&["optimize", "--input", &input]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out.stdout);
    assert_eq!(v["schema"], 1);
    assert!((v["best_norm"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-9);
    let summary = String::from_utf8(out.stderr).unwrap();
    assert_eq!(summary.lines().count(), 1);
    assert!(summary.starts_with("optimize: best_norm 1.41421356"));
}

#[test]
fn summary_goes_to_stdout_with_out() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "one.json",
        r#"{"n":3,"signs":[1,1,1,1,1,1,1,1]}"#,
    );
    let target = dir.path().join("beta.json");
    let out = witness(&[
        "transform",
        "--input",
        &input,
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stderr.is_empty());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("transform: n = 3, support size 1"));
    let v = json(&std::fs::read(target).unwrap());
    assert_eq!(v["numerators"], serde_json::json!([8, 0, 0, 0, 0, 0, 0, 0]));
    assert_eq!(v["denominator"], 8);
}

#[test]
fn mk_five() {
    let out = witness(&["mk", "--n", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out.stdout);
    assert!((v["report"]["best_norm"].as_f64().unwrap() - 4.0).abs() < 1e-6);
    assert_eq!(v["target_norm"], 4.0);
    assert!(v["f_hex"].as_str().unwrap().len() == 8);
}

#[test]
fn polytope_check_prints_inside_or_facet() {
    let dir = tempfile::tempdir().unwrap();
    let inside = write(dir.path(), "in.json", r#"{"schema":1,"n":2,"q":[1,1,1,1]}"#);
    let out = witness(&["polytope-check", "--input", &inside]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stderr).unwrap().trim(), "inside");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let q = format!(r#"{{"schema":1,"n":2,"q":[{h},{h},{h},{}]}}"#, -h);
    let outside = write(dir.path(), "out.json", &q);
    let out = witness(&["polytope-check", "--input", &outside]);
    let facet = String::from_utf8(out.stderr).unwrap().trim().to_owned();
    assert_eq!(facet.len(), 2);
    assert_eq!(json(&out.stdout)["violated_facet"], facet.as_str());
}

#[test]
fn invalid_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = write(dir.path(), "a.json", "{");
    let bad_sign = write(dir.path(), "b.json", r#"{"n":1,"signs":[1,0]}"#);
    let chsh = write(dir.path(), "c.json", r#"{"n":2,"signs":[1,1,1,-1]}"#);
    for args in [
        vec!["optimize", "--input", &bad_json],
        vec!["optimize", "--input", &bad_sign],
        vec!["optimize", "--input", &chsh, "--n", "3"],
        vec!["optimize"],
        vec!["sample", "--n", "3"],
        vec!["sample", "--n", "3", "--seed", "1", "--samples", "0"],
        vec!["optimize", "--input", &chsh, "--tol", "0"],
        vec!["mk", "--n", "4", "--format", "csv"],
        vec!["no-such-command"],
        vec!["optimize", "--input", "/nonexistent/file.json"],
    ] {
        let out = witness(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn size_limits_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let signs = vec!["1"; 2048].join(",");
    let big = write(
        dir.path(),
        "big.json",
        &format!(r#"{{"n":11,"signs":[{signs}]}}"#),
    );
    assert_eq!(
        witness(&["oracle-check", "--input", &big]).status.code(),
        Some(4)
    );
    let q = format!(r#"{{"n":5,"q":[{}]}}"#, vec!["0"; 32].join(","));
    let wide = write(dir.path(), "q.json", &q);
    assert_eq!(
        witness(&["polytope-check", "--input", &wide]).status.code(),
        Some(4)
    );
    assert_eq!(
        witness(&["sample", "--n", "13", "--seed", "0"])
            .status
            .code(),
        Some(4)
    );
}

#[test]
fn oracle_check_with_explicit_angles() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "w.json",
        r#"{"schema":1,"f":{"n":2,"signs":[1,1,1,-1]},"angles":[[0,1.5707963267948966],[-0.7853981633974483,0.7853981633974483]]}"#,
    );
    let out = witness(&["oracle-check", "--input", &input, "--samples", "2000"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out.stdout);
    assert!((v["norm"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-12);
    assert!(v["max_eigen_gap"].as_f64().unwrap() < 1e-10);
    assert!(v["separable_max"].as_f64().unwrap() <= 1.0 + 1e-9);
}

#[test]
fn sample_csv_schema() {
    let out = witness(&[
        "sample",
        "--n",
        "3",
        "--seed",
        "4",
        "--samples",
        "5",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("sample_index,f_hex,norm,sweeps,restarts_used,converged")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    for (i, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 6);
        assert_eq!(fields[0], i.to_string());
        let norm: f64 = fields[2].parse().unwrap();
        assert!(norm <= 2.0 + 1e-9);
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let run = |workers: &str| {
        witness(&[
            "prop2",
            "--n",
            "6",
            "--seed",
            "3",
            "--samples",
            "500",
            "--workers",
            workers,
        ])
        .stdout
    };
    let a = run("1");
    assert_eq!(a, run("2"));
    assert_eq!(a, run("1"));
    let v = json(&a);
    assert_eq!(v["tails"].as_array().unwrap().len(), 3);
    assert_eq!(v["tails"][0]["bound"], 0.25);
}
