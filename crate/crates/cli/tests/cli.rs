use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use wasserlim_core::io::SpaceFile;
use wasserlim_core::spaces::dyadic_interval_space;

fn wasserlim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wasserlim"))
        .args(args)
        .current_dir(dir)
        .env_remove("WASSERLIM_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, v: &Value) {
    fs::write(dir.join(name), v.to_string()).unwrap();
}

/// A three-point path, two measures on it and one on another space.
fn fixtures() -> tempfile::TempDir {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "s.json", &json!({"points": ["a", "b", "c"], "base": 0, "edges": [[0, 1, 1], [1, 2, 1]]}));
    write(d.path(), "a.json", &json!({"space": "s.json", "weights": [1, 0, 0]}));
    write(d.path(), "b.json", &json!({"space": "s.json", "weights": [0, 1, 1]}));
    write(d.path(), "other.json", &json!({"space": {"metric": [[0, 1], [1, 0]]}, "weights": [1, 1]}));
    d
}

#[test]
fn help_matches_golden_files() {
    let d = tempfile::tempdir().unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for sub in ["", "validate", "transport", "geodesic", "cd", "sequence", "counterexample", "quantize"] {
        let mut args: Vec<&str> = if sub.is_empty() { vec![] } else { vec![sub] };
        args.push("--help");
        let out = wasserlim(d.path(), &args);
        assert!(out.status.success());
        let name = if sub.is_empty() { "wasserlim" } else { sub };
        let path = golden.join(format!("{name}.help"));
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            fs::write(&path, &out.stdout).unwrap();
        }
        assert_eq!(stdout(&out), fs::read_to_string(&path).unwrap(), "help for {name} changed");
    }
}

#[test]
fn validate_reports_size_and_diameter() {
    let d = fixtures();
    let out = wasserlim(d.path(), &["validate", "--space", "s.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "metric OK (n=3, diam=2)\n");

    write(d.path(), "bad.json", &json!({"metric": [[0, 1, 3], [1, 0, 1], [3, 1, 0]]}));
    let out = wasserlim(d.path(), &["validate", "--space", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_str(&stderr(&out)).unwrap();
    assert_eq!(err["error"], "TriangleViolation");
}

#[test]
fn transport_writes_the_coupling() {
    let d = fixtures();
    let out = wasserlim(d.path(), &["transport", "--mu", "a.json", "--nu", "b.json", "--p", "1", "--coupling", "c.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let c: Value = serde_json::from_str(&fs::read_to_string(d.path().join("c.json")).unwrap()).unwrap();
    assert_eq!(c["p"], 1.0);
    assert_eq!(c["cost"], 1.5);
    assert_eq!(c["plan"], json!([[0, 1, 0.5], [0, 2, 0.5]]));
}

#[test]
fn mismatched_spaces_are_a_domain_error() {
    let d = fixtures();
    let out = wasserlim(d.path(), &["transport", "--mu", "a.json", "--nu", "other.json"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_str(&stderr(&out)).unwrap();
    assert_eq!(err["error"], "SpaceMismatch");
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_errors_name_the_flag() {
    let d = fixtures();
    let cases: [(&[&str], &str); 6] = [
        (&["transport", "--mu", "a.json", "--nu", "b.json", "--p", "0.5"], "--p"),
        (&["transport", "--mu", "a.json"], "--nu"),
        (&["quantize", "--mu", "a.json", "--delta", "0"], "--delta"),
        (&["sequence", "--dir", ".", "--quantity", "w2", "--tol", "-1"], "--tol"),
        (&["sequence", "--dir", ".", "--quantity", "w1", "--p", "2"], "--p"),
        (&["geodesic", "--mu0", "a.json", "--mu1", "b.json", "--grid", "0,0.5"], "--grid"),
    ];
    for (args, flag) in cases {
        let out = wasserlim(d.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(stderr(&out).contains(flag), "{args:?}: {}", stderr(&out));
    }
    let out = wasserlim(d.path(), &["transport", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    let out = wasserlim(d.path(), &["quantize", "--mu", "missing.json", "--delta", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_fills_gaps_and_flags_win() {
    let d = fixtures();
    write(d.path(), "cfg.json", &json!({"mu": "a.json", "nu": "b.json", "p": 1}));
    let out = wasserlim(d.path(), &["transport", "--config", "cfg.json"]);
    assert_eq!(stdout(&out), "W_1 = 1.5 (2 plan entries)\n");
    let out = wasserlim(d.path(), &["transport", "--config", "cfg.json", "--p", "2"]);
    assert!(stdout(&out).starts_with("W_2 = 1.58113883"), "{}", stdout(&out));

    write(d.path(), "bad.json", &json!({"delta": "small"}));
    let out = wasserlim(d.path(), &["quantize", "--mu", "a.json", "--config", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--delta"));
}

#[test]
fn thread_cap_is_validated() {
    let d = fixtures();
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_wasserlim"))
            .args(["validate", "--space", "s.json"])
            .current_dir(d.path())
            .env("WASSERLIM_THREADS", v)
            .output()
            .unwrap()
    };
    assert_eq!(run("1").status.code(), Some(0));
    let bad = run("zero");
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("WASSERLIM_THREADS"));
}

#[test]
fn counterexample_row_for_n_100() {
    let d = tempfile::tempdir().unwrap();
    let out = wasserlim(d.path(), &["counterexample", "--n", "100", "--csv", "ce.csv", "--svg", "ce.svg"]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(d.path().join("ce.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,w2,tv"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "100");
    assert!((row[1].parse::<f64>().unwrap() - 1.0).abs() <= 1e-12);
    assert!((row[2].parse::<f64>().unwrap() - 0.01).abs() <= 1e-15);
    let svg = fs::read_to_string(d.path().join("ce.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
}

fn dyadic_cases(root: &Path) -> std::path::PathBuf {
    let cases = root.join("cases");
    fs::create_dir(&cases).unwrap();
    for level in 2..=5u32 {
        let space = serde_json::to_value(SpaceFile::from_space(&dyadic_interval_space(level))).unwrap();
        let n = (1usize << level) + 1;
        let x = |i: usize| i as f64 / (n - 1) as f64;
        let mu: Vec<f64> = (0..n).map(|i| 1.0 + x(i)).collect();
        let nu: Vec<f64> = (0..n).map(|i| 2.0 - x(i) * x(i)).collect();
        write(
            &cases,
            &format!("{level:02}.json"),
            &json!({"label": format!("level-{level}"), "mu": {"space": space, "weights": mu}, "nu": {"space": space, "weights": nu}}),
        );
    }
    cases
}

#[test]
fn sequence_over_a_directory() {
    let d = tempfile::tempdir().unwrap();
    dyadic_cases(d.path());
    let out = wasserlim(
        d.path(),
        &["sequence", "--dir", "cases", "--quantity", "w2", "--tol", "0.05", "--csv", "s.csv", "--out", "s.json", "--svg", "s.svg"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(d.path().join("s.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "index,label,value");
    assert!(lines[1].starts_with("0,level-2,"));
    assert_eq!(lines.len(), 5);
    let v: Value = serde_json::from_str(&fs::read_to_string(d.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(v["quantity"], "w2");
    assert_eq!(v["stabilized"], true);
    assert!(fs::read_to_string(d.path().join("s.svg")).unwrap().contains("<polyline"));

    let out = wasserlim(d.path(), &["sequence", "--dir", "cases", "--quantity", "tv"]);
    assert!(stdout(&out).starts_with("tv: "));
}

#[test]
fn cd_and_quantize_reports() {
    let d = tempfile::tempdir().unwrap();
    let space = serde_json::to_value(SpaceFile::from_space(&dyadic_interval_space(3))).unwrap();
    write(d.path(), "lambda.json", &json!({"space": space, "weights": vec![1.0; 9]}));
    let out = wasserlim(
        d.path(),
        &["cd", "--lambda", "lambda.json", "--pairs", "6", "--seed", "7", "--k-hint", "-1", "--out", "r.json"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let line = stdout(&out);
    let k = line.strip_prefix("K_witnessed = ").unwrap().split(' ').next().unwrap();
    assert_eq!(k.split('.').nth(1).unwrap().len(), 3);
    assert!(line.contains("K = -1 holds"));
    let r: Value = serde_json::from_str(&fs::read_to_string(d.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["pairs"].as_array().unwrap().len(), 6);
    assert_eq!(r["worst_pair"]["midpoint"].as_array().unwrap().len(), 9);

    let out = wasserlim(d.path(), &["quantize", "--mu", "lambda.json", "--delta", "0.05", "--p", "1", "--out", "q.json"]);
    assert_eq!(out.status.code(), Some(0));
    let q: Value = serde_json::from_str(&fs::read_to_string(d.path().join("q.json")).unwrap()).unwrap();
    assert!(q["achieved_error"].as_f64().unwrap() <= 0.05);
    assert_eq!(q["cloud"].as_array().unwrap().len() as u64, q["atoms"].as_u64().unwrap());
}
