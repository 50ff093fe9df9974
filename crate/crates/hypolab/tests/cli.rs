use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hypolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypolab")).args(args).output().expect("spawn hypolab")
}

fn run_config(dir: &Path, name: &str, json: &str, extra: &[&str]) -> (Output, std::path::PathBuf) {
    let cfg = dir.join(format!("{name}.json"));
    fs::write(&cfg, json).unwrap();
    let out = dir.join(name);
    let mut args = vec!["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (hypolab(&args), out)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn table1_alpha_one_and_a_half() {
    let tmp = tempfile::tempdir().unwrap();
    let (o, out) = run_config(tmp.path(), "t1", r#"{"kind": "table1", "alpha": 1.5}"#, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("table1.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "operator,p,verdict,expected_holds");
    assert!(rows[1].ends_with(",holds,true"), "{csv}");
    assert!(rows[2].ends_with(",fails,false"), "{csv}");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert!(out.join("plot.svg").exists());
}

#[test]
fn radius_above_r0_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let (o, out) = run_config(tmp.path(), "bad", r#"{"kind": "profile-elliptic", "r": 0.5}"#, &[]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("r0 = 0.3465735902799726"), "{err}");
    assert!(!out.exists());
}

#[test]
fn unknown_key_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let (o, _) = run_config(tmp.path(), "bad", r#"{"kind": "lp-suite", "samplez": 3}"#, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("samplez"), "{}", stderr(&o));
}

#[test]
fn lp_suite_passes_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{"kind": "lp-suite", "samples": 20}"#;
    let (a, out_a) = run_config(tmp.path(), "a", cfg, &["--seed", "11"]);
    let (b, out_b) = run_config(tmp.path(), "b", cfg, &["--seed", "11"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(b.status.code(), Some(0));
    for f in ["report.json", "checks.csv", "bands.csv"] {
        assert_eq!(fs::read(out_a.join(f)).unwrap(), fs::read(out_b.join(f)).unwrap(), "{f}");
    }
    let (_, out_c) = run_config(tmp.path(), "c", cfg, &["--seed", "12"]);
    assert_ne!(fs::read(out_a.join("bands.csv")).unwrap(), fs::read(out_c.join("bands.csv")).unwrap());
}

#[test]
fn failing_mp_check_exits_two_and_renders() {
    let tmp = tempfile::tempdir().unwrap();
    let (o, out) = run_config(tmp.path(), "mp", r#"{"kind": "mp-check", "alpha": [2.0], "p": [1.0]}"#, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    // the rate limit is -inf here, which must survive the JSON round trip
    let again = tmp.path().join("again");
    let r = hypolab(&["render", out.join("report.json").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", stderr(&r));
    for f in ["mp_check.csv", "s_curve.csv"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn coarse_probe_is_under_resolved() {
    let tmp = tempfile::tempdir().unwrap();
    let (o, out) = run_config(tmp.path(), "ur", r#"{"kind": "superlog-probe", "alpha": 1, "p": [1], "probe": {"n": 31}}"#, &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("probe.csv")).unwrap();
    assert!(csv.starts_with("p,k,zeta,lambda_min,ratio\n"));
    assert_eq!(csv.lines().count(), 1 + 17);
}

#[test]
fn render_reproduces_run_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let (o, out) = run_config(tmp.path(), "el", r#"{"kind": "profile-elliptic", "lambdas": [1, 4], "n": 31}"#, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let again = tmp.path().join("again");
    let r = hypolab(&["render", out.join("report.json").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", stderr(&r));
    for f in ["summary.csv", "profiles.csv"] {
        let text = fs::read_to_string(out.join(f)).unwrap();
        assert!(!text.contains('\r'));
        assert_eq!(text, fs::read_to_string(again.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn missing_config_exits_one() {
    let o = hypolab(&["run", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(1));
}
