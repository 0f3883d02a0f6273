use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morphsynth"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .display()
        .to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn scale_lists_twelve() {
    let o = bin(&["scale", "--l", "4", "--eta", "3"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 12);
    assert_eq!(out.lines().next(), Some("(3,0,0,0)"));

    let o = bin(&["scale", "--l", "4", "--eta", "3", "--hasse"]);
    assert!(stdout(&o).contains("(3,0,0,0) > (2,1,0,0)"));
}

#[test]
fn improve_builtin_budget_45() {
    let o = bin(&["improve", "--builtin", "--budget", "45"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("y12,y22,y34"), "{out}");
    assert!(out.contains("after  N=(3;(3,0,0,0))"), "{out}");
}

#[test]
fn median_of_one() {
    let o = bin(&["--json", "median", "--estimates", "(3,0,0,0)"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(
        v["results"]["generalized"]["medians"][0],
        serde_json::json!([3, 0, 0, 0])
    );
    assert_eq!(v["results"]["generalized"]["deviation"], 0);
}

#[test]
fn json_is_byte_identical() {
    for args in [
        &["--json", "synth", "--builtin"][..],
        &["--json", "aggregate", "--builtin", "--budget", "53"][..],
        &["--json", "check"][..],
    ] {
        assert_eq!(bin(args).stdout, bin(args).stdout, "{args:?}");
    }
}

#[test]
fn files_match_builtin() {
    let from_file = bin(&["--json", "synth", "--model", &data("onboard.json"), "--component", "F"]);
    let builtin = bin(&["--json", "synth", "--builtin", "--component", "F"]);
    let a: serde_json::Value = serde_json::from_slice(&from_file.stdout).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&builtin.stdout).unwrap();
    assert_eq!(a["results"], b["results"]);
    // bundled-data deviations are reported only for --builtin
    assert!(a["deviations"].as_array().unwrap().is_empty());
    assert!(!b["deviations"].as_array().unwrap().is_empty());

    let o = bin(&[
        "improve",
        "--model",
        &data("onboard.json"),
        "--actions",
        &data("f2_improvement.json"),
        "--budget",
        "1",
    ]);
    assert!(stdout(&o).contains("y11,y21,y32"));

    let o = bin(&["aggregate", "--solutions", &data("aggregation.json"), "--budget", "87"]);
    assert!(
        stdout(&o).contains("X2*Y2*Z2*I3*Q5*G4*H2*C1*W2 cost 87 e=(2,1,0,0)"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn check_lists_deviations() {
    let o = bin(&["check"]);
    assert!(o.status.success());
    let out = stdout(&o);
    for needle in ["N(E1)", "N(D2)", "N(F2)", "(0,2,1,0)", "(2;(3,0,0,0))"] {
        assert!(out.contains(needle), "{needle} missing");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(bin(&["nope"]).status.code(), Some(2));
    assert_eq!(bin(&["synth"]).status.code(), Some(2));
    let o = bin(&[
        "improve",
        "--builtin",
        "--budget",
        "0.5",
        "--actions",
        "/nonexistent.json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = bin(&["--builtin", "aggregate", "--budget=-3"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("InvalidCost"), "{err}");
    let o = bin(&["synth", "--builtin", "--component", "X"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("synthesis::NotComposite"));
    assert!(bin(&["--help"]).status.success());
}
