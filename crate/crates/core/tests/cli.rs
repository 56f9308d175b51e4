use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

const PROGRAM: &str = "config { n = 3; S1 = {1,2}; S2 = {1,3} }\n\
                       M = Op[X1]{1,0} ; bd1 ; Op[X0]{(1+xi3^2)^(-2), -2}\n";

fn morcalc(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_morcalc"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

#[test]
fn classify_from_stdin() {
    let o = morcalc(&["classify", "M"], PROGRAM);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["words"][0]["type"], "B1");
    assert_eq!(v["words"][0]["stratum"], "X1");
}

#[test]
fn parse_and_validation_errors_exit_with_two() {
    let o = morcalc(&["classify", "M"], "config { n = 3; S1 = {1,2}; S2 = {1,3} }\nM = bd1 ; cob1\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("order violation"));
    let o = morcalc(&["classify", "M"], "config { n = 3; S1 = {1,2}; S2 = {1,3} }\nM = Op[X0]{xi1 +, 0}\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("2:"));
    assert_eq!(morcalc(&["symbol", "M", "--stratum", "X4"], PROGRAM).status.code(), Some(2));
}

#[test]
fn failed_checks_exit_with_one() {
    // too coarse a schedule for the 5% tolerance
    let o = morcalc(&["verify", "trace", "--M", "8,16", "--N", "8", "--samples", "2"], "");
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn print_round_trips_and_out_writes_a_copy() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.mor");
    let a = morcalc(&["print", "--out", out.to_str().unwrap()], PROGRAM);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(std::fs::read(&out).unwrap(), a.stdout);
    let b = morcalc(&["print", out.to_str().unwrap()], "");
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_compose_on_the_fixtures() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let o = morcalc(&["verify", "compose", "--fixtures", fixtures.to_str().unwrap(), "--points", "3"], "");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["reports"][0]["values"]["max_relative_error"].as_f64().unwrap() <= 1e-10);
}
