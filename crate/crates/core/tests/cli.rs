use std::process::Command;

fn nbvb(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_nbvb"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn zero_density_trajectory_is_a_single_row() {
    let out = nbvb(&[
        "trajectory",
        "--lambda",
        "x^4",
        "--rho",
        "x^5",
        "--alpha",
        "0",
        "--n",
        "500",
        "--trials",
        "3",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# nbvb {"));
    assert_eq!(&lines[1..], ["iteration,alpha_hat", "0,0"]);
}

#[test]
fn exit_codes() {
    assert_eq!(
        nbvb(&["threshold", "--bracket", "0.6", "0.3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(nbvb(&["reproduce", "nope"]).status.code(), Some(2));
    assert_eq!(
        nbvb(&["gen", "--lambda", "x^4", "--rho", "x^5"])
            .status
            .code(),
        Some(2)
    );
    let missing = nbvb(&["rerun", "/nonexistent/file.csv"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn outputs_rerun_to_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let out = nbvb(&[
        "optimize",
        "--dv",
        "4",
        "--rho",
        "x^5",
        "--max-degree",
        "6",
        "--seed",
        "3",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let again = nbvb(&["rerun", first.to_str().unwrap()]);
    assert!(again.status.success());
    assert_eq!(std::fs::read(&first).unwrap(), again.stdout);
    let rows = String::from_utf8(again.stdout).unwrap().lines().count();
    assert_eq!(rows, 2 + 7);
}

#[test]
fn single_candidate_space_gives_one_row() {
    let out = nbvb(&[
        "optimize",
        "--dv",
        "4",
        "--rho",
        "x^5",
        "--max-degree",
        "4",
        "--seed",
        "1",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(2).unwrap().starts_with("x^4,x^5,"));
}

#[test]
fn gen_reports_check_count() {
    let out = nbvb(&[
        "gen",
        "--lambda",
        "0.9x^3+0.1x^13",
        "--rho",
        "0.9375x^4+0.0625x^20",
        "--n",
        "100000",
        "--seed",
        "7",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["m"], 80000);
}
