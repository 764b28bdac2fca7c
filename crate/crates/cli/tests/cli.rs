use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn vpl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vpl"))
        .args(args)
        .env_remove("VPL_TOLERANCE")
        .output()
        .unwrap()
}

fn body(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn construct_twisted_module() {
    let out = vpl(&[
        "construct",
        "--p",
        "2",
        "--n",
        "2",
        "--l",
        "0",
        "--c1",
        "0",
        "--cp1",
        "-0.5",
        "--order",
        "20",
    ]);
    assert_eq!(code(&out), 0);
    let v = body(&out);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["T"]["ram"], 2);
    assert_eq!(v["T"]["hi"], 20);
    assert_eq!(v["T"]["lo"], -3);
    assert_eq!(v["spec"]["family"]["kind"], "twisted");
}

#[test]
fn classify_wrong_degree() {
    let out = vpl(&["classify", "--f", "0,0,0,1", "--p", "1"]);
    assert_eq!(code(&out), 0);
    let v = body(&out);
    assert_eq!(v["exists"], false);
    assert_eq!(v["reason"], "deg_f_not_2");
    assert_eq!(v["status"], "ok");
}

#[test]
fn classify_complex_coefficients() {
    let out = vpl(&["classify", "--f", "0,2i,0,-1", "--p", "2"]);
    let v = body(&out);
    assert_eq!(v["exists"], true);
    assert_eq!(
        v["families"][0]["params"]["c1"],
        serde_json::json!([0.0, 2.0])
    );
}

#[test]
fn oracle_compare_passes() {
    let out = vpl(&[
        "oracle-compare",
        "--p",
        "2",
        "--n",
        "3",
        "--l",
        "1",
        "--c1",
        "1",
        "--cp1",
        "1",
        "--order",
        "16",
    ]);
    assert_eq!(code(&out), 0);
    let v = body(&out);
    assert_eq!(v["status"], "pass");
    assert!(v["max_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn construct_pipes_into_verify() {
    for args in [
        vec![
            "construct",
            "--p",
            "3",
            "--n",
            "3",
            "--l",
            "2",
            "--c1",
            "2i",
            "--cp1",
            "-1",
        ],
        vec![
            "construct",
            "--p",
            "1",
            "--n",
            "2",
            "--c1",
            "1",
            "--cp1",
            "1",
        ],
        vec![
            "construct",
            "--alpha",
            "1+i",
            "--beta",
            "-0.5",
            "--c",
            "2",
            "--n",
            "3",
        ],
    ] {
        let built = vpl(&args);
        assert_eq!(code(&built), 0);
        let mut child = Command::new(env!("CARGO_BIN_EXE_vpl"))
            .args(["verify", "--stdin"])
            .env_remove("VPL_TOLERANCE")
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .unwrap();
        child
            .stdin
            .take()
            .unwrap()
            .write_all(&built.stdout)
            .unwrap();
        let out = child.wait_with_output().unwrap();
        assert_eq!(code(&out), 0, "{args:?}");
        let v = body(&out);
        assert_eq!(v["status"], "pass");
        assert_eq!(v["pass"], true);
    }
}

#[test]
fn strict_tolerance_is_a_verification_failure() {
    let out = Command::new(env!("CARGO_BIN_EXE_vpl"))
        .args(["verify", "--p", "2", "--n", "3", "--c1", "1", "--cp1", "1"])
        .env("VPL_TOLERANCE", "1e-30")
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    assert_eq!(body(&out)["status"], "fail");
    // an explicit flag wins over the environment
    let out = Command::new(env!("CARGO_BIN_EXE_vpl"))
        .args([
            "verify",
            "--p",
            "2",
            "--n",
            "3",
            "--c1",
            "1",
            "--cp1",
            "1",
            "--eps-residual",
            "1e-9",
        ])
        .env("VPL_TOLERANCE", "1e-30")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
}

#[test]
fn usage_and_domain_errors_exit_2() {
    for args in [
        vec!["construct", "--p", "x", "--cp1", "1"],
        vec!["construct", "--p", "2", "--cp1", "1+"],
        vec!["construct", "--p", "2", "--cp1", "1", "--bogus", "3"],
        vec!["construct", "--p", "2"],
        vec!["construct", "--p", "2", "--n", "0", "--cp1", "1"],
        vec!["construct", "--p", "2", "--l", "2", "--cp1", "1"],
        vec!["construct", "--p", "2", "--cp1", "0"],
        vec!["construct", "--alpha", "1", "--beta", "0"],
        vec!["classify", "--p", "2"],
    ] {
        let out = vpl(&args);
        assert_eq!(code(&out), 2, "{args:?}");
        let v = body(&out);
        assert!(
            v["status"] == "usage_error" || v["status"] == "error",
            "{args:?}: {v}"
        );
        assert!(v["error"].as_str().is_some_and(|m| !m.is_empty()));
    }
}

#[test]
fn expand_and_restrict() {
    let out = vpl(&[
        "expand", "--p", "2", "--n", "1", "--cp1", "1", "--poly", "0,0,1", "--order", "6",
    ]);
    assert_eq!(code(&out), 0);
    let v = body(&out);
    // T(x)^2 = γ² x^-1 with γ² = -1/2
    assert_eq!(v["series"]["lo"], -2);
    let lead = &v["series"]["coeffs"][0][0][0];
    assert!((lead[0].as_f64().unwrap() + 0.5).abs() < 1e-12);
    assert!(lead[1].as_f64().unwrap().abs() < 1e-12);

    let out = vpl(&[
        "restrict", "--p", "2", "--n", "2", "--c1", "1", "--cp1", "1", "--order", "8",
    ]);
    assert_eq!(code(&out), 0);
    let v = body(&out);
    assert_eq!(v["p"], 2);
    assert_eq!(v["series"]["ram"], 1);
}

#[test]
fn output_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("vpl-cli-test-{}.json", std::process::id()));
    let out = vpl(&[
        "classify",
        "--f",
        "0,0,1",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(v["exists"], true);
}

#[test]
fn small_sweep_passes() {
    let out = vpl(&["sweep", "--n-max", "4", "--p-max", "3", "--seed", "7"]);
    assert_eq!(code(&out), 0);
    let v = body(&out);
    assert_eq!(v["status"], "pass");
    assert_eq!(v["seed"], 7);
    assert_eq!(v["grid"]["failures"], 0);
}
