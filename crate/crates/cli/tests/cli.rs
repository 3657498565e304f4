use std::process::{Command, Output};

use serde_json::Value;

fn dynpair(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynpair"))
        .args(args)
        .env_remove("DYNPAIR_DEGREE_CAP")
        .output()
        .expect("binary runs")
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).expect("each line is JSON"))
        .collect()
}

fn value(r: &Value) -> f64 {
    r["value"].as_f64().expect("numeric value")
}

fn last_value(args: &[&str]) -> f64 {
    let out = dynpair(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    value(records(&out).last().unwrap())
}

#[test]
fn heights() {
    let ln2 = 2f64.ln();
    assert_eq!(
        last_value(&["height", "--map", "family:quad", "c=-1", "--point", "0/1"]),
        0.0
    );
    assert!(
        (last_value(&["height", "--map", "family:squaring", "--point", "2/1"]) - ln2).abs() < 1e-12
    );
    let h = last_value(&[
        "height",
        "--map",
        "num=[0,2,-1]",
        "den=[1]",
        "--point",
        "3/1",
        "--tol",
        "1e-10",
    ]);
    assert!((h - ln2).abs() < 1e-10, "{h}");
    let quoted = last_value(&["height", "--map", "num=[0,2,-1] den=[1]", "--point", "-1"]);
    assert!((quoted - ln2).abs() < 1e-9, "{quoted}");
}

#[test]
fn every_record_carries_value_error_and_method() {
    let out = dynpair(&[
        "pairing",
        "--phi",
        "family:squaring",
        "--psi",
        "family:coc",
        "alpha=1",
        "--n",
        "1..4",
    ]);
    let recs = records(&out);
    assert_eq!(recs.len(), 5);
    for r in &recs {
        assert!(
            r["value"].is_f64() && r["error_bound"].is_f64() && r["method"].is_string(),
            "{r}"
        );
    }
    assert_eq!(recs[4]["kind"], "estimate");
    assert_eq!(recs[4]["k"], 0);
}

#[test]
fn pairing_converges_to_the_closed_form() {
    let v = last_value(&[
        "pairing",
        "--phi",
        "family:squaring",
        "--psi",
        "family:coc",
        "alpha=1",
        "--n",
        "1..10",
    ]);
    assert!((v - 0.323067).abs() < 0.05, "{v}");
}

#[test]
fn diagonal_pairing_vanishes() {
    let v = last_value(&[
        "pairing",
        "--phi",
        "family:squaring",
        "--psi",
        "family:squaring",
    ]);
    assert!(v.abs() < 1e-12, "{v}");
}

#[test]
fn symmetry_record_with_k_equal_n() {
    let out = dynpair(&[
        "pairing",
        "--phi",
        "family:coc",
        "alpha=1",
        "--psi",
        "family:quad",
        "c=-1",
        "--n",
        "1..6",
        "--k",
        "n",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    let sym = recs.last().unwrap();
    assert_eq!(sym["kind"], "symmetry");
    let gap = sym["gap"].as_f64().unwrap();
    let diff = (sym["forward"].as_f64().unwrap() - sym["backward"].as_f64().unwrap()).abs();
    assert!((gap - diff).abs() < 1e-15 && gap < 0.05, "{sym}");
}

#[test]
fn families() {
    let smyth = last_value(&["family", "coc", "--alpha", "1"]);
    assert!((smyth - 0.323067).abs() < 5e-6, "{smyth}");
    let c3 = last_value(&["family", "coc", "--alpha", "-3"]);
    assert!((c3 - 3f64.ln()).abs() < 1e-12);

    let out = dynpair(&["family", "lattes", "--a", "2", "--b", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &records(&out)[0];
    let lower = 0.5 * 6f64.ln();
    assert!((r["lower_bound"].as_f64().unwrap() - lower).abs() < 1e-15);
    assert_eq!(r["bound_holds"], true);
    let theta = r["theta"]["value"].as_f64().unwrap();
    assert!((value(r) - (theta + lower)).abs() < 1e-9);

    let out = dynpair(&["family", "quad", "--c", "-7"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    assert_eq!(recs[1]["within_bounds"], true);
}

#[test]
fn mahler_lehmer() {
    let v = last_value(&["mahler", "--poly", "[1,1,0,-1,-1,-1,-1,-1,0,1,1]"]);
    assert!((v - 0.1623576).abs() < 1e-7, "{v}");
    let halves = last_value(&["mahler", "--poly", "[-1/2,0,1/2]"]);
    assert!((halves + 2f64.ln()).abs() < 1e-12, "{halves}");
}

#[test]
fn verification_suites_pass() {
    for args in [
        &["verify", "sharpness"][..],
        &["verify", "families", "--points", "10"][..],
        &[
            "verify",
            "height-diff",
            "--psi",
            "family:coc",
            "alpha=2",
            "--points",
            "30",
        ][..],
        &[
            "verify",
            "equivalence",
            "--phi",
            "family:squaring",
            "--psi",
            "num=[0,0,0,1]",
        ][..],
    ] {
        let out = dynpair(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert_eq!(records(&out)[0]["ok"], true);
    }
}

#[test]
fn a_false_pairing_fails_verification() {
    // h_σ₁(-1) - h(-1) equals the pairing plus log 2, so a negative
    // pairing pushes the bound below it.
    let out = dynpair(&[
        "verify",
        "height-diff",
        "--psi",
        "family:coc",
        "alpha=1",
        "--pairing",
        "-0.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(records(&out)[0]["failed"].as_u64().unwrap() > 0);
}

#[test]
fn cases_are_listed_in_key_order() {
    let out = dynpair(&[
        "verify",
        "height-diff",
        "--psi",
        "family:quad",
        "c=2",
        "--points",
        "12",
        "--cases",
    ]);
    let recs = records(&out);
    assert_eq!(recs.len(), 13);
    let keys: Vec<_> = recs[1..]
        .iter()
        .map(|r| r["input"].as_str().unwrap().to_string())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn output_is_deterministic() {
    let args = [
        "verify",
        "height-diff",
        "--psi",
        "family:quad",
        "c=1",
        "--points",
        "20",
        "--seed",
        "11",
        "--cases",
    ];
    assert_eq!(dynpair(&args).stdout, dynpair(&args).stdout);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["height", "--map", "family:cubic", "--point", "1"][..],
        &["height", "--map", "num=[1,1]", "den=[1,1]", "--point", "1"][..],
        &["height", "--map", "family:squaring", "--point", "1/0x"][..],
        &[
            "height",
            "--map",
            "family:squaring",
            "--point",
            "1",
            "--tol",
            "-1",
        ][..],
        &[
            "pairing",
            "--phi",
            "family:squaring",
            "--psi",
            "family:squaring",
            "--n",
            "3..1",
        ][..],
        &["mahler", "--poly", "1,2"][..],
        &["family", "lattes", "--a", "0", "--b", "1"][..],
        &["frobnicate"][..],
    ] {
        let out = dynpair(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn degree_cap_from_environment_exits_3() {
    let out = Command::new(env!("CARGO_BIN_EXE_dynpair"))
        .args([
            "pairing",
            "--phi",
            "family:squaring",
            "--psi",
            "family:squaring",
            "--n",
            "7",
        ])
        .env("DYNPAIR_DEGREE_CAP", "100")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap 100"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = std::env::temp_dir().join(format!("dynpair-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.toml");
    std::fs::write(&path, "format = \"table\"\nn_max = 2\n").unwrap();
    let p = path.to_str().unwrap();
    let out = dynpair(&[
        "--config",
        p,
        "pairing",
        "--phi",
        "family:squaring",
        "--psi",
        "family:squaring",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text
        .lines()
        .map(|l| l.split_whitespace().collect())
        .collect();
    assert!(rows.contains(&vec!["kind", "estimate"]), "{text}");
    assert!(rows.contains(&vec!["n", "2"]), "{text}");
    let out = dynpair(&["--config", p, "--format", "json", "family", "smyth"]);
    assert_eq!(records(&out).len(), 1);
    std::fs::write(&path, "unknown = 1\n").unwrap();
    assert_eq!(
        dynpair(&["--config", p, "family", "smyth"]).status.code(),
        Some(2)
    );
    std::fs::remove_dir_all(&dir).unwrap();
}
