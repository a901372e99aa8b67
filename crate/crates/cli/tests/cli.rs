use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn hexloop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hexloop"))
        .args(args)
        .env_remove("HEXLOOP_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn params_reports_xtilde_below_inverse_sqrt3() {
    let out = hexloop(&["params", "--n", "2", "--x", "0.57735"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for key in ["p", "alpha", "beta", "xtilde", "eps", "xc"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v["xtilde"].as_f64().unwrap() < 0.5773503);
}

#[test]
fn params_out_of_range_fails() {
    let out = hexloop(&["params", "--n", "0.5", "--x", "0.3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_prop21_two_hex() {
    let out = hexloop(&["verify", "--suite", "prop21", "--domain", "two_hex", "--x", "0.4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert!(v["checks"][0]["detail"]["tv"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn verify_all_passes_on_single_hex() {
    let out = hexloop(&["verify", "--suite", "all", "--domain", "single_hex", "--n", "1.5", "--x", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["checks"].as_array().unwrap().len(), 8);
}

#[test]
fn verify_beyond_exhaustive_reach_fails_loudly() {
    let out = hexloop(&["verify", "--suite", "lemma42", "--domain", "hex_ball:2", "--x", "0.4"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn usage_errors_exit_2() {
    let out = hexloop(&["params", "--n", "2", "--x", "0.5", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--bogus"));
    assert_eq!(hexloop(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(hexloop(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(hexloop(&["verify", "--suite", "prop21", "--domain", "no_such_domain"]).status.code(), Some(2));
}

#[test]
fn domain_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d.txt");
    fs::write(&file, "preset two_hex\n").unwrap();
    let out = hexloop(&["verify", "--suite", "eqz", "--domain", p(&file), "--x", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["domain"]["faces"], 2);
}

#[test]
fn enumerate_single_hex_loop_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.csv");
    let out = hexloop(&["enumerate", "--domain", "single_hex", "--measure", "loop", "--n", "2", "--x", "0.5", "--out", p(&table)]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&table).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "config_hex,probability");
    // Empty configuration and the full hexagon, weights 1 and n x^6 = 1/32.
    assert_eq!(lines.len(), 3);
    let probs: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!((probs[0] - 32.0 / 33.0).abs() < 1e-15 && (probs[1] - 1.0 / 33.0).abs() < 1e-15);
    assert!(dir.path().join("table.csv.manifest.json").exists());
}

#[test]
fn manifest_digest_matches_output() {
    let dir = tempfile::tempdir().unwrap();
    let tail = dir.path().join("tail.csv");
    let args = [
        "sample", "--domain", "hex_ball:2", "--n", "1.5", "--x", "0.5", "--stat", "R", "--kmax", "12", "--sweeps", "200",
        "--burn-in", "50", "--seed", "7", "--out", p(&tail),
    ];
    assert_eq!(hexloop(&args).status.code(), Some(0));
    let bytes = fs::read(&tail).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("tail.csv.manifest.json")).unwrap()).unwrap();
    let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(manifest["outputs"][0]["sha256"], digest.as_str());
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["subcommand"], "sample");

    // Same argv and seed reproduce the table byte for byte, also via the environment.
    let again = dir.path().join("again.csv");
    let mut args2 = args.to_vec();
    args2.truncate(args.len() - 4);
    args2.extend(["--out", p(&again)]);
    let out = Command::new(env!("CARGO_BIN_EXE_hexloop")).args(&args2).env("HEXLOOP_SEED", "7").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read(&again).unwrap(), bytes);
}

#[test]
fn sample_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let tail = dir.path().join("tail.csv");
    let fit = dir.path().join("fit.json");
    let args = [
        "sample", "--domain", "hex_ball:3", "--n", "1.5", "--x", "0.5", "--stat", "R", "--kmax", "24", "--sweeps", "2000",
        "--chains", "2", "--out", p(&tail),
    ];
    assert_eq!(hexloop(&args).status.code(), Some(0));
    let header = fs::read_to_string(&tail).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "k,estimate,stderr,n_samples");
    assert_eq!(hexloop(&["fit", "--in", p(&tail), "--out", p(&fit)]).status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&fit).unwrap()).unwrap();
    assert!(v["fit"]["rate"].as_f64().unwrap() > 0.0);
    assert!(dir.path().join("fit.json.manifest.json").exists());
}

#[test]
fn fit_with_too_few_rows_fails() {
    let dir = tempfile::tempdir().unwrap();
    let tail = dir.path().join("tail.csv");
    fs::write(&tail, "k,estimate,stderr,n_samples\n0,1,0,100\n1,0.5,0.05,100\n").unwrap();
    let out = hexloop(&["fit", "--in", p(&tail), "--out", p(&dir.path().join("fit.json"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("insufficient data"));
}

#[test]
fn plot_two_row_tail() {
    let dir = tempfile::tempdir().unwrap();
    let tail = dir.path().join("tail.csv");
    fs::write(&tail, "k,estimate,stderr,n_samples\n0,1.0,0.0,1000\n1,0.2,0.01,1000\n").unwrap();
    let svg = dir.path().join("tail.svg");
    assert_eq!(hexloop(&["plot", "--in", p(&tail), "--out", p(&svg)]).status.code(), Some(0));
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches(r#"class="point""#).count(), 2);
    assert_eq!(text.matches(r#"class="fit""#).count(), 1);

    let second = dir.path().join("second.svg");
    assert_eq!(hexloop(&["plot", "--in", p(&tail), "--out", p(&second)]).status.code(), Some(0));
    assert_eq!(fs::read(&svg).unwrap(), fs::read(&second).unwrap());
}

#[test]
fn plot_three_point_scan() {
    let dir = tempfile::tempdir().unwrap();
    let scan = dir.path().join("scan.csv");
    fs::write(
        &scan,
        "n,x,c,ci,annotations\n1.5,0.3,0.9,0.8:1.0,faces=7\n2,0.5,0.2,0.1:0.3,faces=7\n3,0.55,,,error=none\n",
    )
    .unwrap();
    let svg = dir.path().join("scan.svg");
    assert_eq!(hexloop(&["plot", "--in", p(&scan), "--out", p(&svg)]).status.code(), Some(0));
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches(r#"class="marker""#).count(), 3);
    assert_eq!(text.matches(r#"class="curve""#).count(), 3);
}

#[test]
fn plot_rejects_unknown_schema() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "a,b\n1,2\n").unwrap();
    let out = hexloop(&["plot", "--in", p(&bad), "--out", p(&dir.path().join("bad.svg"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema error"));
}

#[test]
fn scan_grid_to_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.txt");
    fs::write(&grid, "1.5 0.5\n# comment\n2.0 0.5\n").unwrap();
    let scan = dir.path().join("scan.csv");
    let args = ["scan", "--grid", p(&grid), "--radius", "3", "--kmax", "24", "--sweeps", "2000", "--out", p(&scan)];
    let out = hexloop(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&scan).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,x,c,ci,annotations");
    assert_eq!(lines.len(), 3);
    // x_c(1.5) = 1/sqrt(2 + sqrt(0.5)).
    assert!(lines[1].contains("x_c=0.607781"), "{}", lines[1]);
    assert!(lines.iter().skip(1).all(|l| l.contains("decays=")), "{text}");
    let svg = dir.path().join("scan.svg");
    assert_eq!(hexloop(&["plot", "--in", p(&scan), "--out", p(&svg)]).status.code(), Some(0));
}
