use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn twoshare(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twoshare"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("cfg.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const BLOCK_CFG: &str = r#"
source = [0.5, 0.5]
n_values = [4, 8]
[scheme]
kind = "blockwise"
ell = 0.5
"#;

#[test]
fn encode_then_decode_blockwise() {
    let base = [
        "--scheme",
        "blockwise",
        "--source",
        "0.7,0.3",
        "--n",
        "8",
        "--ell",
        "0.5",
    ];
    let mut args = vec!["encode"];
    args.extend(base);
    args.extend([
        "--secret",
        "0,0,1,0,0,0,1,0",
        "--seed",
        "11",
        "--format",
        "jsonl",
    ]);
    let out = twoshare(&args);
    assert!(out.status.success());
    let row: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    let (x, y) = (row["x"].as_str().unwrap(), row["y"].as_str().unwrap());

    let mut args = vec!["decode"];
    args.extend(base);
    args.extend(["--x", x, "--y", y, "--format", "jsonl"]);
    let out = twoshare(&args);
    assert!(out.status.success());
    let row: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(row["accepted"], true);
    assert_eq!(row["secret"], "0,0,1,0,0,0,1,0");
}

#[test]
fn mismatched_tags_are_rejected() {
    let out = twoshare(&[
        "decode",
        "--scheme",
        "blockwise",
        "--source",
        "0.5,0.5",
        "--n",
        "4",
        "--ell",
        "0.5",
        "--x",
        "0:3",
        "--y",
        "1:3",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "accepted,secret,llr_score\nfalse,reject,\n");
}

#[test]
fn symbolwise_round_trip_with_explicit_key() {
    let common = [
        "--scheme",
        "symbolwise",
        "--source",
        "0.7,0.3",
        "--n",
        "4",
        "--modulus",
        "3",
    ];
    let mut args = vec!["encode"];
    args.extend(common);
    args.extend(["--secret", "0,1,0,0", "--key", "2,2,1,0"]);
    let out = twoshare(&args);
    assert_eq!(
        stdout(&out),
        "secret,key,x,y\n\"0,1,0,0\",\"2,2,1,0\",\"1,2,2,0\",\"2,2,1,0\"\n"
    );

    let mut args = vec!["decode"];
    args.extend(common);
    args.extend(["--x", "1,2,2,0", "--y", "2,2,1,0"]);
    let out = twoshare(&args);
    assert!(stdout(&out).starts_with("accepted,secret,llr_score\ntrue,\"0,1,0,0\","));
}

#[test]
fn exact_attack_matches_closed_form() {
    // M = 219, L = 16 at n = 8: the best forgery succeeds with M / (L (M + 1))
    let out = twoshare(&[
        "attack",
        "--scheme",
        "blockwise",
        "--source",
        "0.7,0.3",
        "--n",
        "8",
        "--ell",
        "0.5",
        "--format",
        "jsonl",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 2);
    let expected = 219.0 / (16.0 * 220.0);
    for (row, target) in rows.iter().zip(["x", "y"]) {
        assert_eq!(row["target"], target);
        assert!((row["success_prob"].as_f64().unwrap() - expected).abs() < 1e-15);
    }
}

#[test]
fn validate_scheme_reports_conditions() {
    let out = twoshare(&[
        "validate-scheme",
        "--source",
        "0.2,0.3,0.5",
        "--modulus",
        "4",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).lines().nth(1).unwrap().starts_with("true,,"));

    let out = twoshare(&[
        "validate-scheme",
        "--source",
        "0.2,0.3,0.5",
        "--modulus",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn experiment_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BLOCK_CFG);
    let out_path = dir.path().join("report.csv");
    let out = twoshare(&[
        "experiment",
        "--config",
        &cfg,
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("n,gamma_n,rate_x,"));
    assert_eq!(lines.clone().count(), 2);
    assert!(lines.all(|l| l.ends_with("holds,holds,holds,holds,holds")));
}

#[test]
fn experiment_mc_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BLOCK_CFG);
    let run = || {
        let out = twoshare(&[
            "experiment",
            "--config",
            &cfg,
            "--mode",
            "mc",
            "--trials",
            "20000",
            "--seed",
            "5",
        ]);
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &BLOCK_CFG.replace("[4, 8]", "[]"));
    let out = twoshare(&["experiment", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_values"));

    let out = twoshare(&["experiment", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(out.status.code(), Some(1));

    let out = twoshare(&[
        "attack",
        "--scheme",
        "blockwise",
        "--source",
        "0.5,0.5",
        "--n",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(1), "missing --ell");

    let out = twoshare(&["encode", "--format", "xml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_cleanly() {
    let out = twoshare(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    for sub in [
        "encode",
        "decode",
        "attack",
        "validate-scheme",
        "experiment",
    ] {
        assert!(stdout(&out).contains(sub));
    }
}
