//! End-to-end checks of the command-line surface: exit codes, CSV and
//! manifest contracts, and reproducibility across thread counts.

use std::path::Path;
use std::process::{Command, Output};

fn softguess(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_softguess"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn codes_list_names_the_registry() {
    let out = softguess(&["codes", "list"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for id in ["ebch-16-11", "ebch-32-26", "ebch-64-57", "product-ebch-16-11"] {
        assert!(text.contains(id), "missing {id} in: {text}");
    }
}

#[test]
fn bad_arguments_exit_2() {
    let out = softguess(&["calibrate-block", "--code", "ebch-16-11"]);
    assert_eq!(out.status.code(), Some(2)); // missing required args
    let out = softguess(&["oracle-check", "--code", "no-such-code"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_check_passes_on_small_code() {
    let out = softguess(&["oracle-check", "--code", "ebch-8-4", "--trials", "200", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("oracle-check: OK"));
}

#[test]
fn decode_one_prints_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let frame = dir.path().join("frame.llr");
    // All-positive LLRs decode to the all-zero codeword.
    let llrs: Vec<String> = (0..16).map(|i| format!("{}", 2.0 + 0.1 * i as f64)).collect();
    std::fs::write(&frame, llrs.join(" ")).unwrap();
    let out = softguess(&[
        "decode-one",
        "--code",
        "ebch-16-11",
        "--llr-file",
        frame.to_str().unwrap(),
        "--lambda",
        "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("status: Converged"));
    assert!(text.contains("codeword=0000000000000000"));

    // Wrong frame length is a usage error.
    std::fs::write(&frame, "1.0 2.0").unwrap();
    let out = softguess(&[
        "decode-one",
        "--code",
        "ebch-16-11",
        "--llr-file",
        frame.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn calibrate_block_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("cal.csv");
    let out = softguess(&[
        "calibrate-block",
        "--code",
        "rlc-32-26-s7",
        "--decoder",
        "gcd",
        "--lambda",
        "2",
        "--ebno",
        "3",
        "--trials",
        "2000",
        "--seed",
        "1",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert!(csv.starts_with("bin_lo,bin_hi,mean_predicted,empirical,count\n"));
    let total: u64 = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 2000);

    let manifest_path = dir.path().join("cal.manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 1);
    assert_eq!(manifest["code_id"], "rlc-32-26-s7");
    assert_eq!(manifest["lambda"], 2);
    assert_eq!(manifest["trials"], 2000);
    assert!(manifest["version"].as_str().unwrap().contains("softguess"));
}

#[test]
fn csv_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| -> String {
        let out_path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_softguess"))
            .env("SOFTGUESS_THREADS", threads)
            .args([
                "calibrate-bit",
                "--code",
                "ebch-16-11",
                "--so",
                "gcd",
                "--lambda",
                "2",
                "--ebno",
                "3",
                "--trials",
                "3000",
                "--seed",
                "9",
                "--out",
                out_path.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read_to_string(out_path).unwrap()
    };
    assert_eq!(run("1", "a.csv"), run("4", "b.csv"));
}

#[test]
fn product_curve_writes_expected_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("curve.csv");
    let out = softguess(&[
        "product-curve",
        "--code",
        "product-ebch-8-4",
        "--ebno-list",
        "6,8",
        "--min-block-errors",
        "5",
        "--max-trials",
        "200",
        "--seed",
        "3",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "ebno_db,bler,ber,avg_queries,blocks,block_errors,bler_se,low_confidence"
    );
    assert_eq!(lines.count(), 2);
    assert!(Path::new(&dir.path().join("curve.manifest.json")).exists());
}
