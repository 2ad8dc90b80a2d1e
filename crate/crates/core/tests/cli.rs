use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use randamp::cli::{RATE_HEADER, SUMMARY_HEADER, TRANSCRIPT_HEADER};

fn randamp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randamp")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

const SMALL_RUN: &str = r#"
seed = 7

[source]
mu_min = 0.25
mu_max = 0.25
kind = "iid"

[eat]
n = 1000
s_exp = 0.0129
delta_est = 0.001
eps_s = 1e-6
eps_ea = 1e-6

[extractor]
eps_ext = 1e-6
"#;

#[test]
fn rate_csv_has_golden_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[rate]\nmu = [[0.25, 0.25]]\nn = [100000000000]\ns_exp = [0.01294]\ndelta_est = 1e-4\neps_s = 1e-7\neps_ea = 1e-7\n",
    );
    let out = randamp(&["rate", "--config", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(RATE_HEADER));
    let eta: f64 = lines.next().unwrap().split(',').nth(7).unwrap().parse().unwrap();
    assert!((eta - 0.97362).abs() < 0.01, "{eta}");
}

#[test]
fn inverted_mu_box_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[optimize]\nmu_min = 0.3\nmu_max = 0.2\n");
    let out = randamp(&["optimize", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[optimize]\nmu_min = 0.2\nmu_max = 0.3\nbogus = 1\n");
    assert_eq!(randamp(&["optimize", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn missing_config_is_an_io_error() {
    assert_eq!(
        randamp(&["rate", "--config", "/nonexistent/run.toml"]).status.code(),
        Some(3)
    );
}

#[test]
fn optimize_reports_s_tilde() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[optimize]\nmu_min = 0.124\nmu_max = 0.629\n");
    let out_dir = dir.path().join("out");
    let out = randamp(&["optimize", "--config", &cfg, "--out", path(&out_dir)]);
    assert!(out.status.success());
    let report = fs::read_to_string(out_dir.join("optimize.txt")).unwrap();
    let value: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("s_tilde_star="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 0.00141).abs() < 2e-4, "{value}");
}

fn extract(dir: &Path, x: &[u8], z: &[u8], header: &str) -> (Output, std::path::PathBuf) {
    let (xp, zp, hp) = (dir.join("x.bin"), dir.join("z.bin"), dir.join("header.txt"));
    fs::write(&xp, x).unwrap();
    fs::write(&zp, z).unwrap();
    fs::write(&hp, header).unwrap();
    let out_dir = dir.join("out");
    let out = randamp(&[
        "extract",
        "--x",
        path(&xp),
        "--z",
        path(&zp),
        "--header",
        path(&hp),
        "--out",
        path(&out_dir),
    ]);
    (out, out_dir.join("extracted.bin"))
}

#[test]
fn extract_hand_case() {
    let dir = tempfile::tempdir().unwrap();
    let (out, key) = extract(dir.path(), &[0b0001], &[0b0011], "4 2\n");
    assert!(out.status.success());
    assert_eq!(fs::read(key).unwrap(), vec![0b11]);
}

#[test]
fn extract_zero_source_gives_zero_key() {
    let dir = tempfile::tempdir().unwrap();
    let (out, key) = extract(dir.path(), &[0; 4], &[0xa7, 0x13, 0xff, 0x42], "32 20");
    assert!(out.status.success());
    assert_eq!(fs::read(key).unwrap(), vec![0; 3]);
}

#[test]
fn extract_rejects_m_above_n() {
    let dir = tempfile::tempdir().unwrap();
    let (out, _) = extract(dir.path(), &[1], &[1], "4 5");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_one_row_per_round() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL_RUN}\n[device]\nkind = \"honest\"\n"));
    let out_dir = dir.path().join("sim");
    let out = randamp(&["simulate", "--config", &cfg, "--out", path(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let transcript = fs::read_to_string(out_dir.join("transcript.csv")).unwrap();
    let mut lines = transcript.lines();
    assert_eq!(lines.next(), Some(TRANSCRIPT_HEADER));
    assert_eq!(lines.count(), 1000);
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().next(), Some(SUMMARY_HEADER));
}

#[test]
fn deterministic_device_aborts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("{SMALL_RUN}\n[device]\nkind = \"deterministic\"\nalice = [0, 0]\nbob = [0, 0]\n"),
    );
    let out_dir = dir.path().join("sim");
    assert!(randamp(&["simulate", "--config", &cfg, "--out", path(&out_dir)])
        .status
        .success());
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let row: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1], "true");
    assert_eq!(row[2], "0");
    assert!(fs::read(out_dir.join("key.bin")).unwrap().is_empty());
}

#[test]
fn seed_flag_changes_the_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL_RUN}\n[device]\nkind = \"honest\"\n"));
    let run = |seed: &str, name: &str| {
        let out_dir = dir.path().join(name);
        assert!(
            randamp(&["simulate", "--config", &cfg, "--out", path(&out_dir), "--seed", seed])
                .status
                .success()
        );
        fs::read(out_dir.join("transcript.csv")).unwrap()
    };
    assert_ne!(run("1", "a"), run("2", "b"));
    assert_eq!(run("1", "c"), run("1", "d"));
}
