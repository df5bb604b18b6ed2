use std::process::Command;

use txdiv::sim::{self, RunRecord, SimConfig};
use txdiv::stbc::SchemeId;
use txdiv::turbo::CodeRate;

const BIN: &str = env!("CARGO_BIN_EXE_txdivsim");

fn short(seed: u64, grid: Vec<f64>) -> SimConfig {
    SimConfig {
        min_errors: 40,
        max_frames: 300,
        seed,
        ..SimConfig::new(SchemeId::MdcQostbc, CodeRate::EightNinths, grid)
    }
}

fn overlap(a: &RunRecord, b: &RunRecord) -> bool {
    a.fer_ci_lo <= b.fer_ci_hi && b.fer_ci_lo <= a.fer_ci_hi
}

#[test]
fn fer_decreases_with_snr_within_intervals() {
    let recs = sim::sweep(&short(1, vec![3.0, 4.5, 6.0, 7.5])).unwrap();
    assert_eq!(recs.len(), 4);
    for w in recs.windows(2) {
        assert!(w[1].fer_ci_lo <= w[0].fer_ci_hi, "{} dB {} vs {} dB {}", w[0].snr_db, w[0].fer, w[1].snr_db, w[1].fer);
    }
    assert!(recs[0].fer > recs[3].fer);
}

#[test]
fn neighbouring_seeds_agree_within_intervals() {
    let a = sim::sweep(&short(5, vec![4.5, 6.0])).unwrap();
    let b = sim::sweep(&short(6, vec![4.5, 6.0])).unwrap();
    assert_ne!(a, b);
    for (x, y) in a.iter().zip(&b) {
        assert!(overlap(x, y), "{x:?} vs {y:?}");
    }
}

#[test]
fn cli_json_replay_reproduces_csv() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let st = Command::new(BIN)
        .args(["run", "--scheme", "alamouti-cdd", "--rate", "1/2", "--snr", "-1:1:1", "--seed", "4"])
        .args(["--min-errors", "20", "--max-frames", "60", "--threads", "1", "--out"])
        .arg(&first)
        .output()
        .unwrap();
    assert!(st.status.success());
    let cfg = dir.path().join("first.csv.json");
    assert!(cfg.exists());
    let second = dir.path().join("second.csv");
    let st = Command::new(BIN)
        .args(["run", "--threads", "3", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&second)
        .output()
        .unwrap();
    assert!(st.status.success());
    let a = std::fs::read_to_string(&first).unwrap();
    let b = std::fs::read_to_string(&second).unwrap();
    assert_eq!(a.lines().count(), 4);
    assert!(a.starts_with(sim::CSV_HEADER));
    assert_eq!(a, b);
}

#[test]
fn cli_append_refuses_foreign_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("other.csv");
    std::fs::write(&out, "a,b,c\n1,2,3\n").unwrap();
    let o = Command::new(BIN)
        .args(["run", "--snr", "40", "--noiseless", "--max-frames", "1", "--append", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "a,b,c\n1,2,3\n");
}

#[test]
fn cli_rejects_bad_arguments() {
    for args in [
        &["run", "--scheme", "ostbc"][..],
        &["run", "--snr", "5:-1:0"],
        &["run", "--nr", "0", "--snr", "1"],
        &["harq", "--stages", "5"],
    ] {
        let o = Command::new(BIN).args(args).output().unwrap();
        assert!(!o.status.success(), "{args:?} accepted");
    }
}

#[test]
fn cli_selftest_passes() {
    let o = Command::new(BIN).arg("selftest").output().unwrap();
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{text}");
    assert!(text.lines().count() >= 7);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn cli_harq_csv_has_one_row_per_round() {
    let o = Command::new(BIN)
        .args(["harq", "--snr", "8:2:10", "--sessions", "200", "--seed", "2"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("snr_db,"));
    assert_eq!(lines.count(), 2 * 3);
}
