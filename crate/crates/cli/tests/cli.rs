use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hsi_core::episode_init::{MotionClip, MotionDataset, SubsetLabel};
use hsi_core::experiment::{synthetic_carry_clip, RewardCases};
use tempfile::TempDir;

fn hsi(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsi-sim"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env_remove("HSI_SEED")
        .env_remove("HSI_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn error_line(o: &Output) -> serde_json::Value {
    let line = stderr(o).lines().last().expect("error line").to_string();
    serde_json::from_str(&line).expect("error line is JSON")
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn write_dataset(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("clips.json");
    let sit = MotionClip {
        subset: SubsetLabel::Sit,
        ..synthetic_carry_clip("sit", 40, 3)
    };
    MotionDataset::new(vec![synthetic_carry_clip("carry", 60, 1), sit])
        .save(&path)
        .unwrap();
    path
}

#[test]
fn localize_sim_is_byte_identical_per_seed() {
    let tmp = TempDir::new().unwrap();
    let (a, b, c) = (
        tmp.path().join("a"),
        tmp.path().join("b"),
        tmp.path().join("c"),
    );
    let args = ["--seed", "11", "localize-sim", "--trials", "5"];
    assert!(hsi(&args, &a).status.success());
    assert!(hsi(&args, &b).status.success());
    for f in ["records.csv", "trials.csv", "summary.json"] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
    hsi(&["--seed", "12", "localize-sim", "--trials", "5"], &c);
    assert_ne!(read(&a, "records.csv"), read(&c, "records.csv"));

    let records = String::from_utf8(read(&a, "records.csv")).unwrap();
    assert!(records.starts_with(
        "trial,step,time,gt_x,gt_y,gt_z,gt_yaw,est_x,est_y,est_z,est_yaw,mode,masked,distance,base_distance,error\n"
    ));
}

#[test]
fn calibrated_run_passes_its_checks() {
    let tmp = TempDir::new().unwrap();
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/calibrated.toml");
    let o = hsi(&["--config", cfg, "localize-sim"], tmp.path());
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("check transition_band"));
    let summary: serde_json::Value =
        serde_json::from_slice(&read(tmp.path(), "summary.json")).unwrap();
    assert_eq!(summary["trial_count"], 17);
    assert_eq!(summary["trials"].as_array().unwrap().len(), 17);
}

#[test]
fn zero_noise_run_is_exact() {
    let tmp = TempDir::new().unwrap();
    let o = hsi(
        &["localize-sim", "--zero-noise", "--trials", "6"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stdout(&o));
    let summary: serde_json::Value =
        serde_json::from_slice(&read(tmp.path(), "summary.json")).unwrap();
    assert!(summary["max_error"].as_f64().unwrap() < 1e-9);
}

#[test]
fn env_overrides_seed_and_out_dir() {
    let tmp = TempDir::new().unwrap();
    let via_env = tmp.path().join("env");
    let via_flag = tmp.path().join("flag");
    let o = Command::new(env!("CARGO_BIN_EXE_hsi-sim"))
        .args(["localize-sim"])
        .env("HSI_SEED", "5")
        .env("HSI_OUT_DIR", &via_env)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stdout(&o));
    hsi(&["--seed", "5", "localize-sim"], &via_flag);
    assert_eq!(
        read(&via_env, "records.csv"),
        read(&via_flag, "records.csv")
    );
}

#[test]
fn failing_check_exits_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("strict.toml");
    fs::write(
        &cfg,
        "version = 1\ntrials = 2\n[checks]\nfine_error_max = 0.0\n",
    )
    .unwrap();
    let o = hsi(
        &["--config", cfg.to_str().unwrap(), "localize-sim"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn malformed_config_reports_error_line() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "trials = 3\n").unwrap();
    let o = hsi(
        &["--config", cfg.to_str().unwrap(), "localize-sim"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_line(&o)["error"], "config");

    let missing = hsi(
        &["--config", "/nonexistent/x.toml", "localize-sim"],
        tmp.path(),
    );
    assert_eq!(missing.status.code(), Some(2));
    assert_eq!(error_line(&missing)["error"], "io");
}

#[test]
fn reward_check_builtin_and_tampered() {
    let tmp = TempDir::new().unwrap();
    let o = hsi(&["reward-check"], tmp.path());
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains(", 0 failed"));
    let csv = String::from_utf8(read(tmp.path(), "reward_check.csv")).unwrap();
    assert!(csv.starts_with("name,term,expected,actual,abs_error,tol,pass\n"));

    let mut cases = RewardCases::builtin();
    let victim = cases.cases[5].name.clone();
    cases.cases[5].expected += 0.5;
    let path = tmp.path().join("tampered.json");
    fs::write(&path, serde_json::to_string(&cases).unwrap()).unwrap();
    let o = hsi(
        &["reward-check", "--cases", path.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let failed: Vec<String> = stdout(&o)
        .lines()
        .filter(|l| l.starts_with("FAIL"))
        .map(|l| l.split_whitespace().nth(1).unwrap().to_string())
        .collect();
    assert_eq!(failed, vec![victim]);
}

#[test]
fn reward_check_task_filter() {
    let tmp = TempDir::new().unwrap();
    let o = hsi(&["reward-check", "--task", "sit_down"], tmp.path());
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("sit_on_seat_center"));
    assert!(!out.contains("pick_box_lifted"));
}

#[test]
fn reward_check_empty_cases_errors() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("empty.json");
    fs::write(&path, r#"{"version": 1, "cases": []}"#).unwrap();
    let o = hsi(
        &["reward-check", "--cases", path.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_line(&o)["error"], "cases");
}

#[test]
fn annotate_writes_dataset_and_sidecar() {
    let tmp = TempDir::new().unwrap();
    let input = write_dataset(tmp.path());
    let out = tmp.path().join("ann");
    let args = [
        "annotate",
        "--input",
        input.to_str().unwrap(),
        "--clip",
        "carry",
        "--pickup",
        "10",
        "--place",
        "45",
        "--split",
    ];
    let o = hsi(&args, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("(ok)"));
    let ds = MotionDataset::load(&out.join("annotated.json")).unwrap();
    let ids: Vec<&str> = ds.clips.iter().map(|c| c.id.as_str()).collect();
    assert_eq!(
        ids,
        ["carry", "carry_pickUp", "carry_carryWith", "carry_putDown"]
    );
    assert!(ds.clips[0].frames.iter().all(|f| f.object.is_some()));
    let sidecar: serde_json::Value =
        serde_json::from_slice(&read(&out, "annotation.json")).unwrap();
    assert_eq!(sidecar["pickup_frame"], 10);
    assert_eq!(sidecar["place_frame"], 45);

    let again = tmp.path().join("ann2");
    hsi(&args, &again);
    assert_eq!(read(&out, "annotated.json"), read(&again, "annotated.json"));
}

#[test]
fn annotate_rejects_bad_frames() {
    let tmp = TempDir::new().unwrap();
    let input = write_dataset(tmp.path());
    let o = hsi(
        &[
            "annotate",
            "--input",
            input.to_str().unwrap(),
            "--clip",
            "carry",
            "--pickup",
            "50",
            "--place",
            "20",
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_line(&o)["error"], "annotation");
    let o = hsi(
        &[
            "annotate",
            "--input",
            input.to_str().unwrap(),
            "--pickup",
            "1",
            "--place",
            "5",
        ],
        tmp.path(),
    );
    assert_eq!(error_line(&o)["error"], "config");
}

#[test]
fn rsi_sample_listing() {
    let tmp = TempDir::new().unwrap();
    let input = write_dataset(tmp.path());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let args = [
        "--seed",
        "3",
        "rsi-sample",
        "--dataset",
        input.to_str().unwrap(),
        "--task",
        "carry_box",
        "--fraction",
        "0.5",
        "-n",
        "2000",
    ];
    let o = hsi(&args, &a);
    assert!(o.status.success(), "{}", stderr(&o));
    hsi(&args, &b);
    assert_eq!(read(&a, "rsi_samples.jsonl"), read(&b, "rsi_samples.jsonl"));

    let listing = String::from_utf8(read(&a, "rsi_samples.jsonl")).unwrap();
    assert_eq!(listing.lines().count(), 2000);
    let defaults = listing
        .lines()
        .filter(|l| l.contains(r#""kind":"default_pose""#))
        .count();
    let share = defaults as f64 / 2000.0;
    assert!((share - 0.5).abs() < 0.04, "{share}");
    assert!(stdout(&o).contains(&format!("default-pose share {share:.4}")));
}

#[test]
fn rsi_sample_errors() {
    let tmp = TempDir::new().unwrap();
    let input = write_dataset(tmp.path());
    let ds = input.to_str().unwrap();
    let o = hsi(
        &[
            "rsi-sample",
            "--dataset",
            ds,
            "--task",
            "carry_box",
            "--fraction",
            "1.5",
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_line(&o)["error"], "init");
    let o = hsi(
        &[
            "rsi-sample",
            "--dataset",
            ds,
            "--task",
            "style_loco",
            "--fraction",
            "0.2",
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}
