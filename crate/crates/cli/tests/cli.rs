use std::io::Cursor;
use std::path::{Path, PathBuf};

use sar_adapt::qlearning::{QTable, TrainingConfig};
use sar_adapt::session::EvaluationSummary;
use sar_adapt_cli::{run, EXIT_INVALID, EXIT_OK, EXIT_THRESHOLD};

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str], stdin: &str) -> Output {
    let mut input = Cursor::new(stdin.as_bytes().to_vec());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(
        std::iter::once("sar-adapt").chain(args.iter().copied()),
        &mut input,
        &mut out,
        &mut err,
    );
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn trained(dir: &Path, model: &str) -> PathBuf {
    let out = dir.join(model);
    let r = cli(&["train", "--model", &fixture(model), "--out", path_str(&out)], "");
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    out
}

#[test]
fn train_writes_both_artifacts_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let r = cli(&["train", "--model", &fixture("mci.model"), "--seed", "42", "--out", path_str(&out)], "");
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.contains("update_sum ratio"));
    assert!(r.stdout.contains("qtable_mean drift"));
    let q = QTable::read_csv(std::fs::File::open(out.join("qtable.csv")).unwrap()).unwrap();
    assert_eq!(q.meta.model_name.as_deref(), Some("mci"));
    let metrics = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("epoch,epsilon,update_sum,qtable_mean,mean_episode_return\n"));
    assert_eq!(metrics.lines().count(), 101);
}

#[test]
fn missing_model_fails_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let r = cli(&["train", "--model", "missing.model", "--out", path_str(&out)], "");
    assert_eq!(r.code, EXIT_INVALID);
    assert!(r.stderr.contains("file not found"), "{}", r.stderr);
    assert!(!out.exists());
}

#[test]
fn invalid_config_fails_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "schema_version = 1\n[training]\nalpha = 1.5\n").unwrap();
    let out = dir.path().join("never");
    let r = cli(&["train", "--config", path_str(&config), "--out", path_str(&out)], "");
    assert_eq!(r.code, EXIT_INVALID);
    assert!(r.stderr.contains("alpha"), "{}", r.stderr);
    assert!(!out.exists());

    std::fs::write(&config, "schema_version = 2\n").unwrap();
    assert_eq!(cli(&["train", "--config", path_str(&config)], "").code, EXIT_INVALID);
}

#[test]
fn shipped_experiment_config_loads() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp");
    let r = cli(&["train", "--config", &fixture("experiment.toml"), "--out", path_str(&out)], "");
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.contains("model 'healthy' with seed 42"));
}

#[test]
fn verify_passes_on_defaults_and_fails_on_impossible_threshold() {
    let dir = tempfile::tempdir().unwrap();
    for model in ["healthy.model", "mci.model"] {
        let out = trained(dir.path(), model);
        let args = ["verify", "--model", &fixture(model), "--out", path_str(&out)];
        let r = cli(&args, "");
        assert_eq!(r.code, EXIT_OK, "{}{}", r.stdout, r.stderr);
        assert_eq!(r.stdout.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).count(), 30);
        assert!(r.stdout.contains("agreement: "));

        let mut strict = args.to_vec();
        strict.extend(["--threshold", "101"]);
        assert_eq!(cli(&strict, "").code, EXIT_THRESHOLD);
    }
}

#[test]
fn zero_table_is_reported_and_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.csv");
    std::fs::write(&path, QTable::zeros().to_csv_string()).unwrap();
    let r = cli(&["verify", "--model", &fixture("mci.model"), "--qtable", path_str(&path)], "");
    // All-a0 matches the optimum only outside the 12 low states.
    assert!(r.stdout.contains("agreement: 18/30 states (60.0%)"), "{}", r.stdout);
    assert_eq!(r.code, EXIT_THRESHOLD);
}

#[test]
fn verify_rejects_mismatched_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = trained(dir.path(), "mci.model");
    let r = cli(&["verify", "--model", &fixture("healthy.model"), "--out", path_str(&out)], "");
    assert_eq!(r.code, EXIT_INVALID);
    assert!(r.stderr.contains("trained on model 'mci'"), "{}", r.stderr);

    let config = dir.path().join("gamma.toml");
    std::fs::write(&config, "schema_version = 1\n[training]\ngamma = 0.9\n").unwrap();
    let r = cli(
        &["verify", "--config", path_str(&config), "--model", &fixture("mci.model"), "--out", path_str(&out)],
        "",
    );
    assert_eq!(r.code, EXIT_INVALID);
    assert!(r.stderr.contains("gamma"), "{}", r.stderr);
    assert_eq!(TrainingConfig::default().gamma, 0.05);
}

#[test]
fn bad_threshold_is_a_usage_error() {
    assert_eq!(cli(&["verify", "--threshold", "-1"], "").code, EXIT_INVALID);
    assert_eq!(cli(&["verify", "--threshold", "lots"], "").code, EXIT_INVALID);
}

fn summary(out: &Path) -> EvaluationSummary {
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    EvaluationSummary {
        policy: v["policy"].as_str().unwrap().into(),
        user: v["user"].as_str().unwrap().into(),
        episodes: v["episodes"].as_u64().unwrap(),
        seed: v["seed"].as_u64().unwrap(),
        mean_return: v["mean_return"].as_f64().unwrap(),
        ci95_halfwidth: v["ci95_halfwidth"].as_f64(),
        engagement_time_fractions: serde_json::from_value(v["engagement_time_fractions"].clone()).unwrap(),
        correct_rate: v["correct_rate"].as_f64().unwrap(),
    }
}

#[test]
fn simulate_trained_and_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let out = trained(dir.path(), "mci.model");
    let base_out = dir.path().join("baseline");
    let model = fixture("mci.model");

    let r = cli(&["simulate", "--model", &model, "--out", path_str(&out), "--episodes", "200"], "");
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let learned = summary(&out);
    assert!((learned.engagement_time_fractions.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let lines = std::fs::read_to_string(out.join("sessions.jsonl")).unwrap();
    // 8 rounds and one summary record per episode.
    assert_eq!(lines.lines().count(), 200 * 9);

    let r = cli(
        &[
            "simulate", "--model", &model, "--out", path_str(&base_out), "--episodes", "200",
            "--baseline", "a1", "--qtable", "unused.csv",
        ],
        "",
    );
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let baseline = summary(&base_out);
    assert_eq!(baseline.policy, "constant-a1");
    assert!(learned.mean_return >= baseline.mean_return);
    assert_eq!(learned.seed, baseline.seed);
}

#[test]
fn simulate_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    for args in [
        vec!["simulate", "--episodes", "0", "--baseline", "a1"],
        vec!["simulate", "--baseline", "a3"],
        vec!["simulate", "--qtable", "nowhere.csv"],
    ] {
        let mut args = args.clone();
        args.extend(["--out", path_str(&out)]);
        assert_eq!(cli(&args, "").code, EXIT_INVALID, "{args:?}");
    }
    assert!(!out.exists());
}

#[test]
fn simulate_is_reproducible_under_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let r = cli(&["simulate", "--baseline", "a2", "--episodes", "20", "--seed", seed, "--out", path_str(&out)], "");
        assert_eq!(r.code, EXIT_OK);
        std::fs::read(out.join("sessions.jsonl")).unwrap()
    };
    assert_eq!(run("a", "9"), run("b", "9"));
    assert_ne!(run("a", "9"), run("c", "10"));
}

fn play_script(personality: &str) -> String {
    let mut s = format!("{personality}\n4\n0\n");
    for _ in 0..8 {
        s.push_str("1\n0\n1\n");
    }
    s
}

#[test]
fn play_introverted_session() {
    let r = cli(&["play", "--baseline", "a2"], &play_script("introverted"));
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.contains("session complete"));
    let labels: Vec<_> = r.stdout.lines().filter_map(|l| l.strip_prefix("  personality: ")).collect();
    assert_eq!(labels.len(), 9);
    assert!(labels.iter().all(|l| *l == "Introverted"));
    assert!(r.stdout.contains("robot action: a2"));
}

#[test]
fn play_reprompts_on_bad_entries() {
    let script = "nobody\n\n7\nrobot\nnope\nsmiling\n".to_string()
        + "5\n1\nx\n2\n0\n"
        + &"1\n0\n1\n".repeat(7);
    let r = cli(&["play", "--baseline", "a0"], &script);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.contains("invalid entry \"nobody\""));
    assert!(r.stdout.contains("invalid entry \"7\""));
    assert!(r.stdout.contains("invalid entry \"nope\""));
    assert!(r.stdout.contains("invalid entry \"5\""));
    assert!(r.stdout.contains("invalid entry \"x\""));
    // Empty personality falls back to the configured one.
    assert!(r.stdout.contains("  personality: Extraverted"));
    assert!(r.stdout.contains("round 1: (robot, smiling, correct) -> a0 | answer 1 | reward -0.55 | (up, not_smiling, correct)"));
    assert!(r.stdout.contains("rounds: 8"));
}

#[test]
fn play_end_of_input_aborts_gracefully() {
    let r = cli(&["play", "--baseline", "a1"], "extraverted\n0\n0\n1\n0\n1\n2\n");
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stdout.contains("session aborted after 1 of 8 rounds"), "{}", r.stdout);
    assert!(r.stdout.contains("rounds: 1"));

    let r = cli(&["play", "--baseline", "a1"], "");
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stdout.contains("session aborted"));
}

#[test]
fn play_needs_a_policy() {
    let dir = tempfile::tempdir().unwrap();
    let r = cli(&["play", "--out", path_str(dir.path())], "extraverted\n");
    assert_eq!(r.code, EXIT_INVALID);
    assert!(r.stderr.contains("file not found"));
}

#[test]
fn help_and_unknown_commands() {
    let r = cli(&["--help"], "");
    assert_eq!(r.code, EXIT_OK);
    for sub in ["train", "verify", "simulate", "play"] {
        assert!(r.stdout.contains(sub));
    }
    assert_eq!(cli(&["dance"], "").code, EXIT_INVALID);
    assert_eq!(cli(&["train", "--bogus"], "").code, EXIT_INVALID);
}
