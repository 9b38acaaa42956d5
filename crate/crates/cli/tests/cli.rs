use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = r#"
[run]
episodes = 2
periods_per_episode = 120
switch_period = 20
post_switch_episodes = 2
seeds = [1, 2]
window = 50
experience_levels = [1, 2]

[agent]
actor_hidden = [16, 16]
critic_hidden = [16, 16]
minibatch = 16
"#;

fn rrl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rrl"))
        .args(args)
        .env("RRL_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("tiny.toml");
    fs::write(&p, text).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn train_switch_verify_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = dir.path().join("out");

    let o = rrl(&["train", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("checkpoint_seed1/checkpoint.json").is_file());
    assert!(out.join("checkpoint_seed2/actor.bin").is_file());
    assert!(out.join("train.manifest.json").is_file());
    assert!(out.join("config.toml").is_file());
    let csv = fs::read_to_string(out.join("train_seed1.csv")).unwrap();
    assert!(csv.starts_with(
        "seed,episode,period,regime_id,belief,pi,i,m,reward,sigma,critic_loss,actor_objective\n"
    ));
    assert_eq!(csv.lines().count(), 1 + 2 * 120);

    let o = rrl(&["switch", "--config", path(&cfg), "--out", path(&out), "--checkpoint", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = rrl(&[
        "switch",
        "--config",
        path(&cfg),
        "--out",
        path(&out),
        "--checkpoint",
        path(&out),
        "--no-exploration",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("explore_seed1.csv").is_file());
    let frozen = fs::read_to_string(out.join("frozen_seed2.csv")).unwrap();
    for line in frozen.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[9], "0", "frozen arm never explores");
        assert_eq!(f[10], "0", "frozen arm never learns");
    }

    let o = rrl(&["verify", "--out", path(&out)]);
    let text = stdout(&o);
    assert!(matches!(o.status.code(), Some(0) | Some(1)), "{}", stderr(&o));
    for name in ["train_seed1.csv", "explore_seed2.csv", "frozen_seed1.csv"] {
        assert!(text.contains(&format!("[PASS] {name}: closed-form relations hold")), "{text}");
    }
    assert!(text.contains("[PASS] criterion 1"), "{text}");
    for id in [5, 6, 7] {
        assert!(text.contains(&format!("criterion {id}:")), "{text}");
    }
    assert!(text.contains("[PASS] summary.json: recomputed metrics agree"), "{text}");
}

#[test]
fn corrupted_pi_is_pinpointed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = dir.path().join("out");
    let o = rrl(&["train", "--config", path(&cfg), "--out", path(&out), "--seeds", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let file = out.join("train_seed4.csv");
    let text = fs::read_to_string(&file).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut fields: Vec<String> = lines[37].split(',').map(String::from).collect();
    fields[5] = "1.2345".into();
    lines[37] = fields.join(",");
    fs::write(&file, lines.join("\n") + "\n").unwrap();

    let o = rrl(&["verify", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("[FAIL] train_seed4.csv: row 37: pi = 1.2345"), "{text}");
}

#[test]
fn steady_state_csv_passes_cross_checks() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("config.toml"), "").unwrap();
    let mut csv = String::from(
        "seed,episode,period,regime_id,belief,pi,i,m,reward,sigma,critic_loss,actor_objective\n",
    );
    for p in 0..150 {
        csv.push_str(&format!("9,0,{p},0,1,1,1.25,5,0,0,0,0\n"));
    }
    fs::write(dir.path().join("train_seed9.csv"), csv).unwrap();
    let o = rrl(&["verify", "--out", path(dir.path())]);
    let text = stdout(&o);
    assert!(text.contains("[PASS] train_seed9.csv: closed-form relations hold on 150 rows"), "{text}");
    assert!(text.contains("[PASS] criterion 5"), "{text}");
}

#[test]
fn degenerate_exponent_is_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[regime_after]\npi_hat = 1.1\nlambda = -1.0\nbeta = 0.8\n");
    let o = rrl(&["train", "--config", path(&cfg), "--out", path(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("degenerate exponent"), "{}", stderr(&o));
}

#[test]
fn unknown_key_is_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[agent]\nactor_lr = 1e-4\nactr_lr = 1e-3\n");
    let o = rrl(&["train", "--config", path(&cfg), "--out", path(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("actr_lr"), "{}", stderr(&o));
}

#[test]
fn missing_config_is_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = rrl(&[
        "train",
        "--config",
        path(&dir.path().join("nope.toml")),
        "--out",
        path(&dir.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = rrl(&["verify", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(4));
    fs::write(dir.path().join("config.toml"), "").unwrap();
    let o = rrl(&["verify", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn checkpoint_shape_mismatch_is_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = dir.path().join("out");
    let o = rrl(&["train", "--config", path(&cfg), "--out", path(&out), "--seeds", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let wide = write_config(dir.path(), &TINY.replace("actor_hidden = [16, 16]", "actor_hidden = [32, 16]"));
    let o = rrl(&[
        "switch",
        "--config",
        path(&wide),
        "--out",
        path(&out),
        "--checkpoint",
        path(&out.join("checkpoint_seed1")),
        "--seeds",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = rrl(&["compare-experience", "--config", path(&cfg), "--out", path(out), "--seeds", "3"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for name in ["ep1_seed3.csv", "ep2_seed3.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn no_target_networks_flag_reaches_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = dir.path().join("out");
    let o = rrl(&["train", "--config", path(&cfg), "--out", path(&out), "--seeds", "1", "--no-target-networks"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let resolved = fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(resolved.contains("use_target_networks = false"), "{resolved}");
}

#[test]
fn shipped_baseline_matches_defaults() {
    let text = include_str!("../../../configs/baseline.toml");
    let parsed = rrl_core::ExperimentConfig::from_toml(text).unwrap();
    assert_eq!(parsed, rrl_core::ExperimentConfig::default());
}
