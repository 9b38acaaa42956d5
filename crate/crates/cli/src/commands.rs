use std::fs;
use std::path::{Path, PathBuf};

use rrl_core::harness::{
    self, criteria, read_csv_file, summarize, write_csv, Arm, ArmTrajectory, ExperimentConfig,
    Summary,
};
use rrl_core::Checkpoint;

use crate::error::{CliError, Result};
use crate::manifest::{write_atomic, RunManifest};

pub const CONFIG_FILE: &str = "config.toml";
pub const SUMMARY_FILE: &str = "summary.json";

/// Options shared by every simulating subcommand.
#[derive(Debug, Clone)]
pub struct RunArgs {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub seeds: Option<Vec<u64>>,
    pub no_target_networks: bool,
}

pub fn load_config(path: Option<&Path>, no_target_networks: bool) -> Result<ExperimentConfig> {
    let mut config = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            ExperimentConfig::from_toml(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if no_target_networks {
        config.agent.use_target_networks = false;
    }
    config.validate()?;
    Ok(config)
}

/// Resolves the config, creates the output directory and records the
/// manifest and the resolved config before anything is simulated.
fn prepare(command: &str, args: &RunArgs) -> Result<ExperimentConfig> {
    let mut config = load_config(args.config.as_deref(), args.no_target_networks)?;
    if let Some(seeds) = &args.seeds {
        if seeds.is_empty() {
            return Err(CliError::BadConfig("--seeds needs at least one seed".into()));
        }
        config.run.seeds = seeds.clone();
    }
    fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    RunManifest::new(command, args.config.as_deref(), &args.out, &config.run.seeds).write()?;
    write_atomic(&args.out.join(CONFIG_FILE), config.to_toml().as_bytes())?;
    Ok(config)
}

fn write_trajectory(out: &Path, t: &ArmTrajectory) -> Result<()> {
    let mut buf = Vec::new();
    write_csv(&mut buf, &t.records)?;
    write_atomic(&out.join(t.file_name()), &buf)
}

fn collect<T>(results: Vec<(u64, harness::Result<T>)>) -> Result<Vec<T>> {
    results
        .into_iter()
        .map(|(_, r)| r.map_err(CliError::from))
        .collect()
}

pub fn train(args: &RunArgs) -> Result<Summary> {
    let config = prepare("train", args)?;
    let runs = collect(harness::for_each_seed(&config.run.seeds, |s| {
        harness::run_training(&config, s)
    }))?;
    let mut fresh = Vec::new();
    for run in runs {
        let dir = args.out.join(checkpoint_dir_name(run.seed));
        run.checkpoint.save(&dir)?;
        let t = ArmTrajectory::new("train", run.seed, run.records);
        write_trajectory(&args.out, &t)?;
        fresh.push(t);
    }
    write_summary(&args.out, &config, fresh)
}

pub fn checkpoint_dir_name(seed: u64) -> String {
    format!("checkpoint_seed{seed}")
}

/// `path` is either one checkpoint directory, used for every seed, or a
/// training output directory holding `checkpoint_seed<S>` per seed.
fn find_checkpoint(path: &Path, seed: u64) -> Result<PathBuf> {
    let per_seed = path.join(checkpoint_dir_name(seed));
    if per_seed.is_dir() {
        Ok(per_seed)
    } else if path.join("checkpoint.json").is_file() {
        Ok(path.to_path_buf())
    } else {
        Err(CliError::io(
            path,
            format!("no checkpoint for seed {seed} (expected {} or checkpoint.json)", per_seed.display()),
        ))
    }
}

pub fn switch(args: &RunArgs, checkpoint: &Path, no_exploration: bool) -> Result<Summary> {
    let config = prepare("switch", args)?;
    let arm = if no_exploration {
        Arm::FROZEN
    } else {
        Arm::from_config(&config)
    };
    let checkpoints = config
        .run
        .seeds
        .iter()
        .map(|&s| {
            let dir = find_checkpoint(checkpoint, s)?;
            Ok((s, Checkpoint::load(&dir)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let runs = collect(harness::for_each_seed(&config.run.seeds, |s| {
        let cp = &checkpoints.iter().find(|(k, _)| *k == s).expect("loaded above").1;
        harness::run_regime_switch(cp, &config, s, arm)
    }))?;
    let mut fresh = Vec::new();
    for run in runs {
        let t = ArmTrajectory::new(arm.name(), run.seed, run.records);
        write_trajectory(&args.out, &t)?;
        fresh.push(t);
    }
    write_summary(&args.out, &config, fresh)
}

pub fn compare_experience(args: &RunArgs) -> Result<Summary> {
    let config = prepare("compare-experience", args)?;
    let levels = config.run.experience_levels.clone();
    let runs = collect(harness::for_each_seed(&config.run.seeds, |s| {
        harness::run_experience_comparison(&config, &levels, s)
    }))?;
    let mut fresh = Vec::new();
    for run in runs.into_iter().flatten() {
        let t = ArmTrajectory::new(format!("ep{}", run.level), run.seed, run.switch.records);
        write_trajectory(&args.out, &t)?;
        fresh.push(t);
    }
    write_summary(&args.out, &config, fresh)
}

/// Splits `explore_seed3.csv` into `("explore", 3)`.
pub fn parse_trajectory_name(name: &str) -> Option<(String, u64)> {
    let stem = name.strip_suffix(".csv")?;
    let (arm, seed) = stem.rsplit_once("_seed")?;
    if arm.is_empty() {
        return None;
    }
    Some((arm.to_string(), seed.parse().ok()?))
}

/// Trajectory CSV files under `dir`, sorted by arm and seed.
fn trajectory_files(dir: &Path) -> Result<Vec<(String, u64, PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some((arm, seed)) = parse_trajectory_name(&name) {
            files.push((arm, seed, entry.path()));
        }
    }
    files.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
    Ok(files)
}

/// Summarizes `fresh` together with every other trajectory already in
/// `out` and writes `summary.json`.
fn write_summary(out: &Path, config: &ExperimentConfig, fresh: Vec<ArmTrajectory>) -> Result<Summary> {
    let mut all = fresh;
    for (arm, seed, path) in trajectory_files(out)? {
        if !all.iter().any(|t| t.arm == arm && t.seed == seed) {
            all.push(ArmTrajectory::new(arm, seed, read_csv_file(&path)?));
        }
    }
    all.sort_by(|a, b| (&a.arm, a.seed).cmp(&(&b.arm, b.seed)));
    let summary = summarize(&all, &config.regimes(), config.run.window)?;
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_atomic(&out.join(SUMMARY_FILE), text.as_bytes())?;
    Ok(summary)
}

/// Outcome of `verify`: one line per check and the overall verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub lines: Vec<String>,
    pub passed: bool,
}

pub fn verify(out: &Path) -> Result<VerifyReport> {
    let config_path = out.join(CONFIG_FILE);
    if !config_path.is_file() {
        return Err(CliError::MissingOutputs(format!("{} not found", config_path.display())));
    }
    let config = load_config(Some(&config_path), false)?;
    let regimes = config.regimes();
    let files = trajectory_files(out)?;
    if files.is_empty() {
        return Err(CliError::MissingOutputs(format!(
            "no trajectory CSVs in {}",
            out.display()
        )));
    }

    let mut lines = Vec::new();
    let mut passed = true;
    let mut trajectories = Vec::new();
    for (arm, seed, path) in files {
        let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        let records = match read_csv_file(&path) {
            Ok(r) => r,
            Err(e) => {
                passed = false;
                lines.push(format!("[FAIL] {name}: {e}"));
                continue;
            }
        };
        match criteria::check_closed_form(&records, &regimes, criteria::CSV_IDENTITY_TOLERANCE) {
            Ok(n) => lines.push(format!("[PASS] {name}: closed-form relations hold on {n} rows")),
            Err(v) => {
                passed = false;
                lines.push(format!("[FAIL] {name}: {v}"));
            }
        }
        if !records.is_empty() {
            trajectories.push(ArmTrajectory::new(arm, seed, records));
        }
    }

    let oracle = criteria::steady_state_oracle();
    passed &= oracle.passed;
    lines.push(oracle.to_string());
    if trajectories.is_empty() {
        return Ok(VerifyReport { lines, passed: false });
    }
    let summary = summarize(&trajectories, &regimes, config.run.window)?;
    for c in &summary.criteria {
        passed &= c.passed;
        lines.push(c.to_string());
    }

    let stored_path = out.join(SUMMARY_FILE);
    match fs::read_to_string(&stored_path) {
        Ok(text) => {
            let stored: Summary = serde_json::from_str(&text)
                .map_err(|e| CliError::io(&stored_path, e))?;
            let same_verdicts = stored.criteria.len() == summary.criteria.len()
                && stored
                    .criteria
                    .iter()
                    .zip(&summary.criteria)
                    .all(|(a, b)| a.id == b.id && a.passed == b.passed);
            match summary.max_abs_difference(&stored) {
                Some(d) if d <= criteria::CSV_IDENTITY_TOLERANCE && same_verdicts => lines.push(
                    format!("[PASS] {SUMMARY_FILE}: recomputed metrics agree (max difference {d:.3e})"),
                ),
                Some(d) => {
                    passed = false;
                    lines.push(format!(
                        "[FAIL] {SUMMARY_FILE}: recomputed metrics differ (max difference {d:.3e}, verdicts agree: {same_verdicts})"
                    ));
                }
                None => {
                    passed = false;
                    lines.push(format!("[FAIL] {SUMMARY_FILE}: rows do not match the CSVs on disk"));
                }
            }
        }
        Err(_) => {
            passed = false;
            lines.push(format!("[FAIL] {SUMMARY_FILE}: not found"));
        }
    }
    Ok(VerifyReport { lines, passed })
}
