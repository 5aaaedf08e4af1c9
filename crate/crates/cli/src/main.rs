//! `hsi-sim`: localization simulation, reward regression checks, motion
//! annotation and RSI sampling.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on
//! errors. Errors are printed to stderr as one JSON object per line:
//! `{"error":"<kind>","message":"<text>"}`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hsi_core::episode_init::MotionDataset;
use hsi_core::experiment::{
    annotate, json_lines, outcomes_csv, pretty_json, records_csv, reward_check, rsi_sample,
    run_localization, summary_json, trials_csv, write_output, ExperimentError, LocalizationConfig,
    RewardCases,
};
use hsi_core::task_kernels::Task;

#[derive(Parser, Debug)]
#[command(
    name = "hsi-sim",
    version,
    about = "Localization and interaction-kernel experiments"
)]
struct Cli {
    /// Master seed; overrides the config file.
    #[arg(long, global = true, env = "HSI_SEED")]
    seed: Option<u64>,
    /// Directory for output files.
    #[arg(long, global = true, env = "HSI_OUT_DIR", default_value = "out")]
    out_dir: PathBuf,
    /// TOML run configuration (localize-sim).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate localization trials; writes records.csv, trials.csv, summary.json.
    LocalizeSim {
        /// Override the number of trials.
        #[arg(long)]
        trials: Option<usize>,
        /// Start from the built-in zero-noise configuration instead of the calibrated one.
        #[arg(long, conflicts_with = "config")]
        zero_noise: bool,
    },
    /// Evaluate reward terms against a cases table; writes reward_check.csv.
    RewardCheck {
        /// Cases file (JSON). Defaults to the built-in table.
        #[arg(long)]
        cases: Option<PathBuf>,
        /// Only cases whose term belongs to this task.
        #[arg(long)]
        task: Option<Task>,
    },
    /// Smooth a clip and attach its object trajectory; writes annotated.json and annotation.json.
    Annotate {
        /// Motion dataset file.
        #[arg(long)]
        input: PathBuf,
        /// Clip id (required when the dataset holds several clips).
        #[arg(long)]
        clip: Option<String>,
        /// Pickup contact frame.
        #[arg(long)]
        pickup: usize,
        /// Placement contact frame.
        #[arg(long)]
        place: usize,
        /// Moving-average window (odd).
        #[arg(long, default_value_t = hsi_core::annotation::DEFAULT_SMOOTHING_WINDOW)]
        window: usize,
        /// Also emit the pickUp / carryWith / putDown subsets.
        #[arg(long)]
        split: bool,
    },
    /// Draw episode initializations; writes rsi_samples.jsonl.
    RsiSample {
        /// Motion dataset file.
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        task: Task,
        /// Probability of starting from the default pose.
        #[arg(long)]
        fraction: f64,
        #[arg(short, long, default_value_t = 1000)]
        n: usize,
    },
}

fn fail(e: &ExperimentError) -> ExitCode {
    let line = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
    eprintln!("{line}");
    ExitCode::from(2)
}

fn status(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn load_config(
    cli: &Cli,
    zero_noise: bool,
    trials: Option<usize>,
) -> Result<LocalizationConfig, ExperimentError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
            LocalizationConfig::from_toml(&text)?
        }
        None if zero_noise => LocalizationConfig::zero_noise(),
        None => LocalizationConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = trials {
        cfg.trials = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn localize_sim(
    cli: &Cli,
    zero_noise: bool,
    trials: Option<usize>,
) -> Result<bool, ExperimentError> {
    let cfg = load_config(cli, zero_noise, trials)?;
    let out = run_localization(&cfg)?;
    let dir = &cli.out_dir;
    write_output(dir, "records.csv", &records_csv(&out.records)?)?;
    write_output(dir, "trials.csv", &trials_csv(&out.summary.trials)?)?;
    write_output(dir, "summary.json", &summary_json(&out.summary))?;

    let s = &out.summary;
    let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"));
    println!("trials            {}", s.trial_count);
    println!("reached fine      {}/{}", s.success_count, s.trial_count);
    println!("mean coarse error {} m", opt(s.mean_coarse_error));
    println!("mean fine error   {} m", opt(s.mean_fine_error));
    println!(
        "transition        min {} / mean {} / max {} m",
        opt(s.transition_distance.min),
        opt(s.transition_distance.mean),
        opt(s.transition_distance.max)
    );
    for c in &s.checks {
        println!(
            "check {:<24} {}  {}",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.detail
        );
    }
    Ok(s.all_checks_pass())
}

fn reward_check_cmd(
    cli: &Cli,
    cases: Option<&Path>,
    task: Option<Task>,
) -> Result<bool, ExperimentError> {
    let table = match cases {
        Some(p) => RewardCases::load(p)?,
        None => RewardCases::builtin(),
    };
    let outcomes = reward_check(&table, task)?;
    write_output(&cli.out_dir, "reward_check.csv", &outcomes_csv(&outcomes)?)?;
    for o in &outcomes {
        println!(
            "{:<4} {:<36} expected {:<22} actual {:<22} tol {:e}",
            if o.pass { "ok" } else { "FAIL" },
            o.name,
            o.expected,
            o.actual,
            o.tol
        );
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("{} cases, {} failed", outcomes.len(), failed);
    Ok(failed == 0)
}

fn annotate_cmd(
    cli: &Cli,
    input: &Path,
    clip: Option<&str>,
    pickup: usize,
    place: usize,
    window: usize,
    split: bool,
) -> Result<bool, ExperimentError> {
    let dataset = MotionDataset::load(input)?;
    let out = annotate(&dataset, clip, pickup, place, window, split)?;
    write_output(&cli.out_dir, "annotated.json", &out.dataset.to_json())?;
    write_output(&cli.out_dir, "annotation.json", &pretty_json(&out.record))?;
    println!(
        "continuity: max object jump at contact frames {} m ({})",
        out.discontinuity,
        if out.continuous() { "ok" } else { "FAIL" }
    );
    Ok(out.continuous())
}

fn rsi_sample_cmd(
    cli: &Cli,
    dataset: &Path,
    task: Task,
    fraction: f64,
    n: usize,
) -> Result<bool, ExperimentError> {
    let ds = MotionDataset::load(dataset)?;
    let (draws, share) = rsi_sample(&ds, task, fraction, n, cli.seed.unwrap_or(0))?;
    write_output(&cli.out_dir, "rsi_samples.jsonl", &json_lines(&draws))?;
    println!("samples {n}, default-pose share {share:.4} (configured {fraction})");
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::LocalizeSim { trials, zero_noise } => localize_sim(&cli, *zero_noise, *trials),
        Command::RewardCheck { cases, task } => reward_check_cmd(&cli, cases.as_deref(), *task),
        Command::Annotate {
            input,
            clip,
            pickup,
            place,
            window,
            split,
        } => annotate_cmd(
            &cli,
            input,
            clip.as_deref(),
            *pickup,
            *place,
            *window,
            *split,
        ),
        Command::RsiSample {
            dataset,
            task,
            fraction,
            n,
        } => rsi_sample_cmd(&cli, dataset, *task, *fraction, *n),
    };
    match result {
        Ok(ok) => status(ok),
        Err(e) => fail(&e),
    }
}
