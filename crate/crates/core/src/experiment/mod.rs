//! Experiment drivers behind the command-line tool: localization runs,
//! reward regression tables, annotation and RSI sampling. All outputs are
//! plain text and byte-identical for identical inputs.

mod config;
mod reward_cases;
mod run;

pub use config::{LocalizationConfig, RunChecks, TrajectoryChoice, CONFIG_VERSION};
pub use reward_cases::{
    outcomes_csv, reward_check, CaseOutcome, CaseRobot, CaseScene, RewardCase, RewardCases,
    RewardTerm, BUILTIN_REWARD_CASES, CASES_VERSION, OUTCOME_HEADER,
};
pub use run::{
    build_scene, draw_setup, object_class, records_csv, run_localization, run_trial, summary_json,
    trials_csv, Band, CheckResult, EpisodeRecord, RunOutput, SummaryStats, TrialSetup,
    TrialSummary, RECORD_HEADER, TRIAL_HEADER,
};

use std::fs;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::annotation::{
    annotate_object, annotation_record, contact_discontinuity, smooth_motion, split_subsets,
    AnnotationError, AnnotationRecord, ContactAnnotation,
};
use crate::episode_init::{
    episode_rng, sample_init, DomainRanges, EpisodeInit, InitError, MotionDataset, RsiConfig,
    SceneRanges,
};
use crate::localization::LocalizationError;
use crate::sensor_sim::SimError;
use crate::task_kernels::{KernelError, Task};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error("cases: {0}")]
    Cases(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Localization(#[from] LocalizationError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Init(#[from] InitError),
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
}

impl ExperimentError {
    /// Short stable category for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentError::Config(_) => "config",
            ExperimentError::Cases(_) => "cases",
            ExperimentError::Io(_) => "io",
            ExperimentError::Sim(_) => "simulation",
            ExperimentError::Localization(_) => "localization",
            ExperimentError::Kernel(_) => "kernel",
            ExperimentError::Init(_) => "init",
            ExperimentError::Annotation(_) => "annotation",
        }
    }
}

impl From<csv::Error> for ExperimentError {
    fn from(e: csv::Error) -> Self {
        ExperimentError::Io(e.to_string())
    }
}

/// Writes `contents` to `dir/name`, creating `dir` if needed.
pub fn write_output(dir: &Path, name: &str, contents: &str) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(|e| ExperimentError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))
}

pub fn pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

/// Result of annotating one carry clip.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnotateOutput {
    /// Annotated clip, followed by its three subsets when splitting.
    pub dataset: MotionDataset,
    pub record: AnnotationRecord,
    /// Largest object jump across the contact frames.
    pub discontinuity: f64,
}

impl AnnotateOutput {
    pub fn continuous(&self) -> bool {
        self.discontinuity == 0.0
    }
}

/// Smooths `clip_id` (or the only clip) with `window`, attaches the object
/// trajectory for contact frames `pickup`/`place` and optionally splits it.
pub fn annotate(
    dataset: &MotionDataset,
    clip_id: Option<&str>,
    pickup: usize,
    place: usize,
    window: usize,
    split: bool,
) -> Result<AnnotateOutput, ExperimentError> {
    let clip = match clip_id {
        Some(id) => dataset
            .clips
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| ExperimentError::Config(format!("no clip with id '{id}'")))?,
        None => match dataset.clips.as_slice() {
            [only] => only,
            _ => {
                return Err(ExperimentError::Config(format!(
                    "dataset has {} clips; select one by id",
                    dataset.clips.len()
                )))
            }
        },
    };
    let ann = ContactAnnotation::new(pickup, place);
    let smoothed = smooth_motion(clip, window)?;
    let annotated = annotate_object(&smoothed, &ann)?;
    let record = annotation_record(&smoothed, &ann, window)?;
    let discontinuity = contact_discontinuity(&annotated, &ann).unwrap_or(f64::INFINITY);
    let mut clips = vec![annotated.clone()];
    if split {
        clips.extend(split_subsets(&annotated, &ann)?);
    }
    Ok(AnnotateOutput {
        dataset: MotionDataset::new(clips),
        record,
        discontinuity,
    })
}

/// `n` hybrid-RSI draws for `task` plus the empirical default-pose share.
/// Draw `i` uses its own stream of `seed`, so listings are prefix-stable.
pub fn rsi_sample(
    dataset: &MotionDataset,
    task: Task,
    fraction: f64,
    n: usize,
    seed: u64,
) -> Result<(Vec<EpisodeInit>, f64), ExperimentError> {
    let cfg = RsiConfig::new(fraction, seed)?;
    let scene = SceneRanges::default();
    let domain = DomainRanges::default();
    let draws = (0..n)
        .map(|i| {
            let mut rng = episode_rng(seed, i as u64);
            sample_init(dataset, &scene, &domain, &cfg, task, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let share = if n == 0 {
        0.0
    } else {
        draws.iter().filter(|d| d.is_default_pose()).count() as f64 / n as f64
    };
    Ok((draws, share))
}

/// One JSON object per line.
pub fn json_lines<T: Serialize>(rows: &[T]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(r).expect("row serializes"));
        out.push('\n');
    }
    out
}

/// Synthetic carry clip for demos and tests: the base walks along +x with a
/// slight sway, joints oscillate with per-clip phases, and the hands hold a
/// box-sized gap in front of the torso.
pub fn synthetic_carry_clip(id: &str, len: usize, seed: u64) -> crate::episode_init::MotionClip {
    use crate::episode_init::{MotionClip, MotionFrame, SubsetLabel};
    use crate::se3::{Pose, Rotation, Vec3};
    use crate::task_kernels::EndEffector;
    use rand::Rng;

    let mut rng = episode_rng(seed, 0);
    let phases: Vec<f64> = (0..crate::task_kernels::NUM_JOINTS)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    let sway = rng.random_range(0.01..0.05);
    let fps = 30.0;
    let frames = (0..len)
        .map(|i| {
            let t = i as f64 / fps;
            let noise = |rng: &mut rand_chacha::ChaCha8Rng| rng.random_range(-0.005..0.005);
            let base = Pose::new(
                Vec3::new(0.6 * t, sway * (2.0 * t).sin(), 0.75 + noise(&mut rng)),
                Rotation::from_rpy(noise(&mut rng), noise(&mut rng), 0.1 * (1.5 * t).sin()),
            );
            let mut f = MotionFrame::standing(base);
            for (j, ph) in phases.iter().enumerate() {
                f.joint_pos[j] = 0.4 * (3.0 * t + ph).sin() + noise(&mut rng);
                f.joint_vel[j] = 1.2 * (3.0 * t + ph).cos();
            }
            let lift = 0.1 * (t * 0.8).sin();
            f.ee_pos[EndEffector::LeftHand as usize] =
                Vec3::new(0.3, 0.15, 0.1 + lift + noise(&mut rng));
            f.ee_pos[EndEffector::RightHand as usize] =
                Vec3::new(0.3, -0.15, 0.1 + lift + noise(&mut rng));
            f.ee_pos[EndEffector::LeftFoot as usize] = Vec3::new(0.1 * (3.0 * t).sin(), 0.1, -0.7);
            f.ee_pos[EndEffector::RightFoot as usize] =
                Vec3::new(-0.1 * (3.0 * t).sin(), -0.1, -0.7);
            f.ee_pos[EndEffector::Head as usize] = Vec3::new(0.0, 0.0, 0.45);
            f
        })
        .collect();
    MotionClip {
        id: id.to_string(),
        subset: SubsetLabel::PickUp,
        fps,
        frames,
    }
}
