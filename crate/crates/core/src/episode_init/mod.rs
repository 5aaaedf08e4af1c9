//! Hybrid reference state initialization with scene and domain randomization.
//!
//! An episode either starts from the default pose with a fully random scene,
//! or from a uniformly chosen reference clip at a uniform phase `φ`. In the
//! latter case the object placement comes from the clip's annotation (when
//! it has one) and every other scene parameter is drawn fresh.

mod domain;
mod motion;
mod scene;

pub use domain::{
    apply_object_pose_noise, apply_proprio_noise, sample_domain, DelayLine, DomainDraw,
    DomainRanges, NoiseMode,
};
pub use motion::{
    MotionClip, MotionDataset, MotionFrame, SubsetLabel, DATASET_FORMAT, DATASET_VERSION,
};
pub use scene::{
    randomize_scene, CarryRanges, CommandRanges, Interval, SceneParams, SceneRanges, SitLieRanges,
    StandUpRanges,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::se3::yaw_of;
use crate::task_kernels::Task;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InitError {
    #[error("no reference clips available for task {0}")]
    EmptyDataset(Task),
    #[error("clip {clip}: {reason}")]
    InvalidClip { clip: String, reason: String },
    #[error("invalid range {0}")]
    InvalidRange(String),
    #[error("default-pose fraction must be in [0, 1], got {0}")]
    InvalidFraction(f64),
    #[error("dataset format: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(String),
}

/// Hybrid RSI settings. The default-pose fraction has no implied default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RsiConfig {
    pub default_pose_fraction: f64,
    pub seed: u64,
}

impl RsiConfig {
    pub fn new(default_pose_fraction: f64, seed: u64) -> Result<Self, InitError> {
        let cfg = Self {
            default_pose_fraction,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), InitError> {
        if !(0.0..=1.0).contains(&self.default_pose_fraction) {
            return Err(InitError::InvalidFraction(self.default_pose_fraction));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitMode {
    DefaultPose,
    FromReference {
        clip_id: String,
        phase: f64,
        frame: usize,
        /// Whether the object placement was taken from the clip.
        object_from_clip: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeInit {
    pub mode: InitMode,
    pub scene: SceneParams,
    pub domain: DomainDraw,
}

impl EpisodeInit {
    pub fn is_default_pose(&self) -> bool {
        matches!(self.mode, InitMode::DefaultPose)
    }
}

/// Independent random stream for episode `index` under `seed`.
pub fn episode_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `round(φ · (len − 1))`.
pub fn phase_to_frame(phase: f64, len: usize) -> usize {
    (phase * len.saturating_sub(1) as f64).round() as usize
}

pub fn sample_init<R: Rng + ?Sized>(
    dataset: &MotionDataset,
    ranges: &SceneRanges,
    domain: &DomainRanges,
    cfg: &RsiConfig,
    task: Task,
    rng: &mut R,
) -> Result<EpisodeInit, InitError> {
    cfg.validate()?;
    let clips = dataset.clips_for(task);
    if clips.is_empty() {
        return Err(InitError::EmptyDataset(task));
    }

    let use_default = rng.random::<f64>() < cfg.default_pose_fraction;
    let mode = if use_default {
        InitMode::DefaultPose
    } else {
        let clip = clips[rng.random_range(0..clips.len())];
        let phase: f64 = rng.random_range(0.0..=1.0);
        let frame = phase_to_frame(phase, clip.len());
        InitMode::FromReference {
            clip_id: clip.id.clone(),
            phase,
            frame,
            object_from_clip: false,
        }
    };

    let mut scene = randomize_scene(task, ranges, rng);
    let mode = match mode {
        InitMode::FromReference {
            clip_id,
            phase,
            frame,
            ..
        } => {
            let clip = clips
                .iter()
                .find(|c| c.id == clip_id)
                .expect("chosen above");
            let f = &clip.frames[frame];
            let from_clip = match (&f.object, &scene) {
                (
                    Some(obj),
                    SceneParams::Carry { .. } | SceneParams::Sit { .. } | SceneParams::Lie { .. },
                ) => {
                    let rel = obj.position - f.base_pose.position;
                    scene.set_object([rel.x, rel.y], obj.position.z, yaw_of(&obj.rotation));
                    true
                }
                _ => false,
            };
            InitMode::FromReference {
                clip_id,
                phase,
                frame,
                object_from_clip: from_clip,
            }
        }
        m => m,
    };

    Ok(EpisodeInit {
        mode,
        scene,
        domain: sample_domain(domain, rng),
    })
}
