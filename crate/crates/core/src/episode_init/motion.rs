//! Reference motion clips and the on-disk dataset container.
//!
//! The dataset is a JSON document:
//!
//! ```text
//! { "format": "hsi-motion", "version": 1,
//!   "clips": [ { "id", "subset", "fps",
//!                "frames": [ { "base_pose": {"position": [x,y,z], "rotation": [[..],[..],[..]]},
//!                              "joint_pos": [29], "joint_vel": [29],
//!                              "ee_pos": [[x,y,z] × 5],
//!                              "object": null | pose } ] } ] }
//! ```
//!
//! Rotations are row-major. End-effector order is left hand, right hand,
//! left foot, right foot, head, all in the base frame. Floats are written
//! with shortest round-trip formatting, so read/write is lossless.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::InitError;
use crate::se3::{Pose, Vec3};
use crate::task_kernels::{Task, NUM_END_EFFECTORS, NUM_JOINTS};

pub const DATASET_FORMAT: &str = "hsi-motion";
pub const DATASET_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubsetLabel {
    Loco,
    #[serde(rename = "pickUp")]
    PickUp,
    #[serde(rename = "carryWith")]
    CarryWith,
    #[serde(rename = "putDown")]
    PutDown,
    Sit,
    Lie,
    GetUp,
    StyleForward,
    StyleBackward,
    StyleSide,
}

impl SubsetLabel {
    pub const ALL: [SubsetLabel; 10] = [
        SubsetLabel::Loco,
        SubsetLabel::PickUp,
        SubsetLabel::CarryWith,
        SubsetLabel::PutDown,
        SubsetLabel::Sit,
        SubsetLabel::Lie,
        SubsetLabel::GetUp,
        SubsetLabel::StyleForward,
        SubsetLabel::StyleBackward,
        SubsetLabel::StyleSide,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SubsetLabel::Loco => "Loco",
            SubsetLabel::PickUp => "pickUp",
            SubsetLabel::CarryWith => "carryWith",
            SubsetLabel::PutDown => "putDown",
            SubsetLabel::Sit => "Sit",
            SubsetLabel::Lie => "Lie",
            SubsetLabel::GetUp => "GetUp",
            SubsetLabel::StyleForward => "StyleForward",
            SubsetLabel::StyleBackward => "StyleBackward",
            SubsetLabel::StyleSide => "StyleSide",
        }
    }

    /// Whether clips of this subset seed episodes of `task`.
    pub fn serves(&self, task: Task) -> bool {
        use SubsetLabel::*;
        match task {
            Task::CarryBox => matches!(self, Loco | PickUp | CarryWith | PutDown),
            Task::SitDown => matches!(self, Loco | Sit),
            Task::LieDown => matches!(self, Loco | Lie),
            Task::StandUp => matches!(self, Loco | GetUp),
            Task::StyleLoco => matches!(self, StyleForward | StyleBackward | StyleSide),
        }
    }
}

impl std::fmt::Display for SubsetLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SubsetLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SubsetLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown subset '{s}'"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionFrame {
    pub base_pose: Pose,
    pub joint_pos: Vec<f64>,
    pub joint_vel: Vec<f64>,
    pub ee_pos: Vec<Vec3>,
    /// Annotated object pose, world frame.
    pub object: Option<Pose>,
}

impl MotionFrame {
    pub fn standing(base_pose: Pose) -> Self {
        Self {
            base_pose,
            joint_pos: vec![0.0; NUM_JOINTS],
            joint_vel: vec![0.0; NUM_JOINTS],
            ee_pos: vec![Vec3::zeros(); NUM_END_EFFECTORS],
            object: None,
        }
    }

    fn validate(&self, clip: &str, index: usize) -> Result<(), InitError> {
        let bad = |what: String| InitError::InvalidClip {
            clip: clip.to_string(),
            reason: format!("frame {index}: {what}"),
        };
        if self.joint_pos.len() != NUM_JOINTS || self.joint_vel.len() != NUM_JOINTS {
            return Err(bad(format!("expected {NUM_JOINTS} joint values")));
        }
        if self.ee_pos.len() != NUM_END_EFFECTORS {
            return Err(bad(format!("expected {NUM_END_EFFECTORS} end-effectors")));
        }
        let finite = self.base_pose.is_finite()
            && self
                .joint_pos
                .iter()
                .chain(&self.joint_vel)
                .all(|v| v.is_finite())
            && self.ee_pos.iter().all(|p| p.iter().all(|v| v.is_finite()))
            && self.object.as_ref().is_none_or(Pose::is_finite);
        if !finite {
            return Err(bad("non-finite value".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionClip {
    pub id: String,
    pub subset: SubsetLabel,
    pub fps: f64,
    pub frames: Vec<MotionFrame>,
}

impl MotionClip {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.frames.len().saturating_sub(1) as f64 / self.fps
    }

    pub fn time_of(&self, frame: usize) -> f64 {
        frame as f64 / self.fps
    }

    pub fn validate(&self) -> Result<(), InitError> {
        if self.frames.is_empty() {
            return Err(InitError::InvalidClip {
                clip: self.id.clone(),
                reason: "no frames".into(),
            });
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(InitError::InvalidClip {
                clip: self.id.clone(),
                reason: format!("fps must be positive, got {}", self.fps),
            });
        }
        for (i, f) in self.frames.iter().enumerate() {
            f.validate(&self.id, i)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionDataset {
    pub format: String,
    pub version: u32,
    pub clips: Vec<MotionClip>,
}

impl Default for MotionDataset {
    fn default() -> Self {
        Self::new(Vec::new())
    }
}

impl MotionDataset {
    pub fn new(clips: Vec<MotionClip>) -> Self {
        Self {
            format: DATASET_FORMAT.to_string(),
            version: DATASET_VERSION,
            clips,
        }
    }

    pub fn validate(&self) -> Result<(), InitError> {
        if self.format != DATASET_FORMAT {
            return Err(InitError::Format(format!(
                "unexpected format tag '{}'",
                self.format
            )));
        }
        if self.version != DATASET_VERSION {
            return Err(InitError::Format(format!(
                "unsupported dataset version {} (expected {DATASET_VERSION})",
                self.version
            )));
        }
        self.clips.iter().try_for_each(MotionClip::validate)
    }

    pub fn from_json(text: &str) -> Result<Self, InitError> {
        let ds: Self = serde_json::from_str(text).map_err(|e| InitError::Format(e.to_string()))?;
        ds.validate()?;
        Ok(ds)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("dataset serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self, InitError> {
        let text = fs::read_to_string(path)
            .map_err(|e| InitError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), InitError> {
        fs::write(path, self.to_json())
            .map_err(|e| InitError::Io(format!("{}: {e}", path.display())))
    }

    pub fn clips_for(&self, task: Task) -> Vec<&MotionClip> {
        self.clips
            .iter()
            .filter(|c| c.subset.serves(task))
            .collect()
    }
}
