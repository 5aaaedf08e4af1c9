//! Observation builders, reward kernels and success evaluators.
//!
//! Everything in here is a pure function of explicit state. Rewards read
//! world-frame quantities, observations read base-frame quantities; both
//! live side by side on [`RobotState`] and [`SceneState`].

mod amp;
mod compose;
mod obs;
mod regularization;
mod rewards;
mod state;
mod success;

pub use amp::{discriminator_loss, style_reward, StyleWeightSchedule, DEFAULT_STYLE_CLAMP};
pub use compose::{task_terms, total_reward, RewardBreakdown, RewardWeights};
pub use obs::{
    build_disc_obs, build_proprio, build_task_obs, disc_layout, proprio_layout, DiscObs,
    ProprioObs, TaskObs, DISC_OBS_DIM, PROPRIO_DIM,
};
pub use regularization::{
    joint_acceleration, r_regularization, JointLimits, RegularizationTerms, RegularizationWeights,
};
pub use rewards::{
    body_axis_heading, r_carry, r_lie, r_loco, r_loco_tar, r_pick, r_put, r_sit, r_standup,
    r_style_loco, LieBranchOrder,
};
pub use state::{
    EndEffector, RobotState, SceneState, VelocityCommand, NUM_END_EFFECTORS, NUM_JOINTS,
};
pub use success::{evaluate_success, SuccessThresholds};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("{field}: expected {expected} entries, got {got}")]
    Cardinality {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("observation masking only applies to the carry task, not {0}")]
    MaskNotSupported(Task),
    #[error("empty batch: {0}")]
    EmptyBatch(&'static str),
    #[error("task {task} is missing reward term {term}")]
    MissingTerm { task: Task, term: &'static str },
    #[error("task {0} has no success criterion")]
    NoSuccessCriterion(Task),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    CarryBox,
    SitDown,
    LieDown,
    StandUp,
    StyleLoco,
}

impl Task {
    pub const ALL: [Task; 5] = [
        Task::CarryBox,
        Task::SitDown,
        Task::LieDown,
        Task::StandUp,
        Task::StyleLoco,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Task::CarryBox => "carry_box",
            Task::SitDown => "sit_down",
            Task::LieDown => "lie_down",
            Task::StandUp => "stand_up",
            Task::StyleLoco => "style_loco",
        }
    }

    /// Stage terms whose sum is the task reward `r_G`.
    pub fn stage_terms(&self) -> &'static [&'static str] {
        match self {
            Task::CarryBox => &["loco", "carry", "pick", "put"],
            Task::SitDown => &["loco", "sit"],
            Task::LieDown => &["loco", "lie"],
            Task::StandUp => &["standup", "loco_tar"],
            Task::StyleLoco => &["style_loco"],
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Task::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown task '{s}'"))
    }
}
