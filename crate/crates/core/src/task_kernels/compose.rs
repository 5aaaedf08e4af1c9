use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::rewards::{
    r_carry, r_lie, r_loco, r_loco_tar, r_pick, r_put, r_sit, r_standup, r_style_loco,
    LieBranchOrder,
};
use super::state::{RobotState, SceneState};
use super::{KernelError, Task};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardWeights {
    pub w_g: f64,
    pub w_r: f64,
    pub w_s: f64,
    pub w_gp: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            w_g: 0.7,
            w_r: 0.7,
            w_s: 0.3,
            w_gp: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub task: Task,
    pub terms: BTreeMap<String, f64>,
    pub r_g: f64,
    pub r_r: f64,
    pub r_s: f64,
    pub total: f64,
}

/// Evaluates every stage term of `task` at one state.
pub fn task_terms(
    task: Task,
    s: &RobotState,
    scene: &SceneState,
    lie_order: LieBranchOrder,
) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for &name in task.stage_terms() {
        let v = match name {
            "loco" => r_loco(s, scene),
            "carry" => r_carry(s, scene),
            "pick" => r_pick(s, scene),
            "put" => r_put(s, scene),
            "sit" => r_sit(s, scene),
            "lie" => r_lie(s, scene, lie_order),
            "standup" => r_standup(s),
            "loco_tar" => r_loco_tar(s, scene),
            "style_loco" => r_style_loco(s, &scene.command),
            other => unreachable!("unknown stage term {other}"),
        };
        out.insert(name.to_string(), v);
    }
    out
}

/// `r_G` is the sum of the task's stage terms; the total is
/// `w_G r_G + w_R r_R + w_S r_S`. Extra entries in `terms` are ignored.
pub fn total_reward(
    task: Task,
    terms: &BTreeMap<String, f64>,
    r_r: f64,
    r_s: f64,
    weights: &RewardWeights,
) -> Result<RewardBreakdown, KernelError> {
    let mut kept = BTreeMap::new();
    let mut r_g = 0.0;
    for &name in task.stage_terms() {
        let v = *terms
            .get(name)
            .ok_or(KernelError::MissingTerm { task, term: name })?;
        r_g += v;
        kept.insert(name.to_string(), v);
    }
    Ok(RewardBreakdown {
        task,
        terms: kept,
        r_g,
        r_r,
        r_s,
        total: weights.w_g * r_g + weights.w_r * r_r + weights.w_s * r_s,
    })
}
