//! Regression harness: reward terms evaluated against a table of cases.
//!
//! Cases file (JSON):
//!
//! ```text
//! { "version": 1,
//!   "cases": [ { "name": "loco_near", "term": "loco",
//!                "robot": { "position": [x,y,z], "yaw": 0.0, "rotation": null | [[..],[..],[..]],
//!                           "lin_vel": [..], "ang_vel": [..], "head": null | [x,y,z] },
//!                "scene": { "object": [x,y,z], "object_yaw": 0.0, "goal": [x,y,z],
//!                           "hand_mid": null | [x,y,z], "command": [vx, vy, yaw_rate] },
//!                "expected": 1.5, "tol": 0.0 } ] }
//! ```
//!
//! Robot and scene quantities are world frame except `head`, which is in the
//! base frame. `rotation` (row-major) overrides `yaw`. A case passes when
//! `|actual − expected| <= tol`, so `tol = 0` demands an exact match.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::se3::{Pose, Rotation, Vec3};
use crate::task_kernels::{
    r_carry, r_lie, r_loco, r_loco_tar, r_pick, r_put, r_sit, r_standup, r_style_loco, EndEffector,
    LieBranchOrder, RobotState, SceneState, Task, VelocityCommand,
};

pub const CASES_VERSION: u32 = 1;

/// Cases shipped with the crate: the worked examples of every reward term.
pub const BUILTIN_REWARD_CASES: &str = include_str!("../../data/reward_cases.json");

const BOX: Vec3 = Vec3::new(0.3, 0.3, 0.2);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardTerm {
    Loco,
    Carry,
    Pick,
    Put,
    Sit,
    Lie,
    /// Lie reward with the guard branches swapped.
    LieSwapped,
    Standup,
    LocoTar,
    StyleLoco,
}

impl RewardTerm {
    /// Name of the stage term this case exercises.
    pub fn stage_name(&self) -> &'static str {
        match self {
            RewardTerm::Loco => "loco",
            RewardTerm::Carry => "carry",
            RewardTerm::Pick => "pick",
            RewardTerm::Put => "put",
            RewardTerm::Sit => "sit",
            RewardTerm::Lie | RewardTerm::LieSwapped => "lie",
            RewardTerm::Standup => "standup",
            RewardTerm::LocoTar => "loco_tar",
            RewardTerm::StyleLoco => "style_loco",
        }
    }

    pub fn belongs_to(&self, task: Task) -> bool {
        task.stage_terms().contains(&self.stage_name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CaseRobot {
    pub position: [f64; 3],
    pub yaw: f64,
    pub rotation: Option<[[f64; 3]; 3]>,
    pub lin_vel: [f64; 3],
    pub ang_vel: [f64; 3],
    pub head: Option<[f64; 3]>,
}

impl Default for CaseRobot {
    fn default() -> Self {
        Self {
            position: [0.0, 0.0, 0.75],
            yaw: 0.0,
            rotation: None,
            lin_vel: [0.0; 3],
            ang_vel: [0.0; 3],
            head: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CaseScene {
    pub object: [f64; 3],
    pub object_yaw: f64,
    pub goal: [f64; 3],
    pub hand_mid: Option<[f64; 3]>,
    pub command: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardCase {
    pub name: String,
    pub term: RewardTerm,
    #[serde(default)]
    pub robot: CaseRobot,
    #[serde(default)]
    pub scene: CaseScene,
    pub expected: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardCases {
    pub version: u32,
    pub cases: Vec<RewardCase>,
}

impl RewardCases {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let cases: Self =
            serde_json::from_str(text).map_err(|e| ExperimentError::Cases(e.to_string()))?;
        if cases.version != CASES_VERSION {
            return Err(ExperimentError::Cases(format!(
                "unsupported cases version {} (expected {CASES_VERSION})",
                cases.version
            )));
        }
        if let Some(c) = cases
            .cases
            .iter()
            .find(|c| !(c.tol >= 0.0) || !c.expected.is_finite())
        {
            return Err(ExperimentError::Cases(format!(
                "case {}: bad expected value or tolerance",
                c.name
            )));
        }
        Ok(cases)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_REWARD_CASES).expect("builtin cases parse")
    }
}

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

impl RewardCase {
    pub fn robot_state(&self) -> Result<RobotState, ExperimentError> {
        let r = &self.robot;
        let rotation = match r.rotation {
            Some(rows) => Rotation::from_rows(rows)
                .map_err(|e| ExperimentError::Cases(format!("case {}: {e}", self.name)))?,
            None => Rotation::yaw(r.yaw),
        };
        let mut s = RobotState::from_world(
            Pose::new(v3(r.position), rotation),
            v3(r.lin_vel),
            v3(r.ang_vel),
        );
        if let Some(h) = r.head {
            s.ee_pos[EndEffector::Head as usize] = v3(h);
        }
        Ok(s)
    }

    pub fn scene_state(&self, robot: &RobotState) -> SceneState {
        let sc = &self.scene;
        let object = Pose::new(v3(sc.object), Rotation::yaw(sc.object_yaw));
        let mut scene = SceneState::from_world(robot, object, v3(sc.goal), BOX).with_command(
            VelocityCommand::new(sc.command[0], sc.command[1], sc.command[2]),
        );
        if let Some(h) = sc.hand_mid {
            scene.hand_mid = v3(h);
        }
        scene
    }

    pub fn evaluate(&self) -> Result<f64, ExperimentError> {
        let s = self.robot_state()?;
        let scene = self.scene_state(&s);
        Ok(match self.term {
            RewardTerm::Loco => r_loco(&s, &scene),
            RewardTerm::Carry => r_carry(&s, &scene),
            RewardTerm::Pick => r_pick(&s, &scene),
            RewardTerm::Put => r_put(&s, &scene),
            RewardTerm::Sit => r_sit(&s, &scene),
            RewardTerm::Lie => r_lie(&s, &scene, LieBranchOrder::AsPrinted),
            RewardTerm::LieSwapped => r_lie(&s, &scene, LieBranchOrder::Swapped),
            RewardTerm::Standup => r_standup(&s),
            RewardTerm::LocoTar => r_loco_tar(&s, &scene),
            RewardTerm::StyleLoco => r_style_loco(&s, &scene.command),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseOutcome {
    pub name: String,
    pub term: RewardTerm,
    pub expected: f64,
    pub actual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CaseOutcome {
    pub fn abs_error(&self) -> f64 {
        (self.actual - self.expected).abs()
    }
}

/// Evaluates every case (optionally only those of `task`). Errors on an
/// empty selection.
pub fn reward_check(
    cases: &RewardCases,
    task: Option<Task>,
) -> Result<Vec<CaseOutcome>, ExperimentError> {
    let selected: Vec<&RewardCase> = cases
        .cases
        .iter()
        .filter(|c| task.is_none_or(|t| c.term.belongs_to(t)))
        .collect();
    if selected.is_empty() {
        return Err(ExperimentError::Cases("no reward cases to evaluate".into()));
    }
    selected
        .into_iter()
        .map(|c| {
            let actual = c.evaluate()?;
            Ok(CaseOutcome {
                name: c.name.clone(),
                term: c.term,
                expected: c.expected,
                actual,
                tol: c.tol,
                pass: (actual - c.expected).abs() <= c.tol,
            })
        })
        .collect()
}

pub const OUTCOME_HEADER: [&str; 7] = [
    "name",
    "term",
    "expected",
    "actual",
    "abs_error",
    "tol",
    "pass",
];

pub fn outcomes_csv(outcomes: &[CaseOutcome]) -> Result<String, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(OUTCOME_HEADER)?;
    for o in outcomes {
        w.write_record([
            o.name.clone(),
            o.term.stage_name().to_string()
                + if o.term == RewardTerm::LieSwapped {
                    "_swapped"
                } else {
                    ""
                },
            o.expected.to_string(),
            o.actual.to_string(),
            o.abs_error().to_string(),
            o.tol.to_string(),
            u8::from(o.pass).to_string(),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| ExperimentError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_cases_pass() {
        let out = reward_check(&RewardCases::builtin(), None).unwrap();
        let failed: Vec<_> = out.iter().filter(|o| !o.pass).collect();
        assert!(failed.is_empty(), "{failed:?}");
        assert!(out.len() >= 25);
    }

    #[test]
    fn tampered_case_is_the_only_failure() {
        let mut cases = RewardCases::builtin();
        cases.cases[3].expected += 0.01;
        let out = reward_check(&cases, None).unwrap();
        let failed: Vec<_> = out
            .iter()
            .filter(|o| !o.pass)
            .map(|o| o.name.as_str())
            .collect();
        assert_eq!(failed, vec![cases.cases[3].name.as_str()]);
    }

    #[test]
    fn empty_selection_errors() {
        let empty = RewardCases {
            version: CASES_VERSION,
            cases: vec![],
        };
        assert!(reward_check(&empty, None).is_err());
        let sit_only = RewardCases {
            version: CASES_VERSION,
            cases: RewardCases::builtin()
                .cases
                .into_iter()
                .filter(|c| c.term == RewardTerm::Sit)
                .collect(),
        };
        assert!(reward_check(&sit_only, Some(Task::StyleLoco)).is_err());
        assert_eq!(
            reward_check(&sit_only, Some(Task::SitDown)).unwrap().len(),
            sit_only.cases.len()
        );
    }

    #[test]
    fn task_filter_routes_terms() {
        assert!(RewardTerm::Loco.belongs_to(Task::CarryBox));
        assert!(RewardTerm::LieSwapped.belongs_to(Task::LieDown));
        assert!(!RewardTerm::Pick.belongs_to(Task::SitDown));
        assert!(RewardTerm::LocoTar.belongs_to(Task::StandUp));
    }
}
