use serde::{Deserialize, Serialize};

use super::rewards::body_axis_heading;
use super::state::{RobotState, SceneState};
use super::{KernelError, Task};
use crate::se3::{wrap_angle, yaw_error};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuccessThresholds {
    pub carry_distance: f64,
    pub seat_distance: f64,
    pub heading_tolerance_deg: f64,
    pub stand_height: f64,
    pub stand_goal_distance: f64,
}

impl Default for SuccessThresholds {
    fn default() -> Self {
        Self {
            carry_distance: 0.1,
            seat_distance: 0.1,
            heading_tolerance_deg: 15.0,
            stand_height: 0.72,
            stand_goal_distance: 0.3,
        }
    }
}

/// Final-state success test, strict inequalities throughout.
///
/// * carry: 3D box-to-goal distance.
/// * sit: base within the seat radius (horizontal) and base heading aligned
///   with the object heading.
/// * lie: base within the seat radius and the head-to-base axis parallel to
///   the bed's long edge (`d_o⊥`), either direction.
/// * stand up: base height and horizontal base-to-goal distance.
pub fn evaluate_success(
    task: Task,
    s: &RobotState,
    scene: &SceneState,
    th: &SuccessThresholds,
) -> Result<bool, KernelError> {
    let pb = s.base_pose.position;
    let po = scene.object_world.position;
    let tol = th.heading_tolerance_deg.to_radians();
    let xy = |a: f64, b: f64| a.hypot(b);
    Ok(match task {
        Task::CarryBox => (po - scene.goal_world).norm() < th.carry_distance,
        Task::SitDown => {
            let dtheta = yaw_error(&scene.object_heading(), &s.base_heading());
            xy(po.x - pb.x, po.y - pb.y) < th.seat_distance && dtheta.abs() < tol
        }
        Task::LieDown => {
            let dtheta = yaw_error(
                &scene.object_heading().perpendicular(),
                &body_axis_heading(s),
            );
            let line_err = wrap_angle(2.0 * dtheta).abs() / 2.0;
            xy(po.x - pb.x, po.y - pb.y) < th.seat_distance && line_err < tol
        }
        Task::StandUp => {
            let g = scene.goal_world;
            s.base_height() > th.stand_height && xy(g.x - pb.x, g.y - pb.y) < th.stand_goal_distance
        }
        Task::StyleLoco => return Err(KernelError::NoSuccessCriterion(task)),
    })
}
