//! Stage rewards. All quantities are world frame; headings are horizontal.

use serde::{Deserialize, Serialize};

use super::state::{EndEffector, RobotState, SceneState, VelocityCommand};
use crate::se3::{heading_or_fallback, yaw_error, Heading2D, Vec3};

/// Horizontal radius that separates approach from interaction stages.
const NEAR: f64 = 0.7;
const TARGET_SPEED: f64 = 0.85;
const PICK_HEIGHT: f64 = 0.75;
const PUT_TOLERANCE: f64 = 0.05;
const STAND_HEIGHT: f64 = 0.72;

const DEGENERATE: f64 = 1e-9;

/// Which branch of the lie reward the near-and-level guard selects.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LieBranchOrder {
    /// Guard true returns the sit reward, otherwise the lying bonus.
    #[default]
    AsPrinted,
    /// Guard true returns the lying bonus, otherwise the sit reward.
    Swapped,
}

fn xy_dist(a: &Vec3, b: &Vec3) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Unit horizontal direction from `from` to `to`, or `fallback` when they coincide.
fn toward(from: &Vec3, to: &Vec3, fallback: Heading2D) -> Heading2D {
    Heading2D::new(to.x - from.x, to.y - from.y).unwrap_or(fallback)
}

/// `w_v exp(−5 (0.85 − d·ṗ)²) + w_h exp(−0.75 |Δθ(d, d_b)|)`
fn heading_speed_term(s: &RobotState, d: Heading2D, w_v: f64, w_h: f64) -> f64 {
    let along = d.dot_xy(&s.lin_vel_world);
    let dtheta = yaw_error(&d, &s.base_heading());
    w_v * (-5.0 * (TARGET_SPEED - along).powi(2)).exp() + w_h * (-0.75 * dtheta.abs()).exp()
}

fn base_pos(s: &RobotState) -> Vec3 {
    s.base_pose.position
}

pub fn r_loco(s: &RobotState, scene: &SceneState) -> f64 {
    let pb = base_pos(s);
    let po = scene.object_world.position;
    if xy_dist(&po, &pb) < NEAR {
        return 1.5;
    }
    heading_speed_term(s, toward(&pb, &po, s.base_heading()), 1.0, 0.5)
}

pub fn r_carry(s: &RobotState, scene: &SceneState) -> f64 {
    let pb = base_pos(s);
    let po = scene.object_world.position;
    let pg = scene.goal_world;
    if xy_dist(&po, &pb) > NEAR {
        return 0.0;
    }
    if xy_dist(&pb, &pg) < NEAR {
        return 2.2;
    }
    let hand = 0.7 * (-3.0 * (po - scene.hand_mid).norm_squared()).exp();
    heading_speed_term(s, toward(&pb, &pg, s.base_heading()), 1.0, 0.5) + hand
}

pub fn r_pick(s: &RobotState, scene: &SceneState) -> f64 {
    let pb = base_pos(s);
    let po = scene.object_world.position;
    if xy_dist(&po, &pb) > NEAR {
        return 0.0;
    }
    if xy_dist(&pb, &scene.goal_world) < NEAR || po.z > PICK_HEIGHT {
        return 2.0;
    }
    2.0 * (-3.0 * (PICK_HEIGHT - po.z).abs()).exp()
}

/// The height term uses `|p^o_z − p^g_z|` so the reward stays within `[0, 2]`.
pub fn r_put(s: &RobotState, scene: &SceneState) -> f64 {
    let pb = base_pos(s);
    let po = scene.object_world.position;
    let pg = scene.goal_world;
    if xy_dist(&pb, &pg) > NEAR {
        return 0.0;
    }
    let err = (po - pg).norm();
    if err < PUT_TOLERANCE {
        return 2.0;
    }
    (-10.0 * err).exp() + (-3.0 * (po.z - pg.z).abs()).exp()
}

/// The height term uses `|p^o_z − p^b_z|` so the reward stays within `[0, 3]`.
pub fn r_sit(s: &RobotState, scene: &SceneState) -> f64 {
    let pb = base_pos(s);
    let po = scene.object_world.position;
    if xy_dist(&po, &pb) > NEAR {
        return 0.0;
    }
    let dtheta = yaw_error(&scene.object_heading(), &s.base_heading());
    (-3.0 * (po - pb).norm()).exp()
        + (-5.0 * (po.z - pb.z).abs()).exp()
        + (-0.75 * dtheta.abs()).exp()
}

/// Horizontal direction from the head to the base (`d†`).
///
/// Falls back to the projected body −z axis when the head sits directly
/// above or below the base, then to the base heading.
pub fn body_axis_heading(s: &RobotState) -> Heading2D {
    let head = s.ee_world(EndEffector::Head);
    let base = base_pos(s);
    let v = base - head;
    if v.x.hypot(v.y) > DEGENERATE {
        if let Ok(h) = Heading2D::new(v.x, v.y) {
            return h;
        }
    }
    let down = -s.up_axis();
    Heading2D::new(down.x, down.y).unwrap_or_else(|_| s.base_heading())
}

fn lying_bonus(s: &RobotState, scene: &SceneState) -> f64 {
    let up_dot = Vec3::z().dot(&s.up_axis());
    let dtheta = yaw_error(
        &scene.object_heading().perpendicular(),
        &body_axis_heading(s),
    );
    3.0 + 0.5 * (-0.75 * up_dot.abs()).exp() + 0.5 * (-2.0 * dtheta.abs()).exp()
}

pub fn r_lie(s: &RobotState, scene: &SceneState, order: LieBranchOrder) -> f64 {
    let pb = base_pos(s);
    let po = scene.object_world.position;
    let guard = xy_dist(&po, &pb) < 0.3 && (po.z - pb.z) < 0.05;
    match (order, guard) {
        (LieBranchOrder::AsPrinted, true) | (LieBranchOrder::Swapped, false) => r_sit(s, scene),
        _ => lying_bonus(s, scene),
    }
}

pub fn r_standup(s: &RobotState) -> f64 {
    let h = s.base_height();
    if h > STAND_HEIGHT {
        3.0
    } else {
        3.0 * (-5.0 * (STAND_HEIGHT - h)).exp()
    }
}

/// Walk toward the goal; `d′` falls back to the base heading when the base
/// already stands on the goal.
pub fn r_loco_tar(s: &RobotState, scene: &SceneState) -> f64 {
    let d = toward(&base_pos(s), &scene.goal_world, s.base_heading());
    heading_speed_term(s, d, 0.5, 0.5)
}

/// Velocity tracking in the heading frame: planar velocity is resolved along
/// the base heading and its left perpendicular, yaw rate is world `ω_z`.
pub fn r_style_loco(s: &RobotState, cmd: &VelocityCommand) -> f64 {
    let h = heading_or_fallback(&s.base_pose.rotation);
    let fwd = h.dot_xy(&s.lin_vel_world);
    let lat = h.perpendicular().dot_xy(&s.lin_vel_world);
    let lin_err = (fwd - cmd.vx).powi(2) + (lat - cmd.vy).powi(2);
    let yaw_err = (s.ang_vel_world.z - cmd.yaw_rate).powi(2);
    (-4.0 * lin_err).exp() + 0.5 * (-4.0 * yaw_err).exp()
}
