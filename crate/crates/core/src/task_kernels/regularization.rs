use serde::{Deserialize, Serialize};

use super::state::{RobotState, NUM_JOINTS};
use super::KernelError;

/// Per-term weights of the regularization reward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegularizationWeights {
    pub dof_vel: f64,
    pub torques: f64,
    pub dof_acc: f64,
    pub torque_limits: f64,
    pub dof_pos_limits: f64,
    pub action_rate: f64,
    pub dof_vel_limits: f64,
}

impl Default for RegularizationWeights {
    fn default() -> Self {
        Self {
            dof_vel: -2e-4,
            torques: -1e-4,
            dof_acc: -1e-7,
            torque_limits: -0.1,
            dof_pos_limits: -5.0,
            action_rate: -0.03,
            dof_vel_limits: -1e-3,
        }
    }
}

/// Joint limits. Position bounds are `[lower, upper]`; velocity and torque
/// limits are symmetric magnitudes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointLimits {
    pub pos_lower: Vec<f64>,
    pub pos_upper: Vec<f64>,
    pub vel: Vec<f64>,
    pub torque: Vec<f64>,
}

impl JointLimits {
    /// Limits that never engage.
    pub fn unbounded() -> Self {
        Self::uniform(
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::INFINITY,
            f64::INFINITY,
        )
    }

    pub fn uniform(pos_lower: f64, pos_upper: f64, vel: f64, torque: f64) -> Self {
        Self {
            pos_lower: vec![pos_lower; NUM_JOINTS],
            pos_upper: vec![pos_upper; NUM_JOINTS],
            vel: vec![vel; NUM_JOINTS],
            torque: vec![torque; NUM_JOINTS],
        }
    }

    fn validate(&self) -> Result<(), KernelError> {
        for (field, v) in [
            ("pos_lower", &self.pos_lower),
            ("pos_upper", &self.pos_upper),
            ("vel", &self.vel),
            ("torque", &self.torque),
        ] {
            check_len(field, v)?;
        }
        let bad_pos = self
            .pos_lower
            .iter()
            .zip(&self.pos_upper)
            .any(|(lo, hi)| !(lo <= hi));
        let bad_mag = self.vel.iter().chain(&self.torque).any(|m| !(*m >= 0.0));
        if bad_pos || bad_mag {
            return Err(KernelError::InvalidState(
                "joint limits are inconsistent".into(),
            ));
        }
        Ok(())
    }
}

/// Unweighted penalty magnitudes and their weighted total.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegularizationTerms {
    pub dof_vel: f64,
    pub torques: f64,
    pub dof_acc: f64,
    pub torque_limits: f64,
    pub dof_pos_limits: f64,
    pub action_rate: f64,
    pub dof_vel_limits: f64,
    pub total: f64,
}

fn check_len(field: &'static str, v: &[f64]) -> Result<(), KernelError> {
    if v.len() != NUM_JOINTS {
        return Err(KernelError::Cardinality {
            field,
            expected: NUM_JOINTS,
            got: v.len(),
        });
    }
    Ok(())
}

fn sum_sq(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum()
}

fn excess(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x.max(0.0)).sum()
}

/// Regularization reward `r^R`.
///
/// Squared sums for joint velocity, acceleration and torque; squared action
/// difference against `s.prev_action`; clipped excess beyond each limit.
/// `joint_acc` is supplied by the caller, e.g. `(θ̇_t − θ̇_{t−1}) / dt`.
pub fn r_regularization(
    s: &RobotState,
    action: &[f64],
    joint_acc: &[f64],
    limits: &JointLimits,
    weights: &RegularizationWeights,
) -> Result<RegularizationTerms, KernelError> {
    s.validate()?;
    check_len("action", action)?;
    check_len("joint_acc", joint_acc)?;
    limits.validate()?;

    let mut t = RegularizationTerms {
        dof_vel: sum_sq(s.joint_vel.iter().copied()),
        torques: sum_sq(s.torques.iter().copied()),
        dof_acc: sum_sq(joint_acc.iter().copied()),
        action_rate: sum_sq(action.iter().zip(&s.prev_action).map(|(a, b)| a - b)),
        torque_limits: excess(
            s.torques
                .iter()
                .zip(&limits.torque)
                .map(|(t, l)| t.abs() - l),
        ),
        dof_vel_limits: excess(
            s.joint_vel
                .iter()
                .zip(&limits.vel)
                .map(|(v, l)| v.abs() - l),
        ),
        dof_pos_limits: excess(
            s.joint_pos
                .iter()
                .zip(&limits.pos_lower)
                .map(|(q, lo)| lo - q),
        ) + excess(
            s.joint_pos
                .iter()
                .zip(&limits.pos_upper)
                .map(|(q, hi)| q - hi),
        ),
        total: 0.0,
    };
    let w = weights;
    t.total = w.dof_vel * t.dof_vel
        + w.torques * t.torques
        + w.dof_acc * t.dof_acc
        + w.torque_limits * t.torque_limits
        + w.dof_pos_limits * t.dof_pos_limits
        + w.action_rate * t.action_rate
        + w.dof_vel_limits * t.dof_vel_limits;
    Ok(t)
}

/// Finite-difference joint acceleration.
pub fn joint_acceleration(prev_vel: &[f64], vel: &[f64], dt: f64) -> Vec<f64> {
    vel.iter()
        .zip(prev_vel)
        .map(|(v, p)| (v - p) / dt)
        .collect()
}
