use serde::{Deserialize, Serialize};

use super::KernelError;
use crate::se3::{heading_or_fallback, inverse, Heading2D, Pose, Vec3};

pub const NUM_JOINTS: usize = 29;
pub const NUM_END_EFFECTORS: usize = 5;

/// End-effector slots in `RobotState::ee_pos`, in observation order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndEffector {
    LeftHand = 0,
    RightHand = 1,
    LeftFoot = 2,
    RightFoot = 3,
    Head = 4,
}

/// Robot snapshot. World-frame fields feed rewards, base-frame fields feed
/// observations; [`RobotState::from_world`] keeps the two consistent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    /// Base pose in the world. Its z is the base height `h`.
    pub base_pose: Pose,
    pub lin_vel_world: Vec3,
    pub ang_vel_world: Vec3,
    pub lin_vel_base: Vec3,
    pub ang_vel_base: Vec3,
    /// Unit gravity direction in the base frame.
    pub gravity_base: Vec3,
    pub joint_pos: Vec<f64>,
    pub joint_vel: Vec<f64>,
    /// End-effector positions in the base frame, see [`EndEffector`].
    pub ee_pos: Vec<Vec3>,
    pub prev_action: Vec<f64>,
    pub torques: Vec<f64>,
}

impl RobotState {
    /// Upright at the origin, at rest, all joints zero.
    pub fn zeros() -> Self {
        Self {
            base_pose: Pose::identity(),
            lin_vel_world: Vec3::zeros(),
            ang_vel_world: Vec3::zeros(),
            lin_vel_base: Vec3::zeros(),
            ang_vel_base: Vec3::zeros(),
            gravity_base: Vec3::new(0.0, 0.0, -1.0),
            joint_pos: vec![0.0; NUM_JOINTS],
            joint_vel: vec![0.0; NUM_JOINTS],
            ee_pos: vec![Vec3::zeros(); NUM_END_EFFECTORS],
            prev_action: vec![0.0; NUM_JOINTS],
            torques: vec![0.0; NUM_JOINTS],
        }
    }

    /// Sets the base pose and world velocities, deriving the base-frame
    /// velocities and gravity direction.
    pub fn with_base(mut self, base_pose: Pose, lin_vel_world: Vec3, ang_vel_world: Vec3) -> Self {
        let rt = base_pose.rotation.transpose();
        self.base_pose = base_pose;
        self.lin_vel_world = lin_vel_world;
        self.ang_vel_world = ang_vel_world;
        self.lin_vel_base = rt.apply(&lin_vel_world);
        self.ang_vel_base = rt.apply(&ang_vel_world);
        self.gravity_base = rt.apply(&Vec3::new(0.0, 0.0, -1.0));
        self
    }

    pub fn from_world(base_pose: Pose, lin_vel_world: Vec3, ang_vel_world: Vec3) -> Self {
        Self::zeros().with_base(base_pose, lin_vel_world, ang_vel_world)
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        let joints = [
            ("joint_pos", self.joint_pos.len()),
            ("joint_vel", self.joint_vel.len()),
            ("prev_action", self.prev_action.len()),
            ("torques", self.torques.len()),
        ];
        for (field, got) in joints {
            if got != NUM_JOINTS {
                return Err(KernelError::Cardinality {
                    field,
                    expected: NUM_JOINTS,
                    got,
                });
            }
        }
        if self.ee_pos.len() != NUM_END_EFFECTORS {
            return Err(KernelError::Cardinality {
                field: "ee_pos",
                expected: NUM_END_EFFECTORS,
                got: self.ee_pos.len(),
            });
        }
        if (self.gravity_base.norm() - 1.0).abs() > 1e-6 {
            return Err(KernelError::InvalidState(format!(
                "gravity direction must be unit length, got norm {}",
                self.gravity_base.norm()
            )));
        }
        Ok(())
    }

    pub fn base_height(&self) -> f64 {
        self.base_pose.position.z
    }

    pub fn base_heading(&self) -> Heading2D {
        heading_or_fallback(&self.base_pose.rotation)
    }

    pub fn ee_world(&self, ee: EndEffector) -> Vec3 {
        self.base_pose.transform_point(&self.ee_pos[ee as usize])
    }

    /// Mean of the two hand positions, world frame.
    pub fn hand_mid_world(&self) -> Vec3 {
        (self.ee_world(EndEffector::LeftHand) + self.ee_world(EndEffector::RightHand)) / 2.0
    }

    /// Body up axis (+z column) in the world.
    pub fn up_axis(&self) -> Vec3 {
        self.base_pose.rotation.column(2)
    }
}

/// Stylized-locomotion command `[v_x, v_y, ω_yaw]`, body frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VelocityCommand {
    pub vx: f64,
    pub vy: f64,
    pub yaw_rate: f64,
}

impl VelocityCommand {
    pub fn new(vx: f64, vy: f64, yaw_rate: f64) -> Self {
        Self { vx, vy, yaw_rate }
    }
}

/// Task-side state: target object, goal and command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneState {
    pub object_world: Pose,
    pub goal_world: Vec3,
    /// Object pose in the robot base frame.
    pub object_base: Pose,
    pub goal_base: Vec3,
    /// Bounding-box dimensions of the object.
    pub bbox: Vec3,
    /// Mean hand position, world frame.
    pub hand_mid: Vec3,
    pub command: VelocityCommand,
}

impl SceneState {
    /// Derives the base-frame copies and hand midpoint from `robot`.
    pub fn from_world(
        robot: &RobotState,
        object_world: Pose,
        goal_world: Vec3,
        bbox: Vec3,
    ) -> Self {
        let world_to_base = inverse(&robot.base_pose);
        Self {
            object_world,
            goal_world,
            object_base: world_to_base.compose(&object_world),
            goal_base: world_to_base.transform_point(&goal_world),
            bbox,
            hand_mid: robot.hand_mid_world(),
            command: VelocityCommand::default(),
        }
    }

    pub fn with_command(mut self, command: VelocityCommand) -> Self {
        self.command = command;
        self
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        if self.bbox.iter().any(|v| !(*v > 0.0)) {
            return Err(KernelError::InvalidState(
                "bounding box dimensions must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Horizontal heading of the object (+x axis).
    pub fn object_heading(&self) -> Heading2D {
        heading_or_fallback(&self.object_world.rotation)
    }
}
