//! Fixed-layout observation vectors.

use std::ops::Range;

use super::state::{RobotState, SceneState, NUM_END_EFFECTORS, NUM_JOINTS};
use super::{KernelError, Task};
use crate::se3::{rot_to_6d, Vec3};

pub const PROPRIO_DIM: usize = 108;
pub const DISC_OBS_DIM: usize = 57;

/// Slot ranges of the proprioceptive vector.
pub mod proprio_layout {
    use std::ops::Range;

    pub const ANG_VEL: Range<usize> = 0..3;
    pub const GRAVITY: Range<usize> = 3..6;
    pub const JOINT_POS: Range<usize> = 6..35;
    pub const JOINT_VEL: Range<usize> = 35..64;
    pub const EE_POS: Range<usize> = 64..79;
    pub const PREV_ACTION: Range<usize> = 79..108;
}

/// Slot ranges of the discriminator vector.
pub mod disc_layout {
    use std::ops::Range;

    pub const HEIGHT: Range<usize> = 0..1;
    pub const LIN_VEL: Range<usize> = 1..4;
    pub const ANG_VEL: Range<usize> = 4..7;
    pub const GRAVITY: Range<usize> = 7..10;
    pub const JOINT_POS: Range<usize> = 10..39;
    pub const EE_POS: Range<usize> = 39..54;
    pub const OBJECT_POS: Range<usize> = 54..57;
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProprioObs(pub [f64; PROPRIO_DIM]);

#[derive(Clone, Debug, PartialEq)]
pub struct DiscObs(pub [f64; DISC_OBS_DIM]);

impl ProprioObs {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn slot(&self, r: Range<usize>) -> &[f64] {
        &self.0[r]
    }
}

impl DiscObs {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn slot(&self, r: Range<usize>) -> &[f64] {
        &self.0[r]
    }
}

/// Task observation, one variant per layout.
#[derive(Clone, Debug, PartialEq)]
pub enum TaskObs {
    /// `[bbox(3), p_o(3), R_o 6D(6), p_g(3)]`
    Carry([f64; 15]),
    /// `[p_o(3), R_o 6D(6)]`
    SitLie([f64; 9]),
    /// `[p_o(3), R_o 6D(6), p_g(3)]`
    StandUp([f64; 12]),
    /// `[v_x, v_y, ω_yaw]` command
    StyleLoco([f64; 3]),
}

impl TaskObs {
    pub fn as_slice(&self) -> &[f64] {
        match self {
            TaskObs::Carry(v) => v,
            TaskObs::SitLie(v) => v,
            TaskObs::StandUp(v) => v,
            TaskObs::StyleLoco(v) => v,
        }
    }

    pub fn len(&self) -> usize {
        self.as_slice().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

struct Writer<'a> {
    buf: &'a mut [f64],
    at: usize,
}

impl<'a> Writer<'a> {
    fn new(buf: &'a mut [f64]) -> Self {
        Self { buf, at: 0 }
    }

    fn put(&mut self, vals: &[f64]) {
        self.buf[self.at..self.at + vals.len()].copy_from_slice(vals);
        self.at += vals.len();
    }

    fn vec3(&mut self, v: &Vec3) {
        self.put(v.as_slice());
    }

    fn done(self) {
        debug_assert_eq!(self.at, self.buf.len());
    }
}

fn ee_flat(s: &RobotState) -> [f64; 3 * NUM_END_EFFECTORS] {
    let mut out = [0.0; 3 * NUM_END_EFFECTORS];
    for (i, p) in s.ee_pos.iter().enumerate() {
        out[3 * i..3 * i + 3].copy_from_slice(p.as_slice());
    }
    out
}

/// `[ω(3), g(3), θ(29), θ̇(29), p_ee(15), a_{t−1}(29)]`, base frame.
pub fn build_proprio(s: &RobotState) -> Result<ProprioObs, KernelError> {
    s.validate()?;
    let mut out = [0.0; PROPRIO_DIM];
    let mut w = Writer::new(&mut out);
    w.vec3(&s.ang_vel_base);
    w.vec3(&s.gravity_base);
    w.put(&s.joint_pos);
    w.put(&s.joint_vel);
    w.put(&ee_flat(s));
    w.put(&s.prev_action);
    w.done();
    Ok(ProprioObs(out))
}

/// `[h(1), v(3), ω(3), g(3), θ(29), p_ee(15), p_o(3)]`.
pub fn build_disc_obs(s: &RobotState, scene: &SceneState) -> Result<DiscObs, KernelError> {
    s.validate()?;
    let mut out = [0.0; DISC_OBS_DIM];
    let mut w = Writer::new(&mut out);
    w.put(&[s.base_height()]);
    w.vec3(&s.lin_vel_base);
    w.vec3(&s.ang_vel_base);
    w.vec3(&s.gravity_base);
    w.put(&s.joint_pos);
    w.put(&ee_flat(s));
    w.vec3(&scene.object_base.position);
    w.done();
    debug_assert_eq!(NUM_JOINTS, 29);
    Ok(DiscObs(out))
}

/// Per-task observation. `mask` (carry only) zero-fills the object pose slots.
pub fn build_task_obs(task: Task, scene: &SceneState, mask: bool) -> Result<TaskObs, KernelError> {
    if mask && task != Task::CarryBox {
        return Err(KernelError::MaskNotSupported(task));
    }
    let p_o = scene.object_base.position;
    let r_o = rot_to_6d(&scene.object_base.rotation).0;
    Ok(match task {
        Task::CarryBox => {
            let mut out = [0.0; 15];
            let mut w = Writer::new(&mut out);
            w.vec3(&scene.bbox);
            if mask {
                w.put(&[0.0; 9]);
            } else {
                w.vec3(&p_o);
                w.put(&r_o);
            }
            w.vec3(&scene.goal_base);
            w.done();
            TaskObs::Carry(out)
        }
        Task::SitDown | Task::LieDown => {
            let mut out = [0.0; 9];
            let mut w = Writer::new(&mut out);
            w.vec3(&p_o);
            w.put(&r_o);
            w.done();
            TaskObs::SitLie(out)
        }
        Task::StandUp => {
            let mut out = [0.0; 12];
            let mut w = Writer::new(&mut out);
            w.vec3(&p_o);
            w.put(&r_o);
            w.vec3(&scene.goal_base);
            w.done();
            TaskObs::StandUp(out)
        }
        Task::StyleLoco => {
            let c = scene.command;
            TaskObs::StyleLoco([c.vx, c.vy, c.yaw_rate])
        }
    })
}
