//! Per-task scene randomization.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::InitError;
use crate::task_kernels::{Task, VelocityCommand};

/// Closed sampling interval `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl Interval {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub const fn symmetric(half: f64) -> Self {
        Self {
            min: -half,
            max: half,
        }
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    pub fn validate(&self, name: &str) -> Result<(), InitError> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min <= self.max) {
            return Err(InitError::InvalidRange(format!(
                "{name}: [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.min == self.max {
            return self.min;
        }
        rng.random_range(self.min..=self.max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarryRanges {
    /// Box and goal planar offsets from the robot's initial base position.
    pub planar: Interval,
    pub height: Interval,
    pub box_width: Interval,
    pub box_height: Interval,
    pub density: Interval,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SitLieRanges {
    pub planar: Interval,
    pub surface_height: Interval,
    pub chair_side: Interval,
    pub bed_length: Interval,
    pub bed_width: Interval,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandUpRanges {
    pub target_planar: Interval,
    pub chair_height: Interval,
    pub chair_side: Interval,
}

/// Command ranges for stylized locomotion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommandRanges {
    pub vx: Interval,
    pub vy: Interval,
    pub yaw_rate: Interval,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneRanges {
    pub carry: CarryRanges,
    pub sit_lie: SitLieRanges,
    pub stand_up: StandUpRanges,
    pub command: CommandRanges,
    /// Object yaw, radians.
    pub object_yaw: Interval,
}

impl Default for SceneRanges {
    fn default() -> Self {
        Self {
            carry: CarryRanges {
                planar: Interval::symmetric(4.0),
                height: Interval::new(0.0, 0.6),
                box_width: Interval::new(0.2, 0.5),
                box_height: Interval::new(0.15, 0.35),
                density: Interval::new(10.0, 100.0),
            },
            sit_lie: SitLieRanges {
                planar: Interval::symmetric(5.0),
                surface_height: Interval::new(0.2, 0.5),
                chair_side: Interval::new(0.3, 0.6),
                bed_length: Interval::new(1.2, 3.2),
                bed_width: Interval::new(0.38, 0.63),
            },
            stand_up: StandUpRanges {
                target_planar: Interval::symmetric(5.0),
                chair_height: Interval::new(0.2, 0.6),
                chair_side: Interval::new(0.38, 0.63),
            },
            command: CommandRanges {
                vx: Interval::new(-1.0, 1.0),
                vy: Interval::new(-0.5, 0.5),
                yaw_rate: Interval::new(-1.0, 1.0),
            },
            object_yaw: Interval::new(-PI, PI),
        }
    }
}

impl SceneRanges {
    pub fn validate(&self) -> Result<(), InitError> {
        let all = [
            ("carry.planar", self.carry.planar),
            ("carry.height", self.carry.height),
            ("carry.box_width", self.carry.box_width),
            ("carry.box_height", self.carry.box_height),
            ("carry.density", self.carry.density),
            ("sit_lie.planar", self.sit_lie.planar),
            ("sit_lie.surface_height", self.sit_lie.surface_height),
            ("sit_lie.chair_side", self.sit_lie.chair_side),
            ("sit_lie.bed_length", self.sit_lie.bed_length),
            ("sit_lie.bed_width", self.sit_lie.bed_width),
            ("stand_up.target_planar", self.stand_up.target_planar),
            ("stand_up.chair_height", self.stand_up.chair_height),
            ("stand_up.chair_side", self.stand_up.chair_side),
            ("command.vx", self.command.vx),
            ("command.vy", self.command.vy),
            ("command.yaw_rate", self.command.yaw_rate),
            ("object_yaw", self.object_yaw),
        ];
        all.iter().try_for_each(|(n, r)| r.validate(n))
    }
}

/// Sampled scene. Planar positions are offsets from the robot's initial
/// base position; heights are above ground.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum SceneParams {
    Carry {
        object_xy: [f64; 2],
        object_height: f64,
        object_yaw: f64,
        goal_xy: [f64; 2],
        goal_height: f64,
        /// Square footprint side.
        box_width: f64,
        box_height: f64,
        density: f64,
    },
    Sit {
        object_xy: [f64; 2],
        object_yaw: f64,
        surface_height: f64,
        chair_length: f64,
        chair_width: f64,
    },
    Lie {
        object_xy: [f64; 2],
        object_yaw: f64,
        surface_height: f64,
        bed_length: f64,
        bed_width: f64,
    },
    StandUp {
        target_xy: [f64; 2],
        chair_height: f64,
        chair_length: f64,
        chair_width: f64,
    },
    StyleLoco {
        command: VelocityCommand,
    },
}

impl SceneParams {
    /// Replaces the object placement (carry, sit, lie) with a reference one.
    pub fn set_object(&mut self, xy: [f64; 2], height: f64, yaw: f64) {
        match self {
            SceneParams::Carry {
                object_xy,
                object_height,
                object_yaw,
                ..
            } => {
                *object_xy = xy;
                *object_height = height;
                *object_yaw = yaw;
            }
            SceneParams::Sit {
                object_xy,
                object_yaw,
                surface_height,
                ..
            }
            | SceneParams::Lie {
                object_xy,
                object_yaw,
                surface_height,
                ..
            } => {
                *object_xy = xy;
                *object_yaw = yaw;
                *surface_height = height;
            }
            SceneParams::StandUp { .. } | SceneParams::StyleLoco { .. } => {}
        }
    }

    /// Every scalar paired with the interval it is drawn from.
    pub fn audit(&self, r: &SceneRanges) -> Vec<(&'static str, f64, Interval)> {
        match *self {
            SceneParams::Carry {
                object_xy,
                object_height,
                object_yaw,
                goal_xy,
                goal_height,
                box_width,
                box_height,
                density,
            } => {
                let c = &r.carry;
                vec![
                    ("object_x", object_xy[0], c.planar),
                    ("object_y", object_xy[1], c.planar),
                    ("object_height", object_height, c.height),
                    ("object_yaw", object_yaw, r.object_yaw),
                    ("goal_x", goal_xy[0], c.planar),
                    ("goal_y", goal_xy[1], c.planar),
                    ("goal_height", goal_height, c.height),
                    ("box_width", box_width, c.box_width),
                    ("box_height", box_height, c.box_height),
                    ("density", density, c.density),
                ]
            }
            SceneParams::Sit {
                object_xy,
                object_yaw,
                surface_height,
                chair_length,
                chair_width,
            } => {
                let s = &r.sit_lie;
                vec![
                    ("object_x", object_xy[0], s.planar),
                    ("object_y", object_xy[1], s.planar),
                    ("object_yaw", object_yaw, r.object_yaw),
                    ("surface_height", surface_height, s.surface_height),
                    ("chair_length", chair_length, s.chair_side),
                    ("chair_width", chair_width, s.chair_side),
                ]
            }
            SceneParams::Lie {
                object_xy,
                object_yaw,
                surface_height,
                bed_length,
                bed_width,
            } => {
                let s = &r.sit_lie;
                vec![
                    ("object_x", object_xy[0], s.planar),
                    ("object_y", object_xy[1], s.planar),
                    ("object_yaw", object_yaw, r.object_yaw),
                    ("surface_height", surface_height, s.surface_height),
                    ("bed_length", bed_length, s.bed_length),
                    ("bed_width", bed_width, s.bed_width),
                ]
            }
            SceneParams::StandUp {
                target_xy,
                chair_height,
                chair_length,
                chair_width,
            } => {
                let s = &r.stand_up;
                vec![
                    ("target_x", target_xy[0], s.target_planar),
                    ("target_y", target_xy[1], s.target_planar),
                    ("chair_height", chair_height, s.chair_height),
                    ("chair_length", chair_length, s.chair_side),
                    ("chair_width", chair_width, s.chair_side),
                ]
            }
            SceneParams::StyleLoco { command } => vec![
                ("command_vx", command.vx, r.command.vx),
                ("command_vy", command.vy, r.command.vy),
                ("command_yaw_rate", command.yaw_rate, r.command.yaw_rate),
            ],
        }
    }

    pub fn within(&self, r: &SceneRanges) -> bool {
        self.audit(r).iter().all(|(_, v, iv)| iv.contains(*v))
    }
}

/// Draws every scene parameter of `task` uniformly from its interval.
pub fn randomize_scene<R: Rng + ?Sized>(task: Task, r: &SceneRanges, rng: &mut R) -> SceneParams {
    match task {
        Task::CarryBox => {
            let c = &r.carry;
            SceneParams::Carry {
                object_xy: [c.planar.sample(rng), c.planar.sample(rng)],
                object_height: c.height.sample(rng),
                object_yaw: r.object_yaw.sample(rng),
                goal_xy: [c.planar.sample(rng), c.planar.sample(rng)],
                goal_height: c.height.sample(rng),
                box_width: c.box_width.sample(rng),
                box_height: c.box_height.sample(rng),
                density: c.density.sample(rng),
            }
        }
        Task::SitDown => {
            let s = &r.sit_lie;
            SceneParams::Sit {
                object_xy: [s.planar.sample(rng), s.planar.sample(rng)],
                object_yaw: r.object_yaw.sample(rng),
                surface_height: s.surface_height.sample(rng),
                chair_length: s.chair_side.sample(rng),
                chair_width: s.chair_side.sample(rng),
            }
        }
        Task::LieDown => {
            let s = &r.sit_lie;
            SceneParams::Lie {
                object_xy: [s.planar.sample(rng), s.planar.sample(rng)],
                object_yaw: r.object_yaw.sample(rng),
                surface_height: s.surface_height.sample(rng),
                bed_length: s.bed_length.sample(rng),
                bed_width: s.bed_width.sample(rng),
            }
        }
        Task::StandUp => {
            let s = &r.stand_up;
            SceneParams::StandUp {
                target_xy: [s.target_planar.sample(rng), s.target_planar.sample(rng)],
                chair_height: s.chair_height.sample(rng),
                chair_length: s.chair_side.sample(rng),
                chair_width: s.chair_side.sample(rng),
            }
        }
        Task::StyleLoco => {
            let c = &r.command;
            SceneParams::StyleLoco {
                command: VelocityCommand::new(
                    c.vx.sample(rng),
                    c.vy.sample(rng),
                    c.yaw_rate.sample(rng),
                ),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn carry_box_width_coverage() {
        let r = SceneRanges::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for _ in 0..10_000 {
            let s = randomize_scene(Task::CarryBox, &r, &mut rng);
            assert!(s.within(&r));
            if let SceneParams::Carry { box_width, .. } = s {
                lo = lo.min(box_width);
                hi = hi.max(box_width);
            }
        }
        assert!((0.2..0.21).contains(&lo), "min {lo}");
        assert!(hi > 0.49 && hi <= 0.5, "max {hi}");
    }

    #[test]
    fn every_task_stays_in_range() {
        let r = SceneRanges::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for task in Task::ALL {
            for _ in 0..2_000 {
                let s = randomize_scene(task, &r, &mut rng);
                assert!(s.within(&r), "{task}: {s:?}");
            }
        }
        for _ in 0..1_000 {
            if let SceneParams::Sit { surface_height, .. } =
                randomize_scene(Task::SitDown, &r, &mut rng)
            {
                assert!((0.2..=0.5).contains(&surface_height));
            }
        }
    }

    #[test]
    fn same_seed_same_scene() {
        let r = SceneRanges::default();
        let a = randomize_scene(Task::LieDown, &r, &mut ChaCha8Rng::seed_from_u64(3));
        let b = randomize_scene(Task::LieDown, &r, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_range_rejected() {
        let mut r = SceneRanges::default();
        r.carry.height = Interval::new(0.6, 0.0);
        assert!(r.validate().is_err());
        assert!(SceneRanges::default().validate().is_ok());
    }
}
