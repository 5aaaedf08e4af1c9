//! Domain randomization: per-episode offsets and physical factors, per-step
//! observation noise, and integer-step observation delay.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::scene::Interval;
use super::InitError;
use crate::se3::{Pose, Rotation, Vec3};
use crate::task_kernels::{proprio_layout, ProprioObs, NUM_JOINTS};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Uniform over the printed interval.
    #[default]
    Uniform,
    /// Gaussian with σ = half-width / 3, clipped to the interval.
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DomainRanges {
    pub ang_vel_noise: Interval,
    pub joint_pos_noise: Interval,
    pub joint_vel_noise: Interval,
    pub gravity_noise: Interval,
    pub fk_noise: Interval,
    pub actuator_offset: Interval,
    pub motor_strength: Interval,
    pub payload_mass: Interval,
    pub com_displacement: Interval,
    pub kp_kd_factor: Interval,
    pub box_friction: Interval,
    pub box_restitution: Interval,
    pub platform_friction: Interval,
    pub loc_position_offset: Interval,
    pub loc_position_noise: Interval,
    /// Degrees, per rotation-vector component.
    pub loc_rotation_offset_deg: Interval,
    pub loc_rotation_noise_deg: Interval,
    /// Observation delay is drawn uniformly from `0..=max_delay_steps`.
    pub max_delay_steps: u32,
    pub noise_mode: NoiseMode,
}

impl Default for DomainRanges {
    fn default() -> Self {
        Self {
            ang_vel_noise: Interval::symmetric(0.3),
            joint_pos_noise: Interval::symmetric(0.02),
            joint_vel_noise: Interval::symmetric(2.0),
            gravity_noise: Interval::symmetric(0.05),
            fk_noise: Interval::symmetric(0.05),
            actuator_offset: Interval::symmetric(0.05),
            motor_strength: Interval::new(0.9, 1.1),
            payload_mass: Interval::symmetric(2.0),
            com_displacement: Interval::symmetric(0.05),
            kp_kd_factor: Interval::new(0.85, 1.15),
            box_friction: Interval::new(0.5, 1.2),
            box_restitution: Interval::new(0.0, 0.2),
            platform_friction: Interval::new(0.5, 1.2),
            loc_position_offset: Interval::symmetric(0.05),
            loc_position_noise: Interval::symmetric(0.05),
            loc_rotation_offset_deg: Interval::symmetric(5.0),
            loc_rotation_noise_deg: Interval::symmetric(5.0),
            max_delay_steps: 2,
            noise_mode: NoiseMode::Uniform,
        }
    }
}

impl DomainRanges {
    /// No noise, no offsets, unit factors, no delay.
    pub fn zero() -> Self {
        let z = Interval::new(0.0, 0.0);
        let one = Interval::new(1.0, 1.0);
        Self {
            ang_vel_noise: z,
            joint_pos_noise: z,
            joint_vel_noise: z,
            gravity_noise: z,
            fk_noise: z,
            actuator_offset: z,
            motor_strength: one,
            payload_mass: z,
            com_displacement: z,
            kp_kd_factor: one,
            box_friction: one,
            box_restitution: z,
            platform_friction: one,
            loc_position_offset: z,
            loc_position_noise: z,
            loc_rotation_offset_deg: z,
            loc_rotation_noise_deg: z,
            max_delay_steps: 0,
            noise_mode: NoiseMode::Uniform,
        }
    }

    pub fn named(&self) -> [(&'static str, Interval); 17] {
        [
            ("ang_vel_noise", self.ang_vel_noise),
            ("joint_pos_noise", self.joint_pos_noise),
            ("joint_vel_noise", self.joint_vel_noise),
            ("gravity_noise", self.gravity_noise),
            ("fk_noise", self.fk_noise),
            ("actuator_offset", self.actuator_offset),
            ("motor_strength", self.motor_strength),
            ("payload_mass", self.payload_mass),
            ("com_displacement", self.com_displacement),
            ("kp_kd_factor", self.kp_kd_factor),
            ("box_friction", self.box_friction),
            ("box_restitution", self.box_restitution),
            ("platform_friction", self.platform_friction),
            ("loc_position_offset", self.loc_position_offset),
            ("loc_position_noise", self.loc_position_noise),
            ("loc_rotation_offset_deg", self.loc_rotation_offset_deg),
            ("loc_rotation_noise_deg", self.loc_rotation_noise_deg),
        ]
    }

    pub fn validate(&self) -> Result<(), InitError> {
        self.named().iter().try_for_each(|(n, r)| r.validate(n))
    }

    fn draw<R: Rng + ?Sized>(&self, iv: Interval, rng: &mut R) -> f64 {
        match self.noise_mode {
            NoiseMode::Uniform => iv.sample(rng),
            NoiseMode::Gaussian => {
                let sigma = iv.width() / 6.0;
                if sigma == 0.0 {
                    return iv.min;
                }
                let mid = 0.5 * (iv.min + iv.max);
                let n = Normal::new(mid, sigma).expect("finite sigma");
                n.sample(rng).clamp(iv.min, iv.max)
            }
        }
    }

    fn draw_vec3<R: Rng + ?Sized>(&self, iv: Interval, rng: &mut R) -> Vec3 {
        Vec3::new(self.draw(iv, rng), self.draw(iv, rng), self.draw(iv, rng))
    }
}

/// Quantities drawn once per episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainDraw {
    pub actuator_offset: Vec<f64>,
    pub motor_strength: Vec<f64>,
    pub payload_mass: f64,
    pub com_displacement: Vec3,
    pub kp_factor: f64,
    pub kd_factor: f64,
    pub box_friction: f64,
    pub box_restitution: f64,
    pub platform_friction: f64,
    pub loc_position_offset: Vec3,
    /// Rotation-vector offset, degrees.
    pub loc_rotation_offset_deg: Vec3,
    pub delay_steps: u32,
}

impl DomainDraw {
    /// Identity draw: nothing perturbed.
    pub fn zero() -> Self {
        Self {
            actuator_offset: vec![0.0; NUM_JOINTS],
            motor_strength: vec![1.0; NUM_JOINTS],
            payload_mass: 0.0,
            com_displacement: Vec3::zeros(),
            kp_factor: 1.0,
            kd_factor: 1.0,
            box_friction: 1.0,
            box_restitution: 0.0,
            platform_friction: 1.0,
            loc_position_offset: Vec3::zeros(),
            loc_rotation_offset_deg: Vec3::zeros(),
            delay_steps: 0,
        }
    }

    /// Every drawn scalar paired with its interval.
    pub fn audit(&self, r: &DomainRanges) -> Vec<(&'static str, f64, Interval)> {
        let mut out = Vec::new();
        out.extend(
            self.actuator_offset
                .iter()
                .map(|v| ("actuator_offset", *v, r.actuator_offset)),
        );
        out.extend(
            self.motor_strength
                .iter()
                .map(|v| ("motor_strength", *v, r.motor_strength)),
        );
        out.push(("payload_mass", self.payload_mass, r.payload_mass));
        out.extend(
            self.com_displacement
                .iter()
                .map(|v| ("com_displacement", *v, r.com_displacement)),
        );
        out.push(("kp_factor", self.kp_factor, r.kp_kd_factor));
        out.push(("kd_factor", self.kd_factor, r.kp_kd_factor));
        out.push(("box_friction", self.box_friction, r.box_friction));
        out.push(("box_restitution", self.box_restitution, r.box_restitution));
        out.push((
            "platform_friction",
            self.platform_friction,
            r.platform_friction,
        ));
        out.extend(
            self.loc_position_offset
                .iter()
                .map(|v| ("loc_position_offset", *v, r.loc_position_offset)),
        );
        out.extend(
            self.loc_rotation_offset_deg
                .iter()
                .map(|v| ("loc_rotation_offset_deg", *v, r.loc_rotation_offset_deg)),
        );
        out.push((
            "delay_steps",
            self.delay_steps as f64,
            Interval::new(0.0, r.max_delay_steps as f64),
        ));
        out
    }
}

pub fn sample_domain<R: Rng + ?Sized>(r: &DomainRanges, rng: &mut R) -> DomainDraw {
    DomainDraw {
        actuator_offset: (0..NUM_JOINTS)
            .map(|_| r.draw(r.actuator_offset, rng))
            .collect(),
        motor_strength: (0..NUM_JOINTS)
            .map(|_| r.draw(r.motor_strength, rng))
            .collect(),
        payload_mass: r.draw(r.payload_mass, rng),
        com_displacement: r.draw_vec3(r.com_displacement, rng),
        kp_factor: r.draw(r.kp_kd_factor, rng),
        kd_factor: r.draw(r.kp_kd_factor, rng),
        box_friction: r.draw(r.box_friction, rng),
        box_restitution: r.draw(r.box_restitution, rng),
        platform_friction: r.draw(r.platform_friction, rng),
        loc_position_offset: r.draw_vec3(r.loc_position_offset, rng),
        loc_rotation_offset_deg: r.draw_vec3(r.loc_rotation_offset_deg, rng),
        delay_steps: rng.random_range(0..=r.max_delay_steps),
    }
}

/// Adds fresh per-step noise to the angular velocity, gravity, joint and
/// end-effector (FK) slots. Action history is left untouched.
pub fn apply_proprio_noise<R: Rng + ?Sized>(
    obs: &ProprioObs,
    r: &DomainRanges,
    rng: &mut R,
) -> ProprioObs {
    let mut out = obs.clone();
    let slots = [
        (proprio_layout::ANG_VEL, r.ang_vel_noise),
        (proprio_layout::GRAVITY, r.gravity_noise),
        (proprio_layout::JOINT_POS, r.joint_pos_noise),
        (proprio_layout::JOINT_VEL, r.joint_vel_noise),
        (proprio_layout::EE_POS, r.fk_noise),
    ];
    for (range, iv) in slots {
        for v in &mut out.0[range] {
            *v += r.draw(iv, rng);
        }
    }
    out
}

/// Object pose as perceived: episode offset plus fresh noise, both on
/// position (additive) and rotation (left-multiplied rotation vector).
pub fn apply_object_pose_noise<R: Rng + ?Sized>(
    pose: &Pose,
    draw: &DomainDraw,
    r: &DomainRanges,
    rng: &mut R,
) -> Pose {
    let pos_noise = r.draw_vec3(r.loc_position_noise, rng);
    let rot_noise = r.draw_vec3(r.loc_rotation_noise_deg, rng);
    let rotvec = (draw.loc_rotation_offset_deg + rot_noise).map(f64::to_radians);
    Pose::new(
        pose.position + draw.loc_position_offset + pos_noise,
        Rotation::from_rotation_vector(rotvec) * pose.rotation,
    )
}

/// Fixed-lag delay line. Until `lag` samples have been pushed, the oldest
/// sample seen so far is returned.
#[derive(Clone, Debug)]
pub struct DelayLine<T> {
    lag: usize,
    buf: VecDeque<T>,
}

impl<T: Clone> DelayLine<T> {
    pub fn new(lag: u32) -> Self {
        Self {
            lag: lag as usize,
            buf: VecDeque::with_capacity(lag as usize + 1),
        }
    }

    pub fn push(&mut self, sample: T) -> T {
        self.buf.push_back(sample);
        if self.buf.len() > self.lag + 1 {
            self.buf.pop_front();
        }
        self.buf.front().expect("just pushed").clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task_kernels::{build_proprio, RobotState};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_ranges_leave_obs_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let obs = build_proprio(&RobotState::zeros()).unwrap();
        assert_eq!(
            apply_proprio_noise(&obs, &DomainRanges::zero(), &mut rng),
            obs
        );
        let p = Pose::from_xyz_yaw(2.0, 0.0, 0.0, 0.4);
        let q = apply_object_pose_noise(&p, &DomainDraw::zero(), &DomainRanges::zero(), &mut rng);
        assert!(q.max_abs_diff(&p) < 1e-15);
        assert_eq!(
            sample_domain(&DomainRanges::zero(), &mut rng),
            DomainDraw::zero()
        );
    }

    #[test]
    fn localization_offset_is_additive() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut draw = DomainDraw::zero();
        draw.loc_position_offset = Vec3::new(0.05, 0.0, 0.0);
        let p = Pose::from_translation(2.0, 0.0, 0.0);
        let q = apply_object_pose_noise(&p, &draw, &DomainRanges::zero(), &mut rng);
        assert_abs_diff_eq!(q.position, Vec3::new(2.05, 0.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn joint_noise_within_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = DomainRanges::default();
        let obs = build_proprio(&RobotState::zeros()).unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for _ in 0..10_000 {
            let n = apply_proprio_noise(&obs, &r, &mut rng);
            let v = n.0[proprio_layout::JOINT_POS.start];
            lo = lo.min(v);
            hi = hi.max(v);
            assert_eq!(
                n.slot(proprio_layout::PREV_ACTION),
                obs.slot(proprio_layout::PREV_ACTION)
            );
        }
        assert!(lo >= -0.02 && hi <= 0.02);
        assert!(lo < -0.019 && hi > 0.019);
    }

    #[test]
    fn draws_within_ranges() {
        let r = DomainRanges::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut delays = [0usize; 3];
        for _ in 0..5_000 {
            let d = sample_domain(&r, &mut rng);
            for (name, v, iv) in d.audit(&r) {
                assert!(iv.contains(v), "{name} = {v}");
            }
            delays[d.delay_steps as usize] += 1;
        }
        assert!(delays.iter().all(|c| *c > 1_400));
    }

    #[test]
    fn gaussian_mode_is_clipped() {
        let r = DomainRanges {
            noise_mode: NoiseMode::Gaussian,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let xs: Vec<f64> = (0..20_000)
            .map(|_| r.draw(r.joint_vel_noise, &mut rng))
            .collect();
        assert!(xs.iter().all(|x| x.abs() <= 2.0));
        let var = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        assert!((var.sqrt() - 2.0 / 3.0).abs() < 0.02, "sd {}", var.sqrt());
    }

    #[test]
    fn delay_line_lags() {
        let mut d = DelayLine::new(2);
        let out: Vec<i32> = (1..=5).map(|i| d.push(i)).collect();
        assert_eq!(out, vec![1, 1, 1, 2, 3]);
        let mut d0 = DelayLine::new(0);
        assert_eq!(d0.push(7), 7);
    }
}
