//! Simulated sensors and scripted ground truth.
//!
//! Everything here is deterministic given the model seeds. World frame is
//! z-up; objects carry their fiducial on the +x face, so the object +x axis
//! is the tag's outward normal and the object "heading". The camera frame
//! follows the body convention: +x is the optical axis, +y left, +z up.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::se3::{compose, inverse, to_transform, wrap_angle, Pose, Rotation, Vec3};

/// Policy-rate time step, seconds.
pub const DEFAULT_DT: f64 = 0.02;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("robot and object trajectories differ in length ({robot} vs {object})")]
    LengthMismatch { robot: usize, object: usize },
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    #[error("unreachable trajectory: {0}")]
    Unreachable(String),
    #[error("time index {t} outside scene of length {len}")]
    OutOfRange { t: usize, len: usize },
}

fn invalid(msg: impl Into<String>) -> SimError {
    SimError::InvalidParameter(msg.into())
}

/// Head camera mounted on the torso link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraModel {
    pub h_fov_deg: f64,
    pub v_fov_deg: f64,
    pub mount_offset: [f64; 3],
    /// Downward pitch of the optical axis, degrees.
    pub mount_pitch_deg: f64,
    pub max_range: f64,
    /// Maximum angle between the tag normal and the tag→camera ray, degrees.
    pub facing_limit_deg: f64,
    /// Half-width of the per-episode facing jitter interval, degrees.
    pub facing_jitter_range_deg: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            h_fov_deg: 86.0,
            v_fov_deg: 57.0,
            mount_offset: [0.08, 0.01, 0.40],
            mount_pitch_deg: 40.0,
            max_range: 2.5,
            facing_limit_deg: 60.0,
            facing_jitter_range_deg: 10.0,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<(), SimError> {
        for (name, fov) in [("h_fov_deg", self.h_fov_deg), ("v_fov_deg", self.v_fov_deg)] {
            if !(fov > 0.0 && fov < 180.0) {
                return Err(invalid(format!("{name} must lie in (0, 180), got {fov}")));
            }
        }
        if !(self.max_range > 0.0) {
            return Err(invalid("max_range must be positive"));
        }
        if !(self.facing_jitter_range_deg >= 0.0) {
            return Err(invalid("facing_jitter_range_deg must be non-negative"));
        }
        if self.mount_offset.iter().any(|v| !v.is_finite()) || !self.mount_pitch_deg.is_finite() {
            return Err(invalid("camera mount must be finite"));
        }
        Ok(())
    }

    /// Forward-kinematics transform `T_b_c` of the camera in the base frame.
    pub fn mount(&self) -> Pose {
        let o = self.mount_offset;
        to_transform(
            Vec3::new(o[0], o[1], o[2]),
            Rotation::pitch(self.mount_pitch_deg.to_radians()),
        )
    }
}

/// Drift model for the LiDAR-inertial odometry stand-in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OdometryModel {
    /// Translation scale error as a fraction of distance traveled.
    pub drift_rate: f64,
    /// Heading drift per meter traveled, radians.
    pub heading_drift_rate: f64,
    /// Per-step Gaussian translation noise, meters.
    pub per_step_noise_sigma: f64,
    pub seed: u64,
}

impl Default for OdometryModel {
    fn default() -> Self {
        Self {
            drift_rate: 0.005,
            heading_drift_rate: 0.001,
            per_step_noise_sigma: 0.0,
            seed: 0,
        }
    }
}

impl OdometryModel {
    pub fn noiseless() -> Self {
        Self {
            drift_rate: 0.0,
            heading_drift_rate: 0.0,
            per_step_noise_sigma: 0.0,
            seed: 0,
        }
    }

    fn is_noiseless(&self) -> bool {
        self.drift_rate == 0.0 && self.heading_drift_rate == 0.0 && self.per_step_noise_sigma == 0.0
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (name, v) in [
            ("drift_rate", self.drift_rate),
            ("heading_drift_rate", self.heading_drift_rate),
            ("per_step_noise_sigma", self.per_step_noise_sigma),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

/// Fiducial detection noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TagModel {
    pub position_noise_sigma: f64,
    pub rotation_noise_sigma_deg: f64,
    pub dropout_prob: f64,
    /// Camera-to-tag range beyond which detection reliability degrades: the
    /// drop probability ramps linearly from `dropout_prob` here to 1 at the
    /// camera's maximum range. `None` disables the ramp.
    pub falloff_start: Option<f64>,
    pub seed: u64,
}

impl Default for TagModel {
    fn default() -> Self {
        Self {
            position_noise_sigma: 0.02,
            rotation_noise_sigma_deg: 2.0,
            dropout_prob: 0.05,
            falloff_start: None,
            seed: 0,
        }
    }
}

impl TagModel {
    pub fn noiseless() -> Self {
        Self {
            position_noise_sigma: 0.0,
            rotation_noise_sigma_deg: 0.0,
            dropout_prob: 0.0,
            falloff_start: None,
            seed: 0,
        }
    }

    /// Probability that a visible tag at `range` goes undetected.
    pub fn drop_probability(&self, range: f64, max_range: f64) -> f64 {
        let ramp = match self.falloff_start {
            Some(start) if range > start => {
                if max_range > start {
                    ((range - start) / (max_range - start)).min(1.0)
                } else {
                    1.0
                }
            }
            _ => 0.0,
        };
        self.dropout_prob.max(ramp)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.position_noise_sigma >= 0.0 && self.rotation_noise_sigma_deg >= 0.0) {
            return Err(invalid("tag noise sigmas must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.dropout_prob) {
            return Err(invalid("dropout_prob must lie in [0, 1]"));
        }
        if self
            .falloff_start
            .is_some_and(|r| !(r >= 0.0 && r.is_finite()))
        {
            return Err(invalid("falloff_start must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Placement of the single fiducial on the object's +x face.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TagGeometry {
    /// Distance from the object origin to the tagged face along +x.
    pub face_offset: f64,
    /// Tag edge length.
    pub size: f64,
}

impl Default for TagGeometry {
    fn default() -> Self {
        Self {
            face_offset: 0.15,
            size: 0.12,
        }
    }
}

impl TagGeometry {
    pub fn center(&self, object: &Pose) -> Vec3 {
        object.transform_point(&Vec3::new(self.face_offset, 0.0, 0.0))
    }

    pub fn normal(&self, object: &Pose) -> Vec3 {
        object.rotation.column(0)
    }

    pub fn corners(&self, object: &Pose) -> [Vec3; 4] {
        let h = self.size / 2.0;
        let f = self.face_offset;
        [(h, h), (h, -h), (-h, -h), (-h, h)]
            .map(|(y, z)| object.transform_point(&Vec3::new(f, y, z)))
    }
}

/// Ground truth plus sensor models for one episode.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorScene {
    pub robot_gt: Vec<Pose>,
    pub object_gt: Vec<Pose>,
    pub camera: CameraModel,
    pub odom: OdometryModel,
    pub tags: TagModel,
    pub tag_geometry: TagGeometry,
    /// Per-episode facing-condition offset, degrees.
    pub facing_jitter_deg: f64,
    pub dt: f64,
}

impl SensorScene {
    pub fn new(
        trajectory: Trajectory,
        camera: CameraModel,
        odom: OdometryModel,
        tags: TagModel,
        tag_geometry: TagGeometry,
        facing_jitter_deg: f64,
    ) -> Result<Self, SimError> {
        let scene = Self {
            robot_gt: trajectory.robot,
            object_gt: trajectory.object,
            camera,
            odom,
            tags,
            tag_geometry,
            facing_jitter_deg,
            dt: trajectory.dt,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn len(&self) -> usize {
        self.robot_gt.len()
    }

    pub fn is_empty(&self) -> bool {
        self.robot_gt.is_empty()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.robot_gt.is_empty() {
            return Err(SimError::EmptyTrajectory);
        }
        if self.robot_gt.len() != self.object_gt.len() {
            return Err(SimError::LengthMismatch {
                robot: self.robot_gt.len(),
                object: self.object_gt.len(),
            });
        }
        if !(self.dt > 0.0) {
            return Err(invalid("dt must be positive"));
        }
        if self.facing_jitter_deg.abs() > self.camera.facing_jitter_range_deg {
            return Err(invalid("facing jitter exceeds configured range"));
        }
        self.camera.validate()?;
        self.odom.validate()?;
        self.tags.validate()
    }

    /// Ground-truth object pose in the base frame at step `t`.
    pub fn object_in_base(&self, t: usize) -> Pose {
        compose(&inverse(&self.robot_gt[t]), &self.object_gt[t])
    }

    pub fn camera_pose(&self, t: usize) -> Pose {
        camera_pose(&self.robot_gt[t], &self.camera)
    }

    pub fn visible(&self, t: usize) -> bool {
        visibility(
            &self.camera_pose(t),
            &self.object_gt[t],
            &self.camera,
            &self.tag_geometry,
            self.facing_jitter_deg,
        )
    }
}

/// World pose of the camera for a given base pose.
pub fn camera_pose(base: &Pose, camera: &CameraModel) -> Pose {
    compose(base, &camera.mount())
}

/// Outcome of the three view conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ViewCheck {
    pub facing: bool,
    pub in_fov: bool,
    pub in_range: bool,
}

impl ViewCheck {
    pub fn visible(&self) -> bool {
        self.facing && self.in_fov && self.in_range
    }
}

pub fn view_check(
    camera_pose: &Pose,
    object: &Pose,
    camera: &CameraModel,
    tag: &TagGeometry,
    jitter_deg: f64,
) -> ViewCheck {
    let center = tag.center(object);
    let to_camera = camera_pose.position - center;
    let range = to_camera.norm();

    let facing = range > 0.0 && {
        let cos = (to_camera.dot(&tag.normal(object)) / range).clamp(-1.0, 1.0);
        cos.acos().to_degrees() <= camera.facing_limit_deg + jitter_deg
    };

    let world_to_cam = inverse(camera_pose);
    let half_h = (camera.h_fov_deg / 2.0).to_radians();
    let half_v = (camera.v_fov_deg / 2.0).to_radians();
    let in_fov = tag.corners(object).iter().all(|c| {
        let q = world_to_cam.transform_point(c);
        q.x > 0.0 && q.y.abs().atan2(q.x) <= half_h && q.z.abs().atan2(q.x) <= half_v
    });

    ViewCheck {
        facing,
        in_fov,
        in_range: range <= camera.max_range,
    }
}

/// True iff the tag faces the camera, all four corners lie inside the field
/// of view, and the tag center is within range.
pub fn visibility(
    camera_pose: &Pose,
    object: &Pose,
    camera: &CameraModel,
    tag: &TagGeometry,
    jitter_deg: f64,
) -> bool {
    view_check(camera_pose, object, camera, tag, jitter_deg).visible()
}

/// Odometry `T_b0_bt` for every step.
///
/// Per-step body-frame increments are corrupted by a translation scale error
/// (`drift_rate`, sign drawn once per episode), a heading bias proportional to
/// distance (`heading_drift_rate`, sign drawn once per episode) and white
/// translation noise, then chained. A model with all parameters zero returns
/// `inverse(gt_0) ∘ gt_t` directly.
pub fn simulate_odometry(scene: &SensorScene) -> Result<Vec<Pose>, SimError> {
    if scene.robot_gt.is_empty() {
        return Err(SimError::EmptyTrajectory);
    }
    let model = &scene.odom;
    model.validate()?;
    let gt0_inv = inverse(&scene.robot_gt[0]);
    if model.is_noiseless() {
        return Ok(scene
            .robot_gt
            .iter()
            .map(|p| compose(&gt0_inv, p))
            .collect());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let scale_sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let heading_sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let noise = Normal::new(0.0, model.per_step_noise_sigma).map_err(|e| invalid(e.to_string()))?;

    let mut out = Vec::with_capacity(scene.robot_gt.len());
    let mut est = Pose::identity();
    out.push(est);
    for w in scene.robot_gt.windows(2) {
        let step = compose(&inverse(&w[0]), &w[1]);
        let dist = step.position.norm();
        let mut dp = step.position * (1.0 + scale_sign * model.drift_rate);
        if model.per_step_noise_sigma > 0.0 {
            dp += Vec3::new(
                noise.sample(&mut rng),
                noise.sample(&mut rng),
                noise.sample(&mut rng),
            );
        }
        let dyaw = Rotation::yaw(heading_sign * model.heading_drift_rate * dist);
        let noisy = Pose::new(dyaw.apply(&dp), dyaw * step.rotation);
        est = compose(&est, &noisy);
        out.push(est);
    }
    Ok(out)
}

/// Camera-frame tag pose `T_ct_ot` at step `t`, or `None` when not visible or
/// dropped. Noise streams are keyed by `(seed, t)`.
pub fn simulate_detection(
    scene: &SensorScene,
    t: usize,
    visible: bool,
) -> Result<Option<Pose>, SimError> {
    if t >= scene.len() {
        return Err(SimError::OutOfRange {
            t,
            len: scene.len(),
        });
    }
    if !visible {
        return Ok(None);
    }
    let tags = &scene.tags;
    let mut rng = ChaCha8Rng::seed_from_u64(tags.seed);
    rng.set_stream(t as u64);
    let range =
        (scene.camera_pose(t).position - scene.tag_geometry.center(&scene.object_gt[t])).norm();
    let p_drop = tags.drop_probability(range, scene.camera.max_range);
    if p_drop > 0.0 && rng.random::<f64>() < p_drop {
        return Ok(None);
    }
    let truth = compose(&inverse(&scene.camera_pose(t)), &scene.object_gt[t]);
    let mut pos_noise = Vec3::zeros();
    if tags.position_noise_sigma > 0.0 {
        let n = Normal::new(0.0, tags.position_noise_sigma).map_err(|e| invalid(e.to_string()))?;
        pos_noise = Vec3::new(n.sample(&mut rng), n.sample(&mut rng), n.sample(&mut rng));
    }
    let mut rot_noise = Rotation::identity();
    if tags.rotation_noise_sigma_deg > 0.0 {
        let n = Normal::new(0.0, tags.rotation_noise_sigma_deg.to_radians())
            .map_err(|e| invalid(e.to_string()))?;
        rot_noise = Rotation::from_rotation_vector(Vec3::new(
            n.sample(&mut rng),
            n.sample(&mut rng),
            n.sample(&mut rng),
        ));
    }
    Ok(Some(Pose::new(
        truth.position + pos_noise,
        rot_noise * truth.rotation,
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    Approach,
    ApproachTurnSit,
    ApproachCarry,
}

impl TrajectoryKind {
    pub const ALL: [TrajectoryKind; 3] = [
        TrajectoryKind::Approach,
        TrajectoryKind::ApproachTurnSit,
        TrajectoryKind::ApproachCarry,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TrajectoryKind::Approach => "approach",
            TrajectoryKind::ApproachTurnSit => "approach_turn_sit",
            TrajectoryKind::ApproachCarry => "approach_carry",
        }
    }
}

/// Parameters of a scripted episode. Angles in degrees, lengths in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajectoryParams {
    pub dt: f64,
    /// Walking speed, m/s.
    pub speed: f64,
    /// In-place turn rate, rad/s.
    pub turn_rate: f64,
    /// Horizontal distance from the object center to the start position.
    pub start_distance: f64,
    /// Bearing of the start position relative to the object's face normal.
    pub approach_angle_deg: f64,
    /// Initial heading relative to the walking direction.
    pub start_heading_offset_deg: f64,
    pub object_xy: [f64; 2],
    pub object_yaw_deg: f64,
    /// Height of the object origin above ground.
    pub object_height: f64,
    pub base_height: f64,
    /// Horizontal base-to-object distance at the end of the approach.
    pub standoff: f64,
    pub final_hold: f64,
    /// Base height once seated.
    pub seated_base_height: f64,
    pub backup_speed: f64,
    pub sit_duration: f64,
    pub goal_xy: [f64; 2],
    pub goal_height: f64,
    /// Object pose relative to the base while carried (position part).
    pub hold_offset: [f64; 3],
    pub lift_duration: f64,
}

impl Default for TrajectoryParams {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            speed: 0.85,
            turn_rate: 1.5,
            start_distance: 5.0,
            approach_angle_deg: 0.0,
            start_heading_offset_deg: 0.0,
            object_xy: [0.0, 0.0],
            object_yaw_deg: 0.0,
            object_height: 0.3,
            base_height: 0.75,
            standoff: 0.5,
            final_hold: 0.5,
            seated_base_height: 0.55,
            backup_speed: 0.3,
            sit_duration: 1.0,
            goal_xy: [2.5, 2.5],
            goal_height: 0.3,
            hold_offset: [0.3, 0.0, -0.15],
            lift_duration: 1.0,
        }
    }
}

/// Sampled ground truth, one entry per `dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub robot: Vec<Pose>,
    pub object: Vec<Pose>,
    pub dt: f64,
}

impl Trajectory {
    pub fn duration(&self) -> f64 {
        (self.robot.len().saturating_sub(1)) as f64 * self.dt
    }
}

enum ObjectState {
    Fixed(Pose),
    Held(Pose),
}

struct Builder {
    dt: f64,
    x: f64,
    y: f64,
    z: f64,
    yaw: f64,
    object: ObjectState,
    robot: Vec<Pose>,
    objects: Vec<Pose>,
}

impl Builder {
    fn new(dt: f64, x: f64, y: f64, z: f64, yaw: f64, object: Pose) -> Self {
        let mut b = Self {
            dt,
            x,
            y,
            z,
            yaw,
            object: ObjectState::Fixed(object),
            robot: Vec::new(),
            objects: Vec::new(),
        };
        b.push();
        b
    }

    fn base(&self) -> Pose {
        Pose::from_xyz_yaw(self.x, self.y, self.z, self.yaw)
    }

    fn object_pose(&self) -> Pose {
        match &self.object {
            ObjectState::Fixed(p) => *p,
            ObjectState::Held(rel) => compose(&self.base(), rel),
        }
    }

    fn push(&mut self) {
        self.robot.push(self.base());
        let obj = self.object_pose();
        self.objects.push(obj);
    }

    fn steps_for(&self, duration: f64) -> usize {
        (duration / self.dt).ceil().max(0.0) as usize
    }

    /// Straight-line walk at `speed` keeping the current heading.
    fn walk_to(&mut self, tx: f64, ty: f64, speed: f64) {
        let (x0, y0) = (self.x, self.y);
        let dist = (tx - x0).hypot(ty - y0);
        let n = self.steps_for(dist / speed);
        for i in 1..=n {
            let f = i as f64 / n as f64;
            self.x = x0 + (tx - x0) * f;
            self.y = y0 + (ty - y0) * f;
            self.push();
        }
        self.x = tx;
        self.y = ty;
    }

    /// In-place turn along the shorter arc, ending exactly at `target`.
    fn turn_to(&mut self, target: f64, rate: f64) {
        let delta = wrap_angle(target - self.yaw);
        let n = self.steps_for(delta.abs() / rate);
        let y0 = self.yaw;
        for i in 1..=n {
            self.yaw = if i == n {
                target
            } else {
                y0 + delta * i as f64 / n as f64
            };
            self.push();
        }
        self.yaw = target;
    }

    fn move_height(&mut self, target: f64, duration: f64) {
        let n = self.steps_for(duration);
        let z0 = self.z;
        for i in 1..=n {
            self.z = z0 + (target - z0) * i as f64 / n as f64;
            self.push();
        }
        self.z = target;
    }

    fn hold(&mut self, duration: f64) {
        for _ in 0..self.steps_for(duration) {
            self.push();
        }
    }

    /// Moves a free object linearly to `target` while the robot stands still.
    fn move_object(&mut self, target: Pose, duration: f64) {
        let start = self.object_pose();
        let n = self.steps_for(duration).max(1);
        for i in 1..=n {
            let f = i as f64 / n as f64;
            let p = if i == n {
                target
            } else {
                Pose::new(
                    start.position + (target.position - start.position) * f,
                    start.rotation,
                )
            };
            self.object = ObjectState::Fixed(p);
            self.push();
        }
    }

    fn attach(&mut self) {
        let rel = compose(&inverse(&self.base()), &self.object_pose());
        self.object = ObjectState::Held(rel);
    }

    fn detach(&mut self) {
        self.object = ObjectState::Fixed(self.object_pose());
    }

    fn finish(self) -> Trajectory {
        Trajectory {
            robot: self.robot,
            object: self.objects,
            dt: self.dt,
        }
    }
}

impl TrajectoryParams {
    fn validate(&self, kind: TrajectoryKind) -> Result<(), SimError> {
        let positive = [
            ("dt", self.dt),
            ("speed", self.speed),
            ("turn_rate", self.turn_rate),
            ("base_height", self.base_height),
            ("backup_speed", self.backup_speed),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive")));
            }
        }
        let non_negative = [
            ("standoff", self.standoff),
            ("final_hold", self.final_hold),
            ("sit_duration", self.sit_duration),
            ("lift_duration", self.lift_duration),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be >= 0")));
            }
        }
        if self.start_distance <= self.standoff {
            return Err(SimError::Unreachable(format!(
                "start distance {} must exceed standoff {}",
                self.start_distance, self.standoff
            )));
        }
        if self.approach_angle_deg.abs() >= 90.0 {
            return Err(SimError::Unreachable(
                "approach angle must be within (-90, 90) degrees of the face normal".into(),
            ));
        }
        if kind == TrajectoryKind::ApproachCarry {
            let d =
                (self.goal_xy[0] - self.object_xy[0]).hypot(self.goal_xy[1] - self.object_xy[1]);
            if d <= self.standoff + self.hold_offset[0] + 0.5 {
                return Err(SimError::Unreachable(format!(
                    "goal {d:.3} m from the object is too close to carry"
                )));
            }
        }
        if kind == TrajectoryKind::ApproachTurnSit && self.seated_base_height >= self.base_height {
            return Err(invalid("seated_base_height must be below base_height"));
        }
        Ok(())
    }
}

/// Generates one of the scripted episodes.
///
/// * `Approach`: optional in-place turn, straight walk to the standoff point
///   in front of the tagged face, turn to face the object, hold.
/// * `ApproachTurnSit`: approach, turn to the object's heading, back onto the
///   seat center and lower the base.
/// * `ApproachCarry`: approach, lift the object to `hold_offset`, carry it to
///   the goal and set it down.
pub fn scripted_trajectory(
    kind: TrajectoryKind,
    params: &TrajectoryParams,
) -> Result<Trajectory, SimError> {
    params.validate(kind)?;
    let p = params;
    let face_yaw = p.object_yaw_deg.to_radians();
    let object = Pose::from_xyz_yaw(p.object_xy[0], p.object_xy[1], p.object_height, face_yaw);

    let bearing = face_yaw + p.approach_angle_deg.to_radians();
    let start = (
        p.object_xy[0] + p.start_distance * bearing.cos(),
        p.object_xy[1] + p.start_distance * bearing.sin(),
    );
    let standoff = (
        p.object_xy[0] + p.standoff * face_yaw.cos(),
        p.object_xy[1] + p.standoff * face_yaw.sin(),
    );
    let walk_yaw = (standoff.1 - start.1).atan2(standoff.0 - start.0);
    let facing_object = face_yaw + std::f64::consts::PI;

    let mut b = Builder::new(
        p.dt,
        start.0,
        start.1,
        p.base_height,
        walk_yaw + p.start_heading_offset_deg.to_radians(),
        object,
    );
    b.turn_to(walk_yaw, p.turn_rate);
    b.walk_to(standoff.0, standoff.1, p.speed);
    b.turn_to(wrap_angle(facing_object), p.turn_rate);

    match kind {
        TrajectoryKind::Approach => {}
        TrajectoryKind::ApproachTurnSit => {
            b.hold(0.2);
            b.turn_to(face_yaw, p.turn_rate);
            b.walk_to(p.object_xy[0], p.object_xy[1], p.backup_speed);
            b.move_height(p.seated_base_height, p.sit_duration);
        }
        TrajectoryKind::ApproachCarry => {
            b.hold(0.3);
            let h = p.hold_offset;
            let held = compose(
                &b.base(),
                &Pose::new(Vec3::new(h[0], h[1], h[2]), Rotation::identity()),
            );
            b.move_object(Pose::new(held.position, object.rotation), p.lift_duration);
            b.attach();
            let goal_yaw = (p.goal_xy[1] - b.y).atan2(p.goal_xy[0] - b.x);
            b.turn_to(goal_yaw, p.turn_rate);
            let drop = (
                p.goal_xy[0] - h[0] * goal_yaw.cos(),
                p.goal_xy[1] - h[0] * goal_yaw.sin(),
            );
            b.walk_to(drop.0, drop.1, p.speed);
            let held_rot = b.object_pose().rotation;
            b.detach();
            let place = Pose::new(
                Vec3::new(p.goal_xy[0], p.goal_xy[1], p.goal_height),
                held_rot,
            );
            b.move_object(place, p.lift_duration);
        }
    }
    b.hold(p.final_hold);
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::se3::heading_of;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn final_heading_error(traj: &Trajectory, target_yaw: f64) -> f64 {
        let h = heading_of(traj.robot.last().unwrap()).unwrap();
        wrap_angle(h.angle() - target_yaw).abs()
    }

    fn straight_scene(len_m: f64, odom: OdometryModel) -> SensorScene {
        let n = 200;
        let robot = (0..=n)
            .map(|i| Pose::from_translation(len_m * i as f64 / n as f64, 0.0, 0.75))
            .collect::<Vec<_>>();
        let object = vec![Pose::from_xyz_yaw(len_m + 1.0, 0.0, 0.3, std::f64::consts::PI); n + 1];
        SensorScene::new(
            Trajectory {
                robot,
                object,
                dt: DEFAULT_DT,
            },
            CameraModel::default(),
            odom,
            TagModel::noiseless(),
            TagGeometry::default(),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn camera_pose_cases() {
        let cam = CameraModel::default();
        let c = camera_pose(&Pose::identity(), &cam);
        assert_eq!(c.position, Vec3::new(0.08, 0.01, 0.40));
        assert_abs_diff_eq!(
            c.rotation.matrix(),
            Rotation::pitch(40f64.to_radians()).matrix(),
            epsilon = 0.0
        );
        // Optical axis tips downward.
        assert!(c.rotation.column(0).z < 0.0);

        let c = camera_pose(&Pose::from_translation(1.0, 0.0, 0.0), &cam);
        assert_abs_diff_eq!(c.position, Vec3::new(1.08, 0.01, 0.40), epsilon = 1e-15);

        let c = camera_pose(&Pose::from_xyz_yaw(0.0, 0.0, 0.0, FRAC_PI_2), &cam);
        assert_abs_diff_eq!(c.position, Vec3::new(-0.01, 0.08, 0.40), epsilon = 1e-15);
    }

    fn level_camera() -> CameraModel {
        CameraModel {
            mount_offset: [0.0, 0.0, 0.0],
            mount_pitch_deg: 0.0,
            ..CameraModel::default()
        }
    }

    #[test]
    fn visibility_cases() {
        let cam = level_camera();
        let tag = TagGeometry::default();
        let eye = Pose::identity();
        // Object whose tagged face looks back at the camera.
        let at = |d: f64, face_yaw_deg: f64| {
            let yaw = std::f64::consts::PI + face_yaw_deg.to_radians();
            let obj = Pose::from_xyz_yaw(d, 0.0, 0.0, yaw);
            // Put the tag center (not the object origin) at distance d.
            let shift = tag.center(&obj) - obj.position;
            Pose::new(obj.position - shift, obj.rotation)
        };
        assert!(visibility(&eye, &at(1.0, 0.0), &cam, &tag, 0.0));
        let far = view_check(&eye, &at(3.0, 0.0), &cam, &tag, 0.0);
        assert!(!far.visible() && !far.in_range && far.facing && far.in_fov);
        let angled = view_check(&eye, &at(1.0, 75.0), &cam, &tag, 0.0);
        assert!(!angled.facing && !angled.visible());
        // Jitter widens the facing cone.
        assert!(visibility(&eye, &at(1.0, 55.0), &cam, &tag, 0.0));
        assert!(!visibility(&eye, &at(1.0, 65.0), &cam, &tag, 0.0));
        assert!(visibility(&eye, &at(1.0, 65.0), &cam, &tag, 8.0));
        // Behind the camera.
        assert!(!visibility(&eye, &at(-1.0, 180.0), &cam, &tag, 0.0));
    }

    #[test]
    fn odometry_noiseless_is_exact() {
        let scene = straight_scene(4.0, OdometryModel::noiseless());
        let odom = simulate_odometry(&scene).unwrap();
        for (t, o) in odom.iter().enumerate() {
            let truth = compose(&inverse(&scene.robot_gt[0]), &scene.robot_gt[t]);
            assert!(o.max_abs_diff(&truth) < 1e-12);
        }
    }

    #[test]
    fn odometry_drift_closed_form() {
        let model = OdometryModel {
            drift_rate: 0.005,
            heading_drift_rate: 0.0,
            per_step_noise_sigma: 0.0,
            seed: 3,
        };
        let scene = straight_scene(4.0, model);
        let odom = simulate_odometry(&scene).unwrap();
        let err = (odom.last().unwrap().position - Vec3::new(4.0, 0.0, 0.0)).norm();
        assert_abs_diff_eq!(err, 0.005 * 4.0, epsilon = 1e-9);
    }

    #[test]
    fn odometry_is_deterministic_and_grows() {
        let model = OdometryModel {
            per_step_noise_sigma: 0.001,
            seed: 11,
            ..OdometryModel::default()
        };
        let scene = straight_scene(4.0, model);
        let a = simulate_odometry(&scene).unwrap();
        let b = simulate_odometry(&scene).unwrap();
        assert_eq!(a, b);
        let err = |t: usize| {
            (a[t].position - scene.robot_gt[t].position + scene.robot_gt[0].position).norm()
        };
        assert!(err(200) > err(20));

        let mut empty = scene.clone();
        empty.robot_gt.clear();
        assert_eq!(simulate_odometry(&empty), Err(SimError::EmptyTrajectory));
    }

    #[test]
    fn detection_behaviour() {
        let scene = straight_scene(1.0, OdometryModel::noiseless());
        assert_eq!(simulate_detection(&scene, 0, false).unwrap(), None);
        let det = simulate_detection(&scene, 5, true).unwrap().unwrap();
        let truth = compose(&inverse(&scene.camera_pose(5)), &scene.object_gt[5]);
        assert_eq!(det, truth);
        assert!(simulate_detection(&scene, 10_000, true).is_err());
    }

    #[test]
    fn detection_noise_statistics() {
        let mut scene = straight_scene(1.0, OdometryModel::noiseless());
        let n = 1000;
        scene.robot_gt = vec![Pose::from_translation(0.0, 0.0, 0.75); n];
        scene.object_gt = vec![Pose::from_xyz_yaw(1.5, 0.0, 0.3, std::f64::consts::PI); n];
        scene.tags = TagModel {
            position_noise_sigma: 0.02,
            rotation_noise_sigma_deg: 0.0,
            dropout_prob: 0.0,
            falloff_start: None,
            seed: 99,
        };
        let truth = compose(&inverse(&scene.camera_pose(0)), &scene.object_gt[0]);
        let xs: Vec<f64> = (0..n)
            .map(|t| {
                simulate_detection(&scene, t, true)
                    .unwrap()
                    .unwrap()
                    .position
                    .x
                    - truth.position.x
            })
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!((std - 0.02).abs() < 0.002, "sample std {std}");
    }

    #[test]
    fn dropout_rate() {
        let mut scene = straight_scene(1.0, OdometryModel::noiseless());
        scene.tags.dropout_prob = 0.3;
        scene.tags.seed = 5;
        let dropped = (0..scene.len())
            .filter(|&t| simulate_detection(&scene, t, true).unwrap().is_none())
            .count();
        let frac = dropped as f64 / scene.len() as f64;
        assert!((0.2..0.4).contains(&frac), "{frac}");
    }

    #[test]
    fn range_falloff() {
        let tags = TagModel {
            falloff_start: Some(2.0),
            ..TagModel::default()
        };
        assert_eq!(tags.drop_probability(1.0, 2.5), 0.05);
        assert_eq!(tags.drop_probability(2.0, 2.5), 0.05);
        assert!((tags.drop_probability(2.25, 2.5) - 0.5).abs() < 1e-12);
        assert_eq!(tags.drop_probability(2.5, 2.5), 1.0);
        assert_eq!(TagModel::default().drop_probability(2.49, 2.5), 0.05);
        assert_eq!(TagModel::noiseless().drop_probability(2.49, 2.5), 0.0);
    }

    #[test]
    fn approach_duration() {
        let params = TrajectoryParams {
            start_distance: 5.5,
            standoff: 0.5,
            final_hold: 0.0,
            ..TrajectoryParams::default()
        };
        let traj = scripted_trajectory(TrajectoryKind::Approach, &params).unwrap();
        assert!((traj.duration() - 5.0 / 0.85).abs() <= params.dt);
        // Step lengths never exceed speed · dt.
        for w in traj.robot.windows(2) {
            assert!((w[1].position - w[0].position).norm() <= 0.85 * params.dt + 1e-12);
        }
    }

    #[test]
    fn sit_ends_aligned() {
        for yaw in [0.0, 37.0, -120.0] {
            let params = TrajectoryParams {
                object_yaw_deg: yaw,
                approach_angle_deg: 30.0,
                ..TrajectoryParams::default()
            };
            let traj = scripted_trajectory(TrajectoryKind::ApproachTurnSit, &params).unwrap();
            assert!(final_heading_error(&traj, yaw.to_radians()) < 1e-6);
            let last = traj.robot.last().unwrap();
            assert_abs_diff_eq!(last.position.z, params.seated_base_height, epsilon = 1e-12);
            assert!(
                (last.position.xy() - nalgebra::Vector2::from(params.object_xy)).norm() < 1e-12
            );
        }
    }

    #[test]
    fn carry_moves_object_with_base() {
        let params = TrajectoryParams::default();
        let traj = scripted_trajectory(TrajectoryKind::ApproachCarry, &params).unwrap();
        let rel: Vec<Pose> = traj
            .robot
            .iter()
            .zip(&traj.object)
            .map(|(b, o)| compose(&inverse(b), o))
            .collect();
        let carried = (1..traj.robot.len())
            .filter(|&t| {
                let moved = (traj.robot[t].position - traj.robot[t - 1].position).norm() > 1e-6;
                moved && rel[t].max_abs_diff(&rel[t - 1]) < 1e-12
            })
            .count();
        assert!(carried > 50, "only {carried} carried steps");
        let last = traj.object.last().unwrap();
        assert_abs_diff_eq!(last.position, Vec3::new(2.5, 2.5, 0.3), epsilon = 1e-12);
    }

    #[test]
    fn unreachable_parameters() {
        let close = TrajectoryParams {
            start_distance: 0.3,
            ..TrajectoryParams::default()
        };
        assert!(matches!(
            scripted_trajectory(TrajectoryKind::Approach, &close),
            Err(SimError::Unreachable(_))
        ));
        let goal_on_object = TrajectoryParams {
            goal_xy: [0.2, 0.0],
            ..TrajectoryParams::default()
        };
        assert!(scripted_trajectory(TrajectoryKind::ApproachCarry, &goal_on_object).is_err());
        let zero_speed = TrajectoryParams {
            speed: 0.0,
            ..TrajectoryParams::default()
        };
        assert!(scripted_trajectory(TrajectoryKind::Approach, &zero_speed).is_err());
    }
}
