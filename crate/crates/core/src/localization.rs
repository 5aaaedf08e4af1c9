//! Coarse-to-fine object localization.
//!
//! The localizer tracks one object in the current robot base frame `b_t`:
//!
//! * **Coarse**: a manually specified initial position in the start frame
//!   `b_0` (identity orientation) is carried forward by odometry,
//!   `T_bt_o = (T_b0_bt)⁻¹ · T_b0_o0`.
//! * **Fine**: the latest fiducial detection composed with forward
//!   kinematics, `T_bt_o = T_bt_ct · T_ct_ot`.
//! * **Propagating**: the last detection and its FK are retained and carried
//!   forward by relative odometry,
//!   `T_bt_o = (T_bt'_bt)⁻¹ · T_bt'_ct' · T_ct'_ot'` with
//!   `T_bt'_bt = (T_b0_bt')⁻¹ · T_b0_bt`.
//!   A dynamic object inside the grasp phase is assumed to move with the
//!   robot instead, so its last fused base-frame pose is held.
//! * **Masked**: a dynamic object inside the grasp phase that is out of the
//!   camera view; position and orientation are reported as absent.
//!
//! Coarse switches to Fine on the first detection and never comes back.
//! Grasp-phase entry is latched for the lifetime of the state.
//!
//! Updates take `&mut self`; callers serialize updates, queries are `&self`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::se3::{compose, inverse, to_transform, Pose, Rotation, Vec3};

/// Grasp-phase distance threshold in meters.
pub const DEFAULT_GRASP_EPSILON: f64 = 0.6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocalizationError {
    #[error("non-finite initial object position")]
    NonFiniteInit,
    #[error("grasp threshold must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("detection pose is invalid (non-finite or not a rotation)")]
    InvalidDetection,
    #[error("grasp phase is only defined for dynamic objects")]
    StaticObjectGrasp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectClass {
    Static,
    Dynamic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizerConfig {
    pub epsilon: f64,
    pub object_class: ObjectClass,
}

impl LocalizerConfig {
    pub fn new(epsilon: f64, object_class: ObjectClass) -> Result<Self, LocalizationError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(LocalizationError::InvalidEpsilon(epsilon));
        }
        Ok(Self {
            epsilon,
            object_class,
        })
    }

    pub fn with_class(object_class: ObjectClass) -> Self {
        Self {
            epsilon: DEFAULT_GRASP_EPSILON,
            object_class,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Coarse,
    Fine,
    Propagating,
    Masked,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Coarse => "coarse",
            Mode::Fine => "fine",
            Mode::Propagating => "propagating",
            Mode::Masked => "masked",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Last fiducial observation with the FK and odometry captured alongside it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionAnchor {
    /// `T_ct'_ot'`
    pub detection: Pose,
    /// `T_bt'_ct'`
    pub fk_camera: Pose,
    /// `T_b0_bt'`
    pub odometry: Pose,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalizerState {
    mode: Mode,
    anchor_object_in_base0: Pose,
    anchor: Option<DetectionAnchor>,
    latest_odometry: Pose,
    grasp_phase: bool,
}

/// Object pose in the current base frame. When `masked` is set the pose
/// fields hold the sentinel (zero position, identity rotation).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseEstimate {
    pub position: Vec3,
    pub rotation: Rotation,
    pub mode: Mode,
    pub masked: bool,
}

impl PoseEstimate {
    fn live(pose: Pose, mode: Mode) -> Self {
        Self {
            position: pose.position,
            rotation: pose.rotation,
            mode,
            masked: false,
        }
    }

    fn masked() -> Self {
        Self {
            position: Vec3::zeros(),
            rotation: Rotation::identity(),
            mode: Mode::Masked,
            masked: true,
        }
    }

    /// `None` when masked.
    pub fn pose(&self) -> Option<Pose> {
        (!self.masked).then(|| Pose::new(self.position, self.rotation))
    }

    /// Horizontal distance from the base origin, `None` when masked.
    pub fn planar_distance(&self) -> Option<f64> {
        (!self.masked).then(|| self.position.x.hypot(self.position.y))
    }
}

impl LocalizerState {
    /// Coarse initialization from a manually specified position in `b_0`.
    pub fn init_coarse(p0: Vec3) -> Result<Self, LocalizationError> {
        if p0.iter().any(|v| !v.is_finite()) {
            return Err(LocalizationError::NonFiniteInit);
        }
        Ok(Self {
            mode: Mode::Coarse,
            anchor_object_in_base0: to_transform(p0, Rotation::identity()),
            anchor: None,
            latest_odometry: Pose::identity(),
            grasp_phase: false,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn anchor_object_in_base0(&self) -> &Pose {
        &self.anchor_object_in_base0
    }

    pub fn detection_anchor(&self) -> Option<&DetectionAnchor> {
        self.anchor.as_ref()
    }

    pub fn latest_odometry(&self) -> &Pose {
        &self.latest_odometry
    }

    pub fn in_grasp_phase(&self) -> bool {
        self.grasp_phase
    }

    /// Replaces the absolute odometry `T_b0_bt`. Mode is unchanged.
    pub fn update_odometry(&mut self, odometry: Pose) {
        self.latest_odometry = odometry;
    }

    /// Feeds the current detection `T_ct_ot` (if any) and camera FK `T_bt_ct`.
    ///
    /// A detection always switches to Fine (including out of Masked). Without
    /// one, Fine degrades to Propagating; Coarse and Masked are unchanged.
    pub fn update_detection(
        &mut self,
        detection: Option<Pose>,
        fk_camera: Pose,
    ) -> Result<(), LocalizationError> {
        match detection {
            Some(det) => {
                if !det.is_finite() || Rotation::from_matrix(*det.rotation.matrix()).is_err() {
                    return Err(LocalizationError::InvalidDetection);
                }
                self.anchor = Some(DetectionAnchor {
                    detection: det,
                    fk_camera,
                    odometry: self.latest_odometry,
                });
                self.mode = Mode::Fine;
            }
            None => {
                if matches!(self.mode, Mode::Fine | Mode::Propagating) {
                    self.mode = Mode::Propagating;
                }
            }
        }
        Ok(())
    }

    /// Current object pose in the base frame.
    pub fn query_pose(&self) -> PoseEstimate {
        match (self.mode, self.anchor.as_ref()) {
            (Mode::Masked, _) => PoseEstimate::masked(),
            (Mode::Fine, Some(a)) => {
                PoseEstimate::live(compose(&a.fk_camera, &a.detection), Mode::Fine)
            }
            // Inside the grasp phase the object travels with the robot, so
            // the last fused base-frame pose is held instead of propagated.
            (Mode::Propagating, Some(a)) if self.grasp_phase => {
                PoseEstimate::live(compose(&a.fk_camera, &a.detection), Mode::Propagating)
            }
            (Mode::Propagating, Some(a)) => {
                let relative = compose(&inverse(&a.odometry), &self.latest_odometry);
                let camera_obj = compose(&a.fk_camera, &a.detection);
                PoseEstimate::live(compose(&inverse(&relative), &camera_obj), Mode::Propagating)
            }
            // Fine/Propagating always carry an anchor; Coarse never needs one.
            _ => PoseEstimate::live(
                compose(
                    &inverse(&self.latest_odometry),
                    &self.anchor_object_in_base0,
                ),
                Mode::Coarse,
            ),
        }
    }

    /// Grasp-phase bookkeeping for dynamic objects.
    ///
    /// An unmasked estimate within `epsilon` (horizontal distance) latches
    /// the grasp phase. Once latched, `in_view == false` masks the object and
    /// `in_view == true` lifts the mask so the next detection takes over.
    pub fn update_grasp_phase(
        &mut self,
        config: &LocalizerConfig,
        estimate: &PoseEstimate,
        in_view: bool,
    ) -> Result<(), LocalizationError> {
        if config.object_class == ObjectClass::Static {
            return Err(LocalizationError::StaticObjectGrasp);
        }
        if !self.grasp_phase {
            if let Some(d) = estimate.planar_distance() {
                if d <= config.epsilon {
                    self.grasp_phase = true;
                }
            }
        }
        if !self.grasp_phase {
            return Ok(());
        }
        if !in_view {
            self.mode = Mode::Masked;
        } else if self.mode == Mode::Masked {
            // Resume from the retained anchor until a fresh detection lands.
            self.mode = if self.anchor.is_some() {
                Mode::Propagating
            } else {
                Mode::Coarse
            };
        }
        Ok(())
    }

    /// One sensor tick in the canonical order: odometry, detection, then the
    /// grasp-phase rule for dynamic objects. Returns the resulting estimate.
    pub fn step(
        &mut self,
        config: &LocalizerConfig,
        odometry: Pose,
        detection: Option<Pose>,
        fk_camera: Pose,
        in_view: bool,
    ) -> Result<PoseEstimate, LocalizationError> {
        self.update_odometry(odometry);
        self.update_detection(detection, fk_camera)?;
        if config.object_class == ObjectClass::Dynamic {
            let est = self.query_pose();
            self.update_grasp_phase(config, &est, in_view)?;
        }
        Ok(self.query_pose())
    }
}
