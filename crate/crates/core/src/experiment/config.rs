//! Versioned TOML configuration for localization runs.
//!
//! ```toml
//! version = 1
//! trials = 17
//! seed = 7
//! trajectory = "mixed"            # or approach | approach_turn_sit | approach_carry
//! epsilon = 0.6
//! initial_guess_error = 0.3       # metres, random horizontal direction
//! start_distance = { min = 3.5, max = 6.0 }
//! approach_angle_deg = { min = -70.0, max = 70.0 }
//! start_heading_offset_deg = { min = 0.0, max = 0.0 }
//!
//! [trajectory_params]             # any TrajectoryParams field
//! [camera]                        # any CameraModel field
//! [odometry]                      # drift_rate, heading_drift_rate, per_step_noise_sigma
//! [tags]                          # position_noise_sigma, rotation_noise_sigma_deg, dropout_prob, falloff_start
//! [tag_geometry]
//! [checks]                        # optional pass/fail bounds on the summary
//! coarse_error = { min = 0.2, max = 0.5 }
//! fine_error_max = 0.1
//! max_error = 1e-9
//! transition_contains = 2.4
//! ```
//!
//! Everything except `version` may be omitted. Per-trial seeds for the
//! odometry and tag models are derived from `seed`; seeds written in those
//! tables are ignored.

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::episode_init::Interval;
use crate::localization::DEFAULT_GRASP_EPSILON;
use crate::sensor_sim::{
    CameraModel, OdometryModel, TagGeometry, TagModel, TrajectoryKind, TrajectoryParams,
};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryChoice {
    Approach,
    ApproachTurnSit,
    ApproachCarry,
    /// Uniform over the three scripted kinds, drawn per trial.
    Mixed,
}

impl TrajectoryChoice {
    pub fn fixed(&self) -> Option<TrajectoryKind> {
        match self {
            TrajectoryChoice::Approach => Some(TrajectoryKind::Approach),
            TrajectoryChoice::ApproachTurnSit => Some(TrajectoryKind::ApproachTurnSit),
            TrajectoryChoice::ApproachCarry => Some(TrajectoryKind::ApproachCarry),
            TrajectoryChoice::Mixed => None,
        }
    }
}

/// Optional acceptance bounds evaluated against the run summary.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunChecks {
    pub coarse_error: Option<Interval>,
    pub fine_error_max: Option<f64>,
    /// Bound on the error of every unmasked row.
    pub max_error: Option<f64>,
    /// Value that must fall inside the trial min–max transition band.
    pub transition_contains: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalizationConfig {
    pub version: u32,
    pub trials: usize,
    pub seed: u64,
    pub trajectory: TrajectoryChoice,
    pub epsilon: f64,
    pub initial_guess_error: f64,
    pub start_distance: Interval,
    pub approach_angle_deg: Interval,
    pub start_heading_offset_deg: Interval,
    pub trajectory_params: TrajectoryParams,
    pub camera: CameraModel,
    pub odometry: OdometryModel,
    pub tags: TagModel,
    pub tag_geometry: TagGeometry,
    pub checks: RunChecks,
}

impl Default for LocalizationConfig {
    /// Calibrated noise defaults with the criterion bounds enabled.
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            trials: 17,
            seed: 7,
            trajectory: TrajectoryChoice::Mixed,
            epsilon: DEFAULT_GRASP_EPSILON,
            initial_guess_error: 0.3,
            start_distance: Interval::new(3.5, 6.0),
            approach_angle_deg: Interval::symmetric(70.0),
            start_heading_offset_deg: Interval::new(0.0, 0.0),
            trajectory_params: TrajectoryParams::default(),
            camera: CameraModel::default(),
            odometry: OdometryModel::default(),
            tags: TagModel {
                falloff_start: Some(2.0),
                ..TagModel::default()
            },
            tag_geometry: TagGeometry::default(),
            checks: RunChecks {
                coarse_error: Some(Interval::new(0.2, 0.5)),
                fine_error_max: Some(0.1),
                max_error: None,
                transition_contains: Some(2.4),
            },
        }
    }
}

impl LocalizationConfig {
    /// Noiseless sensors, exact initial guess, tight error bound.
    pub fn zero_noise() -> Self {
        Self {
            initial_guess_error: 0.0,
            odometry: OdometryModel::noiseless(),
            tags: TagModel::noiseless(),
            checks: RunChecks {
                max_error: Some(1e-9),
                ..RunChecks::default()
            },
            ..Self::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ExperimentError::Config(e.to_string()))?;
        if !table.contains_key("version") {
            return Err(ExperimentError::Config(
                "missing required key 'version'".into(),
            ));
        }
        let cfg: Self = table
            .try_into()
            .map_err(|e: toml::de::Error| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.version != CONFIG_VERSION {
            return bad(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            ));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.initial_guess_error >= 0.0 && self.initial_guess_error.is_finite()) {
            return bad("initial_guess_error must be finite and >= 0".into());
        }
        for (name, iv) in [
            ("start_distance", &self.start_distance),
            ("approach_angle_deg", &self.approach_angle_deg),
            ("start_heading_offset_deg", &self.start_heading_offset_deg),
        ] {
            iv.validate(name)
                .map_err(|e| ExperimentError::Config(e.to_string()))?;
        }
        self.camera.validate()?;
        self.odometry.validate()?;
        self.tags.validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_toml() {
        let cfg = LocalizationConfig::default();
        let back = LocalizationConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_config_uses_defaults() {
        let cfg = LocalizationConfig::from_toml(
            "version = 1\ntrials = 3\n[odometry]\ndrift_rate = 0.01\n",
        )
        .unwrap();
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.odometry.drift_rate, 0.01);
        assert_eq!(cfg.camera, CameraModel::default());
    }

    #[test]
    fn rejects_malformed() {
        assert!(LocalizationConfig::from_toml("trials = 3").is_err());
        assert!(LocalizationConfig::from_toml("version = 2").is_err());
        assert!(LocalizationConfig::from_toml("version = 1\ntrials = 0").is_err());
        assert!(LocalizationConfig::from_toml("version = 1\nbogus = 1").is_err());
        assert!(LocalizationConfig::from_toml("version = 1\ntrajectory = \"spiral\"").is_err());
        assert!(LocalizationConfig::from_toml("version = [").is_err());
    }

    #[test]
    fn shipped_configs_match_builtins() {
        let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/");
        let read = |name: &str| std::fs::read_to_string(format!("{root}{name}")).unwrap();
        assert_eq!(
            LocalizationConfig::from_toml(&read("calibrated.toml")).unwrap(),
            LocalizationConfig::default()
        );
        assert_eq!(
            LocalizationConfig::from_toml(&read("zero_noise.toml")).unwrap(),
            LocalizationConfig::zero_noise()
        );
    }
}
