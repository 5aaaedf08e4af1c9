//! Deterministic core for humanoid scene-interaction experiments.
//!
//! * [`se3`]: rigid transforms, 6D rotation encoding, planar headings.
//! * [`localization`]: coarse-to-fine object localization state machine.
//! * [`sensor_sim`]: scripted trajectories, odometry drift, camera visibility
//!   and simulated fiducial detections.
//! * [`task_kernels`]: observation layouts, task/regularization/style rewards,
//!   discriminator loss and success evaluators.
//! * [`episode_init`]: hybrid reference state initialization, scene and
//!   domain randomization, motion dataset I/O.
//! * [`annotation`]: motion smoothing and rule-based object annotation.
//! * [`experiment`]: localization runs, reward regression checks and the
//!   file formats used by the `hsi-sim` binary.

pub mod annotation;
pub mod episode_init;
pub mod experiment;
pub mod localization;
pub mod se3;
pub mod sensor_sim;
pub mod task_kernels;

pub use se3::{Heading2D, Pose, Rot6D, Rotation, Vec3};
