//! Post-processing of retargeted motion: smoothing, rule-based object
//! trajectories and carry-clip splitting.
//!
//! Between the pickup frame `φ1` and the placement frame `φ2` the object sits
//! at the world-frame midpoint of the hands with the base's yaw; outside that
//! span it stays at the pose computed for the nearest contact frame.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::episode_init::{MotionClip, MotionFrame, SubsetLabel};
use crate::se3::{rot_from_6d, rot_to_6d, Pose, Rot6D, Rotation, Vec3};
use crate::task_kernels::EndEffector;

pub const DEFAULT_SMOOTHING_WINDOW: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnotationError {
    #[error("smoothing window must be odd and at least 1, got {0}")]
    BadWindow(usize),
    #[error("smoothing window {window} exceeds clip length {len}")]
    WindowTooLong { window: usize, len: usize },
    #[error("contact frames must satisfy 0 <= pickup < place < {len}, got {pickup}/{place}")]
    BadFrames {
        pickup: usize,
        place: usize,
        len: usize,
    },
    #[error("clip {0} is invalid: {1}")]
    InvalidClip(String, String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactAnnotation {
    pub pickup_frame: usize,
    pub place_frame: usize,
}

impl ContactAnnotation {
    pub fn new(pickup_frame: usize, place_frame: usize) -> Self {
        Self {
            pickup_frame,
            place_frame,
        }
    }

    pub fn validate(&self, len: usize) -> Result<(), AnnotationError> {
        if self.pickup_frame < self.place_frame && self.place_frame < len {
            Ok(())
        } else {
            Err(AnnotationError::BadFrames {
                pickup: self.pickup_frame,
                place: self.place_frame,
                len,
            })
        }
    }
}

/// Sidecar stored next to an annotated clip.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub clip_id: String,
    pub pickup_frame: usize,
    pub place_frame: usize,
    pub smoothing_window: usize,
    pub pickup_pose: Pose,
    pub place_pose: Pose,
}

fn check_clip(clip: &MotionClip) -> Result<(), AnnotationError> {
    clip.validate()
        .map_err(|e| AnnotationError::InvalidClip(clip.id.clone(), e.to_string()))
}

fn mean_rotation(rots: &[Rotation]) -> Rotation {
    let mut acc = [0.0; 6];
    for r in rots {
        for (a, v) in acc.iter_mut().zip(rot_to_6d(r).0) {
            *a += v;
        }
    }
    let n = rots.len() as f64;
    rot_from_6d(&Rot6D(acc.map(|a| a / n))).unwrap_or(rots[rots.len() / 2])
}

fn mean_vec(vs: impl Iterator<Item = Vec3>, n: usize) -> Vec3 {
    vs.fold(Vec3::zeros(), |a, v| a + v) / n as f64
}

/// Centered moving average. Windows shrink symmetrically near the ends, so
/// the first and last frames are kept as-is. Joint positions and
/// velocities, base position and end-effector positions are averaged per
/// channel; the base rotation is averaged in the 6D encoding and
/// re-orthonormalized. Object poses are not touched.
pub fn smooth_motion(clip: &MotionClip, window: usize) -> Result<MotionClip, AnnotationError> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(AnnotationError::BadWindow(window));
    }
    check_clip(clip)?;
    let len = clip.len();
    if window > len {
        return Err(AnnotationError::WindowTooLong { window, len });
    }
    let half = window / 2;
    let f = &clip.frames;
    let frames = (0..len)
        .map(|i| {
            let k = half.min(i).min(len - 1 - i);
            let span = &f[i - k..=i + k];
            let n = span.len();
            let channel = |get: &dyn Fn(&MotionFrame) -> &Vec<f64>| -> Vec<f64> {
                (0..get(&f[i]).len())
                    .map(|j| span.iter().map(|fr| get(fr)[j]).sum::<f64>() / n as f64)
                    .collect()
            };
            let rots: Vec<Rotation> = span.iter().map(|fr| fr.base_pose.rotation).collect();
            MotionFrame {
                base_pose: Pose::new(
                    mean_vec(span.iter().map(|fr| fr.base_pose.position), n),
                    if n == 1 {
                        rots[0]
                    } else {
                        mean_rotation(&rots)
                    },
                ),
                joint_pos: channel(&|fr| &fr.joint_pos),
                joint_vel: channel(&|fr| &fr.joint_vel),
                ee_pos: (0..f[i].ee_pos.len())
                    .map(|e| mean_vec(span.iter().map(|fr| fr.ee_pos[e]), n))
                    .collect(),
                object: f[i].object,
            }
        })
        .collect();
    Ok(MotionClip {
        id: clip.id.clone(),
        subset: clip.subset,
        fps: clip.fps,
        frames,
    })
}

/// Object pose implied by the hands at one frame: world hand midpoint,
/// upright, yawed with the base.
pub fn hand_midpoint_pose(frame: &MotionFrame) -> Pose {
    let mid = (frame.ee_pos[EndEffector::LeftHand as usize]
        + frame.ee_pos[EndEffector::RightHand as usize])
        / 2.0;
    let yaw = crate::se3::yaw_of(&frame.base_pose.rotation);
    Pose::new(frame.base_pose.transform_point(&mid), Rotation::yaw(yaw))
}

pub fn annotate_object(
    clip: &MotionClip,
    ann: &ContactAnnotation,
) -> Result<MotionClip, AnnotationError> {
    check_clip(clip)?;
    ann.validate(clip.len())?;
    let (p1, p2) = (ann.pickup_frame, ann.place_frame);
    let first = hand_midpoint_pose(&clip.frames[p1]);
    let last = hand_midpoint_pose(&clip.frames[p2]);
    let frames = clip
        .frames
        .iter()
        .enumerate()
        .map(|(t, fr)| {
            let object = if t < p1 {
                first
            } else if t > p2 {
                last
            } else {
                hand_midpoint_pose(fr)
            };
            MotionFrame {
                object: Some(object),
                ..fr.clone()
            }
        })
        .collect();
    Ok(MotionClip {
        frames,
        ..clip.clone()
    })
}

pub fn annotation_record(
    clip: &MotionClip,
    ann: &ContactAnnotation,
    smoothing_window: usize,
) -> Result<AnnotationRecord, AnnotationError> {
    ann.validate(clip.len())?;
    Ok(AnnotationRecord {
        clip_id: clip.id.clone(),
        pickup_frame: ann.pickup_frame,
        place_frame: ann.place_frame,
        smoothing_window,
        pickup_pose: hand_midpoint_pose(&clip.frames[ann.pickup_frame]),
        place_pose: hand_midpoint_pose(&clip.frames[ann.place_frame]),
    })
}

/// Largest object position jump across the two contact boundaries, or
/// `None` when frames lack object poses.
pub fn contact_discontinuity(clip: &MotionClip, ann: &ContactAnnotation) -> Option<f64> {
    let pos = |t: usize| {
        clip.frames
            .get(t)
            .and_then(|f| f.object)
            .map(|p| p.position)
    };
    let mut worst: f64 = 0.0;
    let (p1, p2) = (ann.pickup_frame, ann.place_frame);
    let mut pairs = Vec::new();
    if p1 > 0 {
        pairs.push((p1 - 1, p1));
    }
    if p2 + 1 < clip.len() {
        pairs.push((p2, p2 + 1));
    }
    for (a, b) in pairs {
        worst = worst.max((pos(a)? - pos(b)?).norm());
    }
    Some(worst)
}

fn sub_clip(clip: &MotionClip, from: usize, to: usize, subset: SubsetLabel) -> MotionClip {
    MotionClip {
        id: format!("{}_{}", clip.id, subset.as_str()),
        subset,
        fps: clip.fps,
        frames: clip.frames[from..=to].to_vec(),
    }
}

/// Splits into pickUp `[0, φ1]`, carryWith `[φ1, φ2]` and putDown
/// `[φ2, len − 1]`; neighbours share their boundary frame.
pub fn split_subsets(
    clip: &MotionClip,
    ann: &ContactAnnotation,
) -> Result<[MotionClip; 3], AnnotationError> {
    check_clip(clip)?;
    ann.validate(clip.len())?;
    let (p1, p2, end) = (ann.pickup_frame, ann.place_frame, clip.len() - 1);
    Ok([
        sub_clip(clip, 0, p1, SubsetLabel::PickUp),
        sub_clip(clip, p1, p2, SubsetLabel::CarryWith),
        sub_clip(clip, p2, end, SubsetLabel::PutDown),
    ])
}

/// Inverse of [`split_subsets`]: concatenates, dropping shared boundary frames.
pub fn reassemble(parts: &[MotionClip]) -> Vec<MotionFrame> {
    let mut out: Vec<MotionFrame> = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        let skip = usize::from(i > 0);
        out.extend(p.frames.iter().skip(skip).cloned());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn clip_from(values: &[f64]) -> MotionClip {
        MotionClip {
            id: "c".into(),
            subset: SubsetLabel::CarryWith,
            fps: 30.0,
            frames: values
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let mut f = MotionFrame::standing(Pose::from_xyz_yaw(
                        0.1 * i as f64,
                        0.0,
                        0.75,
                        0.02 * i as f64,
                    ));
                    f.joint_pos[0] = *v;
                    f.ee_pos[0] = Vec3::new(0.3, 0.2, 0.05 + 0.01 * i as f64);
                    f.ee_pos[1] = Vec3::new(0.3, -0.2, 0.05 + 0.01 * i as f64);
                    f
                })
                .collect(),
        }
    }

    #[test]
    fn window_one_is_identity() {
        let c = clip_from(&[1.0, -2.0, 3.0, 0.5]);
        assert_eq!(smooth_motion(&c, 1).unwrap(), c);
    }

    #[test]
    fn constant_signal_unchanged() {
        let c = clip_from(&[0.7; 9]);
        let s = smooth_motion(&c, 5).unwrap();
        assert!(s
            .frames
            .iter()
            .all(|f| (f.joint_pos[0] - 0.7).abs() < 1e-15));
    }

    #[test]
    fn alternating_signal() {
        let vals: Vec<f64> = (0..8)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let s = smooth_motion(&clip_from(&vals), 3).unwrap();
        assert_eq!(s.frames[0].joint_pos[0], 1.0);
        for i in 1..7 {
            // Two neighbours of opposite sign: (−v + v − v) / 3 = −v / 3.
            assert_abs_diff_eq!(s.frames[i].joint_pos[0], -vals[i] / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn smoothing_rotation_stays_orthonormal() {
        let s = smooth_motion(&clip_from(&[0.0; 7]), 3).unwrap();
        assert_abs_diff_eq!(
            crate::se3::yaw_of(&s.frames[3].base_pose.rotation),
            0.06,
            epsilon = 1e-12
        );
    }

    #[test]
    fn smoothing_errors() {
        let c = clip_from(&[0.0; 4]);
        assert_eq!(smooth_motion(&c, 2), Err(AnnotationError::BadWindow(2)));
        assert_eq!(smooth_motion(&c, 0), Err(AnnotationError::BadWindow(0)));
        assert_eq!(
            smooth_motion(&c, 5),
            Err(AnnotationError::WindowTooLong { window: 5, len: 4 })
        );
    }

    #[test]
    fn hand_midpoint_rule() {
        let mut c = clip_from(&[0.0; 6]);
        c.frames[2].base_pose = Pose::identity();
        c.frames[2].ee_pos[0] = Vec3::new(0.3, 0.2, 0.8);
        c.frames[2].ee_pos[1] = Vec3::new(0.3, -0.2, 0.8);
        let a = annotate_object(&c, &ContactAnnotation::new(1, 4)).unwrap();
        assert_abs_diff_eq!(
            a.frames[2].object.unwrap().position,
            Vec3::new(0.3, 0.0, 0.8),
            epsilon = 1e-15
        );
    }

    #[test]
    fn fixed_outside_contact_span() {
        let c = clip_from(&[0.0; 10]);
        let ann = ContactAnnotation::new(3, 6);
        let a = annotate_object(&c, &ann).unwrap();
        for t in 0..3 {
            assert_eq!(a.frames[t].object, a.frames[3].object);
        }
        for t in 7..10 {
            assert_eq!(a.frames[t].object, a.frames[6].object);
        }
        assert_eq!(contact_discontinuity(&a, &ann), Some(0.0));
        assert_eq!(annotate_object(&a, &ann).unwrap(), a);
        let yaw = crate::se3::yaw_of(&a.frames[4].object.unwrap().rotation);
        assert_abs_diff_eq!(yaw, 0.08, epsilon = 1e-12);
    }

    #[test]
    fn bad_contact_frames() {
        let c = clip_from(&[0.0; 10]);
        assert!(annotate_object(&c, &ContactAnnotation::new(5, 5)).is_err());
        assert!(annotate_object(&c, &ContactAnnotation::new(2, 10)).is_err());
    }

    #[test]
    fn split_lengths_and_reassembly() {
        let c = clip_from(&vec![0.0; 80]);
        let parts = split_subsets(&c, &ContactAnnotation::new(10, 50)).unwrap();
        let lens: Vec<usize> = parts.iter().map(MotionClip::len).collect();
        assert_eq!(lens, vec![11, 41, 30]);
        assert_eq!(reassemble(&parts), c.frames);
        assert_eq!(parts[1].subset, SubsetLabel::CarryWith);
        assert_eq!(parts[2].id, "c_putDown");

        let parts = split_subsets(&c, &ContactAnnotation::new(20, 21)).unwrap();
        assert_eq!(parts[1].len(), 2);
    }
}
