mod support;

use std::f64::consts::PI;

use hsi_core::episode_init::MotionDataset;
use hsi_core::experiment::synthetic_carry_clip;
use hsi_core::se3::{compose, inverse, rot_from_6d, rot_to_6d, wrap_angle, Pose, Rotation, Vec3};
use hsi_core::task_kernels::{
    build_disc_obs, build_proprio, r_carry, r_put, r_sit, RobotState, SceneState,
};
use proptest::prelude::*;
use support::{inv, m4, max_abs_diff, mul, of_pose, quat_rows};

fn pose() -> impl Strategy<Value = Pose> {
    (
        prop::array::uniform4(-1.0f64..1.0),
        prop::array::uniform3(-20.0f64..20.0),
    )
        .prop_filter("degenerate quaternion", |(q, _)| {
            q.iter().map(|v| v * v).sum::<f64>() > 1e-2
        })
        .prop_map(|(q, p)| {
            let r = Rotation::from_rows(quat_rows(q[0], q[1], q[2], q[3])).unwrap();
            Pose::new(Vec3::new(p[0], p[1], p[2]), r)
        })
}

/// Rotates every world-frame input of a scene about +z through the origin.
fn spin(p: &Pose, yaw: f64) -> Pose {
    compose(&Pose::new(Vec3::zeros(), Rotation::yaw(yaw)), p)
}

proptest! {
    #[test]
    fn compose_and_inverse_match_matrix_oracle(a in pose(), b in pose()) {
        let ab = of_pose(&compose(&a, &b));
        prop_assert!(max_abs_diff(&ab, &mul(&of_pose(&a), &of_pose(&b))) < 1e-9);
        prop_assert!(max_abs_diff(&of_pose(&inverse(&a)), &inv(&of_pose(&a))) < 1e-9);
    }

    #[test]
    fn six_d_round_trip(a in pose()) {
        let back = rot_from_6d(&rot_to_6d(&a.rotation)).unwrap();
        prop_assert!(max_abs_diff(&m4(back.to_rows(), [0.0; 3]), &m4(a.rotation.to_rows(), [0.0; 3])) < 1e-12);
    }

    #[test]
    fn wrap_angle_range(a in -1e3f64..1e3) {
        let w = wrap_angle(a);
        prop_assert!(w > -PI && w <= PI);
        let k = (a - w) / (2.0 * PI);
        prop_assert!((k - k.round()).abs() < 1e-9);
    }

    #[test]
    fn rewards_ignore_world_yaw(
        base in (-2.0f64..2.0, -2.0f64..2.0, 0.3f64..1.0, -PI..PI),
        obj in (-2.0f64..2.0, -2.0f64..2.0, 0.0f64..1.0, -PI..PI),
        goal in prop::array::uniform3(-2.0f64..2.0),
        yaw in -PI..PI,
    ) {
        let b = Pose::from_xyz_yaw(base.0, base.1, base.2, base.3);
        let o = Pose::from_xyz_yaw(obj.0, obj.1, obj.2, obj.3);
        let g = Vec3::new(goal[0], goal[1], goal[2].abs());
        let bbox = Vec3::new(0.3, 0.3, 0.2);

        let s = RobotState::from_world(b, Vec3::new(0.3, 0.1, 0.0), Vec3::new(0.0, 0.0, 0.2));
        let scene = SceneState::from_world(&s, o, g, bbox);
        let r = Rotation::yaw(yaw);
        let s2 = RobotState::from_world(spin(&b, yaw), r.apply(&Vec3::new(0.3, 0.1, 0.0)), Vec3::new(0.0, 0.0, 0.2));
        let scene2 = SceneState::from_world(&s2, spin(&o, yaw), r.apply(&g), bbox);

        for (x, y) in [
            (r_carry(&s, &scene), r_carry(&s2, &scene2)),
            (r_put(&s, &scene), r_put(&s2, &scene2)),
            (r_sit(&s, &scene), r_sit(&s2, &scene2)),
        ] {
            prop_assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
        let (p, p2) = (build_proprio(&s).unwrap(), build_proprio(&s2).unwrap());
        let (d, d2) = (build_disc_obs(&s, &scene).unwrap(), build_disc_obs(&s2, &scene2).unwrap());
        for (u, v) in p.as_slice().iter().zip(p2.as_slice()).chain(d.as_slice().iter().zip(d2.as_slice())) {
            prop_assert!((u - v).abs() < 1e-9);
        }
    }
}

#[test]
fn dataset_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("clips.json");
    let ds = MotionDataset::new(vec![
        synthetic_carry_clip("a", 20, 1),
        synthetic_carry_clip("b", 7, 2),
    ]);
    ds.save(&path).unwrap();
    assert_eq!(MotionDataset::load(&path).unwrap(), ds);
}
