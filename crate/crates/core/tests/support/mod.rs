//! Independent oracles for the integration tests: plain 4×4 homogeneous
//! matrices with a general Gauss–Jordan inverse, and random rotations built
//! from unit quaternions. Nothing here calls the library's algebra.

#![allow(dead_code)]

use hsi_core::se3::{Pose, Rotation, Vec3};
use rand::Rng;

pub type M4 = [[f64; 4]; 4];

pub const IDENTITY: M4 = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

pub fn m4(rows: [[f64; 3]; 3], p: [f64; 3]) -> M4 {
    let mut m = IDENTITY;
    for i in 0..3 {
        m[i][..3].copy_from_slice(&rows[i]);
        m[i][3] = p[i];
    }
    m
}

/// Reads a pose's raw entries into a matrix.
pub fn of_pose(p: &Pose) -> M4 {
    m4(
        p.rotation.to_rows(),
        [p.position.x, p.position.y, p.position.z],
    )
}

pub fn mul(a: &M4, b: &M4) -> M4 {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

/// General inverse by Gauss–Jordan elimination with partial pivoting.
pub fn inv(m: &M4) -> M4 {
    let mut a = *m;
    let mut out = IDENTITY;
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        assert!(a[pivot][col].abs() > 1e-12, "singular matrix");
        a.swap(col, pivot);
        out.swap(col, pivot);
        let d = a[col][col];
        for j in 0..4 {
            a[col][j] /= d;
            out[col][j] /= d;
        }
        for r in 0..4 {
            if r != col {
                let f = a[r][col];
                for j in 0..4 {
                    a[r][j] -= f * a[col][j];
                    out[r][j] -= f * out[col][j];
                }
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &M4, b: &M4) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((a[i][j] - b[i][j]).abs());
        }
    }
    worst
}

pub fn translation(m: &M4) -> [f64; 3] {
    [m[0][3], m[1][3], m[2][3]]
}

pub fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Rotation rows of the unit quaternion `(w, x, y, z)`.
pub fn quat_rows(w: f64, x: f64, y: f64, z: f64) -> [[f64; 3]; 3] {
    let n = (w * w + x * x + y * y + z * z).sqrt();
    let (w, x, y, z) = (w / n, x / n, y / n, z / n);
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

pub fn random_rows<R: Rng>(rng: &mut R) -> [[f64; 3]; 3] {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n2: f64 = q.iter().map(|v| v * v).sum();
        if n2 > 1e-3 && n2 <= 1.0 {
            return quat_rows(q[0], q[1], q[2], q[3]);
        }
    }
}

pub fn random_pose<R: Rng>(rng: &mut R, extent: f64) -> Pose {
    let rows = random_rows(rng);
    let p = Vec3::new(
        rng.random_range(-extent..extent),
        rng.random_range(-extent..extent),
        rng.random_range(-extent..extent),
    );
    Pose::new(
        p,
        Rotation::from_rows(rows).expect("quaternion rows are a rotation"),
    )
}
