//! Rigid-body transform algebra.
//!
//! Poses are stored as a position plus a validated rotation matrix and compose
//! like 4×4 homogeneous matrices: `a.compose(&b)` is `A·B`, i.e. `b` expressed
//! in the frame of `a`. The body frame convention is +x forward, +y left,
//! +z up; planar headings are the horizontal projection of the +x column.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Position or direction in 3D, meters when used as a position.
pub type Vec3 = Vector3<f64>;

/// Orthonormality / determinant tolerance for validated rotations.
pub const ROTATION_TOLERANCE: f64 = 1e-9;

/// Below this horizontal norm the forward axis counts as vertical.
pub const VERTICAL_AXIS_TOLERANCE: f64 = 1e-6;

/// Body axis treated as "forward" when extracting planar headings.
pub const FORWARD_AXIS: usize = 0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Se3Error {
    #[error("matrix is not a rotation: orthonormality residual {residual:e}, det {det}")]
    NotARotation { residual: f64, det: f64 },
    #[error("non-finite component in {0}")]
    NonFinite(&'static str),
    #[error("degenerate 6D rotation columns (zero length or parallel)")]
    Degenerate6D,
    #[error("zero-length heading vector")]
    ZeroHeading,
    #[error("forward axis is vertical; heading undefined")]
    VerticalForwardAxis,
}

/// A proper rotation matrix (RᵀR = I, det = +1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Validates orthonormality and handedness within [`ROTATION_TOLERANCE`].
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self, Se3Error> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Se3Error::NonFinite("rotation"));
        }
        let residual = (m.transpose() * m - Matrix3::identity()).abs().max();
        let det = m.determinant();
        if residual > ROTATION_TOLERANCE || (det - 1.0).abs() > ROTATION_TOLERANCE {
            return Err(Se3Error::NotARotation { residual, det });
        }
        Ok(Self(m))
    }

    /// Row-major constructor, validated.
    pub fn from_rows(rows: [[f64; 3]; 3]) -> Result<Self, Se3Error> {
        Self::from_matrix(Matrix3::from_fn(|r, c| rows[r][c]))
    }

    /// Rotation about +x by `angle` radians.
    pub fn roll(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
    }

    /// Rotation about +y by `angle` radians. Positive pitch tips +x downward.
    pub fn pitch(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c))
    }

    /// Rotation about +z by `angle` radians.
    pub fn yaw(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    /// `yaw(y) · pitch(p) · roll(r)`.
    pub fn from_rpy(roll: f64, pitch: f64, yaw: f64) -> Self {
        Self::yaw(yaw) * Self::pitch(pitch) * Self::roll(roll)
    }

    /// Rodrigues' formula for a rotation vector (axis × angle, radians).
    pub fn from_rotation_vector(v: Vec3) -> Self {
        let angle = v.norm();
        if angle == 0.0 {
            return Self::identity();
        }
        let k = v / angle;
        let kx = Matrix3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
        Self(Matrix3::identity() + kx * angle.sin() + kx * kx * (1.0 - angle.cos()))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn column(&self, i: usize) -> Vec3 {
        self.0.column(i).into_owned()
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    /// Geodesic angle to `other`, radians in [0, π].
    pub fn angle_to(&self, other: &Rotation) -> f64 {
        let rel = self.0.transpose() * other.0;
        ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
    }

    pub fn to_6d(&self) -> Rot6D {
        rot_to_6d(self)
    }

    pub fn to_rows(&self) -> [[f64; 3]; 3] {
        let m = &self.0;
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    }
}

impl Default for Rotation {
    fn default() -> Self {
        Self::identity()
    }
}

impl std::ops::Mul for Rotation {
    type Output = Rotation;

    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl Serialize for Rotation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rotation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = <[[f64; 3]; 3]>::deserialize(d)?;
        Rotation::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// Rigid transform: maps child-frame coordinates into the parent frame.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    pub rotation: Rotation,
}

impl Pose {
    pub fn new(position: Vec3, rotation: Rotation) -> Self {
        Self { position, rotation }
    }

    pub fn identity() -> Self {
        Self::new(Vec3::zeros(), Rotation::identity())
    }

    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Self::new(Vec3::new(x, y, z), Rotation::identity())
    }

    /// Planar pose: position `(x, y, z)` and heading `yaw`.
    pub fn from_xyz_yaw(x: f64, y: f64, z: f64, yaw: f64) -> Self {
        Self::new(Vec3::new(x, y, z), Rotation::yaw(yaw))
    }

    /// Homogeneous product `self · other`.
    pub fn compose(&self, other: &Pose) -> Pose {
        compose(self, other)
    }

    pub fn inverse(&self) -> Pose {
        inverse(self)
    }

    /// Maps a point from this pose's child frame into its parent frame.
    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation.apply(p) + self.position
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.rotation.matrix().iter().all(|v| v.is_finite())
    }

    /// Row-major 4×4 homogeneous matrix.
    pub fn to_homogeneous(&self) -> [[f64; 4]; 4] {
        let r = self.rotation.to_rows();
        let p = self.position;
        [
            [r[0][0], r[0][1], r[0][2], p.x],
            [r[1][0], r[1][1], r[1][2], p.y],
            [r[2][0], r[2][1], r[2][2], p.z],
            [0.0, 0.0, 0.0, 1.0],
        ]
    }

    /// Largest absolute entry difference of the homogeneous matrices.
    pub fn max_abs_diff(&self, other: &Pose) -> f64 {
        let a = self.to_homogeneous();
        let b = other.to_homogeneous();
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for Pose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.position;
        let yaw = {
            let m = self.rotation.matrix();
            m[(1, 0)].atan2(m[(0, 0)])
        };
        write!(
            f,
            "Pose(p: [{:.4}, {:.4}, {:.4}], yaw: {:.2}°)",
            p.x,
            p.y,
            p.z,
            yaw.to_degrees()
        )
    }
}

pub fn compose(a: &Pose, b: &Pose) -> Pose {
    Pose {
        position: a.rotation.apply(&b.position) + a.position,
        rotation: a.rotation * b.rotation,
    }
}

pub fn inverse(a: &Pose) -> Pose {
    let rt = a.rotation.transpose();
    Pose {
        position: -rt.apply(&a.position),
        rotation: rt,
    }
}

/// Builds a transform from position and orientation. The fields are stored
/// verbatim so `from_transform(to_transform(p, r)) == (p, r)` bit-for-bit.
pub fn to_transform(position: Vec3, rotation: Rotation) -> Pose {
    Pose { position, rotation }
}

pub fn from_transform(t: &Pose) -> (Vec3, Rotation) {
    (t.position, t.rotation)
}

/// First two rotation-matrix columns, `[c0.x, c0.y, c0.z, c1.x, c1.y, c1.z]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rot6D(pub [f64; 6]);

impl Rot6D {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn rot_to_6d(r: &Rotation) -> Rot6D {
    let m = r.matrix();
    Rot6D([
        m[(0, 0)],
        m[(1, 0)],
        m[(2, 0)],
        m[(0, 1)],
        m[(1, 1)],
        m[(2, 1)],
    ])
}

/// Gram–Schmidt: normalize column 0, strip its component from column 1 and
/// normalize, then complete with the cross product.
pub fn rot_from_6d(v: &Rot6D) -> Result<Rotation, Se3Error> {
    const MIN_NORM: f64 = 1e-9;
    if v.0.iter().any(|x| !x.is_finite()) {
        return Err(Se3Error::NonFinite("6D rotation"));
    }
    let a = Vec3::new(v.0[0], v.0[1], v.0[2]);
    let b = Vec3::new(v.0[3], v.0[4], v.0[5]);
    let a_norm = a.norm();
    if a_norm < MIN_NORM {
        return Err(Se3Error::Degenerate6D);
    }
    let c0 = a / a_norm;
    let b_perp = b - c0 * c0.dot(&b);
    let b_norm = b_perp.norm();
    // Relative test so scaled inputs behave the same.
    if b_norm < MIN_NORM * b.norm().max(1.0) || b_norm < MIN_NORM {
        return Err(Se3Error::Degenerate6D);
    }
    let c1 = b_perp / b_norm;
    let c2 = c0.cross(&c1);
    Ok(Rotation(Matrix3::from_columns(&[c0, c1, c2])))
}

/// Unit vector in the horizontal plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Heading2D {
    x: f64,
    y: f64,
}

impl Heading2D {
    /// Normalizes `(x, y)`; rejects zero-length and non-finite input.
    pub fn new(x: f64, y: f64) -> Result<Self, Se3Error> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Se3Error::NonFinite("heading"));
        }
        let n = x.hypot(y);
        if n == 0.0 {
            return Err(Se3Error::ZeroHeading);
        }
        Ok(Self { x: x / n, y: y / n })
    }

    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self { x: c, y: s }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn angle(&self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Rotated +90° counter-clockwise.
    pub fn perpendicular(&self) -> Self {
        Self {
            x: -self.y,
            y: self.x,
        }
    }

    pub fn dot_xy(&self, v: &Vec3) -> f64 {
        self.x * v.x + self.y * v.y
    }
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// `atan2(a) − atan2(b)` wrapped into (−π, π].
pub fn yaw_error(a: &Heading2D, b: &Heading2D) -> f64 {
    wrap_angle(a.angle() - b.angle())
}

/// Normalized horizontal projection of the body forward (+x) axis.
pub fn heading_of(pose: &Pose) -> Result<Heading2D, Se3Error> {
    heading_of_rotation(&pose.rotation)
}

pub fn heading_of_rotation(r: &Rotation) -> Result<Heading2D, Se3Error> {
    let f = r.column(FORWARD_AXIS);
    if f.x.hypot(f.y) < VERTICAL_AXIS_TOLERANCE {
        return Err(Se3Error::VerticalForwardAxis);
    }
    Heading2D::new(f.x, f.y)
}

/// Heading that stays defined when the body pitches through vertical
/// (lying down): falls back to the projection of ∓z, chosen so the result is
/// continuous with the forward-axis projection on both sides of ±90° pitch.
pub fn heading_or_fallback(r: &Rotation) -> Heading2D {
    if let Ok(h) = heading_of_rotation(r) {
        return h;
    }
    let f = r.column(FORWARD_AXIS);
    let up = r.column(2);
    let alt = if f.z > 0.0 { -up } else { up };
    Heading2D::new(alt.x, alt.y).unwrap_or_else(|_| Heading2D::from_angle(0.0))
}

/// Yaw angle of a rotation's heading (with fallback), radians.
pub fn yaw_of(r: &Rotation) -> f64 {
    heading_or_fallback(r).angle()
}
