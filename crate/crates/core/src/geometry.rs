//! Rigid transforms and pinhole projection.
//!
//! A [`Pose`] is the world-from-camera transform `T_wc`. Projection first maps a
//! world point into the camera frame with the inverse transform, then applies a
//! single pixel-space camera matrix built from [`Intrinsics`]. Back-projection is
//! the exact inverse given the camera-frame depth.
//!
//! Camera frame convention: +z along the optical axis, +x to the right in the
//! image (increasing `u`), +y down (increasing `v`).

use nalgebra::{Matrix3, Quaternion, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minimum camera-frame depth accepted by [`world_to_pixel`].
pub const DEFAULT_EPSILON_Z: f64 = 1e-6;

const ORTHONORMAL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point is behind the camera (z_c = {z_c})")]
    BehindCamera { z_c: f64 },
    #[error("depth must be positive, got {0}")]
    NonPositiveDepth(f64),
    #[error("rotation is not a proper orthonormal matrix")]
    InvalidRotation,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
}

/// World-from-camera rigid transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Builds a pose after checking that `rotation` is orthonormal with determinant +1.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self, GeometryError> {
        if rotation.iter().chain(translation.iter()).any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite("pose"));
        }
        let gram = rotation.transpose() * rotation;
        if (gram - Matrix3::identity()).amax() > ORTHONORMAL_TOL
            || (rotation.determinant() - 1.0).abs() > ORTHONORMAL_TOL
        {
            return Err(GeometryError::InvalidRotation);
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// Pose from a translation and a scalar-last quaternion; the quaternion is normalized.
    pub fn from_translation_quaternion(
        translation: [f64; 3],
        [qx, qy, qz, qw]: [f64; 4],
    ) -> Result<Self, GeometryError> {
        let q = Quaternion::new(qw, qx, qy, qz);
        if !q.coords.iter().all(|v| v.is_finite()) || q.norm() == 0.0 {
            return Err(GeometryError::NonFinite("quaternion"));
        }
        let unit = UnitQuaternion::from_quaternion(q);
        Ok(Self::from_unit_quaternion(Vector3::from(translation), unit))
    }

    pub fn from_unit_quaternion(translation: Vector3<f64>, rotation: UnitQuaternion<f64>) -> Self {
        Self {
            rotation: *rotation.to_rotation_matrix().matrix(),
            translation,
        }
    }

    /// Rotation as a scalar-last quaternion `[qx, qy, qz, qw]`.
    pub fn quaternion(&self) -> [f64; 4] {
        let q = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(self.rotation));
        [q.i, q.j, q.k, q.w]
    }

    pub fn unit_quaternion(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(self.rotation))
    }

    /// `T⁻¹ = [Rᵀ | −Rᵀ t]`.
    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self ∘ other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Pose) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn transform(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// Camera center in the world frame.
    pub fn position(&self) -> WorldPoint {
        WorldPoint::from(self.translation)
    }
}

/// Pixel-space pinhole camera: `alpha_x = f_x / d_x`, `alpha_y = f_y / d_y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub alpha_x: f64,
    pub alpha_y: f64,
    pub u0: f64,
    pub v0: f64,
    pub width: u32,
    pub height: u32,
}

impl Intrinsics {
    pub fn new(
        alpha_x: f64,
        alpha_y: f64,
        u0: f64,
        v0: f64,
        width: u32,
        height: u32,
    ) -> Result<Self, GeometryError> {
        let intr = Self {
            alpha_x,
            alpha_y,
            u0,
            v0,
            width,
            height,
        };
        intr.validate()?;
        Ok(intr)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.alpha_x.is_finite() && self.alpha_y.is_finite())
            || self.alpha_x <= 0.0
            || self.alpha_y <= 0.0
        {
            return Err(GeometryError::InvalidIntrinsics(
                "focal scales must be positive".into(),
            ));
        }
        if self.width == 0 || self.height == 0 {
            return Err(GeometryError::InvalidIntrinsics(
                "image size must be positive".into(),
            ));
        }
        if !(0.0..f64::from(self.width)).contains(&self.u0)
            || !(0.0..f64::from(self.height)).contains(&self.v0)
        {
            return Err(GeometryError::InvalidIntrinsics(
                "principal point outside the image".into(),
            ));
        }
        Ok(())
    }

    /// The 3×3 camera matrix `K`.
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.alpha_x, 0.0, self.u0, //
            0.0, self.alpha_y, self.v0, //
            0.0, 0.0, 1.0,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct PixelPoint {
    pub u: f64,
    pub v: f64,
}

impl PixelPoint {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }
}

impl From<[f64; 2]> for PixelPoint {
    fn from([u, v]: [f64; 2]) -> Self {
        Self { u, v }
    }
}

impl From<PixelPoint> for [f64; 2] {
    fn from(p: PixelPoint) -> Self {
        [p.u, p.v]
    }
}

/// A point in the world frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct WorldPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl WorldPoint {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn coords(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn distance(&self, other: &WorldPoint) -> f64 {
        (self.coords() - other.coords()).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<Vector3<f64>> for WorldPoint {
    fn from(v: Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }
}

impl From<[f64; 3]> for WorldPoint {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Self { x, y, z }
    }
}

impl From<WorldPoint> for [f64; 3] {
    fn from(p: WorldPoint) -> Self {
        [p.x, p.y, p.z]
    }
}

/// The four corners of a detected text box, in detection order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuadBox(pub [PixelPoint; 4]);

impl QuadBox {
    pub fn corners(&self) -> &[PixelPoint; 4] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.u.is_finite() && c.v.is_finite())
    }
}

impl From<[[f64; 2]; 4]> for QuadBox {
    fn from(c: [[f64; 2]; 4]) -> Self {
        QuadBox(c.map(PixelPoint::from))
    }
}

/// Projects a world point. Returns the pixel and the camera-frame depth `z_c`.
pub fn world_to_pixel(
    pose: &Pose,
    intr: &Intrinsics,
    p: &WorldPoint,
) -> Result<(PixelPoint, f64), GeometryError> {
    world_to_pixel_eps(pose, intr, p, DEFAULT_EPSILON_Z)
}

pub fn world_to_pixel_eps(
    pose: &Pose,
    intr: &Intrinsics,
    p: &WorldPoint,
    epsilon_z: f64,
) -> Result<(PixelPoint, f64), GeometryError> {
    let pc = pose.inverse().transform(&p.coords());
    if !(pc.z > epsilon_z) {
        return Err(GeometryError::BehindCamera { z_c: pc.z });
    }
    let u = intr.alpha_x * pc.x / pc.z + intr.u0;
    let v = intr.alpha_y * pc.y / pc.z + intr.v0;
    Ok((PixelPoint::new(u, v), pc.z))
}

/// Back-projects a pixel at camera-frame depth `depth` into the world frame.
pub fn pixel_to_world(
    pose: &Pose,
    intr: &Intrinsics,
    px: &PixelPoint,
    depth: f64,
) -> Result<WorldPoint, GeometryError> {
    if !(depth > 0.0) {
        return Err(GeometryError::NonPositiveDepth(depth));
    }
    let pc = Vector3::new(
        depth * (px.u - intr.u0) / intr.alpha_x,
        depth * (px.v - intr.v0) / intr.alpha_y,
        depth,
    );
    Ok(WorldPoint::from(pose.transform(&pc)))
}

/// Mean of the four corners.
pub fn box_center(quad: &QuadBox) -> PixelPoint {
    let (su, sv) = quad
        .0
        .iter()
        .fold((0.0, 0.0), |(su, sv), c| (su + c.u, sv + c.v));
    PixelPoint::new(su / 4.0, sv / 4.0)
}

/// True when every corner lies at least `margin` pixels inside the image border.
pub fn border_filter(quad: &QuadBox, intr: &Intrinsics, margin: f64) -> bool {
    let (w, h) = (f64::from(intr.width), f64::from(intr.height));
    quad.0
        .iter()
        .all(|c| margin <= c.u && c.u <= w - margin && margin <= c.v && c.v <= h - margin)
}
