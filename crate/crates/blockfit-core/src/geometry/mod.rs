//! Foundational geometry: points, clouds, meshes, rigid transforms, spatial
//! indices and the rigid-alignment solver everything downstream builds on.
//!
//! All lengths are millimetres. All types are immutable after construction
//! and safe to share across threads.

mod cloud;
mod collide;
mod icosphere;
mod kabsch;
mod kdtree;
mod mesh;

pub use cloud::{estimate_normals, NormalEstimate, PointCloud};
pub use collide::{
    mesh_collides, mesh_distance, mesh_distance_bounded, triangle_distance, CONTACT_EPS,
};
pub use icosphere::{farthest_point_subsample, icosphere, icosphere_vertex_count};
pub use kabsch::kabsch_align;
pub use kdtree::{kdtree_nn, KdTree};
pub use mesh::{cuboid_mesh, Aabb, RayHit, TriangleMesh, RAY_EPS};

use nalgebra as na;
use thiserror::Error;

pub type Point3 = na::Point3<f64>;
pub type Vector3 = na::Vector3<f64>;
pub type Matrix3 = na::Matrix3<f64>;

/// Orthonormality tolerance for rotation matrices (Frobenius norm).
pub const ROTATION_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("too few points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("empty index")]
    EmptyIndex,
    #[error("invalid argument: {0}")]
    InvalidArg(String),
    #[error("empty mesh")]
    EmptyMesh,
    #[error("matrix is not a rotation (R·Rᵀ ≠ I or det ≠ +1)")]
    NotARotation,
    #[error("normals missing from cloud")]
    MissingNormals,
}

/// Rigid transform in SE(3): `p ↦ R·p + t`, rotation stored as an
/// orthonormal matrix (det = +1), translation in millimetres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Matrix3,
    translation: Vector3,
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Builds a transform, validating that `rotation` is orthonormal with
    /// det = +1 within [`ROTATION_TOL`].
    pub fn new(rotation: Matrix3, translation: Vector3) -> Result<Self, GeometryError> {
        let gram = rotation * rotation.transpose();
        let err = (gram - Matrix3::identity()).norm();
        if err > ROTATION_TOL || (rotation.determinant() - 1.0).abs() > ROTATION_TOL {
            return Err(GeometryError::NotARotation);
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// Skips validation. For internal construction from already-orthonormal
    /// factors (compositions, axis-angle, Kabsch output).
    pub fn from_parts_unchecked(rotation: Matrix3, translation: Vector3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn from_translation(translation: Vector3) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    /// Rotation about a unit axis by `angle` radians (Rodrigues).
    pub fn from_axis_angle(axis: &Vector3, angle: f64) -> Self {
        let rotation = na::Rotation3::from_axis_angle(&na::Unit::new_normalize(*axis), angle);
        Self {
            rotation: rotation.into_inner(),
            translation: Vector3::zeros(),
        }
    }

    pub fn rotation(&self) -> &Matrix3 {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3 {
        &self.translation
    }

    pub fn apply_point(&self, p: &Point3) -> Point3 {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn apply_vector(&self, v: &Vector3) -> Vector3 {
        self.rotation * v
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Angle in radians of the relative rotation `self · otherᵀ`.
    pub fn rotation_angle_to(&self, other: &Self) -> f64 {
        let rel = self.rotation * other.rotation.transpose();
        let c = ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        c.acos()
    }

    pub fn translation_distance_to(&self, other: &Self) -> f64 {
        (self.translation - other.translation).norm()
    }

    /// Row-major 4×4 homogeneous matrix, the wire format for all JSON frames.
    pub fn to_row_major(&self) -> [f64; 16] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[(0, 0)],
            r[(0, 1)],
            r[(0, 2)],
            t.x,
            r[(1, 0)],
            r[(1, 1)],
            r[(1, 2)],
            t.y,
            r[(2, 0)],
            r[(2, 1)],
            r[(2, 2)],
            t.z,
            0.0,
            0.0,
            0.0,
            1.0,
        ]
    }

    pub fn from_row_major(m: &[f64; 16]) -> Result<Self, GeometryError> {
        let rotation = Matrix3::new(m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10]);
        let translation = Vector3::new(m[3], m[7], m[11]);
        if m[12] != 0.0 || m[13] != 0.0 || m[14] != 0.0 || m[15] != 1.0 {
            return Err(GeometryError::InvalidArg(
                "bottom row of a rigid 4x4 must be [0 0 0 1]".into(),
            ));
        }
        Self::new(rotation, translation)
    }
}

impl serde::Serialize for RigidTransform {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_row_major().serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for RigidTransform {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m = <[f64; 16]>::deserialize(d)?;
        Self::from_row_major(&m).map_err(serde::de::Error::custom)
    }
}

/// Oriented plane `{p : n·p = offset}` with unit normal, offset in mm.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Plane {
    pub normal: Vector3,
    pub offset: f64,
}

impl Plane {
    pub fn new(normal: Vector3, offset: f64) -> Result<Self, GeometryError> {
        let n = normal.norm();
        if (n - 1.0).abs() > 1e-9 {
            return Err(GeometryError::InvalidArg("plane normal must be unit".into()));
        }
        Ok(Self { normal, offset })
    }

    /// Plane through three points; normal direction from the winding.
    pub fn from_points(a: &Point3, b: &Point3, c: &Point3) -> Result<Self, GeometryError> {
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        if len < 1e-12 {
            return Err(GeometryError::DegenerateConfiguration(
                "collinear points define no plane".into(),
            ));
        }
        let normal = n / len;
        Ok(Self {
            normal,
            offset: normal.dot(&a.coords),
        })
    }

    pub fn signed_distance(&self, p: &Point3) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }

    /// Same plane with the normal pointing toward `p`.
    pub fn oriented_toward(&self, p: &Point3) -> Self {
        if self.signed_distance(p) < 0.0 {
            Self {
                normal: -self.normal,
                offset: -self.offset,
            }
        } else {
            *self
        }
    }
}

/// Deterministic unit vector orthogonal to `v` (assumed unit).
pub fn any_orthonormal(v: &Vector3) -> Vector3 {
    // Cross with the axis v is least aligned with.
    let a = v.x.abs();
    let b = v.y.abs();
    let c = v.z.abs();
    let axis = if a <= b && a <= c {
        Vector3::x()
    } else if b <= c {
        Vector3::y()
    } else {
        Vector3::z()
    };
    v.cross(&axis).normalize()
}

/// Rotation taking unit vector `from` onto unit vector `to`.
pub fn rotation_between(from: &Vector3, to: &Vector3) -> Matrix3 {
    let c = from.dot(to).clamp(-1.0, 1.0);
    let axis = from.cross(to);
    let s = axis.norm();
    if s < 1e-12 {
        if c > 0.0 {
            return Matrix3::identity();
        }
        // Antiparallel: rotate π about any orthogonal axis.
        let a = any_orthonormal(from);
        return na::Rotation3::from_axis_angle(&na::Unit::new_normalize(a), std::f64::consts::PI)
            .into_inner();
    }
    na::Rotation3::from_axis_angle(&na::Unit::new_normalize(axis), s.atan2(c)).into_inner()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_rotation(rng: &mut impl Rng) -> Matrix3 {
        let axis = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        if axis.norm() < 1e-6 {
            return Matrix3::identity();
        }
        na::Rotation3::from_axis_angle(&na::Unit::new_normalize(axis), angle).into_inner()
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let t = RigidTransform::from_parts_unchecked(
                random_rotation(&mut rng),
                Vector3::new(
                    rng.gen_range(-500.0..500.0),
                    rng.gen_range(-500.0..500.0),
                    rng.gen_range(-500.0..500.0),
                ),
            );
            let id = t.compose(&t.inverse());
            assert!((id.rotation - Matrix3::identity()).norm() < 1e-9);
            assert!(id.translation.norm() < 1e-9);
        }
    }

    #[test]
    fn row_major_round_trip() {
        let t = RigidTransform::from_axis_angle(&Vector3::new(1.0, 2.0, 0.5), 0.7)
            .compose(&RigidTransform::from_translation(Vector3::new(13.0, -7.0, 250.0)));
        let u = RigidTransform::from_row_major(&t.to_row_major()).unwrap();
        assert!((t.rotation - u.rotation).norm() < 1e-12);
        assert!((t.translation - u.translation).norm() < 1e-12);
    }

    #[test]
    fn new_rejects_non_rotation() {
        let m = Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0);
        assert!(matches!(
            RigidTransform::new(m, Vector3::zeros()),
            Err(GeometryError::NotARotation)
        ));
        let m = Matrix3::identity() * 2.0;
        assert!(RigidTransform::new(m, Vector3::zeros()).is_err());
    }

    #[test]
    fn rotation_between_maps_from_onto_to() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
            .normalize();
            let b = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
            .normalize();
            let r = rotation_between(&a, &b);
            assert_relative_eq!((r * a).dot(&b), 1.0, epsilon = 1e-9);
        }
        // Antiparallel edge case.
        let r = rotation_between(&Vector3::z(), &(-Vector3::z()));
        assert_relative_eq!((r * Vector3::z()).dot(&-Vector3::z()), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn plane_orientation_and_distance() {
        let p = Plane::new(Vector3::z(), 10.0).unwrap();
        assert_relative_eq!(p.signed_distance(&Point3::new(0.0, 0.0, 25.0)), 15.0);
        let flipped = p.oriented_toward(&Point3::new(0.0, 0.0, -100.0));
        assert!(flipped.signed_distance(&Point3::new(0.0, 0.0, -100.0)) > 0.0);
        assert_relative_eq!(flipped.signed_distance(&Point3::new(0.0, 0.0, 10.0)), 0.0);
    }
}
