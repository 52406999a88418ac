//! Extrinsic geometry of S2 x R inside R^4.
//!
//! Points carry coordinates (x, y, z, t) with x^2 + y^2 + z^2 = 1. All inner
//! products are the Euclidean R^4 product, which restricts to the product
//! metric on S2 x R. The module also evaluates the two families of Killing
//! fields used throughout the crate (fiber translations and sphere rotations)
//! and the stereographic projection used for 3-space rendering.

use serde::Serialize;

use crate::error::{Error, Result};

/// Sphere-part norm may drift by this much before construction refuses to
/// renormalize.
pub const RENORM_LIMIT: f64 = 1e-9;

/// Stereographic projection rejects points this close to the north pole.
pub const POLE_TOL: f64 = 1e-9;

const BASE_MATCH_TOL: f64 = 1e-12;

/// A point of S2 x R, stored as (x, y, z, t) in R^4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmbientPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub t: f64,
}

impl AmbientPoint {
    /// Builds a point, renormalizing the sphere part when its norm is within
    /// `RENORM_LIMIT` of 1 and failing otherwise. The renormalization absorbs
    /// integration drift without masking genuinely off-manifold input.
    pub fn new(x: f64, y: f64, z: f64, t: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !n.is_finite() || (n - 1.0).abs() >= RENORM_LIMIT {
            return Err(Error::constraint(format!(
                "sphere part of ({x}, {y}, {z}, {t}) has norm {n}, expected 1"
            )));
        }
        Ok(AmbientPoint { x: x / n, y: y / n, z: z / n, t })
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.x, self.y, self.z, self.t]
    }

    /// Outward radial direction of the sphere factor, (x, y, z, 0).
    /// Tangent vectors of S2 x R are exactly the vectors orthogonal to it.
    pub fn radial(&self) -> [f64; 4] {
        [self.x, self.y, self.z, 0.0]
    }

    fn close_to(&self, other: &AmbientPoint) -> bool {
        (self.x - other.x).abs() <= BASE_MATCH_TOL
            && (self.y - other.y).abs() <= BASE_MATCH_TOL
            && (self.z - other.z).abs() <= BASE_MATCH_TOL
            && (self.t - other.t).abs() <= BASE_MATCH_TOL
    }
}

/// A vector of R^4 attached to a base point of S2 x R.
#[derive(Debug, Clone, Copy)]
pub struct AmbientVector {
    pub base: AmbientPoint,
    pub components: [f64; 4],
}

impl AmbientVector {
    pub fn new(base: AmbientPoint, components: [f64; 4]) -> Self {
        AmbientVector { base, components }
    }

    pub fn norm(&self) -> f64 {
        dot4(&self.components, &self.components).sqrt()
    }

    /// Inner product against the radial direction at the base point; zero for
    /// vectors tangent to S2 x R.
    pub fn radial_component(&self) -> f64 {
        dot4(&self.components, &self.base.radial())
    }

    pub fn is_tangent_to_manifold(&self, tol: f64) -> bool {
        self.radial_component().abs() <= tol
    }

    pub fn scaled(&self, k: f64) -> Self {
        let c = self.components;
        AmbientVector::new(self.base, [k * c[0], k * c[1], k * c[2], k * c[3]])
    }
}

/// Euclidean R^4 inner product of two vectors sharing a base point.
pub fn inner(a: &AmbientVector, b: &AmbientVector) -> Result<f64> {
    if !a.base.close_to(&b.base) {
        return Err(Error::usage(format!(
            "inner product of vectors at different base points: {:?} vs {:?}",
            a.base, b.base
        )));
    }
    Ok(dot4(&a.components, &b.components))
}

pub fn dot4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

pub fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Generalized cross product in R^4: the unique vector orthogonal to a, b, c
/// whose norm is the parallelepiped volume. Components are signed 3x3 minors.
pub fn cross4(a: &[f64; 4], b: &[f64; 4], c: &[f64; 4]) -> [f64; 4] {
    let m = |i: usize, j: usize, k: usize| -> f64 {
        a[i] * (b[j] * c[k] - b[k] * c[j]) - a[j] * (b[i] * c[k] - b[k] * c[i])
            + a[k] * (b[i] * c[j] - b[j] * c[i])
    };
    [m(1, 2, 3), -m(0, 2, 3), m(0, 1, 3), -m(0, 1, 2)]
}

/// An orthonormal pair (E1, E2) of R^3 spanning the rotation plane of a
/// general-axis rotation field, together with the spherical angles that
/// generate each vector as (cos m cos n, cos m sin n, sin m).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RotationFrame {
    pub e1: [f64; 3],
    pub e2: [f64; 3],
    pub m1: f64,
    pub n1: f64,
    pub m2: f64,
    pub n2: f64,
}

const FRAME_TOL: f64 = 1e-12;

impl RotationFrame {
    /// Frame from the four generating angles. Fails when the resulting pair
    /// is not orthonormal within 1e-12.
    pub fn from_angles(m1: f64, n1: f64, m2: f64, n2: f64) -> Result<Self> {
        let e1 = unit_from_angles(m1, n1);
        let e2 = unit_from_angles(m2, n2);
        let d = dot3(&e1, &e2);
        if d.abs() > FRAME_TOL {
            return Err(Error::constraint(format!(
                "frame vectors not orthogonal: <E1, E2> = {d}"
            )));
        }
        Ok(RotationFrame { e1, e2, m1, n1, m2, n2 })
    }

    /// Frame from explicit vectors; angles are recovered from them.
    pub fn from_vectors(e1: [f64; 3], e2: [f64; 3]) -> Result<Self> {
        for (name, e) in [("E1", &e1), ("E2", &e2)] {
            let n = dot3(e, e).sqrt();
            if (n - 1.0).abs() > FRAME_TOL {
                return Err(Error::constraint(format!("{name} has norm {n}, expected 1")));
            }
        }
        let (m1, n1) = spherical_angles(&e1);
        let (m2, n2) = spherical_angles(&e2);
        let d = dot3(&e1, &e2);
        if d.abs() > FRAME_TOL {
            return Err(Error::constraint(format!(
                "frame vectors not orthogonal: <E1, E2> = {d}"
            )));
        }
        Ok(RotationFrame { e1, e2, m1, n1, m2, n2 })
    }

    /// Rotation axis E1 x E2. The field below rotates about this direction.
    pub fn axis(&self) -> [f64; 3] {
        cross3(&self.e1, &self.e2)
    }

    /// A frame is canonical when its axis is (0, 0, 1), i.e. the field equals
    /// the z-axis rotation field.
    pub fn is_canonical(&self, tol: f64) -> bool {
        let ax = self.axis();
        ax[0].abs() <= tol && ax[1].abs() <= tol && (ax[2] - 1.0).abs() <= tol
    }
}

pub fn unit_from_angles(m: f64, n: f64) -> [f64; 3] {
    [m.cos() * n.cos(), m.cos() * n.sin(), m.sin()]
}

pub fn spherical_angles(e: &[f64; 3]) -> (f64, f64) {
    (e[2].clamp(-1.0, 1.0).asin(), e[1].atan2(e[0]))
}

/// Killing fields of S2 x R exposed by the crate.
#[derive(Debug, Clone, Copy)]
pub enum KillingField {
    /// Unit field tangent to the fibers (translations of the R factor).
    Vertical,
    /// Rotation field about the z-axis of the sphere factor.
    RotationZ,
    /// Rotation field about an arbitrary axis, given by its frame.
    Rotation(RotationFrame),
}

impl KillingField {
    /// Value of the field at a point. The result is tangent to S2 x R.
    pub fn evaluate(&self, p: &AmbientPoint) -> AmbientVector {
        let c = match self {
            KillingField::Vertical => [0.0, 0.0, 0.0, 1.0],
            KillingField::RotationZ => [-p.y, p.x, 0.0, 0.0],
            KillingField::Rotation(frame) => {
                // R(p) = -<p, E2> E1 + <p, E1> E2 in sphere coordinates.
                let q = [p.x, p.y, p.z];
                let a = dot3(&q, &frame.e1);
                let b = dot3(&q, &frame.e2);
                [
                    -b * frame.e1[0] + a * frame.e2[0],
                    -b * frame.e1[1] + a * frame.e2[1],
                    -b * frame.e1[2] + a * frame.e2[2],
                    0.0,
                ]
            }
        };
        AmbientVector::new(*p, c)
    }

    pub fn label(&self) -> &'static str {
        match self {
            KillingField::Vertical => "v",
            KillingField::RotationZ => "r-z",
            KillingField::Rotation(_) => "r-general",
        }
    }
}

/// Stereographic projection from the north pole of the sphere factor:
/// (x, y, z, t) -> (x/(1-z), y/(1-z), t). Fails within `POLE_TOL` of z = 1.
pub fn stereographic(p: &AmbientPoint) -> Result<[f64; 3]> {
    let d = 1.0 - p.z;
    if d.abs() < POLE_TOL {
        return Err(Error::regularity(format!(
            "stereographic projection pole: 1 - z = {d}"
        )));
    }
    Ok([p.x / d, p.y / d, p.t])
}
