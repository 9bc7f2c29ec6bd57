//! Implicit solid geometries and the two queries the insertion procedure
//! needs from them: point containment and closest surface point.
//!
//! Every solid has an analytically known volume, which the convergence
//! studies use as the exact reference.

use crate::{Error, Result};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A point in 3-space.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// A displacement or direction in 3-space.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vector3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const ORIGIN: Self = Self::new(0.0, 0.0, 0.0);

    pub fn to_vector(self) -> Vector3 {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Componentwise minimum, used for bounding boxes.
    pub fn min(self, other: Point3) -> Point3 {
        Point3::new(self.x.min(other.x), self.y.min(other.y), self.z.min(other.z))
    }

    /// Componentwise maximum, used for bounding boxes.
    pub fn max(self, other: Point3) -> Point3 {
        Point3::new(self.x.max(other.x), self.y.max(other.y), self.z.max(other.z))
    }

    pub fn midpoint(self, other: Point3) -> Point3 {
        Point3::new(
            0.5 * (self.x + other.x),
            0.5 * (self.y + other.y),
            0.5 * (self.z + other.z),
        )
    }

    pub fn coord(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("axis out of range: {axis}"),
        }
    }
}

impl Vector3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0);
    pub const X: Self = Self::new(1.0, 0.0, 0.0);
    pub const Y: Self = Self::new(0.0, 1.0, 0.0);
    pub const Z: Self = Self::new(0.0, 0.0, 1.0);

    pub fn dot(self, other: Vector3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vector3) -> Vector3 {
        Vector3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(self) -> Option<Vector3> {
        let n = self.norm();
        if n == 0.0 {
            None
        } else {
            Some(self / n)
        }
    }

    pub fn to_point(self) -> Point3 {
        Point3::new(self.x, self.y, self.z)
    }
}

impl Add<Vector3> for Point3 {
    type Output = Point3;
    fn add(self, v: Vector3) -> Point3 {
        Point3::new(self.x + v.x, self.y + v.y, self.z + v.z)
    }
}

impl Sub<Vector3> for Point3 {
    type Output = Point3;
    fn sub(self, v: Vector3) -> Point3 {
        Point3::new(self.x - v.x, self.y - v.y, self.z - v.z)
    }
}

impl Sub for Point3 {
    type Output = Vector3;
    fn sub(self, other: Point3) -> Vector3 {
        Vector3::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }
}

impl Add for Vector3 {
    type Output = Vector3;
    fn add(self, other: Vector3) -> Vector3 {
        Vector3::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }
}

impl Sub for Vector3 {
    type Output = Vector3;
    fn sub(self, other: Vector3) -> Vector3 {
        Vector3::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }
}

impl Mul<f64> for Vector3 {
    type Output = Vector3;
    fn mul(self, s: f64) -> Vector3 {
        Vector3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vector3> for f64 {
    type Output = Vector3;
    fn mul(self, v: Vector3) -> Vector3 {
        v * self
    }
}

impl Div<f64> for Vector3 {
    type Output = Vector3;
    fn div(self, s: f64) -> Vector3 {
        Vector3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vector3 {
    type Output = Vector3;
    fn neg(self) -> Vector3 {
        Vector3::new(-self.x, -self.y, -self.z)
    }
}

/// Row-major 3x3 matrix; only rotations are needed here.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3 {
    pub rows: [[f64; 3]; 3],
}

impl Mat3 {
    pub const IDENTITY: Self = Self {
        rows: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub fn apply(&self, v: Vector3) -> Vector3 {
        let r = &self.rows;
        Vector3::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }

    pub fn transpose(&self) -> Mat3 {
        let r = &self.rows;
        Mat3 {
            rows: [
                [r[0][0], r[1][0], r[2][0]],
                [r[0][1], r[1][1], r[2][1]],
                [r[0][2], r[1][2], r[2][2]],
            ],
        }
    }

    pub fn determinant(&self) -> f64 {
        let r = &self.rows;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }

    /// Rodrigues rotation about a unit axis.
    pub fn rotation(axis: Vector3, angle: f64) -> Result<Mat3> {
        let u = axis
            .normalized()
            .ok_or_else(|| Error::InvalidGeometry("rotation axis must be nonzero".into()))?;
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Ok(Mat3 {
            rows: [
                [c + u.x * u.x * t, u.x * u.y * t - u.z * s, u.x * u.z * t + u.y * s],
                [u.y * u.x * t + u.z * s, c + u.y * u.y * t, u.y * u.z * t - u.x * s],
                [u.z * u.x * t - u.y * s, u.z * u.y * t + u.x * s, c + u.z * u.z * t],
            ],
        })
    }

    fn is_rotation(&self) -> bool {
        let t = self.transpose();
        let mut max_dev: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let mut dot = 0.0;
                for k in 0..3 {
                    dot += self.rows[i][k] * t.rows[k][j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                max_dev = max_dev.max((dot - expect).abs());
            }
        }
        max_dev < 1e-9 && (self.determinant() - 1.0).abs() < 1e-9
    }
}

/// Rigid motion plus uniform scale: `x_world = R (s x_local) + t`.
///
/// Only similarity transforms are representable, which keeps closest-point
/// queries exact under transformation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Similarity {
    rotation: Mat3,
    translation: Vector3,
    scale: f64,
}

impl Similarity {
    pub fn new(rotation: Mat3, translation: Vector3, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "scale must be positive and finite, got {scale}"
            )));
        }
        if !rotation.is_rotation() {
            return Err(Error::InvalidGeometry(
                "transform matrix is not a rotation (must be orthonormal with det +1)".into(),
            ));
        }
        Ok(Self { rotation, translation, scale })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn apply(&self, p: Point3) -> Point3 {
        (self.rotation.apply(p.to_vector() * self.scale) + self.translation).to_point()
    }

    pub fn apply_inverse(&self, p: Point3) -> Point3 {
        (self.rotation.transpose().apply(p.to_vector() - self.translation) / self.scale).to_point()
    }
}

/// Classification of a sphere against a solid: the four cases that drive
/// both the k-d tree descent and the octree subdivision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SphereClass {
    FullyInside,
    FullyOutside,
    Intersecting,
}

/// An implicit solid. All variants answer containment and closest-point
/// queries exactly (up to roundoff) and know their analytic volume.
#[derive(Clone, Debug)]
pub enum Geometry {
    Sphere {
        center: Point3,
        radius: f64,
    },
    /// All points within `radius` of the segment `a`-`b` (a hemispherically
    /// capped cylinder).
    Capsule {
        a: Point3,
        b: Point3,
        radius: f64,
    },
    Box {
        lo: Point3,
        hi: Point3,
    },
    Torus {
        center: Point3,
        /// Unit vector normal to the torus midplane.
        axis: Vector3,
        major_radius: f64,
        minor_radius: f64,
    },
    /// A solid moved by a rigid motion plus uniform scale.
    Transformed {
        inner: std::boxed::Box<Geometry>,
        transform: Similarity,
    },
}

/// First priority axis that is not (nearly) parallel to `dir`, projected
/// into the plane orthogonal to `dir`. Breaks radial-symmetry ties
/// deterministically: +x, then +y, then +z.
fn tie_break_perpendicular(dir: Vector3) -> Vector3 {
    for axis in [Vector3::X, Vector3::Y, Vector3::Z] {
        let w = axis - dir * axis.dot(dir);
        if let Some(u) = w.normalized() {
            if w.norm() > 1e-8 {
                return u;
            }
        }
    }
    unreachable!("no axis can be parallel to all three basis vectors")
}

impl Geometry {
    pub fn sphere(center: Point3, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite() && center.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "sphere requires finite center and radius > 0, got radius {radius}"
            )));
        }
        Ok(Geometry::Sphere { center, radius })
    }

    pub fn capsule(a: Point3, b: Point3, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite() && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "capsule requires finite endpoints and radius > 0, got radius {radius}"
            )));
        }
        if (b - a).norm() == 0.0 {
            return Err(Error::InvalidGeometry("capsule endpoints must differ".into()));
        }
        Ok(Geometry::Capsule { a, b, radius })
    }

    pub fn cuboid(lo: Point3, hi: Point3) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo.x < hi.x && lo.y < hi.y && lo.z < hi.z) {
            return Err(Error::InvalidGeometry(format!(
                "box requires lo < hi componentwise, got lo ({}, {}, {}) hi ({}, {}, {})",
                lo.x, lo.y, lo.z, hi.x, hi.y, hi.z
            )));
        }
        Ok(Geometry::Box { lo, hi })
    }

    pub fn torus(center: Point3, axis: Vector3, major_radius: f64, minor_radius: f64) -> Result<Self> {
        if !(minor_radius > 0.0 && major_radius > minor_radius && major_radius.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "torus requires major_radius > minor_radius > 0, got {major_radius} and {minor_radius}"
            )));
        }
        let axis = axis
            .normalized()
            .ok_or_else(|| Error::InvalidGeometry("torus axis must be nonzero".into()))?;
        if !center.is_finite() {
            return Err(Error::InvalidGeometry("torus center must be finite".into()));
        }
        Ok(Geometry::Torus { center, axis, major_radius, minor_radius })
    }

    pub fn transformed(inner: Geometry, transform: Similarity) -> Self {
        Geometry::Transformed { inner: std::boxed::Box::new(inner), transform }
    }

    /// True iff `x` lies in the closure of the solid; boundary points count
    /// as inside.
    pub fn contains(&self, x: Point3) -> bool {
        match self {
            Geometry::Sphere { center, radius } => (x - *center).norm_squared() <= radius * radius,
            Geometry::Capsule { a, b, radius } => {
                let ab = *b - *a;
                let t = ((x - *a).dot(ab) / ab.norm_squared()).clamp(0.0, 1.0);
                let q = *a + ab * t;
                (x - q).norm_squared() <= radius * radius
            }
            Geometry::Box { lo, hi } => {
                lo.x <= x.x && x.x <= hi.x && lo.y <= x.y && x.y <= hi.y && lo.z <= x.z && x.z <= hi.z
            }
            Geometry::Torus { center, axis, major_radius, minor_radius } => {
                let p = x - *center;
                let z = p.dot(*axis);
                let rho = (p - *axis * z).norm();
                let d = rho - major_radius;
                d * d + z * z <= minor_radius * minor_radius
            }
            Geometry::Transformed { inner, transform } => inner.contains(transform.apply_inverse(x)),
        }
    }

    /// Closest point on the solid's surface to `x`. Symmetry-degenerate
    /// queries (sphere center, capsule axis, torus axis or spine) are
    /// resolved by a fixed axis priority in the solid's local frame.
    pub fn closest_point(&self, x: Point3) -> Point3 {
        match self {
            Geometry::Sphere { center, radius } => {
                let v = x - *center;
                let d = v.norm();
                if d == 0.0 {
                    *center + Vector3::X * *radius
                } else {
                    *center + v * (*radius / d)
                }
            }
            Geometry::Capsule { a, b, radius } => {
                let ab = *b - *a;
                let t = ((x - *a).dot(ab) / ab.norm_squared()).clamp(0.0, 1.0);
                let q = *a + ab * t;
                let v = x - q;
                let d = v.norm();
                if d == 0.0 {
                    let axis_dir = ab.normalized().expect("capsule endpoints differ");
                    q + tie_break_perpendicular(axis_dir) * *radius
                } else {
                    q + v * (*radius / d)
                }
            }
            Geometry::Box { lo, hi } => {
                let inside = self.contains(x);
                if !inside {
                    return Point3::new(
                        x.x.clamp(lo.x, hi.x),
                        x.y.clamp(lo.y, hi.y),
                        x.z.clamp(lo.z, hi.z),
                    );
                }
                // Interior point: project to the nearest face, scanning
                // axes in order with the + face first.
                let gaps = [
                    (hi.x - x.x, 0, hi.x),
                    (x.x - lo.x, 0, lo.x),
                    (hi.y - x.y, 1, hi.y),
                    (x.y - lo.y, 1, lo.y),
                    (hi.z - x.z, 2, hi.z),
                    (x.z - lo.z, 2, lo.z),
                ];
                let mut best = gaps[0];
                for g in &gaps[1..] {
                    if g.0 < best.0 {
                        best = *g;
                    }
                }
                let mut p = x;
                match best.1 {
                    0 => p.x = best.2,
                    1 => p.y = best.2,
                    _ => p.z = best.2,
                }
                p
            }
            Geometry::Torus { center, axis, major_radius, minor_radius } => {
                let p = x - *center;
                let z = p.dot(*axis);
                let q = p - *axis * z;
                let radial = match q.normalized() {
                    Some(u) => u,
                    None => tie_break_perpendicular(*axis),
                };
                let ring = *center + radial * *major_radius;
                let v = x - ring;
                match v.normalized() {
                    Some(u) => ring + u * *minor_radius,
                    None => {
                        // On the spine circle: pick the first priority axis
                        // with a nonzero projection onto the ambiguity plane
                        // spanned by the radial and axis directions.
                        for e in [Vector3::X, Vector3::Y, Vector3::Z] {
                            let w = radial * e.dot(radial) + *axis * e.dot(*axis);
                            if let Some(u) = w.normalized() {
                                if w.norm() > 1e-8 {
                                    return ring + u * *minor_radius;
                                }
                            }
                        }
                        ring + radial * *minor_radius
                    }
                }
            }
            Geometry::Transformed { inner, transform } => {
                transform.apply(inner.closest_point(transform.apply_inverse(x)))
            }
        }
    }

    /// Classify a sphere of center `c` and radius `r` against the solid.
    /// Tangency (`d == r`) is treated as intersecting so that recursion
    /// stays conservative.
    pub fn classify_sphere(&self, c: Point3, r: f64) -> SphereClass {
        let d = (c - self.closest_point(c)).norm();
        if d > r {
            if self.contains(c) {
                SphereClass::FullyInside
            } else {
                SphereClass::FullyOutside
            }
        } else {
            SphereClass::Intersecting
        }
    }

    /// Analytic volume of the solid.
    pub fn exact_volume(&self) -> Result<f64> {
        use std::f64::consts::PI;
        match self {
            Geometry::Sphere { radius, .. } => Ok(4.0 / 3.0 * PI * radius.powi(3)),
            Geometry::Capsule { a, b, radius } => {
                let length = (*b - *a).norm();
                Ok(PI * radius * radius * length + 4.0 / 3.0 * PI * radius.powi(3))
            }
            Geometry::Box { lo, hi } => Ok((hi.x - lo.x) * (hi.y - lo.y) * (hi.z - lo.z)),
            Geometry::Torus { major_radius, minor_radius, .. } => {
                Ok(2.0 * PI * PI * major_radius * minor_radius * minor_radius)
            }
            Geometry::Transformed { inner, transform } => {
                Ok(inner.exact_volume()? * transform.scale().powi(3))
            }
        }
    }

    /// A length scale of the solid, used to set relative tolerances.
    pub fn characteristic_size(&self) -> f64 {
        match self {
            Geometry::Sphere { radius, .. } => *radius,
            Geometry::Capsule { a, b, radius } => 0.5 * (*b - *a).norm() + radius,
            Geometry::Box { lo, hi } => 0.5 * (*hi - *lo).norm(),
            Geometry::Torus { major_radius, minor_radius, .. } => major_radius + minor_radius,
            Geometry::Transformed { inner, transform } => {
                inner.characteristic_size() * transform.scale()
            }
        }
    }
}
