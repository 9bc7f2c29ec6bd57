//! Exact volume of a hexahedron clipped by a half-space.
//!
//! A hex is decomposed into six tetrahedra sharing the 0-6 diagonal (the
//! Kuhn pattern), and each tetrahedron is clipped against the plane with a
//! vertex-sign case analysis. The decomposition is translation-consistent:
//! adjacent subhexes triangulate shared faces identically, so sibling
//! volumes tile without gaps or overlaps.

use crate::geometry::{Point3, Vector3};
use crate::{Error, Result};

/// Oriented plane given by a point on it and a unit normal. Clipping keeps
/// the side `(x - point) . normal <= 0`; with the normal pointing out of
/// the solid, the kept side is the solid's interior.
#[derive(Clone, Copy, Debug)]
pub struct Plane {
    pub point: Point3,
    pub normal: Vector3,
}

impl Plane {
    /// Normalizes the given normal; rejects the zero vector.
    pub fn new(point: Point3, normal: Vector3) -> Result<Self> {
        let normal = normal
            .normalized()
            .ok_or_else(|| Error::InvalidGeometry("plane normal must be nonzero".into()))?;
        Ok(Self { point, normal })
    }
}

/// Tetrahedron with positively oriented vertices.
#[derive(Clone, Copy, Debug)]
pub struct Tetrahedron {
    pub vertices: [Point3; 4],
}

impl Tetrahedron {
    pub fn new(vertices: [Point3; 4]) -> Self {
        Self { vertices }
    }

    pub fn signed_volume(&self) -> f64 {
        let [a, b, c, d] = self.vertices;
        signed_volume(a, b, c, d)
    }
}

fn signed_volume(a: Point3, b: Point3, c: Point3, d: Point3) -> f64 {
    (b - a).cross(c - a).dot(d - a) / 6.0
}

/// The six tetrahedra of the Kuhn decomposition, as corner indices into the
/// canonical ordering (counterclockwise bottom face, then counterclockwise
/// top face). Every tetrahedron contains the 0-6 main diagonal; orderings
/// are chosen so each has positive volume on a right-handed hex.
pub const HEX_TET_INDICES: [[usize; 4]; 6] = [
    [0, 1, 2, 6],
    [0, 5, 1, 6],
    [0, 2, 3, 6],
    [0, 3, 7, 6],
    [0, 4, 5, 6],
    [0, 7, 4, 6],
];

/// Decompose a hexahedron into six tetrahedra sharing the main diagonal.
pub fn hex_to_tets(corners: &[Point3; 8]) -> [Tetrahedron; 6] {
    HEX_TET_INDICES.map(|[i, j, k, l]| {
        Tetrahedron::new([corners[i], corners[j], corners[k], corners[l]])
    })
}

/// Signed volume of a hexahedron under the six-tetrahedron model. Matches
/// the trilinear volume exactly for planar-faced hexes.
pub fn hex_volume(corners: &[Point3; 8]) -> f64 {
    HEX_TET_INDICES
        .iter()
        .map(|&[i, j, k, l]| signed_volume(corners[i], corners[j], corners[k], corners[l]))
        .sum()
}

fn bbox_diagonal<const N: usize>(points: &[Point3; N]) -> f64 {
    let mut lo = points[0];
    let mut hi = points[0];
    for p in &points[1..] {
        lo = lo.min(*p);
        hi = hi.max(*p);
    }
    (hi - lo).norm()
}

/// Fraction of a tetrahedron's volume on the kept side of the plane, from
/// the signed vertex distances alone. Distances with magnitude at most
/// `snap` are treated as on the plane and kept.
fn kept_fraction(tet: &Tetrahedron, s: &mut [f64; 4], snap: f64) -> f64 {
    for v in s.iter_mut() {
        if v.abs() <= snap {
            *v = 0.0;
        }
    }
    let inside: Vec<usize> = (0..4).filter(|&i| s[i] <= 0.0).collect();
    let outside: Vec<usize> = (0..4).filter(|&i| s[i] > 0.0).collect();

    // Fractional position of the plane crossing on the edge from vertex i
    // (kept) to vertex j (cut); the denominator never vanishes because the
    // signs differ.
    let t = |i: usize, j: usize| (s[i] / (s[i] - s[j])).clamp(0.0, 1.0);

    match inside.len() {
        4 => 1.0,
        0 => 0.0,
        1 => {
            let a = inside[0];
            outside.iter().map(|&j| t(a, j)).product()
        }
        3 => {
            let d = outside[0];
            // Complement of the corner tetrahedron cut off at the single
            // outside vertex.
            let cut: f64 = inside.iter().map(|&i| (s[d] / (s[d] - s[i])).clamp(0.0, 1.0)).product();
            1.0 - cut
        }
        2 => {
            // Wedge with triangular ends (a,pac,pad) and (b,pbc,pbd),
            // split into three tetrahedra. Normalizing by the relabeled
            // vertex order keeps the fraction positive regardless of the
            // permutation parity of the inside/outside labeling.
            let (a, b) = (inside[0], inside[1]);
            let (c, d) = (outside[0], outside[1]);
            let v = &tet.vertices;
            let edge = |i: usize, j: usize| v[i] + (v[j] - v[i]) * t(i, j);
            let pac = edge(a, c);
            let pad = edge(a, d);
            let pbc = edge(b, c);
            let pbd = edge(b, d);
            let wedge = signed_volume(v[a], pac, pad, v[b])
                + signed_volume(pac, pad, v[b], pbc)
                + signed_volume(pad, v[b], pbc, pbd);
            let total = signed_volume(v[a], v[b], v[c], v[d]);
            if total == 0.0 {
                0.0
            } else {
                (wedge / total).clamp(0.0, 1.0)
            }
        }
        _ => unreachable!(),
    }
}

fn clipped_tet_volume_scaled(tet: &Tetrahedron, plane: &Plane, snap: f64) -> f64 {
    let mut s = tet.vertices.map(|v| (v - plane.point).dot(plane.normal));
    kept_fraction(tet, &mut s, snap) * tet.signed_volume()
}

/// Volume of the part of the tetrahedron on the kept side of the plane
/// (`(x - point) . normal <= 0`).
pub fn clipped_tet_volume(tet: &Tetrahedron, plane: &Plane) -> f64 {
    let snap = 1e-12 * bbox_diagonal(&tet.vertices);
    clipped_tet_volume_scaled(tet, plane, snap)
}

/// Volume of the part of the hexahedron on the kept side of the plane,
/// summed over the six-tetrahedron decomposition.
pub fn clipped_hex_volume(corners: &[Point3; 8], plane: &Plane) -> f64 {
    let snap = 1e-12 * bbox_diagonal(corners);
    hex_to_tets(corners)
        .iter()
        .map(|tet| clipped_tet_volume_scaled(tet, plane, snap))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) const UNIT_CUBE: [Point3; 8] = [
        Point3::new(0.0, 0.0, 0.0),
        Point3::new(1.0, 0.0, 0.0),
        Point3::new(1.0, 1.0, 0.0),
        Point3::new(0.0, 1.0, 0.0),
        Point3::new(0.0, 0.0, 1.0),
        Point3::new(1.0, 0.0, 1.0),
        Point3::new(1.0, 1.0, 1.0),
        Point3::new(0.0, 1.0, 1.0),
    ];

    fn corner_tet() -> Tetrahedron {
        Tetrahedron::new([
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ])
    }

    #[test]
    fn unit_cube_decomposes_into_six_equal_tets() {
        let tets = hex_to_tets(&UNIT_CUBE);
        for tet in &tets {
            assert!((tet.signed_volume() - 1.0 / 6.0).abs() < 1e-15);
        }
        assert!((hex_volume(&UNIT_CUBE) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn affine_images_scale_by_determinant() {
        // x' = x + 2y, y' = 0.3y, z' = 0.2z has determinant 0.06.
        let sheared = UNIT_CUBE.map(|p| Point3::new(p.x + 2.0 * p.y, 0.3 * p.y, 0.2 * p.z));
        for (tet, orig) in hex_to_tets(&sheared).iter().zip(hex_to_tets(&UNIT_CUBE).iter()) {
            assert!((tet.signed_volume() - 0.06 * orig.signed_volume()).abs() < 1e-15);
        }
        assert!((hex_volume(&sheared) - 0.06).abs() < 1e-15);
    }

    #[test]
    fn fully_kept_and_fully_cut() {
        let tet = corner_tet();
        let keep_all = Plane::new(Point3::new(0.0, 0.0, 2.0), Vector3::Z).unwrap();
        assert!((clipped_tet_volume(&tet, &keep_all) - 1.0 / 6.0).abs() < 1e-15);
        let cut_all = Plane::new(Point3::new(0.0, 0.0, -1.0), Vector3::Z).unwrap();
        assert_eq!(clipped_tet_volume(&tet, &cut_all), 0.0);
    }

    #[test]
    fn corner_tet_diagonal_cut() {
        // Plane x+y+z = 0.5 keeps the similar corner tet of scale 1/2.
        let tet = corner_tet();
        let n = Vector3::new(1.0, 1.0, 1.0).normalized().unwrap();
        let plane = Plane::new(Point3::new(0.5, 0.0, 0.0), n).unwrap();
        let kept = clipped_tet_volume(&tet, &plane);
        assert!((kept - 1.0 / 48.0).abs() < 1e-15, "kept {kept}");
    }

    #[test]
    fn half_cube_cut() {
        let plane = Plane::new(Point3::new(0.5, 0.5, 0.5), Vector3::Z).unwrap();
        let v = clipped_hex_volume(&UNIT_CUBE, &plane);
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn cube_corner_plane_keeps_nothing() {
        let n = Vector3::new(1.0, 1.0, 1.0).normalized().unwrap();
        let plane = Plane::new(Point3::ORIGIN, n).unwrap();
        let v = clipped_hex_volume(&UNIT_CUBE, &plane);
        assert!(v.abs() < 1e-14, "kept {v}");
    }

    #[test]
    fn cube_diagonal_corner_cut() {
        // x+y+z <= 0.5 inside the unit cube is a corner tet of leg 0.5.
        let n = Vector3::new(1.0, 1.0, 1.0).normalized().unwrap();
        let plane = Plane::new(Point3::new(0.5, 0.0, 0.0), n).unwrap();
        let v = clipped_hex_volume(&UNIT_CUBE, &plane);
        assert!((v - 1.0 / 48.0).abs() < 1e-14, "kept {v}");
    }

    fn rand_hex(rng: &mut impl Rng) -> [Point3; 8] {
        // Random positively oriented affine image of the unit cube with a
        // mild random jitter that keeps the hex valid.
        loop {
            let m: [[f64; 3]; 3] = [
                [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
            ];
            let shift = Vector3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let jitter = 0.05;
            let hex = UNIT_CUBE.map(|p| {
                let q = Point3::new(
                    m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z,
                    m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z,
                    m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z,
                );
                q + shift
                    + Vector3::new(
                        rng.gen_range(-jitter..jitter),
                        rng.gen_range(-jitter..jitter),
                        rng.gen_range(-jitter..jitter),
                    )
            });
            let tets = hex_to_tets(&hex);
            if tets.iter().all(|t| t.signed_volume() > 1e-4) {
                return hex;
            }
        }
    }

    fn rand_plane(rng: &mut impl Rng, hex: &[Point3; 8]) -> Plane {
        let centroid = hex
            .iter()
            .fold(Vector3::ZERO, |acc, p| acc + p.to_vector())
            / 8.0;
        let n = loop {
            let v = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if v.norm_squared() > 1e-4 {
                break v.normalized().unwrap();
            }
        };
        let offset = rng.gen_range(-1.5..1.5);
        Plane::new(centroid.to_point() + n * offset, n).unwrap()
    }

    #[test]
    fn partition_identity_random_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..1000 {
            let hex = rand_hex(&mut rng);
            let plane = rand_plane(&mut rng, &hex);
            let flipped = Plane { point: plane.point, normal: -plane.normal };
            let total = hex_volume(&hex);
            let a = clipped_hex_volume(&hex, &plane);
            let b = clipped_hex_volume(&hex, &flipped);
            assert!(
                (a + b - total).abs() <= 1e-12 * total.abs(),
                "partition violated: {a} + {b} != {total}"
            );
            assert!(a >= 0.0 && a <= total * (1.0 + 1e-12));
            assert!(b >= 0.0 && b <= total * (1.0 + 1e-12));
        }
    }

    #[test]
    fn rigid_motion_equivariance() {
        use crate::geometry::{Mat3, Similarity};
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let rot = Mat3::rotation(Vector3::new(0.3, 1.0, -0.7), 0.9).unwrap();
        let sim = Similarity::new(rot, Vector3::new(4.0, -2.0, 1.0), 1.0).unwrap();
        for _ in 0..100 {
            let hex = rand_hex(&mut rng);
            let plane = rand_plane(&mut rng, &hex);
            let v0 = clipped_hex_volume(&hex, &plane);
            let moved = hex.map(|p| sim.apply(p));
            let moved_plane = Plane {
                point: sim.apply(plane.point),
                normal: rot.apply(plane.normal),
            };
            let v1 = clipped_hex_volume(&moved, &moved_plane);
            let scale = hex_volume(&hex).abs().max(1e-30);
            assert!((v0 - v1).abs() <= 1e-10 * scale, "{v0} vs {v1}");
        }
    }

    #[test]
    fn plane_translation_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..200 {
            let hex = rand_hex(&mut rng);
            let plane = rand_plane(&mut rng, &hex);
            let v0 = clipped_hex_volume(&hex, &plane);
            // Moving the plane along its normal enlarges the kept half-space.
            let delta = rng.gen_range(0.0..1.0);
            let moved = Plane { point: plane.point + plane.normal * delta, normal: plane.normal };
            let v1 = clipped_hex_volume(&hex, &moved);
            assert!(v1 >= v0 - 1e-12 * hex_volume(&hex).abs());
        }
    }

    #[test]
    fn monte_carlo_oracle_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(303);
        // Fewer cases than the acceptance suite, but the same oracle.
        for _ in 0..25 {
            let hex = rand_hex(&mut rng);
            let plane = rand_plane(&mut rng, &hex);
            let expect = clipped_hex_volume(&hex, &plane);
            let (est, sigma) = monte_carlo_clipped_volume(&hex, &plane, 200_000, &mut rng);
            assert!(
                (expect - est).abs() <= 4.0 * sigma + 1e-12,
                "clip {expect} vs MC {est} (4 sigma = {})",
                4.0 * sigma
            );
        }
    }

    /// Rejection-sampling oracle: sample the hex bounding box, count points
    /// that fall both inside the hex (via its tets) and on the kept side.
    pub(crate) fn monte_carlo_clipped_volume(
        hex: &[Point3; 8],
        plane: &Plane,
        n: usize,
        rng: &mut impl Rng,
    ) -> (f64, f64) {
        let mut lo = hex[0];
        let mut hi = hex[0];
        for p in &hex[1..] {
            lo = lo.min(*p);
            hi = hi.max(*p);
        }
        let tets = hex_to_tets(hex);
        let box_vol = (hi.x - lo.x) * (hi.y - lo.y) * (hi.z - lo.z);
        let mut hits = 0u64;
        for _ in 0..n {
            let p = Point3::new(
                rng.gen_range(lo.x..hi.x),
                rng.gen_range(lo.y..hi.y),
                rng.gen_range(lo.z..hi.z),
            );
            if (p - plane.point).dot(plane.normal) > 0.0 {
                continue;
            }
            if tets.iter().any(|t| tet_contains(t, p)) {
                hits += 1;
            }
        }
        let p_hat = hits as f64 / n as f64;
        (box_vol * p_hat, box_vol * (p_hat * (1.0 - p_hat) / n as f64).sqrt())
    }

    fn tet_contains(tet: &Tetrahedron, p: Point3) -> bool {
        let [a, b, c, d] = tet.vertices;
        let v0 = signed_volume(a, b, c, d);
        if v0 <= 0.0 {
            return false;
        }
        let w0 = signed_volume(p, b, c, d);
        let w1 = signed_volume(a, p, c, d);
        let w2 = signed_volume(a, b, p, d);
        let w3 = signed_volume(a, b, c, p);
        w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0 && w3 >= 0.0
    }
}
