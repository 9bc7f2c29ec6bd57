//! Hexahedral mesh data model: generators, coordinate transforms, trilinear
//! element maps, element volumes, and the scaled-Jacobian quality metric.
//!
//! The corner ordering convention is fixed crate-wide: counterclockwise
//! bottom face, then counterclockwise top face, viewed from +zeta. Shape
//! functions, tetrahedron decompositions, and the quality metric all
//! reference it.

use crate::clip;
use crate::geometry::Point3;
use crate::{Error, Result};

/// Reference coordinate in the cube [-1,1]^3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefCoord {
    pub xi: f64,
    pub eta: f64,
    pub zeta: f64,
}

impl RefCoord {
    pub const CENTER: Self = Self { xi: 0.0, eta: 0.0, zeta: 0.0 };

    pub fn new(xi: f64, eta: f64, zeta: f64) -> Self {
        debug_assert!(xi.abs() <= 1.0 + 1e-12 && eta.abs() <= 1.0 + 1e-12 && zeta.abs() <= 1.0 + 1e-12);
        Self { xi, eta, zeta }
    }
}

/// Reference-cube corner signs in the canonical ordering.
pub const CORNER_SIGNS: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

// Corner -> adjacent corners along the xi, eta, zeta axes, and the parity
// of the corner's sign product. Together they orient the edge triple
// right-handedly for the quality metric.
const CORNER_NEIGHBORS: [[usize; 3]; 8] = [
    [1, 3, 4],
    [0, 2, 5],
    [3, 1, 6],
    [2, 0, 7],
    [5, 7, 0],
    [4, 6, 1],
    [7, 5, 2],
    [6, 4, 3],
];
const CORNER_PARITY: [f64; 8] = [-1.0, 1.0, -1.0, 1.0, 1.0, -1.0, 1.0, -1.0];

/// Mesh of 8-node hexahedral elements.
#[derive(Clone, Debug)]
pub struct HexMesh {
    vertices: Vec<Point3>,
    elements: Vec<[usize; 8]>,
}

impl HexMesh {
    /// Validates index ranges and corner distinctness. Element volumes are
    /// checked only by the generators; imported meshes may be inspected
    /// with `scaled_jacobian` or `element_volume`.
    pub fn new(vertices: Vec<Point3>, elements: Vec<[usize; 8]>) -> Result<Self> {
        for (e, conn) in elements.iter().enumerate() {
            for &v in conn {
                if v >= vertices.len() {
                    return Err(Error::InvalidMesh(format!(
                        "element {e} references vertex {v} of {}",
                        vertices.len()
                    )));
                }
            }
            for i in 0..8 {
                for j in (i + 1)..8 {
                    if conn[i] == conn[j] {
                        return Err(Error::InvalidMesh(format!(
                            "element {e} repeats vertex {}",
                            conn[i]
                        )));
                    }
                }
            }
        }
        Ok(Self { vertices, elements })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn elements(&self) -> &[[usize; 8]] {
        &self.elements
    }

    /// The element's corner coordinates in canonical order.
    pub fn element_corners(&self, e: usize) -> [Point3; 8] {
        self.elements[e].map(|v| self.vertices[v])
    }

    /// Arithmetic mean of the element's eight corners.
    pub fn element_centroid(&self, e: usize) -> Point3 {
        let mut x = 0.0;
        let mut y = 0.0;
        let mut z = 0.0;
        for &v in &self.elements[e] {
            let p = self.vertices[v];
            x += p.x;
            y += p.y;
            z += p.z;
        }
        Point3::new(x / 8.0, y / 8.0, z / 8.0)
    }

    /// Element volume under the six-tetrahedron model shared with the
    /// clipping kernel, so volume fractions land exactly in [0,1].
    pub fn element_volume(&self, e: usize) -> f64 {
        clip::hex_volume(&self.element_corners(e))
    }

    /// Physical coordinate of a reference point under the trilinear map.
    pub fn trilinear_map(&self, e: usize, xi: RefCoord) -> Point3 {
        trilinear(&self.element_corners(e), xi)
    }

    /// Determinant of the trilinear map's Jacobian at a reference point.
    pub fn jacobian_det(&self, e: usize, xi: RefCoord) -> f64 {
        jacobian_det(&self.element_corners(e), xi)
    }

    /// Scaled-Jacobian quality: minimum over the corners of the normalized
    /// triple product of emanating edges. 1 is a perfect cube, values at or
    /// below 0 indicate degenerate or inverted corners.
    pub fn scaled_jacobian(&self, e: usize) -> f64 {
        scaled_jacobian(&self.element_corners(e))
    }

    /// Sinusoidal vertex perturbation; right-hand sides all use the
    /// original coordinates (simultaneous substitution).
    pub fn apply_sinusoidal_perturbation(&self) -> HexMesh {
        self.map_vertices(|p| {
            let half_pi = 0.5 * std::f64::consts::PI;
            Point3::new(
                p.x + 0.1 * (half_pi * p.y * p.z).sin(),
                p.y + 0.1 * (half_pi * p.x * p.z).sin(),
                p.z + 0.1 * (half_pi * p.x * p.y).sin(),
            )
        })
    }

    /// Shear/scaling transform x' = x + 2y, y' = 0.3 y, z' = 0.2 z, applied
    /// simultaneously.
    pub fn apply_shear_scaling(&self) -> HexMesh {
        self.map_vertices(|p| Point3::new(p.x + 2.0 * p.y, 0.3 * p.y, 0.2 * p.z))
    }

    fn map_vertices(&self, f: impl Fn(Point3) -> Point3) -> HexMesh {
        HexMesh {
            vertices: self.vertices.iter().copied().map(f).collect(),
            elements: self.elements.clone(),
        }
    }
}

/// Axis-aligned box mesh with `n` cubical elements per axis.
pub fn build_box_mesh(lo: Point3, hi: Point3, n: usize) -> Result<HexMesh> {
    if n == 0 {
        return Err(Error::InvalidMesh("element count per axis must be >= 1".into()));
    }
    if !(lo.x < hi.x && lo.y < hi.y && lo.z < hi.z) {
        return Err(Error::InvalidMesh(format!(
            "inverted bounds: lo ({}, {}, {}) hi ({}, {}, {})",
            lo.x, lo.y, lo.z, hi.x, hi.y, hi.z
        )));
    }
    let nv = n + 1;
    let coord = |k: usize, lo: f64, hi: f64| lo + (hi - lo) * (k as f64 / n as f64);
    let mut vertices = Vec::with_capacity(nv * nv * nv);
    for k in 0..nv {
        for j in 0..nv {
            for i in 0..nv {
                vertices.push(Point3::new(
                    coord(i, lo.x, hi.x),
                    coord(j, lo.y, hi.y),
                    coord(k, lo.z, hi.z),
                ));
            }
        }
    }
    let idx = |i: usize, j: usize, k: usize| i + nv * (j + nv * k);
    let mut elements = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                elements.push([
                    idx(i, j, k),
                    idx(i + 1, j, k),
                    idx(i + 1, j + 1, k),
                    idx(i, j + 1, k),
                    idx(i, j, k + 1),
                    idx(i + 1, j, k + 1),
                    idx(i + 1, j + 1, k + 1),
                    idx(i, j + 1, k + 1),
                ]);
            }
        }
    }
    let mesh = HexMesh { vertices, elements };
    for e in 0..mesh.n_elements() {
        let vol = mesh.element_volume(e);
        if vol <= 0.0 {
            return Err(Error::DegenerateElement { element: e, volume: vol });
        }
    }
    Ok(mesh)
}

/// Trilinear interpolation of the corner coordinates at a reference point.
pub fn trilinear(corners: &[Point3; 8], xi: RefCoord) -> Point3 {
    let mut x = 0.0;
    let mut y = 0.0;
    let mut z = 0.0;
    for (a, s) in CORNER_SIGNS.iter().enumerate() {
        let w = 0.125 * (1.0 + s[0] * xi.xi) * (1.0 + s[1] * xi.eta) * (1.0 + s[2] * xi.zeta);
        let p = corners[a];
        x += w * p.x;
        y += w * p.y;
        z += w * p.z;
    }
    Point3::new(x, y, z)
}

/// Jacobian determinant of the trilinear map at a reference point.
pub fn jacobian_det(corners: &[Point3; 8], xi: RefCoord) -> f64 {
    // Columns of dx/dxi.
    let mut j = [[0.0f64; 3]; 3];
    for (a, s) in CORNER_SIGNS.iter().enumerate() {
        let fx = 1.0 + s[0] * xi.xi;
        let fy = 1.0 + s[1] * xi.eta;
        let fz = 1.0 + s[2] * xi.zeta;
        let g = [
            0.125 * s[0] * fy * fz,
            0.125 * fx * s[1] * fz,
            0.125 * fx * fy * s[2],
        ];
        let p = corners[a];
        for (col, ga) in g.iter().enumerate() {
            j[0][col] += ga * p.x;
            j[1][col] += ga * p.y;
            j[2][col] += ga * p.z;
        }
    }
    j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
        - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
        + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0])
}

/// Scaled-Jacobian quality of a hexahedron given its corners.
pub fn scaled_jacobian(corners: &[Point3; 8]) -> f64 {
    let mut min_q = f64::INFINITY;
    for c in 0..8 {
        let [nx, ny, nz] = CORNER_NEIGHBORS[c];
        let u = corners[nx] - corners[c];
        let v = corners[ny] - corners[c];
        let w = corners[nz] - corners[c];
        let det = -CORNER_PARITY[c] * u.cross(v).dot(w);
        let scale = u.norm() * v.norm() * w.norm();
        let q = if scale == 0.0 { 0.0 } else { (det / scale).clamp(-1.0, 1.0) };
        min_q = min_q.min(q);
    }
    min_q
}
