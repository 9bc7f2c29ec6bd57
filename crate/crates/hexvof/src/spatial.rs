//! k-d tree over element centroids, built by recursive coordinate
//! bisection. Every node carries a bounding sphere that covers all the
//! hexahedra (not just the centroids) assigned to it, which is what allows
//! whole-subtree inside/outside classification during insertion.

use crate::geometry::Point3;
use crate::hexmesh::HexMesh;
use crate::{Error, Result};
use std::time::Instant;

/// Sphere covering every vertex of every element assigned to a tree node.
#[derive(Clone, Copy, Debug)]
pub struct BoundingSphere {
    pub center: Point3,
    pub radius: f64,
}

/// Sphere covering the vertices of the given elements: centered at the
/// midpoint of their axis-aligned bounding box, with radius the largest
/// center-to-vertex distance. Covering (not minimal) by construction.
pub fn bounding_sphere_of_elements(mesh: &HexMesh, elems: &[usize]) -> BoundingSphere {
    assert!(!elems.is_empty(), "bounding sphere of empty element set");
    let mut lo = mesh.vertices()[mesh.elements()[elems[0]][0]];
    let mut hi = lo;
    for &e in elems {
        for &v in &mesh.elements()[e] {
            let p = mesh.vertices()[v];
            lo = lo.min(p);
            hi = hi.max(p);
        }
    }
    let center = lo.midpoint(hi);
    let mut radius: f64 = 0.0;
    for &e in elems {
        for &v in &mesh.elements()[e] {
            radius = radius.max(center.distance(mesh.vertices()[v]));
        }
    }
    BoundingSphere { center, radius }
}

/// Interior split or single-element leaf.
#[derive(Clone, Copy, Debug)]
pub enum KdNodeKind {
    Leaf,
    Split {
        axis: usize,
        /// Mean centroid coordinate along the split axis.
        coord: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug)]
pub struct KdNode {
    pub sphere: BoundingSphere,
    pub kind: KdNodeKind,
    start: usize,
    end: usize,
}

impl KdNode {
    pub fn n_elements(&self) -> usize {
        self.end - self.start
    }
}

/// Binary tree over element centroids. Each node covers a contiguous range
/// of the `order` array; leaves hold exactly one element. The tree is
/// immutable once built and can be reused across multiple geometries.
#[derive(Clone, Debug)]
pub struct KdTree {
    nodes: Vec<KdNode>,
    order: Vec<usize>,
    root: usize,
    build_seconds: f64,
}

impl KdTree {
    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node(&self, id: usize) -> &KdNode {
        &self.nodes[id]
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.order.len()
    }

    /// Element indices covered by a node.
    pub fn node_elements(&self, id: usize) -> &[usize] {
        let node = &self.nodes[id];
        &self.order[node.start..node.end]
    }

    /// The single element of a leaf node.
    pub fn leaf_element(&self, id: usize) -> usize {
        debug_assert!(matches!(self.nodes[id].kind, KdNodeKind::Leaf));
        self.order[self.nodes[id].start]
    }

    /// Wall-clock seconds spent in `build_kdtree`.
    pub fn build_seconds(&self) -> f64 {
        self.build_seconds
    }

    pub fn depth(&self) -> usize {
        self.depth_of(self.root)
    }

    fn depth_of(&self, id: usize) -> usize {
        match self.nodes[id].kind {
            KdNodeKind::Leaf => 1,
            KdNodeKind::Split { left, right, .. } => {
                1 + self.depth_of(left).max(self.depth_of(right))
            }
        }
    }
}

/// Build the k-d tree by recursive coordinate bisection: split along the
/// axis of largest centroid spread at the mean centroid coordinate,
/// cutting at the median index so child sizes differ by at most one.
pub fn build_kdtree(mesh: &HexMesh) -> Result<KdTree> {
    if mesh.n_elements() == 0 {
        return Err(Error::EmptyMesh);
    }
    let start = Instant::now();
    let centroids: Vec<Point3> = (0..mesh.n_elements()).map(|e| mesh.element_centroid(e)).collect();
    let mut order: Vec<usize> = (0..mesh.n_elements()).collect();
    let mut nodes = Vec::with_capacity(2 * mesh.n_elements());
    let root = build_range(mesh, &centroids, &mut order, &mut nodes, 0, mesh.n_elements());
    Ok(KdTree { nodes, order, root, build_seconds: start.elapsed().as_secs_f64() })
}

fn build_range(
    mesh: &HexMesh,
    centroids: &[Point3],
    order: &mut [usize],
    nodes: &mut Vec<KdNode>,
    start: usize,
    end: usize,
) -> usize {
    let n = end - start;
    let sphere = bounding_sphere_of_elements(mesh, &order[start..end]);
    if n == 1 {
        nodes.push(KdNode { sphere, kind: KdNodeKind::Leaf, start, end });
        return nodes.len() - 1;
    }

    // Axis of largest centroid spread; ties go to the lowest axis.
    let mut axis = 0;
    let mut best_diam = f64::NEG_INFINITY;
    let mut means = [0.0f64; 3];
    for k in 0..3 {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for &e in &order[start..end] {
            let c = centroids[e].coord(k);
            min = min.min(c);
            max = max.max(c);
            sum += c;
        }
        means[k] = sum / n as f64;
        if max - min > best_diam {
            best_diam = max - min;
            axis = k;
        }
    }
    let coord = means[axis];

    // The mean is the stored split coordinate; the actual cut happens at
    // the median index so the child-size contract holds even when many
    // centroids share a coordinate.
    order[start..end].sort_unstable_by(|&a, &b| {
        centroids[a]
            .coord(axis)
            .partial_cmp(&centroids[b].coord(axis))
            .unwrap()
            .then(a.cmp(&b))
    });
    let mid = start + n / 2;

    let left = build_range(mesh, centroids, order, nodes, start, mid);
    let right = build_range(mesh, centroids, order, nodes, mid, end);
    nodes.push(KdNode { sphere, kind: KdNodeKind::Split { axis, coord, left, right }, start, end });
    nodes.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexmesh::build_box_mesh;
    use crate::HexMesh;

    /// A row of n unit cubes along +x.
    fn cubes_along_x(n: usize) -> HexMesh {
        let mut vertices = Vec::new();
        let mut elements = Vec::new();
        for e in 0..n {
            let x0 = e as f64;
            let base = vertices.len();
            for &(dx, dy, dz) in &[
                (0.0, 0.0, 0.0),
                (1.0, 0.0, 0.0),
                (1.0, 1.0, 0.0),
                (0.0, 1.0, 0.0),
                (0.0, 0.0, 1.0),
                (1.0, 0.0, 1.0),
                (1.0, 1.0, 1.0),
                (0.0, 1.0, 1.0),
            ] {
                vertices.push(Point3::new(x0 + dx, dy, dz));
            }
            elements.push([base, base + 1, base + 2, base + 3, base + 4, base + 5, base + 6, base + 7]);
        }
        HexMesh::new(vertices, elements).unwrap()
    }

    #[test]
    fn single_cube_sphere() {
        let mesh = cubes_along_x(1);
        let s = bounding_sphere_of_elements(&mesh, &[0]);
        assert!(s.center.distance(Point3::new(0.5, 0.5, 0.5)) < 1e-15);
        assert!((s.radius - 3.0f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_cube_sphere() {
        let mesh = cubes_along_x(2);
        let s = bounding_sphere_of_elements(&mesh, &[0, 1]);
        assert!(s.center.distance(Point3::new(1.0, 0.5, 0.5)) < 1e-15);
        assert!((s.radius - 1.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn four_collinear_centroids_split() {
        let mesh = cubes_along_x(4);
        let tree = build_kdtree(&mesh).unwrap();
        let root = tree.node(tree.root());
        match root.kind {
            KdNodeKind::Split { axis, coord, left, right } => {
                assert_eq!(axis, 0);
                // Centroid x-coordinates are 0.5, 1.5, 2.5, 3.5.
                assert!((coord - 2.0).abs() < 1e-15);
                assert_eq!(tree.node(left).n_elements(), 2);
                assert_eq!(tree.node(right).n_elements(), 2);
            }
            KdNodeKind::Leaf => panic!("root must split"),
        }
    }

    #[test]
    fn five_collinear_centroids_split_sizes() {
        let mesh = cubes_along_x(5);
        let tree = build_kdtree(&mesh).unwrap();
        match tree.node(tree.root()).kind {
            KdNodeKind::Split { left, right, .. } => {
                assert_eq!(tree.node(left).n_elements(), 2);
                assert_eq!(tree.node(right).n_elements(), 3);
            }
            KdNodeKind::Leaf => panic!("root must split"),
        }
    }

    #[test]
    fn single_element_is_leaf() {
        let mesh = cubes_along_x(1);
        let tree = build_kdtree(&mesh).unwrap();
        assert!(matches!(tree.node(tree.root()).kind, KdNodeKind::Leaf));
        assert_eq!(tree.leaf_element(tree.root()), 0);
    }

    #[test]
    fn quad_arrangement_matches_two_level_shape() {
        // 2x2x1 arrangement: root covers 4, two internal children of 2,
        // four leaves.
        let mut vertices = Vec::new();
        let mut elements = Vec::new();
        for j in 0..2 {
            for i in 0..2 {
                let base = vertices.len();
                let (x0, y0) = (i as f64, j as f64);
                for &(dx, dy, dz) in &[
                    (0.0, 0.0, 0.0),
                    (1.0, 0.0, 0.0),
                    (1.0, 1.0, 0.0),
                    (0.0, 1.0, 0.0),
                    (0.0, 0.0, 1.0),
                    (1.0, 0.0, 1.0),
                    (1.0, 1.0, 1.0),
                    (0.0, 1.0, 1.0),
                ] {
                    vertices.push(Point3::new(x0 + dx, y0 + dy, dz));
                }
                elements.push([
                    base,
                    base + 1,
                    base + 2,
                    base + 3,
                    base + 4,
                    base + 5,
                    base + 6,
                    base + 7,
                ]);
            }
        }
        let mesh = HexMesh::new(vertices, elements).unwrap();
        let tree = build_kdtree(&mesh).unwrap();
        let root = tree.node(tree.root());
        assert_eq!(root.n_elements(), 4);
        match root.kind {
            KdNodeKind::Split { axis, left, right, .. } => {
                // x and y spreads tie; lowest axis wins.
                assert_eq!(axis, 0);
                for child in [left, right] {
                    assert_eq!(tree.node(child).n_elements(), 2);
                    match tree.node(child).kind {
                        KdNodeKind::Split { left: l, right: r, .. } => {
                            assert!(matches!(tree.node(l).kind, KdNodeKind::Leaf));
                            assert!(matches!(tree.node(r).kind, KdNodeKind::Leaf));
                        }
                        KdNodeKind::Leaf => panic!("children of root must split"),
                    }
                }
            }
            KdNodeKind::Leaf => panic!("root must split"),
        }
        assert_eq!(tree.depth(), 3);
    }

    #[test]
    fn empty_mesh_rejected() {
        let mesh = HexMesh::new(Vec::new(), Vec::new()).unwrap();
        assert!(matches!(build_kdtree(&mesh), Err(Error::EmptyMesh)));
    }

    fn check_invariants(mesh: &HexMesh, tree: &KdTree) {
        // Partition: every element in exactly one leaf.
        let mut seen = vec![0usize; mesh.n_elements()];
        for id in 0..tree.n_nodes() {
            if matches!(tree.node(id).kind, KdNodeKind::Leaf) {
                seen[tree.leaf_element(id)] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));

        for id in 0..tree.n_nodes() {
            let node = tree.node(id);
            // Coverage: every vertex of every covered element in the sphere.
            for &e in tree.node_elements(id) {
                for p in mesh.element_corners(e) {
                    let d = node.sphere.center.distance(p);
                    assert!(
                        d <= node.sphere.radius * (1.0 + 1e-12),
                        "vertex escapes sphere: {} > {}",
                        d,
                        node.sphere.radius
                    );
                }
            }
            // Size contract.
            if let KdNodeKind::Split { left, right, .. } = node.kind {
                let l = tree.node(left).n_elements() as i64;
                let r = tree.node(right).n_elements() as i64;
                assert!((l - r).abs() <= 1, "unbalanced split: {l} vs {r}");
            }
        }

        let n = mesh.n_elements() as f64;
        assert!(tree.depth() <= n.log2().ceil() as usize + 1);
    }

    #[test]
    fn invariants_on_box_meshes() {
        for n in [2, 5, 8, 16] {
            let mesh =
                build_box_mesh(Point3::new(-2.0, -2.0, -2.0), Point3::new(2.0, 2.0, 2.0), n)
                    .unwrap();
            let tree = build_kdtree(&mesh).unwrap();
            check_invariants(&mesh, &tree);
        }
    }

    #[test]
    fn invariants_on_perturbed_mesh() {
        let mesh = build_box_mesh(Point3::new(-2.0, -2.0, -2.0), Point3::new(2.0, 2.0, 2.0), 8)
            .unwrap()
            .apply_sinusoidal_perturbation();
        let tree = build_kdtree(&mesh).unwrap();
        check_invariants(&mesh, &tree);
    }

    #[test]
    fn deterministic_build() {
        let mesh = build_box_mesh(Point3::new(-2.0, -2.0, -2.0), Point3::new(2.0, 2.0, 2.0), 6)
            .unwrap()
            .apply_sinusoidal_perturbation();
        let t1 = build_kdtree(&mesh).unwrap();
        let t2 = build_kdtree(&mesh).unwrap();
        assert_eq!(t1.n_nodes(), t2.n_nodes());
        for id in 0..t1.n_nodes() {
            let (a, b) = (t1.node(id), t2.node(id));
            assert_eq!(a.sphere.center, b.sphere.center);
            assert_eq!(a.sphere.radius, b.sphere.radius);
            assert_eq!(t1.node_elements(id), t2.node_elements(id));
        }
    }
}
