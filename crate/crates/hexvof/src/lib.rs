//! Volume-fraction insertion of implicit solid geometries into hexahedral meshes.
//!
//! The library converts a solid body, described only through two queries
//! (point containment and closest surface point), into a per-element
//! volume-fraction field on an unstructured hexahedral mesh. Insertion is
//! spatially accelerated by a k-d tree over element centroids with bounding
//! spheres per node, and boundary elements are resolved by adaptive octree
//! subdivision with a planar surface approximation at the finest level.
//!
//! Start with the runnable examples (`cargo run --example sphere_convergence`)
//! or the `hexvof` binary for the command-line workflow.

pub mod cli;
pub mod clip;
pub mod geometry;
pub mod hexmesh;
pub mod insertion;
pub mod spatial;
pub mod vtk;

pub use geometry::{Geometry, Point3, SphereClass, Vector3};
pub use hexmesh::{build_box_mesh, HexMesh, RefCoord};
pub use insertion::{
    insert_geometry, insert_geometry_exhaustive, InsertionConfig, InsertionStats, Method,
    VolumeFractionField,
};
pub use spatial::{build_kdtree, BoundingSphere, KdTree};

/// Errors surfaced by mesh construction, insertion, and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("no analytic volume for this geometry variant: {0}")]
    NoAnalyticVolume(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh has no elements")]
    EmptyMesh,

    #[error("degenerate element {element}: volume {volume}")]
    DegenerateElement { element: usize, volume: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("vtk format error: {0}")]
    VtkFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
