//! Command-line harness: declarative experiment specs, insertion and
//! convergence-study runners, quality reports, and CSV output.
//!
//! Everything here is also usable as a library; the `hexvof` binary is a
//! thin wrapper around [`run`].

use crate::geometry::{Geometry, Point3, Vector3};
use crate::hexmesh::{build_box_mesh, HexMesh};
use crate::insertion::{insert_geometry, total_volume, InsertionConfig, InsertionStats, Method};
use crate::spatial::{build_kdtree, KdTree};
use crate::vtk::write_legacy_vtk;
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// Geometry described by kind plus numeric parameters, as written in
/// config files or assembled from flags.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeometrySpec {
    Sphere { center: [f64; 3], radius: f64 },
    Capsule { a: [f64; 3], b: [f64; 3], radius: f64 },
    Box { lo: [f64; 3], hi: [f64; 3] },
    Torus { center: [f64; 3], axis: [f64; 3], major_radius: f64, minor_radius: f64 },
}

fn point(c: [f64; 3]) -> Point3 {
    Point3::new(c[0], c[1], c[2])
}

impl GeometrySpec {
    pub fn build(&self) -> Result<Geometry> {
        match *self {
            GeometrySpec::Sphere { center, radius } => Geometry::sphere(point(center), radius),
            GeometrySpec::Capsule { a, b, radius } => Geometry::capsule(point(a), point(b), radius),
            GeometrySpec::Box { lo, hi } => Geometry::cuboid(point(lo), point(hi)),
            GeometrySpec::Torus { center, axis, major_radius, minor_radius } => Geometry::torus(
                point(center),
                Vector3::new(axis[0], axis[1], axis[2]),
                major_radius,
                minor_radius,
            ),
        }
    }
}

/// Mesh coordinate transforms, applied in listed order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    Sinusoidal,
    ShearScaling,
}

impl std::str::FromStr for TransformKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sinusoidal" => Ok(TransformKind::Sinusoidal),
            "shear_scaling" => Ok(TransformKind::ShearScaling),
            other => Err(format!("unknown transform {other:?} (expected sinusoidal or shear_scaling)")),
        }
    }
}

/// Generated box mesh plus an optional transform chain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeshSpec {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub n: usize,
    #[serde(default)]
    pub transforms: Vec<TransformKind>,
}

impl MeshSpec {
    pub fn build(&self) -> Result<HexMesh> {
        let mut mesh = build_box_mesh(point(self.lo), point(self.hi), self.n)?;
        for t in &self.transforms {
            mesh = match t {
                TransformKind::Sinusoidal => mesh.apply_sinusoidal_perturbation(),
                TransformKind::ShearScaling => mesh.apply_shear_scaling(),
            };
        }
        Ok(mesh)
    }
}

/// A full experiment: geometry, mesh, method, subdivision depth(s), and
/// output destinations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub geometry: GeometrySpec,
    pub mesh: MeshSpec,
    pub method: Method,
    #[serde(default)]
    pub n_sub: Option<u32>,
    /// Inclusive range of subdivision depths for convergence studies.
    #[serde(default)]
    pub n_sub_range: Option<[u32; 2]>,
    #[serde(default)]
    pub out_vtk: Option<PathBuf>,
    #[serde(default)]
    pub out_csv: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
    /// Recorded for reproducibility of randomized test utilities; all
    /// runtime paths are deterministic and ignore it.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ExperimentSpec {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{path:?}: {e}")))
    }

    fn single_depth(&self) -> Result<u32> {
        self.n_sub
            .ok_or_else(|| Error::InvalidConfig("n_sub is required (use --nsub K)".into()))
    }

    fn depth_range(&self) -> Result<(u32, u32)> {
        if let Some([lo, hi]) = self.n_sub_range {
            if lo > hi {
                return Err(Error::InvalidConfig(format!(
                    "n_sub range must be ascending, got {lo}..{hi}"
                )));
            }
            return Ok((lo, hi));
        }
        let n = self.single_depth()?;
        Ok((n, n))
    }
}

/// Run a closure on a rayon pool with the requested worker count, or on
/// the ambient pool when no count is set.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Insert the geometry once and write the field plus statistics.
pub fn run_insert(spec: &ExperimentSpec) -> Result<InsertionStats> {
    let geometry = spec.geometry.build()?;
    let mesh = spec.mesh.build()?;
    let n_sub = spec.single_depth()?;
    let cfg = InsertionConfig::new(n_sub, spec.method)?;
    let tree = build_kdtree(&mesh)?;
    let (field, stats) =
        with_threads(spec.threads, || insert_geometry(&mesh, &tree, &geometry, &cfg))??;

    if let Some(path) = &spec.out_vtk {
        write_legacy_vtk(path, &mesh, Some(("volume_fraction", field.values())))?;
    }
    if let Some(path) = &spec.out_csv {
        write_stats_csv(path, &stats)?;
    }
    print_stats(&stats);
    Ok(stats)
}

/// One measured point of a convergence study.
#[derive(Clone, Copy, Debug)]
pub struct ConvergenceRow {
    pub n_sub: u32,
    /// Nominal finest-level sample count per element, (2^n_sub)^3.
    pub n_s: u64,
    pub rel_error: f64,
    pub seconds: f64,
}

/// Measure the relative volume error for every depth in `lo..=hi`.
pub fn convergence_rows(
    mesh: &HexMesh,
    tree: &KdTree,
    geometry: &Geometry,
    method: Method,
    depths: (u32, u32),
) -> Result<Vec<ConvergenceRow>> {
    let exact = geometry.exact_volume()?;
    let mut rows = Vec::new();
    for n_sub in depths.0..=depths.1 {
        let cfg = InsertionConfig::new(n_sub, method)?;
        let (field, stats) = insert_geometry(mesh, tree, geometry, &cfg)?;
        let inserted = total_volume(&field, mesh);
        rows.push(ConvergenceRow {
            n_sub,
            n_s: 8u64.pow(n_sub),
            rel_error: (exact - inserted).abs() / exact,
            seconds: stats.insert_seconds,
        });
    }
    Ok(rows)
}

/// Least-squares slope of y against x.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (x, y) in points {
        cov += (x - mean_x) * (y - mean_y);
        var += (x - mean_x) * (x - mean_x);
    }
    cov / var
}

/// Fitted slope of log(rel_error) against log(subhex size) over the last
/// `window` rows; `None` when fewer than two rows are available.
pub fn convergence_slope(rows: &[ConvergenceRow], window: usize) -> Option<f64> {
    if rows.len() < 2 {
        return None;
    }
    let tail = &rows[rows.len().saturating_sub(window)..];
    let points: Vec<(f64, f64)> = tail
        .iter()
        .map(|r| {
            let size = 0.5f64.powi(r.n_sub as i32);
            (size.ln(), r.rel_error.max(1e-300).ln())
        })
        .collect();
    Some(log_log_slope(&points))
}

/// Run a convergence study over the spec's depth range, writing one CSV
/// row per depth and printing the fitted slope of the last three rows.
pub fn run_convergence(spec: &ExperimentSpec) -> Result<(Vec<ConvergenceRow>, Option<f64>)> {
    let geometry = spec.geometry.build()?;
    let mesh = spec.mesh.build()?;
    let tree = build_kdtree(&mesh)?;
    let depths = spec.depth_range()?;
    let rows = with_threads(spec.threads, || {
        convergence_rows(&mesh, &tree, &geometry, spec.method, depths)
    })??;

    println!("n_sub,n_s,rel_error,seconds");
    for r in &rows {
        println!("{},{},{},{}", r.n_sub, r.n_s, fmt_f64(r.rel_error), fmt_f64(r.seconds));
    }
    let slope = convergence_slope(&rows, 3);
    if let Some(s) = slope {
        println!("slope (last {} rows): {:.4}", rows.len().min(3), s);
    }
    if let Some(path) = &spec.out_csv {
        write_convergence_csv(path, &rows)?;
    }
    Ok((rows, slope))
}

/// Histogram bin of scaled-Jacobian values, half-open (lo, hi].
#[derive(Clone, Copy, Debug)]
pub struct QualityBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Clone, Debug)]
pub struct QualityReport {
    pub bins: Vec<QualityBin>,
    pub min: f64,
    pub max: f64,
    /// Fraction of elements with quality in [0.014, 0.1].
    pub fraction_low_band: f64,
}

/// Scaled-Jacobian quality histogram of a generated mesh.
pub fn run_quality_report(mesh_spec: &MeshSpec, out_csv: Option<&Path>) -> Result<QualityReport> {
    let mesh = mesh_spec.build()?;
    let qualities: Vec<f64> = (0..mesh.n_elements()).map(|e| mesh.scaled_jacobian(e)).collect();
    let edges = [-1.0, 0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0];
    let mut bins: Vec<QualityBin> = edges
        .windows(2)
        .map(|w| QualityBin { lo: w[0], hi: w[1], count: 0 })
        .collect();
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut low_band = 0usize;
    for &q in &qualities {
        min = min.min(q);
        max = max.max(q);
        if (0.014..=0.1).contains(&q) {
            low_band += 1;
        }
        for bin in bins.iter_mut() {
            if (q > bin.lo || (q <= -1.0 && bin.lo == -1.0)) && q <= bin.hi {
                bin.count += 1;
                break;
            }
        }
    }
    let report = QualityReport {
        bins,
        min,
        max,
        fraction_low_band: low_band as f64 / qualities.len() as f64,
    };

    println!("elements: {}", qualities.len());
    println!("min quality: {}", fmt_f64(report.min));
    println!("max quality: {}", fmt_f64(report.max));
    println!("fraction in [0.014, 0.1]: {:.4}", report.fraction_low_band);
    println!("bin_lo,bin_hi,count");
    for b in &report.bins {
        println!("{},{},{}", fmt_f64(b.lo), fmt_f64(b.hi), b.count);
    }
    if let Some(path) = out_csv {
        let mut text = String::from("bin_lo,bin_hi,count\n");
        for b in &report.bins {
            text += &format!("{},{},{}\n", fmt_f64(b.lo), fmt_f64(b.hi), b.count);
        }
        fs::write(path, text)?;
    }
    Ok(report)
}

/// Floats in CSV output carry 17 significant digits, enough to round-trip
/// f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_convergence_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    let mut out = fs::File::create(path)?;
    writeln!(out, "n_sub,n_s,rel_error,seconds")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.n_sub, r.n_s, fmt_f64(r.rel_error), fmt_f64(r.seconds))?;
    }
    Ok(())
}

fn write_stats_csv(path: &Path, stats: &InsertionStats) -> Result<()> {
    let mut out = fs::File::create(path)?;
    writeln!(out, "total_hexes,hexes_hit,subhexes_hit,speedup,tree_build_seconds,insert_seconds")?;
    writeln!(
        out,
        "{},{},{},{},{},{}",
        stats.total_hexes,
        stats.hexes_hit,
        stats.subhexes_hit,
        stats.speedup.map_or_else(|| "na".to_string(), fmt_f64),
        fmt_f64(stats.tree_build_seconds),
        fmt_f64(stats.insert_seconds),
    )?;
    Ok(())
}

fn print_stats(stats: &InsertionStats) {
    println!("total hexes:        {}", stats.total_hexes);
    println!("hexes hit:          {}", stats.hexes_hit);
    println!("subhexes hit:       {}", stats.subhexes_hit);
    match stats.speedup {
        Some(s) => println!("speedup:            {s:.2}x"),
        None => println!("speedup:            n/a"),
    }
    println!("tree build seconds: {:.6}", stats.tree_build_seconds);
    println!("insert seconds:     {:.6}", stats.insert_seconds);
}

// ---------------------------------------------------------------------
// Flag parsing
// ---------------------------------------------------------------------

fn parse_triple(s: &str) -> std::result::Result<Triple, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected X,Y,Z but got {s:?}"));
    }
    let mut out = [0.0f64; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part.trim().parse().map_err(|e| format!("bad number {part:?}: {e}"))?;
    }
    Ok(Triple(out))
}

/// Newtype so clap treats X,Y,Z as one value.
#[derive(Clone, Copy, Debug)]
pub struct Triple(pub [f64; 3]);

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    match s {
        "amr" => Ok(Method::AmrPlane),
        "uniform" => Ok(Method::UniformSampling),
        other => Err(format!("unknown method {other:?} (expected amr or uniform)")),
    }
}

fn parse_transform(s: &str) -> std::result::Result<TransformKind, String> {
    s.parse()
}

fn parse_nsub_range(s: &str) -> std::result::Result<NsubRange, String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected K0..K1 but got {s:?}"))?;
    let lo: u32 = lo.trim().parse().map_err(|e| format!("bad depth {lo:?}: {e}"))?;
    let hi: u32 = hi.trim().parse().map_err(|e| format!("bad depth {hi:?}: {e}"))?;
    if lo > hi {
        return Err(format!("range must be ascending, got {lo}..{hi}"));
    }
    Ok(NsubRange([lo, hi]))
}

/// Inclusive subdivision-depth range `K0..K1`.
#[derive(Clone, Copy, Debug)]
pub struct NsubRange(pub [u32; 2]);

#[derive(Args, Debug)]
struct GeomArgs {
    /// Geometry kind: sphere | capsule | box | torus
    #[arg(long)]
    geom: Option<String>,
    /// Sphere or torus center as X,Y,Z
    #[arg(long, value_parser = parse_triple)]
    center: Option<Triple>,
    /// Sphere or capsule radius
    #[arg(long)]
    radius: Option<f64>,
    /// Capsule segment start as X,Y,Z
    #[arg(long, value_parser = parse_triple)]
    a: Option<Triple>,
    /// Capsule segment end as X,Y,Z
    #[arg(long, value_parser = parse_triple)]
    b: Option<Triple>,
    /// Box lower corner as X,Y,Z
    #[arg(long, value_parser = parse_triple)]
    lo: Option<Triple>,
    /// Box upper corner as X,Y,Z
    #[arg(long, value_parser = parse_triple)]
    hi: Option<Triple>,
    /// Torus axis as X,Y,Z
    #[arg(long, value_parser = parse_triple)]
    axis: Option<Triple>,
    /// Torus major radius
    #[arg(long)]
    major_radius: Option<f64>,
    /// Torus minor radius
    #[arg(long)]
    minor_radius: Option<f64>,
}

impl GeomArgs {
    fn to_spec(&self) -> Result<GeometrySpec> {
        let kind = self
            .geom
            .as_deref()
            .ok_or_else(|| Error::InvalidConfig("--geom is required (or use --config)".into()))?;
        let need = |name: &str, v: Option<Triple>| {
            v.map(|t| t.0)
                .ok_or_else(|| Error::InvalidConfig(format!("--{name} is required for --geom {kind}")))
        };
        let need_f = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| Error::InvalidConfig(format!("--{name} is required for --geom {kind}")))
        };
        match kind {
            "sphere" => Ok(GeometrySpec::Sphere {
                center: need("center", self.center)?,
                radius: need_f("radius", self.radius)?,
            }),
            "capsule" => Ok(GeometrySpec::Capsule {
                a: need("a", self.a)?,
                b: need("b", self.b)?,
                radius: need_f("radius", self.radius)?,
            }),
            "box" => Ok(GeometrySpec::Box { lo: need("lo", self.lo)?, hi: need("hi", self.hi)? }),
            "torus" => Ok(GeometrySpec::Torus {
                center: need("center", self.center)?,
                axis: need("axis", self.axis)?,
                major_radius: need_f("major-radius", self.major_radius)?,
                minor_radius: need_f("minor-radius", self.minor_radius)?,
            }),
            other => Err(Error::InvalidConfig(format!(
                "unknown geometry kind {other:?} (expected sphere, capsule, box, or torus)"
            ))),
        }
    }
}

#[derive(Args, Debug)]
struct MeshArgs {
    /// Mesh lower corner as X,Y,Z
    #[arg(long = "mesh-lo", value_parser = parse_triple)]
    mesh_lo: Option<Triple>,
    /// Mesh upper corner as X,Y,Z
    #[arg(long = "mesh-hi", value_parser = parse_triple)]
    mesh_hi: Option<Triple>,
    /// Elements per axis
    #[arg(long = "mesh-n")]
    mesh_n: Option<usize>,
    /// Coordinate transform (sinusoidal | shear_scaling); may repeat,
    /// applied in order
    #[arg(long = "transform", value_parser = parse_transform)]
    transform: Vec<TransformKind>,
}

impl MeshArgs {
    fn to_spec(&self) -> Result<MeshSpec> {
        let lo = self
            .mesh_lo
            .ok_or_else(|| Error::InvalidConfig("--mesh-lo is required (or use --config)".into()))?;
        let hi = self
            .mesh_hi
            .ok_or_else(|| Error::InvalidConfig("--mesh-hi is required (or use --config)".into()))?;
        let n = self
            .mesh_n
            .ok_or_else(|| Error::InvalidConfig("--mesh-n is required (or use --config)".into()))?;
        Ok(MeshSpec { lo: lo.0, hi: hi.0, n, transforms: self.transform.clone() })
    }
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Load the whole experiment from a TOML file instead of flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sampling method: amr | uniform
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    /// Output path for the VTK field
    #[arg(long = "out-vtk")]
    out_vtk: Option<PathBuf>,
    /// Output path for the CSV table
    #[arg(long = "out-csv")]
    out_csv: Option<PathBuf>,
    /// Worker thread count for the insertion stage
    #[arg(long)]
    threads: Option<usize>,
    /// Seed recorded for randomized test utilities; runtime output does
    /// not depend on it
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Parser, Debug)]
#[command(
    name = "hexvof",
    about = "Insert implicit solid geometries into hexahedral meshes as volume fractions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Insert a geometry once and write the volume-fraction field
    Insert {
        #[command(flatten)]
        geom: GeomArgs,
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Maximum subdivision depth
        #[arg(long)]
        nsub: Option<u32>,
    },
    /// Convergence study over a range of subdivision depths
    Converge {
        #[command(flatten)]
        geom: GeomArgs,
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Inclusive depth range K0..K1
        #[arg(long = "nsub-range", value_parser = parse_nsub_range)]
        nsub_range: Option<NsubRange>,
        /// Single depth (one CSV row, no slope)
        #[arg(long)]
        nsub: Option<u32>,
    },
    /// Scaled-Jacobian quality histogram of a generated mesh
    Quality {
        #[command(flatten)]
        mesh: MeshArgs,
        /// Output path for the histogram CSV
        #[arg(long = "out-csv")]
        out_csv: Option<PathBuf>,
    },
}

fn assemble_spec(
    geom: &GeomArgs,
    mesh: &MeshArgs,
    common: &CommonArgs,
    nsub: Option<u32>,
    nsub_range: Option<NsubRange>,
) -> Result<ExperimentSpec> {
    if let Some(path) = &common.config {
        let mut spec = ExperimentSpec::from_toml_file(path)?;
        // Output and runtime flags may override the file.
        if common.out_vtk.is_some() {
            spec.out_vtk = common.out_vtk.clone();
        }
        if common.out_csv.is_some() {
            spec.out_csv = common.out_csv.clone();
        }
        if common.threads.is_some() {
            spec.threads = common.threads;
        }
        if common.seed.is_some() {
            spec.seed = common.seed;
        }
        if nsub.is_some() {
            spec.n_sub = nsub;
        }
        if let Some(r) = nsub_range {
            spec.n_sub_range = Some(r.0);
        }
        return Ok(spec);
    }
    let method = common
        .method
        .ok_or_else(|| Error::InvalidConfig("--method is required (amr or uniform)".into()))?;
    Ok(ExperimentSpec {
        geometry: geom.to_spec()?,
        mesh: mesh.to_spec()?,
        method,
        n_sub: nsub,
        n_sub_range: nsub_range.map(|r| r.0),
        out_vtk: common.out_vtk.clone(),
        out_csv: common.out_csv.clone(),
        threads: common.threads,
        seed: common.seed,
    })
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Insert { geom, mesh, common, nsub } => {
            let spec = assemble_spec(&geom, &mesh, &common, nsub, None)?;
            run_insert(&spec)?;
        }
        Command::Converge { geom, mesh, common, nsub_range, nsub } => {
            let spec = assemble_spec(&geom, &mesh, &common, nsub, nsub_range)?;
            run_convergence(&spec)?;
        }
        Command::Quality { mesh, out_csv } => {
            run_quality_report(&mesh.to_spec()?, out_csv.as_deref())?;
        }
    }
    Ok(())
}

/// Entry point for the `hexvof` binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triple_and_range_parsing() {
        assert_eq!(parse_triple("1,2.5,-3").unwrap().0, [1.0, 2.5, -3.0]);
        assert!(parse_triple("1,2").is_err());
        assert_eq!(parse_nsub_range("0..5").unwrap().0, [0, 5]);
        assert!(parse_nsub_range("5..0").is_err());
        assert!(parse_nsub_range("3").is_err());
    }

    #[test]
    fn method_names() {
        assert_eq!(parse_method("amr").unwrap(), Method::AmrPlane);
        assert_eq!(parse_method("uniform").unwrap(), Method::UniformSampling);
        assert!(parse_method("exact").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
            method = "amr"
            n_sub = 2
            [geometry]
            kind = "sphere"
            center = [0.0, 0.0, 0.0]
            radius = 1.0
            [mesh]
            lo = [-2.0, -2.0, -2.0]
            hi = [2.0, 2.0, 2.0]
            n = 8
            transforms = ["sinusoidal"]
        "#;
        let spec: ExperimentSpec = toml::from_str(text).unwrap();
        assert_eq!(spec.method, Method::AmrPlane);
        assert_eq!(spec.n_sub, Some(2));
        assert!(matches!(spec.geometry, GeometrySpec::Sphere { radius, .. } if radius == 1.0));
        assert_eq!(spec.mesh.transforms, vec![TransformKind::Sinusoidal]);
        spec.geometry.build().unwrap();
        spec.mesh.build().unwrap();
    }

    #[test]
    fn slope_of_perfect_second_order_data() {
        // rel_error = C * size^2 must fit slope 2 exactly.
        let rows: Vec<ConvergenceRow> = (0..6)
            .map(|n| ConvergenceRow {
                n_sub: n,
                n_s: 8u64.pow(n),
                rel_error: 0.3 * 0.25f64.powi(n as i32),
                seconds: 0.0,
            })
            .collect();
        let slope = convergence_slope(&rows, 3).unwrap();
        assert!((slope - 2.0).abs() < 1e-12);
        assert!(convergence_slope(&rows[..1], 3).is_none());
    }

    #[test]
    fn csv_float_format_has_17_significant_digits() {
        let s = fmt_f64(std::f64::consts::PI);
        assert_eq!(s, "3.1415926535897931e0");
        let digits: usize = s
            .split('e')
            .next()
            .unwrap()
            .chars()
            .filter(|c| c.is_ascii_digit())
            .count();
        assert_eq!(digits, 17);
        // Round-trips exactly.
        assert_eq!(s.parse::<f64>().unwrap(), std::f64::consts::PI);
    }

    #[test]
    fn quality_report_on_unit_box() {
        let spec = MeshSpec { lo: [0.0; 3], hi: [1.0, 1.0, 1.0], n: 2, transforms: vec![] };
        let report = run_quality_report(&spec, None).unwrap();
        assert_eq!(report.min, 1.0);
        assert_eq!(report.max, 1.0);
        assert_eq!(report.fraction_low_band, 0.0);
        let total: usize = report.bins.iter().map(|b| b.count).sum();
        assert_eq!(total, 8);
    }
}
