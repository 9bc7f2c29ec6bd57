//! Legacy ASCII VTK unstructured-grid I/O for hexahedral meshes with an
//! optional scalar cell field. Coordinates are written with Rust's
//! shortest round-trip float formatting, so a written mesh reads back
//! bit-exactly.

use crate::geometry::Point3;
use crate::hexmesh::HexMesh;
use crate::{Error, Result};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

const HEXAHEDRON_CELL_TYPE: u32 = 12;

/// Write a mesh, optionally with one scalar per cell (e.g. the volume
/// fraction field), as a legacy ASCII VTK unstructured grid.
pub fn write_legacy_vtk(
    path: &Path,
    mesh: &HexMesh,
    cell_field: Option<(&str, &[f64])>,
) -> Result<()> {
    if let Some((_, values)) = cell_field {
        if values.len() != mesh.n_elements() {
            return Err(Error::VtkFormat(format!(
                "cell field has {} values for {} cells",
                values.len(),
                mesh.n_elements()
            )));
        }
    }
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "hexvof unstructured grid")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;

    writeln!(out, "POINTS {} double", mesh.n_vertices())?;
    for p in mesh.vertices() {
        writeln!(out, "{} {} {}", p.x, p.y, p.z)?;
    }

    writeln!(out, "CELLS {} {}", mesh.n_elements(), mesh.n_elements() * 9)?;
    for conn in mesh.elements() {
        write!(out, "8")?;
        for &v in conn {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }

    writeln!(out, "CELL_TYPES {}", mesh.n_elements())?;
    for _ in 0..mesh.n_elements() {
        writeln!(out, "{HEXAHEDRON_CELL_TYPE}")?;
    }

    if let Some((name, values)) = cell_field {
        writeln!(out, "CELL_DATA {}", mesh.n_elements())?;
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for v in values {
            writeln!(out, "{v}")?;
        }
    }
    out.flush()?;
    Ok(())
}

struct Tokens<'a> {
    tokens: Vec<&'a str>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str> {
        let tok = self
            .tokens
            .get(self.pos)
            .ok_or_else(|| bad(&format!("unexpected end of file, wanted {what}")))?;
        self.pos += 1;
        Ok(tok)
    }

    fn expect(&mut self, keyword: &str) -> Result<()> {
        let tok = self.next(keyword)?;
        if tok != keyword {
            return Err(bad(&format!("expected {keyword}, found {tok}")));
        }
        Ok(())
    }

    fn parse<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let tok = self.next(what)?;
        tok.parse().map_err(|_| bad(&format!("cannot parse {what} from token {tok:?}")))
    }

    fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).copied()
    }
}

/// Read a legacy ASCII VTK unstructured grid of hexahedra, returning the
/// mesh and the first scalar cell field if one is present.
pub fn read_legacy_vtk(path: &Path) -> Result<(HexMesh, Option<(String, Vec<f64>)>)> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    let mut lines = text.lines();

    let header = lines.next().ok_or_else(|| bad("missing header line"))?;
    if !header.starts_with("# vtk DataFile") {
        return Err(bad("not a legacy VTK file"));
    }
    let _title = lines.next().ok_or_else(|| bad("missing title line"))?;
    let format = lines.next().ok_or_else(|| bad("missing format line"))?;
    if format.trim() != "ASCII" {
        return Err(bad("only ASCII files are supported"));
    }
    let dataset = lines.next().ok_or_else(|| bad("missing dataset line"))?;
    if dataset.trim() != "DATASET UNSTRUCTURED_GRID" {
        return Err(bad("only DATASET UNSTRUCTURED_GRID is supported"));
    }

    // The remainder is whitespace-separated.
    let mut t = Tokens { tokens: lines.flat_map(str::split_whitespace).collect(), pos: 0 };

    t.expect("POINTS")?;
    let n_points: usize = t.parse("point count")?;
    let _dtype = t.next("point type")?;
    let mut vertices = Vec::with_capacity(n_points);
    for _ in 0..n_points {
        let x: f64 = t.parse("x")?;
        let y: f64 = t.parse("y")?;
        let z: f64 = t.parse("z")?;
        vertices.push(Point3::new(x, y, z));
    }

    t.expect("CELLS")?;
    let n_cells: usize = t.parse("cell count")?;
    let _list_len: usize = t.parse("cell list size")?;
    let mut elements = Vec::with_capacity(n_cells);
    for _ in 0..n_cells {
        let n: usize = t.parse("corner count")?;
        if n != 8 {
            return Err(bad(&format!("only 8-node hexahedra are supported, found {n}")));
        }
        let mut conn = [0usize; 8];
        for c in conn.iter_mut() {
            *c = t.parse("corner index")?;
        }
        elements.push(conn);
    }

    t.expect("CELL_TYPES")?;
    let n_types: usize = t.parse("type count")?;
    for _ in 0..n_types {
        let ty: u32 = t.parse("cell type")?;
        if ty != HEXAHEDRON_CELL_TYPE {
            return Err(bad(&format!("unsupported cell type {ty}")));
        }
    }

    // Optional scalar cell data.
    let mut field = None;
    if t.peek() == Some("CELL_DATA") {
        t.expect("CELL_DATA")?;
        let n: usize = t.parse("CELL_DATA count")?;
        t.expect("SCALARS")?;
        let name = t.next("field name")?.to_string();
        let _dtype = t.next("field type")?;
        // Optional component count before LOOKUP_TABLE.
        let tok = t.next("LOOKUP_TABLE")?;
        if tok != "LOOKUP_TABLE" {
            t.expect("LOOKUP_TABLE")?;
        }
        let _table = t.next("lookup table name")?;
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(t.parse("field value")?);
        }
        field = Some((name, values));
    }

    Ok((HexMesh::new(vertices, elements)?, field))
}

fn bad(msg: &str) -> Error {
    Error::VtkFormat(msg.to_string())
}
