//! Field snapshots: a native text format that round-trips exactly, and
//! legacy-VTK unstructured grids with quadratic cells.
//!
//! Native format:
//!
//! ```text
//! scvs-field 1
//! time <t>
//! dim <d>
//! velocity <n>
//! x y z u_0 .. u_{d-1}     (n lines, one per velocity node)
//! pressure <m>
//! p                        (m lines, one per pressure node)
//! ```

use crate::error::{Error, Result};
use crate::mesh::quadratic::local_edges;
use crate::mesh::{Point, QuadraticMesh};
use crate::registry::Registry;
use crate::spectral::RealField;
use std::fmt::Write as _;
use std::path::Path;

/// Real field at one instant together with its node coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub time: f64,
    pub dim: usize,
    pub nodes: Vec<Point>,
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
}

impl FieldSnapshot {
    pub fn new(qmesh: &QuadraticMesh, field: &RealField, time: f64) -> Result<Self> {
        let dim = qmesh.dim();
        if field.velocity.len() != qmesh.n_velocity_nodes() * dim
            || field.pressure.len() != qmesh.n_pressure_nodes()
        {
            return Err(Error::Invalid("field does not match the mesh".into()));
        }
        Ok(Self {
            time,
            dim,
            nodes: qmesh.nodes().to_vec(),
            velocity: field.velocity.clone(),
            pressure: field.pressure.clone(),
        })
    }
}

/// Shortest decimal form is not used: every value carries 17 significant
/// digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_native(snap: &FieldSnapshot) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scvs-field 1");
    let _ = writeln!(s, "time {}", num(snap.time));
    let _ = writeln!(s, "dim {}", snap.dim);
    let _ = writeln!(s, "velocity {}", snap.nodes.len());
    for (i, x) in snap.nodes.iter().enumerate() {
        let mut line = format!("{} {} {}", num(x[0]), num(x[1]), num(x[2]));
        for c in 0..snap.dim {
            line.push(' ');
            line.push_str(&num(snap.velocity[i * snap.dim + c]));
        }
        let _ = writeln!(s, "{line}");
    }
    let _ = writeln!(s, "pressure {}", snap.pressure.len());
    for p in &snap.pressure {
        let _ = writeln!(s, "{}", num(*p));
    }
    s
}

pub fn read_native(text: &str, path: &Path) -> Result<FieldSnapshot> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::parse(path, 0, format!("unexpected end of file reading {what}")))
    };
    let header = |(ln, l): (usize, &str), key: &str| -> Result<String> {
        l.strip_prefix(key)
            .map(|r| r.trim().to_string())
            .ok_or_else(|| Error::parse(path, ln, format!("expected '{key}'")))
    };
    let float = |ln: usize, t: &str| -> Result<f64> {
        t.parse()
            .map_err(|_| Error::parse(path, ln, format!("bad number '{t}'")))
    };
    let int = |ln: usize, t: &str| -> Result<usize> {
        t.parse()
            .map_err(|_| Error::parse(path, ln, format!("bad count '{t}'")))
    };
    let (ln, l) = next("header")?;
    if l != "scvs-field 1" {
        return Err(Error::parse(path, ln, "not a field snapshot"));
    }
    let l = next("time")?;
    let time = float(l.0, &header(l, "time")?)?;
    let l = next("dim")?;
    let dim = int(l.0, &header(l, "dim")?)?;
    if !(dim == 2 || dim == 3) {
        return Err(Error::parse(path, l.0, format!("dimension {dim}")));
    }
    let l = next("velocity")?;
    let n = int(l.0, &header(l, "velocity")?)?;
    let mut nodes = Vec::with_capacity(n);
    let mut velocity = Vec::with_capacity(n * dim);
    for _ in 0..n {
        let (ln, l) = next("velocity node")?;
        let v: Vec<f64> = l
            .split_whitespace()
            .map(|t| float(ln, t))
            .collect::<Result<_>>()?;
        if v.len() != 3 + dim {
            return Err(Error::parse(
                path,
                ln,
                format!("expected {} values", 3 + dim),
            ));
        }
        nodes.push([v[0], v[1], v[2]]);
        velocity.extend_from_slice(&v[3..]);
    }
    let l = next("pressure")?;
    let m = int(l.0, &header(l, "pressure")?)?;
    let mut pressure = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, l) = next("pressure value")?;
        pressure.push(float(ln, l)?);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::parse(path, ln, "trailing data"));
    }
    Ok(FieldSnapshot {
        time,
        dim,
        nodes,
        velocity,
        pressure,
    })
}

/// Legacy-VTK ASCII unstructured grid with quadratic triangles (type 22)
/// or tetrahedra (type 24). Pressure is interpolated linearly onto the
/// mid-edge nodes.
pub fn write_vtk(qmesh: &QuadraticMesh, snap: &FieldSnapshot) -> String {
    let dim = qmesh.dim();
    let n = qmesh.n_velocity_nodes();
    let mut p = vec![0.0; n];
    p[..snap.pressure.len()].copy_from_slice(&snap.pressure);
    for e in 0..qmesh.n_elements() {
        let vn = qmesh.velocity_nodes(e);
        for (k, [a, b]) in local_edges(dim).iter().enumerate() {
            p[vn[dim + 1 + k]] = 0.5 * (snap.pressure[vn[*a]] + snap.pressure[vn[*b]]);
        }
    }
    let npe = qmesh.nodes_per_element();
    let ne = qmesh.n_elements();
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "velocity and pressure at t = {}", num(snap.time));
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {n} double");
    for x in qmesh.nodes() {
        let _ = writeln!(s, "{} {} {}", num(x[0]), num(x[1]), num(x[2]));
    }
    let _ = writeln!(s, "CELLS {ne} {}", ne * (npe + 1));
    for e in 0..ne {
        let ids: Vec<String> = qmesh
            .velocity_nodes(e)
            .iter()
            .map(|v| v.to_string())
            .collect();
        let _ = writeln!(s, "{npe} {}", ids.join(" "));
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    let cell_type = if dim == 2 { 22 } else { 24 };
    for _ in 0..ne {
        let _ = writeln!(s, "{cell_type}");
    }
    let _ = writeln!(s, "POINT_DATA {n}");
    let _ = writeln!(s, "VECTORS velocity double");
    for i in 0..n {
        let u: Vec<String> = (0..3)
            .map(|c| {
                num(if c < dim {
                    snap.velocity[i * dim + c]
                } else {
                    0.0
                })
            })
            .collect();
        let _ = writeln!(s, "{}", u.join(" "));
    }
    let _ = writeln!(s, "SCALARS pressure double 1");
    let _ = writeln!(s, "LOOKUP_TABLE default");
    for v in p {
        let _ = writeln!(s, "{}", num(v));
    }
    s
}

/// Snapshot output format.
pub trait SnapshotWriter: Send + Sync {
    fn extension(&self) -> &'static str;
    fn render(&self, qmesh: &QuadraticMesh, snap: &FieldSnapshot) -> String;
}

struct Native;
struct Vtk;

impl SnapshotWriter for Native {
    fn extension(&self) -> &'static str {
        "field"
    }
    fn render(&self, _qmesh: &QuadraticMesh, snap: &FieldSnapshot) -> String {
        write_native(snap)
    }
}

impl SnapshotWriter for Vtk {
    fn extension(&self) -> &'static str {
        "vtk"
    }
    fn render(&self, qmesh: &QuadraticMesh, snap: &FieldSnapshot) -> String {
        write_vtk(qmesh, snap)
    }
}

pub fn snapshot_writers() -> Registry<dyn SnapshotWriter> {
    let mut r: Registry<dyn SnapshotWriter> = Registry::new("snapshot format");
    r.register("native", Box::new(Native));
    r.register("vtk", Box::new(Vtk));
    r
}

/// Writes `field` at `time` to `path` in the named format.
pub fn write_field_snapshot(
    qmesh: &QuadraticMesh,
    field: &RealField,
    time: f64,
    path: &Path,
    format: &str,
) -> Result<()> {
    let snap = FieldSnapshot::new(qmesh, field, time)?;
    let text = snapshot_writers().get(format)?.render(qmesh, &snap);
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_field_snapshot(path: &Path) -> Result<FieldSnapshot> {
    read_native(&std::fs::read_to_string(path)?, path)
}
