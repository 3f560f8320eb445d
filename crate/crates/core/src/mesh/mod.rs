//! Linear simplex meshes, their promotion to mixed quadratic/linear meshes,
//! and element-size metrics.

mod generate;
mod geometry;
mod io;
pub(crate) mod quadratic;
mod size;

pub use generate::{channel, nozzle, pipe, unit_square, ChannelSpec, NozzleSpec, PipeSpec};
pub use geometry::{BoundaryGeometry, Surface};
pub use io::{load_mesh, read_native, read_vtk, write_native, MeshFormat};
pub use quadratic::{promote_to_quadratic, QuadraticMesh};
pub use size::{element_size, minimal_enclosing_diameter, ElementSizes};

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

pub type Point = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatchKind {
    Dirichlet,
    Neumann,
    /// No-slip wall: a Dirichlet patch with identically zero data.
    Wall,
}

impl PatchKind {
    pub fn is_dirichlet(self) -> bool {
        matches!(self, PatchKind::Dirichlet | PatchKind::Wall)
    }
}

impl fmt::Display for PatchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatchKind::Dirichlet => "dirichlet",
            PatchKind::Neumann => "neumann",
            PatchKind::Wall => "wall",
        })
    }
}

impl FromStr for PatchKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" => Ok(PatchKind::Dirichlet),
            "neumann" => Ok(PatchKind::Neumann),
            "wall" => Ok(PatchKind::Wall),
            other => Err(Error::Invalid(format!("unknown patch kind '{other}'"))),
        }
    }
}

/// Named set of boundary faces (edges in 2D, triangles in 3D).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPatch {
    pub name: String,
    pub kind: PatchKind,
    /// Vertex tuples, `dim` entries each.
    pub faces: Vec<Vec<usize>>,
    /// Owning element of every face, filled in by validation.
    pub owners: Vec<usize>,
}

impl BoundaryPatch {
    pub fn new(name: impl Into<String>, kind: PatchKind, faces: Vec<Vec<usize>>) -> Self {
        Self {
            name: name.into(),
            kind,
            faces,
            owners: Vec::new(),
        }
    }
}

/// Unstructured triangle (2D) or tetrahedron (3D) mesh.
///
/// Construction through [`Mesh::new`] validates index ranges, orientation,
/// and that every patch face is a boundary face of exactly one element.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    nodes: Vec<Point>,
    /// Flat connectivity, `dim + 1` vertices per element.
    elements: Vec<usize>,
    patches: Vec<BoundaryPatch>,
}

impl Mesh {
    pub fn new(
        dim: usize,
        nodes: Vec<Point>,
        elements: Vec<usize>,
        patches: Vec<BoundaryPatch>,
    ) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Unsupported(format!("mesh dimension {dim}")));
        }
        if !elements.len().is_multiple_of(dim + 1) {
            return Err(Error::Invalid(
                "element connectivity length is not a multiple of dim+1".into(),
            ));
        }
        let mut mesh = Self {
            dim,
            nodes,
            elements,
            patches,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&mut self) -> Result<()> {
        let n_nodes = self.nodes.len();
        let nv = self.dim + 1;
        for (e, verts) in self.elements.chunks(nv).enumerate() {
            if let Some(&bad) = verts.iter().find(|&&v| v >= n_nodes) {
                return Err(Error::DanglingNode {
                    element: e,
                    node: bad,
                    n_nodes,
                });
            }
        }
        for e in 0..self.n_elements() {
            let m = self.signed_measure(e);
            if !(m > 0.0) {
                return Err(Error::InvertedElement {
                    element: e,
                    measure: m,
                });
            }
        }
        // face -> (owner, count)
        let mut faces: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
        for e in 0..self.n_elements() {
            for f in self.element_faces(e) {
                let entry = faces.entry(sorted(&f)).or_insert((e, 0));
                entry.1 += 1;
            }
        }
        for patch in &mut self.patches {
            patch.owners.clear();
            for face in &patch.faces {
                if face.len() != self.dim || face.iter().any(|&v| v >= n_nodes) {
                    return Err(Error::BadBoundaryFace {
                        patch: patch.name.clone(),
                        face: face.clone(),
                    });
                }
                match faces.get(&sorted(face)) {
                    Some(&(owner, 1)) => patch.owners.push(owner),
                    _ => {
                        return Err(Error::BadBoundaryFace {
                            patch: patch.name.clone(),
                            face: face.clone(),
                        })
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len() / (self.dim + 1)
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.elements[e * nv..(e + 1) * nv]
    }

    pub fn elements(&self) -> impl Iterator<Item = &[usize]> {
        self.elements.chunks(self.dim + 1)
    }

    pub fn patches(&self) -> &[BoundaryPatch] {
        &self.patches
    }

    pub fn patch(&self, name: &str) -> Result<&BoundaryPatch> {
        self.patches
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::PatchNotFound(name.to_string()))
    }

    /// Faces of element `e` in local order; face `k` omits local vertex `k`.
    pub fn element_faces(&self, e: usize) -> Vec<Vec<usize>> {
        let verts = self.element(e);
        (0..verts.len())
            .map(|skip| {
                verts
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect()
            })
            .collect()
    }

    /// Signed area (2D) or volume (3D) of element `e`.
    pub fn signed_measure(&self, e: usize) -> f64 {
        let pts: Vec<Point> = self.element(e).iter().map(|&v| self.nodes[v]).collect();
        simplex_signed_measure(self.dim, &pts)
    }

    /// Largest distance between any two nodes.
    pub fn diameter(&self) -> f64 {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.nodes {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (0..3).map(|k| (hi[k] - lo[k]).powi(2)).sum::<f64>().sqrt()
    }

    /// Total measure (length/area) of a patch.
    pub fn patch_measure(&self, name: &str) -> Result<f64> {
        let patch = self.patch(name)?;
        Ok(patch
            .faces
            .iter()
            .map(|f| {
                let pts: Vec<Point> = f.iter().map(|&v| self.nodes[v]).collect();
                face_measure(self.dim, &pts)
            })
            .sum())
    }

    pub fn set_patch_kind(&mut self, name: &str, kind: PatchKind) -> Result<()> {
        let p = self
            .patches
            .iter_mut()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::PatchNotFound(name.to_string()))?;
        p.kind = kind;
        Ok(())
    }
}

pub(crate) fn sorted(v: &[usize]) -> Vec<usize> {
    let mut s = v.to_vec();
    s.sort_unstable();
    s
}

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot3(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm3(a: Point) -> f64 {
    dot3(a, a).sqrt()
}

pub(crate) fn simplex_signed_measure(dim: usize, pts: &[Point]) -> f64 {
    let a = sub(pts[1], pts[0]);
    let b = sub(pts[2], pts[0]);
    if dim == 2 {
        0.5 * (a[0] * b[1] - a[1] * b[0])
    } else {
        let c = sub(pts[3], pts[0]);
        dot3(a, cross(b, c)) / 6.0
    }
}

/// Length of an edge (2D) or area of a triangle (3D).
pub(crate) fn face_measure(dim: usize, pts: &[Point]) -> f64 {
    if dim == 2 {
        norm3(sub(pts[1], pts[0]))
    } else {
        0.5 * norm3(cross(sub(pts[1], pts[0]), sub(pts[2], pts[0])))
    }
}
