use super::{BoundaryGeometry, Mesh, Point};
use crate::error::{Error, Result};
use crate::fem::{quadratic_basis, simplex_rule};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Local vertex pairs of the mid-edge nodes, in the VTK quadratic-cell order.
pub(crate) const TRI_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];
pub(crate) const TET_EDGES: [[usize; 2]; 6] = [[0, 1], [1, 2], [2, 0], [0, 3], [1, 3], [2, 3]];

pub(crate) fn local_edges(dim: usize) -> &'static [[usize; 2]] {
    if dim == 2 {
        &TRI_EDGES
    } else {
        &TET_EDGES
    }
}

/// Mixed quadratic-velocity / linear-pressure mesh.
///
/// Velocity nodes are the input vertices followed by one node per unique
/// edge. Pressure nodes are the vertices, so pressure node `i` and velocity
/// node `i` share a location for `i < n_vertices`.
#[derive(Debug, Clone)]
pub struct QuadraticMesh {
    linear: Mesh,
    nodes: Vec<Point>,
    edges: Vec<[usize; 2]>,
    edge_lookup: HashMap<(usize, usize), usize>,
    velocity_conn: Vec<usize>,
}

/// Inserts a node at every edge midpoint and moves boundary midpoints on
/// curved patches onto their surface.
pub fn promote_to_quadratic(mesh: &Mesh, geom: &BoundaryGeometry) -> Result<QuadraticMesh> {
    for (name, _) in geom.iter() {
        mesh.patch(name)?;
    }
    let dim = mesh.dim();
    let nv = mesh.n_nodes();
    let local = local_edges(dim);

    let mut unique: BTreeSet<(usize, usize)> = BTreeSet::new();
    for verts in mesh.elements() {
        for &[a, b] in local {
            let (p, q) = (verts[a].min(verts[b]), verts[a].max(verts[b]));
            unique.insert((p, q));
        }
    }
    let edges: Vec<[usize; 2]> = unique.iter().map(|&(a, b)| [a, b]).collect();
    let edge_lookup: HashMap<(usize, usize), usize> = unique
        .iter()
        .enumerate()
        .map(|(k, &pair)| (pair, nv + k))
        .collect();

    let mut nodes = mesh.nodes().to_vec();
    for &[a, b] in &edges {
        let (pa, pb) = (nodes[a], nodes[b]);
        nodes.push([
            0.5 * (pa[0] + pb[0]),
            0.5 * (pa[1] + pb[1]),
            0.5 * (pa[2] + pb[2]),
        ]);
    }

    let per = if dim == 2 { 6 } else { 10 };
    let mut velocity_conn = Vec::with_capacity(mesh.n_elements() * per);
    for verts in mesh.elements() {
        velocity_conn.extend_from_slice(verts);
        for &[a, b] in local {
            let key = (verts[a].min(verts[b]), verts[a].max(verts[b]));
            velocity_conn.push(edge_lookup[&key]);
        }
    }

    let mut q = QuadraticMesh {
        linear: mesh.clone(),
        nodes,
        edges,
        edge_lookup,
        velocity_conn,
    };

    // Only boundary mid-edge nodes on curved patches move.
    let mut moved: BTreeMap<usize, &str> = BTreeMap::new();
    for patch in mesh.patches() {
        if geom.surface(&patch.name).is_none() {
            continue;
        }
        for face in &patch.faces {
            for node in q.face_nodes(face).into_iter().skip(dim) {
                moved.entry(node).or_insert(&patch.name);
            }
        }
    }
    for (&node, &patch) in &moved {
        q.nodes[node] = geom.project(patch, node, q.nodes[node])?;
    }
    if !moved.is_empty() {
        q.check_positive_jacobians()?;
    }
    Ok(q)
}

impl QuadraticMesh {
    pub fn dim(&self) -> usize {
        self.linear.dim()
    }

    pub fn linear(&self) -> &Mesh {
        &self.linear
    }

    pub fn n_elements(&self) -> usize {
        self.linear.n_elements()
    }

    pub fn n_vertices(&self) -> usize {
        self.linear.n_nodes()
    }

    pub fn n_pressure_nodes(&self) -> usize {
        self.linear.n_nodes()
    }

    pub fn n_velocity_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Point {
        self.nodes[i]
    }

    pub fn nodes_per_element(&self) -> usize {
        if self.dim() == 2 {
            6
        } else {
            10
        }
    }

    pub fn velocity_nodes(&self, e: usize) -> &[usize] {
        let n = self.nodes_per_element();
        &self.velocity_conn[e * n..(e + 1) * n]
    }

    pub fn pressure_nodes(&self, e: usize) -> &[usize] {
        self.linear.element(e)
    }

    pub fn edge_node(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&(a.min(b), a.max(b))).copied()
    }

    /// Vertex coordinates of element `e` (straight-sided geometry).
    pub fn vertex_coords(&self, e: usize) -> Vec<Point> {
        self.linear
            .element(e)
            .iter()
            .map(|&v| self.nodes[v])
            .collect()
    }

    /// Quadratic nodes of a boundary face: its vertices in the given order,
    /// then the mid-edge nodes ((0,1) for an edge; (0,1), (1,2), (2,0) for a
    /// triangle).
    pub fn face_nodes(&self, face: &[usize]) -> Vec<usize> {
        let mut out = face.to_vec();
        if face.len() == 2 {
            out.push(self.edge_node(face[0], face[1]).expect("face edge exists"));
        } else {
            for &[a, b] in &TRI_EDGES {
                out.push(self.edge_node(face[a], face[b]).expect("face edge exists"));
            }
        }
        out
    }

    /// Velocity nodes lying on any Dirichlet or wall patch.
    pub fn dirichlet_nodes(&self) -> BTreeSet<usize> {
        let mut set = BTreeSet::new();
        for patch in self.linear.patches() {
            if patch.kind.is_dirichlet() {
                for f in &patch.faces {
                    set.extend(self.face_nodes(f));
                }
            }
        }
        set
    }

    /// Velocity nodes on one patch.
    pub fn patch_nodes(&self, name: &str) -> Result<BTreeSet<usize>> {
        let patch = self.linear.patch(name)?;
        let mut set = BTreeSet::new();
        for f in &patch.faces {
            set.extend(self.face_nodes(f));
        }
        Ok(set)
    }

    fn check_positive_jacobians(&self) -> Result<()> {
        let dim = self.dim();
        let rule = simplex_rule(dim, 4)?;
        let mut probes: Vec<[f64; 4]> = rule.bary.clone();
        for k in 0..=dim {
            let mut b = [0.0; 4];
            b[k] = 1.0;
            probes.push(b);
        }
        for e in 0..self.n_elements() {
            let vn = self.velocity_nodes(e);
            for bary in &probes {
                let (_, grads) = quadratic_basis(dim, bary);
                // dx/dlambda_k for k = 1..dim with lambda_0 eliminated
                let mut jac = [[0.0; 3]; 3];
                for (a, &node) in vn.iter().enumerate() {
                    let x = self.nodes[node];
                    for r in 0..dim {
                        for c in 0..dim {
                            jac[r][c] += x[r] * (grads[a][c + 1] - grads[a][0]);
                        }
                    }
                }
                let det = if dim == 2 {
                    jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]
                } else {
                    jac[0][0] * (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1])
                        - jac[0][1] * (jac[1][0] * jac[2][2] - jac[1][2] * jac[2][0])
                        + jac[0][2] * (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0])
                };
                if !(det > 0.0) {
                    return Err(Error::InvertedElement {
                        element: e,
                        measure: det,
                    });
                }
            }
        }
        Ok(())
    }
}
