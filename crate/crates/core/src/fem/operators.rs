use super::shapes::{reference_shapes, ElementGeometry};
use crate::error::{Error, Result};
use crate::mesh::{PatchKind, QuadraticMesh};
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidProps {
    pub rho: f64,
    pub mu: f64,
}

impl FluidProps {
    pub fn new(rho: f64, mu: f64) -> Result<Self> {
        if !(rho > 0.0 && mu > 0.0) {
            return Err(Error::Invalid(format!(
                "density and viscosity must be positive (rho = {rho}, mu = {mu})"
            )));
        }
        Ok(Self { rho, mu })
    }

    pub fn nu(&self) -> f64 {
        self.mu / self.rho
    }
}

/// Bilinear form of the viscous term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ViscousForm {
    /// `mu grad(w) : grad(u)`
    #[default]
    Full,
    /// `mu grad(w) : (grad(u) + grad(u)^T)`
    Symmetric,
}

impl fmt::Display for ViscousForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViscousForm::Full => "full",
            ViscousForm::Symmetric => "symmetric",
        })
    }
}

impl FromStr for ViscousForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(ViscousForm::Full),
            "symmetric" => Ok(ViscousForm::Symmetric),
            _ => Err(Error::Invalid(format!("unknown viscous form '{s}'"))),
        }
    }
}

const NONE: usize = usize::MAX;

/// Numbering of the full degree-of-freedom vector (velocity components
/// interleaved per node, then pressures) and its split into unknowns and
/// constrained entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub dim: usize,
    pub n_velocity_nodes: usize,
    pub n_pressure_nodes: usize,
    full_to_unknown: Vec<usize>,
    full_to_constrained: Vec<usize>,
    unknown_to_full: Vec<usize>,
    constrained_to_full: Vec<usize>,
    n_velocity_unknowns: usize,
    pinned_pressure: Option<usize>,
}

impl DofMap {
    pub fn new(qmesh: &QuadraticMesh) -> Self {
        let dim = qmesh.dim();
        let nvel = qmesh.n_velocity_nodes();
        let np = qmesh.n_pressure_nodes();
        let n_full = nvel * dim + np;
        let mut constrained = vec![false; n_full];
        for node in qmesh.dirichlet_nodes() {
            for c in 0..dim {
                constrained[node * dim + c] = true;
            }
        }
        let has_neumann = qmesh
            .linear()
            .patches()
            .iter()
            .any(|p| p.kind == PatchKind::Neumann);
        let pinned_pressure = if has_neumann { None } else { Some(0) };
        if let Some(p) = pinned_pressure {
            constrained[nvel * dim + p] = true;
        }
        let mut full_to_unknown = vec![NONE; n_full];
        let mut full_to_constrained = vec![NONE; n_full];
        let mut unknown_to_full = Vec::new();
        let mut constrained_to_full = Vec::new();
        let mut n_velocity_unknowns = 0;
        for (f, &c) in constrained.iter().enumerate() {
            if c {
                full_to_constrained[f] = constrained_to_full.len();
                constrained_to_full.push(f);
            } else {
                full_to_unknown[f] = unknown_to_full.len();
                unknown_to_full.push(f);
                if f < nvel * dim {
                    n_velocity_unknowns += 1;
                }
            }
        }
        Self {
            dim,
            n_velocity_nodes: nvel,
            n_pressure_nodes: np,
            full_to_unknown,
            full_to_constrained,
            unknown_to_full,
            constrained_to_full,
            n_velocity_unknowns,
            pinned_pressure,
        }
    }

    pub fn n_full(&self) -> usize {
        self.full_to_unknown.len()
    }

    pub fn n_velocity_dofs(&self) -> usize {
        self.n_velocity_nodes * self.dim
    }

    pub fn n_unknowns(&self) -> usize {
        self.unknown_to_full.len()
    }

    pub fn n_velocity_unknowns(&self) -> usize {
        self.n_velocity_unknowns
    }

    pub fn n_constrained(&self) -> usize {
        self.constrained_to_full.len()
    }

    pub fn velocity_dof(&self, node: usize, comp: usize) -> usize {
        node * self.dim + comp
    }

    pub fn pressure_dof(&self, node: usize) -> usize {
        self.n_velocity_dofs() + node
    }

    pub fn unknown(&self, full: usize) -> Option<usize> {
        let u = self.full_to_unknown[full];
        (u != NONE).then_some(u)
    }

    pub fn constrained(&self, full: usize) -> Option<usize> {
        let c = self.full_to_constrained[full];
        (c != NONE).then_some(c)
    }

    pub fn unknown_to_full(&self) -> &[usize] {
        &self.unknown_to_full
    }

    pub fn constrained_to_full(&self) -> &[usize] {
        &self.constrained_to_full
    }

    pub fn pinned_pressure(&self) -> Option<usize> {
        self.pinned_pressure
    }

    /// Full vector from unknowns and constrained values.
    pub fn expand<T: Scalar>(&self, unknowns: &[T], constrained: &[T]) -> Vec<T> {
        let mut full = vec![T::zero(); self.n_full()];
        for (u, &f) in self.unknown_to_full.iter().enumerate() {
            full[f] = unknowns[u];
        }
        for (c, &f) in self.constrained_to_full.iter().enumerate() {
            full[f] = constrained[c];
        }
        full
    }

    /// Unknown entries of a full vector.
    pub fn restrict<T: Scalar>(&self, full: &[T]) -> Vec<T> {
        self.unknown_to_full.iter().map(|&f| full[f]).collect()
    }
}

/// Sparse matrix carrying three real components per entry (viscous, mass,
/// pressure coupling), combined with scalar weights on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr3 {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<[f64; 3]>,
}

impl Csr3 {
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn combine<T: Scalar>(&self, w: [T; 3]) -> CsrMatrix<T> {
        let values = self
            .vals
            .iter()
            .map(|v| w[0].scale(v[0]) + w[1].scale(v[1]) + w[2].scale(v[2]))
            .collect();
        CsrMatrix::from_raw(
            self.nrows,
            self.ncols,
            self.row_ptr.clone(),
            self.col_idx.clone(),
            values,
        )
    }

    /// `y = (w0 V + w1 M + w2 D) x` without forming the combination.
    pub fn mul_vec_weighted<T: Scalar>(&self, w: [T; 3], x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let v = self.vals[k];
                acc +=
                    (w[0].scale(v[0]) + w[1].scale(v[1]) + w[2].scale(v[2])) * x[self.col_idx[k]];
            }
            *yi = acc;
        }
        y
    }
}

/// Geometry-only system operators of a quadratic mesh, partitioned by a
/// [`DofMap`]: unknown-unknown, unknown-constrained (for the lift) and
/// constrained-full (for reactions).
#[derive(Debug, Clone)]
pub struct Operators {
    pub dofs: Arc<DofMap>,
    pub form: ViscousForm,
    pub uu: Csr3,
    pub uc: Csr3,
    pub cf: Csr3,
}

impl Operators {
    pub fn assemble(qmesh: &QuadraticMesh, form: ViscousForm) -> Result<Self> {
        let dofs = Arc::new(DofMap::new(qmesh));
        let full = assemble_full(qmesh, form, &dofs)?;
        let n_c = dofs.n_constrained();
        let n_u = dofs.n_unknowns();
        let mut uu = Builder::new(n_u);
        let mut uc = Builder::new(n_c);
        let mut cf = Builder::new(dofs.n_full());
        for row in 0..full.nrows {
            let range = full.row_ptr[row]..full.row_ptr[row + 1];
            if let Some(_u) = dofs.unknown(row) {
                for k in range {
                    let (col, v) = (full.col_idx[k], full.vals[k]);
                    if v == [0.0; 3] {
                        continue;
                    }
                    match dofs.unknown(col) {
                        Some(cu) => uu.push(cu, v),
                        None => uc.push(dofs.constrained(col).unwrap(), v),
                    }
                }
                uu.end_row();
                uc.end_row();
            } else {
                for k in range {
                    if full.vals[k] != [0.0; 3] {
                        cf.push(full.col_idx[k], full.vals[k]);
                    }
                }
                cf.end_row();
            }
        }
        Ok(Self {
            dofs,
            form,
            uu: uu.finish(),
            uc: uc.finish(),
            cf: cf.finish(),
        })
    }

    /// Weights `[mu, j omega rho, 1]` of the frequency-domain operator.
    pub fn mode_weights(props: &FluidProps, omega: f64) -> [num_complex::Complex64; 3] {
        use num_complex::Complex64 as C;
        [
            C::new(props.mu, 0.0),
            C::new(0.0, omega * props.rho),
            C::new(1.0, 0.0),
        ]
    }
}

struct Builder {
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<[f64; 3]>,
}

impl Builder {
    fn new(ncols: usize) -> Self {
        Self {
            ncols,
            row_ptr: vec![0],
            col_idx: Vec::new(),
            vals: Vec::new(),
        }
    }

    fn push(&mut self, col: usize, v: [f64; 3]) {
        self.col_idx.push(col);
        self.vals.push(v);
    }

    fn end_row(&mut self) {
        self.row_ptr.push(self.col_idx.len());
    }

    fn finish(self) -> Csr3 {
        Csr3 {
            nrows: self.row_ptr.len() - 1,
            ncols: self.ncols,
            row_ptr: self.row_ptr,
            col_idx: self.col_idx,
            vals: self.vals,
        }
    }
}

fn assemble_full(qmesh: &QuadraticMesh, form: ViscousForm, dofs: &DofMap) -> Result<Csr3> {
    let dim = qmesh.dim();
    let nvel = qmesh.n_velocity_nodes();
    let nvert = qmesh.n_vertices();
    let poff = nvel * dim;

    // velocity-node adjacency through shared elements
    let mut nbr: Vec<Vec<usize>> = vec![Vec::new(); nvel];
    for e in 0..qmesh.n_elements() {
        let vn = qmesh.velocity_nodes(e);
        for &a in vn {
            nbr[a].extend_from_slice(vn);
        }
    }
    for list in &mut nbr {
        list.sort_unstable();
        list.dedup();
    }
    let mut row_ptr = vec![0usize];
    let mut col_idx = Vec::new();
    for v in 0..nvel {
        for _ in 0..dim {
            for &w in &nbr[v] {
                col_idx.extend((0..dim).map(|j| w * dim + j));
            }
            col_idx.extend(nbr[v].iter().filter(|&&p| p < nvert).map(|&p| poff + p));
            row_ptr.push(col_idx.len());
        }
    }
    for p in 0..nvert {
        for &w in &nbr[p] {
            col_idx.extend((0..dim).map(|j| w * dim + j));
        }
        row_ptr.push(col_idx.len());
    }
    drop(nbr);
    let mut vals = vec![[0.0f64; 3]; col_idx.len()];
    debug_assert_eq!(row_ptr.len() - 1, dofs.n_full());

    let shapes = reference_shapes(dim, 4)?;
    let nm = shapes.n_velocity();
    let npn = dim + 1;
    let nq = shapes.n_points();
    let mut grads = vec![[0.0f64; 3]; nq * nm];
    let mut loc_vel = vec![[0.0f64; 3]; nm * dim * nm * dim];
    let mut loc_cpl = vec![0.0f64; nm * dim * npn];
    let mut col_pos = Vec::with_capacity(nm * dim + npn);

    for e in 0..qmesh.n_elements() {
        let geo = ElementGeometry::new(dim, &qmesh.vertex_coords(e));
        if !(geo.det.is_finite() && geo.det > 0.0) {
            return Err(Error::Numerical(format!(
                "element {e} has a degenerate Jacobian (det = {:e})",
                geo.det
            )));
        }
        let scale = geo.det.abs();
        for q in 0..nq {
            for a in 0..nm {
                grads[q * nm + a] = geo.grad(&shapes.m_bary_grads[q][a]);
            }
        }
        loc_vel.iter_mut().for_each(|v| *v = [0.0; 3]);
        loc_cpl.iter_mut().for_each(|v| *v = 0.0);
        let ld = nm * dim;
        for q in 0..nq {
            let w = shapes.rule.weights[q] * scale;
            let mq = &shapes.m_values[q];
            let gq = &grads[q * nm..(q + 1) * nm];
            for a in 0..nm {
                let ga = gq[a];
                for b in 0..nm {
                    let gb = gq[b];
                    let gg: f64 = (0..dim).map(|c| ga[c] * gb[c]).sum();
                    let mass = w * mq[a] * mq[b];
                    for i in 0..dim {
                        let r = (a * dim + i) * ld;
                        for j in 0..dim {
                            let mut visc = if i == j { gg } else { 0.0 };
                            if form == ViscousForm::Symmetric {
                                visc += ga[j] * gb[i];
                            }
                            let entry = &mut loc_vel[r + b * dim + j];
                            entry[0] += w * visc;
                            if i == j {
                                entry[1] += mass;
                            }
                        }
                    }
                }
                for (p, &np_) in shapes.n_values[q].iter().enumerate() {
                    for i in 0..dim {
                        loc_cpl[(a * dim + i) * npn + p] -= w * ga[i] * np_;
                    }
                }
            }
        }

        let vn = qmesh.velocity_nodes(e);
        let pn = qmesh.pressure_nodes(e);
        // velocity rows
        for a in 0..nm {
            for i in 0..dim {
                let row = vn[a] * dim + i;
                let (lo, hi) = (row_ptr[row], row_ptr[row + 1]);
                let cols = &col_idx[lo..hi];
                col_pos.clear();
                for b in 0..nm {
                    for j in 0..dim {
                        col_pos.push(lo + cols.binary_search(&(vn[b] * dim + j)).unwrap());
                    }
                }
                for &p in pn {
                    col_pos.push(lo + cols.binary_search(&(poff + p)).unwrap());
                }
                let r = (a * dim + i) * ld;
                for k in 0..ld {
                    let v = loc_vel[r + k];
                    let t = &mut vals[col_pos[k]];
                    t[0] += v[0];
                    t[1] += v[1];
                }
                for p in 0..npn {
                    vals[col_pos[ld + p]][2] += loc_cpl[(a * dim + i) * npn + p];
                }
            }
        }
        // continuity rows: transpose of the coupling block
        for (p, &pv) in pn.iter().enumerate() {
            let row = poff + pv;
            let (lo, hi) = (row_ptr[row], row_ptr[row + 1]);
            let cols = &col_idx[lo..hi];
            for a in 0..nm {
                for i in 0..dim {
                    let k = lo + cols.binary_search(&(vn[a] * dim + i)).unwrap();
                    vals[k][2] += loc_cpl[(a * dim + i) * npn + p];
                }
            }
        }
    }
    Ok(Csr3 {
        nrows: row_ptr.len() - 1,
        ncols: dofs.n_full(),
        row_ptr,
        col_idx,
        vals,
    })
}
