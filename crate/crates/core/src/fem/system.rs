use super::bc::{BoundaryData, PatchValue};
use super::operators::{DofMap, FluidProps, Operators, ViscousForm};
use super::quadrature::simplex_rule;
use super::shapes::quadratic_basis;
use crate::error::{Error, Result};
use crate::mesh::{face_measure, PatchKind, QuadraticMesh};
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;
use num_complex::Complex64;
use std::sync::Arc;

/// Block system `[[K, D], [D^T, 0]] X = R` restricted to the unknowns, with
/// the Dirichlet values it was lifted with.
#[derive(Debug, Clone)]
pub struct SaddleSystem<T> {
    pub matrix: CsrMatrix<T>,
    pub rhs: Vec<T>,
    /// Values of the constrained entries, in [`DofMap`] order.
    pub lift: Vec<T>,
    pub dofs: Arc<DofMap>,
}

pub type ComplexSaddleSystem = SaddleSystem<Complex64>;

impl<T: Scalar> SaddleSystem<T> {
    pub fn n_unknowns(&self) -> usize {
        self.rhs.len()
    }

    /// Full nodal vector (velocities then pressures) from unknowns.
    pub fn expand(&self, x: &[T]) -> Vec<T> {
        self.dofs.expand(x, &self.lift)
    }
}

impl Operators {
    /// System for operator weights `w` (viscous, mass, coupling) and
    /// boundary data.
    pub fn system<T: Scalar>(
        &self,
        qmesh: &QuadraticMesh,
        w: [T; 3],
        data: &BoundaryData<T>,
    ) -> Result<SaddleSystem<T>> {
        let lift = dirichlet_values(qmesh, &self.dofs, data)?;
        let load = neumann_load(qmesh, data)?;
        let rhs = self.rhs_from(w, &load, &lift);
        Ok(SaddleSystem {
            matrix: self.uu.combine(w),
            rhs,
            lift,
            dofs: self.dofs.clone(),
        })
    }

    /// `R_u = B_u - A_uc G` given a velocity load over all velocity dofs.
    pub fn rhs_from<T: Scalar>(&self, w: [T; 3], load: &[T], lift: &[T]) -> Vec<T> {
        let lifted = self.uc.mul_vec_weighted(w, lift);
        self.dofs
            .unknown_to_full()
            .iter()
            .zip(lifted)
            .map(|(&f, l)| if f < load.len() { load[f] - l } else { -l })
            .collect()
    }

    /// Rows of the full operator at the constrained entries applied to a
    /// full solution vector; with the boundary load subtracted these are the
    /// reaction forces.
    pub fn constrained_rows<T: Scalar>(&self, w: [T; 3], full: &[T]) -> Vec<T> {
        self.cf.mul_vec_weighted(w, full)
    }

    /// Frequency-domain system of one mode.
    pub fn mode_system(
        &self,
        qmesh: &QuadraticMesh,
        props: &FluidProps,
        omega: f64,
        data: &BoundaryData<Complex64>,
    ) -> Result<ComplexSaddleSystem> {
        if !(omega >= 0.0) {
            return Err(Error::Invalid(format!("negative frequency {omega}")));
        }
        self.system(qmesh, Operators::mode_weights(props, omega), data)
    }
}

/// One-shot assembly of a mode system with the full-gradient viscous form.
pub fn assemble_mode_system(
    qmesh: &QuadraticMesh,
    props: &FluidProps,
    omega: f64,
    data: &BoundaryData<Complex64>,
) -> Result<ComplexSaddleSystem> {
    Operators::assemble(qmesh, ViscousForm::Full)?.mode_system(qmesh, props, omega, data)
}

fn check_kinds<T: Scalar>(qmesh: &QuadraticMesh, data: &BoundaryData<T>) -> Result<()> {
    let mesh = qmesh.linear();
    for (name, kind, set) in [
        ("dirichlet", PatchKind::Dirichlet, &data.dirichlet),
        ("neumann", PatchKind::Neumann, &data.neumann),
    ] {
        for patch in set.keys() {
            let p = mesh.patch(patch)?;
            if p.kind != kind {
                return Err(Error::PatchKind {
                    patch: patch.clone(),
                    expected: name.into(),
                    actual: p.kind.to_string(),
                });
            }
        }
    }
    for p in mesh.patches() {
        if p.kind == PatchKind::Dirichlet && !data.dirichlet.contains_key(&p.name) {
            return Err(Error::Invalid(format!(
                "no boundary data for Dirichlet patch '{}'",
                p.name
            )));
        }
    }
    Ok(())
}

/// Prescribed values of the constrained entries: Dirichlet patch data,
/// zero on walls (walls win at shared nodes) and at a pinned pressure.
pub fn dirichlet_values<T: Scalar>(
    qmesh: &QuadraticMesh,
    dofs: &DofMap,
    data: &BoundaryData<T>,
) -> Result<Vec<T>> {
    check_kinds(qmesh, data)?;
    let dim = qmesh.dim();
    let mut lift = vec![T::zero(); dofs.n_constrained()];
    for (patch, value) in &data.dirichlet {
        for node in qmesh.patch_nodes(patch)? {
            let v = match value {
                PatchValue::Uniform(v) => *v,
                PatchValue::Nodal(m) => *m.get(&node).ok_or_else(|| {
                    Error::Invalid(format!("patch '{patch}' has no value at node {node}"))
                })?,
            };
            for c in 0..dim {
                let k = dofs
                    .constrained(dofs.velocity_dof(node, c))
                    .expect("Dirichlet dof");
                lift[k] = v[c];
            }
        }
    }
    for p in qmesh.linear().patches() {
        if p.kind == PatchKind::Wall {
            for node in qmesh.patch_nodes(&p.name)? {
                for c in 0..dim {
                    let k = dofs
                        .constrained(dofs.velocity_dof(node, c))
                        .expect("wall dof");
                    lift[k] = T::zero();
                }
            }
        }
    }
    Ok(lift)
}

/// Sum of the traction loads of all Neumann patches, over all velocity dofs.
pub fn neumann_load<T: Scalar>(qmesh: &QuadraticMesh, data: &BoundaryData<T>) -> Result<Vec<T>> {
    check_kinds(qmesh, data)?;
    let mut load = vec![T::zero(); qmesh.n_velocity_nodes() * qmesh.dim()];
    for (patch, value) in &data.neumann {
        if value.is_zero() {
            continue;
        }
        let part = boundary_traction_load(qmesh, patch, value)?;
        for (l, p) in load.iter_mut().zip(part) {
            *l += p;
        }
    }
    Ok(load)
}

/// Consistent load `∫ M_A h dΓ` of a traction on one Neumann patch, over all
/// velocity dofs.
pub fn boundary_traction_load<T: Scalar>(
    qmesh: &QuadraticMesh,
    patch: &str,
    value: &PatchValue<T>,
) -> Result<Vec<T>> {
    let dim = qmesh.dim();
    let p = qmesh.linear().patch(patch)?;
    if p.kind != PatchKind::Neumann {
        return Err(Error::PatchKind {
            patch: patch.into(),
            expected: "neumann".into(),
            actual: p.kind.to_string(),
        });
    }
    let fdim = dim - 1;
    let rule = simplex_rule(fdim, 4)?;
    let ref_measure = if fdim == 1 { 1.0 } else { 0.5 };
    let tables: Vec<Vec<f64>> = rule
        .bary
        .iter()
        .map(|b| quadratic_basis(fdim, b).0)
        .collect();
    let mut load = vec![T::zero(); qmesh.n_velocity_nodes() * dim];
    for face in &p.faces {
        let nodes = qmesh.face_nodes(face);
        let pts: Vec<_> = face.iter().map(|&v| qmesh.node(v)).collect();
        let jac = face_measure(dim, &pts) / ref_measure;
        let nodal: Option<Vec<[T; 3]>> = match value {
            PatchValue::Uniform(_) => None,
            PatchValue::Nodal(m) => Some(
                nodes
                    .iter()
                    .map(|n| {
                        m.get(n).copied().ok_or_else(|| {
                            Error::Invalid(format!("patch '{patch}' has no traction at node {n}"))
                        })
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        for (q, m) in tables.iter().enumerate() {
            let w = rule.weights[q] * jac;
            let h = match (&nodal, value) {
                (Some(nv), _) => {
                    let mut h = [T::zero(); 3];
                    for (a, ma) in m.iter().enumerate() {
                        for c in 0..dim {
                            h[c] += nv[a][c].scale(*ma);
                        }
                    }
                    h
                }
                (None, PatchValue::Uniform(v)) => *v,
                (None, PatchValue::Nodal(_)) => unreachable!(),
            };
            for (a, &node) in nodes.iter().enumerate() {
                for c in 0..dim {
                    load[node * dim + c] += h[c].scale(w * m[a]);
                }
            }
        }
    }
    Ok(load)
}
