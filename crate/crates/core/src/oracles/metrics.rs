use crate::error::{Error, Result};
use crate::fem::{quadratic_basis, simplex_rule, ElementGeometry};
use crate::mesh::{cross, face_measure, norm3, sub, Point, QuadraticMesh};
use crate::scalar::Scalar;

/// Relative L2 error `‖u - u_h‖ / ‖u‖` of a nodal quadratic velocity field
/// (`dim` interleaved components per node) against an analytic field
/// evaluated at quadrature points.
pub fn field_error<T: Scalar>(
    qmesh: &QuadraticMesh,
    velocity: &[T],
    oracle: &dyn Fn(Point) -> Result<[T; 3]>,
) -> Result<f64> {
    let dim = qmesh.dim();
    if velocity.len() < qmesh.n_velocity_nodes() * dim {
        return Err(Error::Invalid(
            "velocity field shorter than the mesh".into(),
        ));
    }
    let rule = simplex_rule(dim, 8)?;
    let tables: Vec<Vec<f64>> = rule
        .bary
        .iter()
        .map(|b| quadratic_basis(dim, b).0)
        .collect();
    let (mut num, mut den) = (0.0, 0.0);
    for e in 0..qmesh.n_elements() {
        let verts = qmesh.vertex_coords(e);
        let geo = ElementGeometry::new(dim, &verts);
        let vn = qmesh.velocity_nodes(e);
        for (q, m) in tables.iter().enumerate() {
            let w = rule.weights[q] * geo.det.abs();
            let x = ElementGeometry::point(&verts, &rule.bary[q]);
            let exact = oracle(x)?;
            for c in 0..dim {
                let mut uh = T::zero();
                for (a, &node) in vn.iter().enumerate() {
                    uh += velocity[node * dim + c].scale(m[a]);
                }
                num += w * (exact[c] - uh).abs2();
                den += w * exact[c].abs2();
            }
        }
    }
    if den == 0.0 {
        return Err(Error::Numerical("reference field has zero norm".into()));
    }
    Ok((num / den).sqrt())
}

/// L2 norm of a nodal quadratic velocity field.
pub fn field_norm<T: Scalar>(qmesh: &QuadraticMesh, velocity: &[T]) -> Result<f64> {
    let dim = qmesh.dim();
    if velocity.len() < qmesh.n_velocity_nodes() * dim {
        return Err(Error::Invalid(
            "velocity field shorter than the mesh".into(),
        ));
    }
    let rule = simplex_rule(dim, 4)?;
    let tables: Vec<Vec<f64>> = rule
        .bary
        .iter()
        .map(|b| quadratic_basis(dim, b).0)
        .collect();
    let mut sum = 0.0;
    for e in 0..qmesh.n_elements() {
        let geo = ElementGeometry::new(dim, &qmesh.vertex_coords(e));
        let vn = qmesh.velocity_nodes(e);
        for (q, m) in tables.iter().enumerate() {
            let w = rule.weights[q] * geo.det.abs();
            for c in 0..dim {
                let mut uh = T::zero();
                for (a, &node) in vn.iter().enumerate() {
                    uh += velocity[node * dim + c].scale(m[a]);
                }
                sum += w * uh.abs2();
            }
        }
    }
    Ok(sum.sqrt())
}

/// Outward unit normal of a boundary face, oriented away from the owning
/// element's opposite vertex.
pub fn face_normal(qmesh: &QuadraticMesh, face: &[usize], owner: usize) -> Point {
    let mesh = qmesh.linear();
    let p: Vec<Point> = face.iter().map(|&v| mesh.nodes()[v]).collect();
    let mut n = if mesh.dim() == 2 {
        let t = sub(p[1], p[0]);
        [t[1], -t[0], 0.0]
    } else {
        cross(sub(p[1], p[0]), sub(p[2], p[0]))
    };
    let opposite = mesh
        .element(owner)
        .iter()
        .find(|v| !face.contains(v))
        .copied()
        .expect("owner has a vertex off the face");
    let d = sub(mesh.nodes()[opposite], p[0]);
    if n[0] * d[0] + n[1] * d[1] + n[2] * d[2] > 0.0 {
        n = n.map(|v| -v);
    }
    let len = norm3(n);
    n.map(|v| v / len)
}

/// Flux `∫ u·n dΓ` of a nodal quadratic velocity through a patch.
pub fn flow_rate<T: Scalar>(qmesh: &QuadraticMesh, velocity: &[T], patch: &str) -> Result<T> {
    let dim = qmesh.dim();
    let p = qmesh.linear().patch(patch)?;
    let fdim = dim - 1;
    let rule = simplex_rule(fdim, 4)?;
    let ref_measure = if fdim == 1 { 1.0 } else { 0.5 };
    let tables: Vec<Vec<f64>> = rule
        .bary
        .iter()
        .map(|b| quadratic_basis(fdim, b).0)
        .collect();
    let mut q = T::zero();
    for (face, &owner) in p.faces.iter().zip(&p.owners) {
        let n = face_normal(qmesh, face, owner);
        let nodes = qmesh.face_nodes(face);
        let pts: Vec<Point> = face.iter().map(|&v| qmesh.node(v)).collect();
        let jac = face_measure(dim, &pts) / ref_measure;
        for (k, m) in tables.iter().enumerate() {
            let w = rule.weights[k] * jac;
            for (a, &node) in nodes.iter().enumerate() {
                for c in 0..dim {
                    q += velocity[node * dim + c].scale(w * m[a] * n[c]);
                }
            }
        }
    }
    Ok(q)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(power_law_fit(x, y)?.0)
}

/// Fit `y = c x^s`, returning `(s, c)`.
pub fn power_law_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Invalid(
            "slope fit needs at least two paired samples".into(),
        ));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::Invalid("slope fit needs positive samples".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Invalid("slope fit needs distinct abscissae".into()));
    }
    let s = sxy / sxx;
    Ok((s, (my - s * mx).exp()))
}

/// Decomposition of a measured error into discretization, linear-solver and
/// truncation parts, with the constants of the corresponding bounds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorBudget {
    pub total: f64,
    pub discretization: f64,
    pub linear_solver: f64,
    pub truncation: f64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
}

impl ErrorBudget {
    pub fn new(
        total: f64,
        discretization: f64,
        linear_solver: f64,
        truncation: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("total", total),
            ("discretization", discretization),
            ("linear solver", linear_solver),
            ("truncation", truncation),
        ] {
            if !(v >= 0.0) {
                return Err(Error::Invalid(format!("{name} error {v} is negative")));
            }
        }
        Ok(Self {
            total,
            discretization,
            linear_solver,
            truncation,
            ..Self::default()
        })
    }
}

/// Smallest constant `C` with `errors[i] <= C * predictors[i]` for all `i`.
pub fn fit_bound_constant(errors: &[f64], predictors: &[f64]) -> Result<f64> {
    if errors.len() != predictors.len() || errors.is_empty() {
        return Err(Error::Invalid("constant fit needs paired samples".into()));
    }
    errors
        .iter()
        .zip(predictors)
        .map(|(e, p)| {
            if *p > 0.0 {
                Ok(e / p)
            } else {
                Err(Error::Invalid("non-positive predictor".into()))
            }
        })
        .try_fold(0.0f64, |acc, r| r.map(|v| acc.max(v)))
}
