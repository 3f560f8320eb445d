use super::quadrature::{simplex_rule, QuadratureRule};
use crate::error::Result;

fn local_edges(dim: usize) -> &'static [[usize; 2]] {
    match dim {
        1 => &[[0, 1]],
        2 => &crate::mesh::quadratic::TRI_EDGES,
        _ => &crate::mesh::quadratic::TET_EDGES,
    }
}

/// Quadratic Lagrange basis on a `dim`-simplex at barycentric point `b`.
/// Returns values and derivatives with respect to each barycentric
/// coordinate (treated as independent). Vertex functions come first, then
/// one function per edge in the VTK order.
pub fn quadratic_basis(dim: usize, b: &[f64; 4]) -> (Vec<f64>, Vec<[f64; 4]>) {
    let nv = dim + 1;
    let edges = local_edges(dim);
    let mut vals = Vec::with_capacity(nv + edges.len());
    let mut grads = Vec::with_capacity(nv + edges.len());
    for i in 0..nv {
        vals.push(b[i] * (2.0 * b[i] - 1.0));
        let mut g = [0.0; 4];
        g[i] = 4.0 * b[i] - 1.0;
        grads.push(g);
    }
    for &[i, j] in edges {
        vals.push(4.0 * b[i] * b[j]);
        let mut g = [0.0; 4];
        g[i] = 4.0 * b[j];
        g[j] = 4.0 * b[i];
        grads.push(g);
    }
    (vals, grads)
}

/// Linear basis values (the barycentric coordinates themselves).
pub fn linear_basis(dim: usize, b: &[f64; 4]) -> Vec<f64> {
    b[..=dim].to_vec()
}

/// Basis tables at the points of a quadrature rule.
#[derive(Debug, Clone)]
pub struct ShapeSet {
    pub dim: usize,
    pub rule: QuadratureRule,
    /// `m_values[q][a]`: quadratic velocity functions.
    pub m_values: Vec<Vec<f64>>,
    /// `m_bary_grads[q][a][k]`: derivative of `M_a` with respect to lambda_k.
    pub m_bary_grads: Vec<Vec<[f64; 4]>>,
    /// `n_values[q][a]`: linear pressure functions.
    pub n_values: Vec<Vec<f64>>,
}

impl ShapeSet {
    pub fn n_points(&self) -> usize {
        self.rule.len()
    }

    pub fn n_velocity(&self) -> usize {
        self.m_values.first().map_or(0, Vec::len)
    }

    pub fn n_pressure(&self) -> usize {
        self.dim + 1
    }

    /// Gradient of `M_a` in reference coordinates `xi_k = lambda_k`,
    /// `k = 1..=dim`, with `lambda_0 = 1 - sum(xi)`.
    pub fn m_ref_grad(&self, q: usize, a: usize) -> [f64; 3] {
        let g = &self.m_bary_grads[q][a];
        let mut out = [0.0; 3];
        for k in 0..self.dim {
            out[k] = g[k + 1] - g[0];
        }
        out
    }
}

pub fn reference_shapes(dim: usize, quadrature_order: usize) -> Result<ShapeSet> {
    let rule = simplex_rule(dim, quadrature_order)?;
    let mut m_values = Vec::with_capacity(rule.len());
    let mut m_bary_grads = Vec::with_capacity(rule.len());
    let mut n_values = Vec::with_capacity(rule.len());
    for b in &rule.bary {
        let (v, g) = quadratic_basis(dim, b);
        m_values.push(v);
        m_bary_grads.push(g);
        n_values.push(linear_basis(dim, b));
    }
    Ok(ShapeSet {
        dim,
        rule,
        m_values,
        m_bary_grads,
        n_values,
    })
}

/// Affine map of a straight-sided simplex.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub dim: usize,
    /// Physical measure (area or volume).
    pub measure: f64,
    /// Determinant of the reference-to-physical Jacobian.
    pub det: f64,
    /// Constant gradients of the barycentric coordinates.
    pub grad_lambda: [[f64; 3]; 4],
}

impl ElementGeometry {
    pub fn new(dim: usize, verts: &[[f64; 3]]) -> Self {
        let mut j = [[0.0; 3]; 3];
        for c in 0..dim {
            for r in 0..dim {
                j[r][c] = verts[c + 1][r] - verts[0][r];
            }
        }
        let (det, inv) = if dim == 2 {
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let inv = [
                [j[1][1] / det, -j[0][1] / det, 0.0],
                [-j[1][0] / det, j[0][0] / det, 0.0],
                [0.0; 3],
            ];
            (det, inv)
        } else {
            let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
                - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
                + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
            let mut inv = [[0.0; 3]; 3];
            for r in 0..3 {
                for c in 0..3 {
                    let (r1, r2) = ((c + 1) % 3, (c + 2) % 3);
                    let (c1, c2) = ((r + 1) % 3, (r + 2) % 3);
                    inv[r][c] = (j[r1][c1] * j[r2][c2] - j[r1][c2] * j[r2][c1]) / det;
                }
            }
            (det, inv)
        };
        // grad(lambda_k) for k >= 1 is row k-1 of the inverse Jacobian
        let mut grad_lambda = [[0.0; 3]; 4];
        for k in 0..dim {
            for c in 0..dim {
                grad_lambda[k + 1][c] = inv[k][c];
                grad_lambda[0][c] -= inv[k][c];
            }
        }
        let fact = if dim == 2 { 2.0 } else { 6.0 };
        ElementGeometry {
            dim,
            measure: det.abs() / fact,
            det,
            grad_lambda,
        }
    }

    /// Physical gradient from barycentric derivatives.
    pub fn grad(&self, bary_grad: &[f64; 4]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for k in 0..=self.dim {
            for c in 0..self.dim {
                g[c] += bary_grad[k] * self.grad_lambda[k][c];
            }
        }
        g
    }

    /// Physical point of barycentric coordinates `b`.
    pub fn point(verts: &[[f64; 3]], b: &[f64; 4]) -> [f64; 3] {
        let mut x = [0.0; 3];
        for (k, v) in verts.iter().enumerate() {
            for c in 0..3 {
                x[c] += b[k] * v[c];
            }
        }
        x
    }
}
