use crate::error::{Error, Result};

/// Quadrature rule on the reference simplex, points in barycentric form.
/// Weights sum to the reference measure (1, 1/2 or 1/6).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub dim: usize,
    pub bary: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Rule exact for polynomials of total degree `order` on the reference
/// simplex of dimension `dim` (1, 2 or 3). Degree 4 uses the compact
/// symmetric rules; higher degrees use collapsed Gauss-Legendre products.
pub fn simplex_rule(dim: usize, order: usize) -> Result<QuadratureRule> {
    if !(1..=3).contains(&dim) {
        return Err(Error::Unsupported(format!("quadrature in dimension {dim}")));
    }
    if order < 4 {
        return Err(Error::Unsupported(format!(
            "quadrature order {order}; at least 4 is required"
        )));
    }
    if dim == 1 {
        let (x, w) = gauss_legendre((order + 2) / 2);
        return Ok(QuadratureRule {
            dim,
            bary: x.iter().map(|&t| [1.0 - t, t, 0.0, 0.0]).collect(),
            weights: w,
        });
    }
    if order == 4 {
        return Ok(if dim == 2 {
            triangle_deg4()
        } else {
            tet_deg4()
        });
    }
    Ok(collapsed(dim, (order + dim).div_ceil(2)))
}

fn triangle_deg4() -> QuadratureRule {
    let mut bary = Vec::new();
    let mut weights = Vec::new();
    for (a, w) in [
        (0.445_948_490_915_964_9, 0.223_381_589_678_011_5),
        (0.091_576_213_509_770_74, 0.109_951_743_655_321_9),
    ] {
        let b = 1.0 - 2.0 * a;
        for p in [[a, a, b], [a, b, a], [b, a, a]] {
            bary.push([p[0], p[1], p[2], 0.0]);
            weights.push(0.5 * w);
        }
    }
    QuadratureRule {
        dim: 2,
        bary,
        weights,
    }
}

fn tet_deg4() -> QuadratureRule {
    let mut bary = vec![[0.25; 4]];
    let mut weights = vec![-74.0 / 5625.0];
    let (s, l) = (1.0 / 14.0, 11.0 / 14.0);
    for k in 0..4 {
        let mut p = [s; 4];
        p[k] = l;
        bary.push(p);
        weights.push(343.0 / 45000.0);
    }
    let r = (5.0f64 / 14.0).sqrt();
    let (a, b) = ((1.0 + r) / 4.0, (1.0 - r) / 4.0);
    for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
        let mut p = [b; 4];
        p[i] = a;
        p[j] = a;
        bary.push(p);
        weights.push(56.0 / 2250.0);
    }
    QuadratureRule {
        dim: 3,
        bary,
        weights,
    }
}

fn collapsed(dim: usize, n: usize) -> QuadratureRule {
    let (x, w) = gauss_legendre(n);
    let mut bary = Vec::new();
    let mut weights = Vec::new();
    for (i, &u) in x.iter().enumerate() {
        for (j, &v) in x.iter().enumerate() {
            if dim == 2 {
                let (x1, x2) = (u, v * (1.0 - u));
                bary.push([1.0 - x1 - x2, x1, x2, 0.0]);
                weights.push(w[i] * w[j] * (1.0 - u));
                continue;
            }
            for (k, &s) in x.iter().enumerate() {
                let x1 = u;
                let x2 = v * (1.0 - u);
                let x3 = s * (1.0 - u) * (1.0 - v);
                bary.push([1.0 - x1 - x2 - x3, x1, x2, x3]);
                weights.push(w[i] * w[j] * w[k] * (1.0 - u).powi(2) * (1.0 - v));
            }
        }
    }
    QuadratureRule { dim, bary, weights }
}

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let step = p1 / dp;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        x[n - 1 - i] = 0.5 * (t + 1.0);
        w[n - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// Exact integral of prod lambda_k^a_k over the reference simplex.
    fn monomial_exact(dim: usize, a: &[usize]) -> f64 {
        let num: f64 = a.iter().map(|&k| factorial(k)).product();
        num / factorial(a.iter().sum::<usize>() + dim)
    }

    fn check_exactness(dim: usize, order: usize) {
        let rule = simplex_rule(dim, order).unwrap();
        let nb = dim + 1;
        let mut exps = vec![0usize; nb];
        loop {
            if exps.iter().sum::<usize>() <= order {
                let q: f64 = rule
                    .bary
                    .iter()
                    .zip(&rule.weights)
                    .map(|(b, w)| w * (0..nb).map(|k| b[k].powi(exps[k] as i32)).product::<f64>())
                    .sum();
                let exact = monomial_exact(dim, &exps);
                assert!(
                    (q - exact).abs() < 1e-14,
                    "dim {dim} order {order} exps {exps:?}: {q} vs {exact}"
                );
            }
            let mut k = 0;
            while k < nb {
                exps[k] += 1;
                if exps[k] <= order {
                    break;
                }
                exps[k] = 0;
                k += 1;
            }
            if k == nb {
                break;
            }
        }
    }

    #[test]
    fn degree_four_rules_are_exact() {
        check_exactness(1, 4);
        check_exactness(2, 4);
        check_exactness(3, 4);
        assert_eq!(simplex_rule(2, 4).unwrap().len(), 6);
        assert_eq!(simplex_rule(3, 4).unwrap().len(), 11);
    }

    #[test]
    fn higher_order_rules_are_exact() {
        check_exactness(2, 8);
        check_exactness(3, 7);
        check_exactness(1, 9);
    }

    #[test]
    fn weights_sum_to_reference_measure() {
        for (dim, m) in [(1, 1.0), (2, 0.5), (3, 1.0 / 6.0)] {
            for order in [4, 6] {
                let s: f64 = simplex_rule(dim, order).unwrap().weights.iter().sum();
                assert!((s - m).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn low_order_and_bad_dimension_rejected() {
        assert!(simplex_rule(2, 3).is_err());
        assert!(simplex_rule(4, 4).is_err());
    }
}
