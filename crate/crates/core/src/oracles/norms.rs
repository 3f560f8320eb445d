use super::analytic::PipeCase;
use super::bessel::bessel_j0123;
use crate::error::{Error, Result};
use crate::fem::gauss_legendre;
use num_complex::Complex64 as C;
use std::f64::consts::PI;

/// Cross-sectional norms of the Womersley profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WomersleyNorms {
    pub l2: f64,
    /// L2 norm of the second radial derivative.
    pub h2: f64,
    /// L2 norm of the third radial derivative.
    pub h3: f64,
}

/// Norms of the Womersley velocity over one cross-section, by composite
/// Gauss-Legendre quadrature in the radius.
pub fn womersley_norms(case: &PipeCase, omega: f64) -> Result<WomersleyNorms> {
    if !(omega > 0.0) {
        return Err(Error::Invalid(format!(
            "Womersley norms need omega > 0, got {omega}"
        )));
    }
    let rad = case.radius;
    let lam = (C::new(0.0, -case.womersley(omega))).sqrt();
    let j0 = bessel_j0123(lam)?[0];
    let (x, w) = gauss_legendre(12);
    // panels graded towards the wall, where the Stokes layer sits
    let panels = 96;
    let mut acc = [0.0f64; 3];
    for p in 0..panels {
        let s0 = p as f64 / panels as f64;
        let s1 = (p + 1) as f64 / panels as f64;
        let (r0, r1) = (
            rad * (1.0 - (1.0 - s0).powi(2)),
            rad * (1.0 - (1.0 - s1).powi(2)),
        );
        for (xi, wi) in x.iter().zip(&w) {
            let r = r0 + (r1 - r0) * xi;
            let jr = bessel_j0123(lam * (r / rad))?;
            let z1 = 1.0 - jr[0] / j0;
            let z2 = (jr[2] - jr[0]) / (2.0 * j0);
            let z3 = (3.0 * jr[1] - jr[3]) / (4.0 * j0);
            let f = wi * (r1 - r0) * 2.0 * PI * r;
            acc[0] += f * z1.norm_sqr();
            acc[1] += f * z2.norm_sqr();
            acc[2] += f * z3.norm_sqr();
        }
    }
    let amp = case.traction.norm() / (case.props.rho * case.length * omega);
    let k = lam.norm() / rad;
    Ok(WomersleyNorms {
        l2: amp * acc[0].sqrt(),
        h2: amp * k * k * acc[1].sqrt(),
        h3: amp * k.powi(3) * acc[2].sqrt(),
    })
}
