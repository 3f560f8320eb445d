use super::bessel::bessel_j;
use crate::error::{Error, Result};
use crate::fem::FluidProps;
use crate::mesh::Point;
use crate::registry::Registry;
use num_complex::Complex64 as C;

const J: C = C::new(0.0, 1.0);

/// Plane channel `|y| <= H` driven by a traction drop over length `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelCase {
    pub half_height: f64,
    pub length: f64,
    pub traction: C,
    pub props: FluidProps,
}

/// Circular pipe of radius `R` driven by a traction drop over length `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipeCase {
    pub radius: f64,
    pub length: f64,
    pub traction: C,
    pub props: FluidProps,
}

impl ChannelCase {
    pub fn womersley(&self, omega: f64) -> f64 {
        omega * self.half_height.powi(2) / self.props.nu()
    }

    pub fn omega_for(&self, w: f64) -> f64 {
        w * self.props.nu() / self.half_height.powi(2)
    }
}

impl PipeCase {
    pub fn womersley(&self, omega: f64) -> f64 {
        omega * self.radius.powi(2) / self.props.nu()
    }

    pub fn omega_for(&self, w: f64) -> f64 {
        w * self.props.nu() / self.radius.powi(2)
    }
}

/// `cosh(a) / cosh(b)` without overflow, for `Re b >= 0`.
fn cosh_ratio(a: C, b: C) -> C {
    let a = if a.re < 0.0 { -a } else { a };
    ((a - b).exp()) * (1.0 + (-2.0 * a).exp()) / (1.0 + (-2.0 * b).exp())
}

/// Complex streamwise velocity amplitude of the oscillatory channel flow.
pub fn channel_velocity(case: &ChannelCase, y: f64, omega: f64) -> C {
    let (h, l, p) = (case.half_height, case.length, case.props);
    if omega == 0.0 {
        return case.traction / (2.0 * p.mu * l) * (h + y) * (h - y);
    }
    let lam = (J * case.womersley(omega)).sqrt();
    -J * case.traction / (p.rho * l * omega) * (1.0 - cosh_ratio(lam * (y / h), lam))
}

/// Complex axial velocity amplitude of Womersley pipe flow.
pub fn pipe_velocity(case: &PipeCase, r: f64, omega: f64) -> Result<C> {
    let (rad, l, p) = (case.radius, case.length, case.props);
    if omega == 0.0 {
        return Ok(case.traction / (4.0 * p.mu * l) * (rad * rad - r * r));
    }
    let lam = (-J * case.womersley(omega)).sqrt();
    let j0 = bessel_j(0, lam)?;
    if j0.norm() == 0.0 {
        return Err(Error::Numerical("J0(Lambda) vanishes".into()));
    }
    Ok(-J * case.traction / (p.rho * l * omega) * (1.0 - bessel_j(0, lam * (r / rad))? / j0))
}

/// Analytic reference flow selectable by name.
pub trait AnalyticCase: Send + Sync {
    /// Complex velocity amplitude vector at `x` for angular frequency `omega`
    /// and unit traction amplitude.
    fn velocity(&self, x: Point, omega: f64) -> Result<[C; 3]>;
    /// Womersley number of a frequency.
    fn womersley(&self, omega: f64) -> f64;
    fn omega_for(&self, w: f64) -> f64;
}

/// Channel along x centred on y = 0.
pub struct ChannelFlow(pub ChannelCase);

/// Pipe along the x axis.
pub struct PipeFlow(pub PipeCase);

impl AnalyticCase for ChannelFlow {
    fn velocity(&self, x: Point, omega: f64) -> Result<[C; 3]> {
        let zero = C::new(0.0, 0.0);
        Ok([channel_velocity(&self.0, x[1], omega), zero, zero])
    }
    fn womersley(&self, omega: f64) -> f64 {
        self.0.womersley(omega)
    }
    fn omega_for(&self, w: f64) -> f64 {
        self.0.omega_for(w)
    }
}

impl AnalyticCase for PipeFlow {
    fn velocity(&self, x: Point, omega: f64) -> Result<[C; 3]> {
        let zero = C::new(0.0, 0.0);
        let r = x[1].hypot(x[2]).min(self.0.radius);
        Ok([pipe_velocity(&self.0, r, omega)?, zero, zero])
    }
    fn womersley(&self, omega: f64) -> f64 {
        self.0.womersley(omega)
    }
    fn omega_for(&self, w: f64) -> f64 {
        self.0.omega_for(w)
    }
}

/// `channel` and `pipe` cases with unit geometry, fluid and traction drop,
/// unless other dimensions are given.
pub fn analytic_cases(
    size: f64,
    length: f64,
    traction: f64,
    props: FluidProps,
) -> Registry<dyn AnalyticCase> {
    let mut r: Registry<dyn AnalyticCase> = Registry::new("analytic case");
    r.register(
        "channel",
        Box::new(ChannelFlow(ChannelCase {
            half_height: size,
            length,
            traction: C::new(traction, 0.0),
            props,
        })),
    );
    r.register(
        "pipe",
        Box::new(PipeFlow(PipeCase {
            radius: size,
            length,
            traction: C::new(traction, 0.0),
            props,
        })),
    );
    r
}
