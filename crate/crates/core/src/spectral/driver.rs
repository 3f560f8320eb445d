use super::modes::{fourier_transform_bcs, truncation_error, ModeSet};
use super::pool::{run_indexed, thread_cpu_time};
use super::waveform::BoundaryWaveform;
use crate::error::{Error, Result};
use crate::fem::{FluidProps, Operators, ViscousForm};
use crate::krylov::{gmres_solve, SolveReport, SolverSettings};
use crate::mesh::QuadraticMesh;
use crate::oracles::field_norm;
use num_complex::Complex64 as C;
use std::time::Instant;

/// Mesh, fluid and assembled operators shared by every mode.
#[derive(Debug, Clone)]
pub struct Problem {
    pub qmesh: QuadraticMesh,
    pub props: FluidProps,
    pub ops: Operators,
}

impl Problem {
    pub fn new(qmesh: QuadraticMesh, props: FluidProps, form: ViscousForm) -> Result<Self> {
        let ops = Operators::assemble(&qmesh, form)?;
        Ok(Self { qmesh, props, ops })
    }
}

/// Complex nodal velocity and pressure of one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    pub index: usize,
    pub omega: f64,
    /// `dim` interleaved components per velocity node.
    pub velocity: Vec<C>,
    /// One value per pressure node.
    pub pressure: Vec<C>,
    pub report: SolveReport,
    /// Boundary data vanished and the solver was not called.
    pub skipped: bool,
    /// CPU seconds of assembly and solve on the worker thread.
    pub cpu_time: f64,
    /// Wall seconds of assembly and solve.
    pub wall_time: f64,
}

/// Real nodal fields at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
}

fn solve_one(
    problem: &Problem,
    modes: &ModeSet,
    index: usize,
    settings: &SolverSettings,
) -> Result<ModeSolution> {
    let start = Instant::now();
    let cpu0 = thread_cpu_time();
    let omega = modes.omega(index);
    let data = modes.mode_data(index);
    let dofs = &problem.ops.dofs;
    let nv = dofs.n_velocity_dofs();
    let np = dofs.n_full() - nv;
    if data.is_zero() {
        return Ok(ModeSolution {
            index,
            omega,
            velocity: vec![C::new(0.0, 0.0); nv],
            pressure: vec![C::new(0.0, 0.0); np],
            report: SolveReport {
                converged: true,
                ..SolveReport::default()
            },
            skipped: true,
            cpu_time: thread_cpu_time() - cpu0,
            wall_time: start.elapsed().as_secs_f64(),
        });
    }
    let system = problem
        .ops
        .mode_system(&problem.qmesh, &problem.props, omega, &data)?;
    let (x, report) = gmres_solve(&system, settings, None)?;
    if !report.converged {
        log::warn!(
            "mode {index} stopped at relative residual {:e} after {} iterations",
            report.residual,
            report.iterations
        );
    }
    let mut full = system.expand(&x);
    let pressure = full.split_off(nv);
    Ok(ModeSolution {
        index,
        omega,
        velocity: full,
        pressure,
        report,
        skipped: false,
        cpu_time: thread_cpu_time() - cpu0,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Solves every selected mode on `workers` threads. Non-convergence is
/// flagged in the per-mode report; other failures abort.
pub fn solve_modes(
    problem: &Problem,
    modes: &ModeSet,
    settings: &SolverSettings,
    workers: usize,
) -> Result<Vec<ModeSolution>> {
    settings.validate()?;
    run_indexed(modes.indices.len(), workers, |k| {
        solve_one(problem, modes, modes.indices[k], settings)
    })
    .into_iter()
    .collect()
}

/// `Re Σ ũ_i exp(jω_i t)` for velocity and pressure.
pub fn reconstruct(solutions: &[ModeSolution], t: f64) -> RealField {
    let nv = solutions.first().map_or(0, |s| s.velocity.len());
    let np = solutions.first().map_or(0, |s| s.pressure.len());
    let mut out = RealField {
        velocity: vec![0.0; nv],
        pressure: vec![0.0; np],
    };
    for s in solutions {
        let phase = C::from_polar(1.0, s.omega * t);
        for (o, v) in out.velocity.iter_mut().zip(&s.velocity) {
            *o += (v * phase).re;
        }
        for (o, p) in out.pressure.iter_mut().zip(&s.pressure) {
            *o += (p * phase).re;
        }
    }
    out
}

/// Outcome of [`adaptive_mode_refinement`].
#[derive(Debug, Clone)]
pub struct AdaptiveResult {
    pub solutions: Vec<ModeSolution>,
    pub modes: ModeSet,
    /// Final truncation bound.
    pub n_modes: usize,
    /// `(N, relative L2(Ω×[0,T]) change from adding mode N)` for every
    /// mode with non-zero forcing.
    pub increments: Vec<(usize, f64)>,
    /// False when the cap was reached first.
    pub converged: bool,
}

/// Settings of [`adaptive_mode_refinement`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveSettings {
    pub tol: f64,
    pub max_modes: usize,
    pub n_samples: usize,
}

/// Adds modes one at a time until the relative space-time L2 change of the
/// reconstruction falls below `tol`, or the boundary data is exhausted.
pub fn adaptive_mode_refinement(
    problem: &Problem,
    waveforms: &[BoundaryWaveform],
    adaptive: &AdaptiveSettings,
    settings: &SolverSettings,
) -> Result<AdaptiveResult> {
    if !(adaptive.tol > 0.0) {
        return Err(Error::Config(format!(
            "adaptive tolerance {} must be positive",
            adaptive.tol
        )));
    }
    let native = waveforms
        .iter()
        .filter_map(|w| w.signal.native_samples())
        .min();
    let cap = match native {
        Some(n) => adaptive.max_modes.min((n / 2).saturating_sub(1)),
        None => adaptive.max_modes,
    };
    let all = fourier_transform_bcs(waveforms, cap, adaptive.n_samples)?;
    let mesh = problem.qmesh.linear();
    let mut solutions = Vec::new();
    let mut increments = Vec::new();
    // Parseval: ‖u‖²_{L2(Ω×[0,T])} / T = ‖ũ_0‖² + ½ Σ ‖ũ_i‖²
    let mut energy = 0.0;
    let mut n = 0;
    let mut converged = false;
    loop {
        let s = solve_one(problem, &all, n, settings)?;
        let norm = field_norm(&problem.qmesh, &s.velocity)?;
        let contribution = if n == 0 {
            norm * norm
        } else {
            0.5 * norm * norm
        };
        energy += contribution;
        let skipped = s.skipped;
        solutions.push(s);
        if n > 0 && !skipped && energy > 0.0 {
            let inc = (contribution / energy).sqrt();
            increments.push((n, inc));
            log::info!("adaptive refinement: N_m = {n}, increment {inc:e}");
            if inc < adaptive.tol {
                converged = true;
                break;
            }
        }
        let kept = all.with_indices(0..=n);
        if truncation_error(mesh, &kept, adaptive.n_samples)? <= 1e-12 {
            converged = true;
            break;
        }
        if n == cap {
            log::warn!("adaptive refinement reached the cap of {cap} modes");
            break;
        }
        n += 1;
    }
    Ok(AdaptiveResult {
        solutions,
        modes: all.with_indices(0..=n),
        n_modes: n,
        increments,
        converged,
    })
}
