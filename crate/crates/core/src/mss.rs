//! Time-domain mixed Stokes solver with generalized-α integration.

use crate::error::{Error, Result};
use crate::fem::{dirichlet_values, neumann_load, BoundaryData, PatchValue};
use crate::krylov::{gmres, preconditioners, Preconditioner, SolverSettings};
use crate::mesh::PatchKind;
use crate::oracles::{field_norm, flow_rate};
use crate::scalar::norm2;
use crate::sparse::CsrMatrix;
use crate::spectral::pool::thread_cpu_time;
use crate::spectral::{BoundaryWaveform, Problem};
use std::collections::BTreeMap;
use std::time::Instant;

/// Generalized-α parameters for a first-order system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeIntegrator {
    pub rho_inf: f64,
    pub alpha_f: f64,
    pub alpha_m: f64,
    pub gamma: f64,
    pub dt: f64,
}

impl TimeIntegrator {
    pub fn new(rho_inf: f64, dt: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho_inf) {
            return Err(Error::Config(format!(
                "spectral radius {rho_inf} not in [0, 1]"
            )));
        }
        if !(dt > 0.0) {
            return Err(Error::Config(format!("time step {dt} must be positive")));
        }
        let alpha_f = 1.0 / (1.0 + rho_inf);
        let alpha_m = (3.0 - rho_inf) / (2.0 + 2.0 * rho_inf);
        Ok(Self {
            rho_inf,
            alpha_f,
            alpha_m,
            gamma: 0.5 + alpha_m - alpha_f,
            dt,
        })
    }
}

/// Nodal velocity, acceleration and pressure at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeState {
    pub velocity: Vec<f64>,
    pub acceleration: Vec<f64>,
    pub pressure: Vec<f64>,
}

impl TimeState {
    pub fn zero(problem: &Problem) -> Self {
        let nv = problem.ops.dofs.n_velocity_dofs();
        let np = problem.ops.dofs.n_full() - nv;
        Self {
            velocity: vec![0.0; nv],
            acceleration: vec![0.0; nv],
            pressure: vec![0.0; np],
        }
    }
}

/// One row of the per-step log.
#[derive(Debug, Clone, PartialEq)]
pub struct StepLog {
    pub step: usize,
    /// Time at the end of the step.
    pub t: f64,
    /// Relative steady-equation residual of the predictor.
    pub residual: f64,
    pub gmres_iters: usize,
    pub converged: bool,
}

/// Real boundary data of the waveforms at time `t`; walls are implicit.
pub fn boundary_data_at(waveforms: &[BoundaryWaveform], t: f64) -> BoundaryData<f64> {
    let mut data = BoundaryData::new();
    for w in waveforms {
        let v = w.value(t);
        let target = match w.kind {
            PatchKind::Dirichlet => &mut data.dirichlet,
            _ => &mut data.neumann,
        };
        let entry = target
            .entry(w.patch.clone())
            .or_insert_with(PatchValue::zero);
        if let PatchValue::Uniform(u) = entry {
            for k in 0..3 {
                u[k] += v[k];
            }
        }
    }
    data
}

/// Time stepper owning the constant tangent matrix and its preconditioner.
pub struct Stepper<'a> {
    problem: &'a Problem,
    pub integrator: TimeIntegrator,
    settings: SolverSettings,
    matrix: CsrMatrix<f64>,
    pc: Box<dyn Preconditioner<f64>>,
    weights: [f64; 3],
    guess: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(
        problem: &'a Problem,
        integrator: TimeIntegrator,
        settings: &SolverSettings,
    ) -> Result<Self> {
        settings.validate()?;
        let ti = integrator;
        // unknowns: change of u at t_{n+αf} and pressure increment
        let weights = [
            problem.props.mu,
            ti.alpha_m * problem.props.rho / (ti.alpha_f * ti.gamma * ti.dt),
            1.0,
        ];
        let matrix = problem.ops.uu.combine(weights);
        let pc = preconditioners::<f64>()
            .get(&settings.preconditioner)?
            .build(&matrix);
        Ok(Self {
            problem,
            integrator,
            settings: settings.clone(),
            guess: vec![0.0; matrix.nrows()],
            matrix,
            pc,
            weights,
        })
    }

    /// Rows of the operator with weights `w` at the unknowns, applied to a
    /// full vector.
    fn apply_unknown_rows(&self, w: [f64; 3], full: &[f64]) -> Vec<f64> {
        let dofs = &self.problem.ops.dofs;
        let xu = dofs.restrict(full);
        let xc: Vec<f64> = dofs
            .constrained_to_full()
            .iter()
            .map(|&f| full[f])
            .collect();
        let mut y = self.problem.ops.uu.mul_vec_weighted(w, &xu);
        let yc = self.problem.ops.uc.mul_vec_weighted(w, &xc);
        for (a, b) in y.iter_mut().zip(yc) {
            *a += b;
        }
        y
    }

    /// Advances `state` from `t_n` by one step: predictor, one linear solve
    /// at the intermediate time, corrector.
    pub fn step(
        &mut self,
        state: &TimeState,
        t_n: f64,
        waveforms: &[BoundaryWaveform],
    ) -> Result<(TimeState, StepLog)> {
        let ti = self.integrator;
        let p = self.problem;
        let dofs = &p.ops.dofs;
        let nv = dofs.n_velocity_dofs();
        let t_af = t_n + ti.alpha_f * ti.dt;
        let data = boundary_data_at(waveforms, t_af);
        let lift = dirichlet_values(&p.qmesh, dofs, &data)?;
        let load = neumann_load(&p.qmesh, &data)?;

        // predictor; u_{n+αf} = u_n, u̇_{n+αm} = u̇_n (1 - αm/γ)
        let c = 1.0 - ti.alpha_m / ti.gamma;
        let acc_am: Vec<f64> = state.acceleration.iter().map(|a| a * c).collect();
        let mut x = state.velocity.clone();
        x.extend_from_slice(&state.pressure);
        let mut a_full = acc_am;
        a_full.resize(dofs.n_full(), 0.0);

        let mu = p.props.mu;
        let mut r = self.apply_unknown_rows([mu, 0.0, 1.0], &x);
        let mass = self.apply_unknown_rows([0.0, p.props.rho, 0.0], &a_full);
        for (k, &f) in dofs.unknown_to_full().iter().enumerate() {
            let b = if f < nv { load[f] } else { 0.0 };
            r[k] += mass[k] - b;
        }
        // steady residual scale: load and lift of the steady equation
        let steady_rhs = p.ops.rhs_from([mu, 0.0, 1.0], &load, &lift);
        let scale = norm2(&steady_rhs);
        let rnorm = norm2(&r);
        let residual = if scale > 0.0 { rnorm / scale } else { rnorm };

        // constrained increments of u_{n+αf} and of the pinned pressure
        let dc: Vec<f64> = dofs
            .constrained_to_full()
            .iter()
            .zip(&lift)
            .map(|(&f, &g)| if f < nv { g - x[f] } else { 0.0 })
            .collect();
        let mut rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let lifted = p.ops.uc.mul_vec_weighted(self.weights, &dc);
        for (a, b) in rhs.iter_mut().zip(lifted) {
            *a -= b;
        }
        let (sol, report) = gmres(
            &self.matrix,
            &rhs,
            Some(&self.guess),
            &self.settings,
            self.pc.as_ref(),
        );
        if !report.converged {
            log::warn!(
                "step at t = {t_n}: linear solve stopped at {:e}",
                report.residual
            );
        }
        self.guess.clone_from(&sol);
        let inc = dofs.expand(&sol, &dc);

        // corrector
        let mut next = state.clone();
        let k = 1.0 / (ti.alpha_f * ti.gamma * ti.dt);
        for i in 0..nv {
            let du = inc[i];
            next.acceleration[i] = (ti.gamma - 1.0) / ti.gamma * state.acceleration[i] + du * k;
            next.velocity[i] = state.velocity[i] + du / ti.alpha_f;
        }
        for (i, pv) in next.pressure.iter_mut().enumerate() {
            *pv += inc[nv + i];
        }
        let log = StepLog {
            step: 0,
            t: t_n + ti.dt,
            residual,
            gmres_iters: report.iterations,
            converged: report.converged,
        };
        Ok((next, log))
    }
}

/// Settings of a time-domain run.
#[derive(Debug, Clone, PartialEq)]
pub struct MssSettings {
    pub rho_inf: f64,
    pub steps_per_cycle: usize,
    pub cycles: usize,
    pub period: f64,
    /// Stop once the steady residual drops below this value (steady runs).
    pub steady_tol: Option<f64>,
    /// Times within the period whose last-cycle states are kept; each is
    /// rounded to the nearest step.
    pub record_times: Vec<f64>,
}

impl MssSettings {
    pub fn dt(&self) -> f64 {
        self.period / self.steps_per_cycle as f64
    }
}

/// Result of [`mss_run`].
#[derive(Debug, Clone)]
pub struct MssRun {
    pub log: Vec<StepLog>,
    /// `(requested time, state)` for every record time.
    pub last_cycle: Vec<(f64, TimeState)>,
    /// `(t, flow rate per patch)` after every step, absolute times.
    pub flow_rates: Vec<(f64, BTreeMap<String, f64>)>,
    pub final_state: TimeState,
    /// L2 velocity difference between the ends of consecutive cycles.
    pub cycle_differences: Vec<f64>,
    pub stopped_early: bool,
    pub cpu_time: f64,
    pub wall_time: f64,
}

impl MssRun {
    pub fn linear_solves(&self) -> usize {
        self.log.len()
    }
}

/// Runs `cycles` periods from a zero initial state.
pub fn mss_run(
    problem: &Problem,
    waveforms: &[BoundaryWaveform],
    mss: &MssSettings,
    settings: &SolverSettings,
) -> Result<MssRun> {
    if mss.steps_per_cycle == 0 || mss.cycles == 0 {
        return Err(Error::Config(
            "steps per cycle and cycles must be positive".into(),
        ));
    }
    let record_steps: Vec<usize> = mss
        .record_times
        .iter()
        .map(|t| ((t / mss.dt()).round() as i64).rem_euclid(mss.steps_per_cycle as i64) as usize)
        .collect();
    let start = Instant::now();
    let cpu0 = thread_cpu_time();
    let integrator = TimeIntegrator::new(mss.rho_inf, mss.dt())?;
    let mut stepper = Stepper::new(problem, integrator, settings)?;
    let patches: Vec<String> = problem
        .qmesh
        .linear()
        .patches()
        .iter()
        .filter(|p| p.kind != PatchKind::Wall)
        .map(|p| p.name.clone())
        .collect();
    let mut state = TimeState::zero(problem);
    let mut run = MssRun {
        log: Vec::new(),
        last_cycle: Vec::new(),
        flow_rates: Vec::new(),
        final_state: state.clone(),
        cycle_differences: Vec::new(),
        stopped_early: false,
        cpu_time: 0.0,
        wall_time: 0.0,
    };
    let mut cycle_start = state.velocity.clone();
    let total = mss.steps_per_cycle * mss.cycles;
    for n in 0..total {
        let t_n = n as f64 * integrator.dt;
        let (next, mut entry) = stepper.step(&state, t_n, waveforms)?;
        entry.step = n + 1;
        state = next;
        let mut q = BTreeMap::new();
        for name in &patches {
            q.insert(
                name.clone(),
                flow_rate(&problem.qmesh, &state.velocity, name)?,
            );
        }
        run.flow_rates.push((entry.t, q));
        let steady_done = mss.steady_tol.is_some_and(|tol| entry.residual < tol);
        let last_cycle = n + 1 > total - mss.steps_per_cycle;
        let k = (n + 1) % mss.steps_per_cycle;
        if last_cycle {
            for (rt, &rk) in mss.record_times.iter().zip(&record_steps) {
                if rk == k {
                    run.last_cycle.push((*rt, state.clone()));
                }
            }
        }
        run.log.push(entry);
        if k == 0 {
            let diff: Vec<f64> = state
                .velocity
                .iter()
                .zip(&cycle_start)
                .map(|(a, b)| a - b)
                .collect();
            run.cycle_differences
                .push(field_norm(&problem.qmesh, &diff)?);
            cycle_start.clone_from(&state.velocity);
        }
        if steady_done {
            run.stopped_early = true;
            break;
        }
    }
    if run.stopped_early {
        run.last_cycle = mss
            .record_times
            .iter()
            .map(|&t| (t, state.clone()))
            .collect();
    }
    run.last_cycle
        .sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    run.final_state = state;
    run.cpu_time = thread_cpu_time() - cpu0;
    run.wall_time = start.elapsed().as_secs_f64();
    Ok(run)
}
