use super::config::CaseConfig;
use super::snapshot::{snapshot_writers, write_field_snapshot};
use crate::error::{Error, Result};
use crate::krylov::SolverSettings;
use crate::mesh::{element_size, promote_to_quadratic, PatchKind};
use crate::mss::{mss_run, MssSettings, StepLog};
use crate::oracles::{analytic_cases, field_error, flow_rate};
use crate::registry::Registry;
use crate::spectral::{
    adaptive_mode_refinement, fourier_transform_bcs, mode_selectors, pool::worker_count,
    reconstruct, solve_modes, truncation_error, AdaptiveSettings, BoundaryWaveform, ModeSet,
    ModeSolution, Problem, RealField,
};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Validated config with its mesh, operators and waveforms.
pub struct PreparedCase {
    pub config: CaseConfig,
    pub problem: Problem,
    pub waveforms: Vec<BoundaryWaveform>,
    pub period: f64,
    pub settings: SolverSettings,
    pub workers: usize,
}

impl PreparedCase {
    pub fn new(config: CaseConfig) -> Result<Self> {
        config.validate().map_err(|e| e.at_stage("config"))?;
        let (mesh, geom) = config.build_mesh().map_err(|e| e.at_stage("mesh"))?;
        let (waveforms, period) = config
            .waveforms(&mesh)
            .map_err(|e| e.at_stage("waveforms"))?;
        let qmesh = promote_to_quadratic(&mesh, &geom).map_err(|e| e.at_stage("mesh"))?;
        let problem = Problem::new(qmesh, config.props()?, config.form()?)
            .map_err(|e| e.at_stage("assembly"))?;
        let settings = config.solver.settings();
        settings.validate().map_err(|e| e.at_stage("config"))?;
        let workers = worker_count(config.solver.workers);
        Ok(Self {
            config,
            problem,
            waveforms,
            period,
            settings,
            workers,
        })
    }

    fn flow_patches(&self) -> Vec<String> {
        self.problem
            .qmesh
            .linear()
            .patches()
            .iter()
            .filter(|p| p.kind != PatchKind::Wall)
            .map(|p| p.name.clone())
            .collect()
    }
}

/// Cost and solver outcome of one mode or one time-domain run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCost {
    pub index: usize,
    pub omega: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub skipped: bool,
    pub cpu_time: f64,
    pub wall_time: f64,
}

impl ModeCost {
    fn of(s: &ModeSolution) -> Self {
        Self {
            index: s.index,
            omega: s.omega,
            iterations: s.report.iterations,
            residual: s.report.residual,
            converged: s.report.converged,
            skipped: s.skipped,
            cpu_time: s.cpu_time,
            wall_time: s.wall_time,
        }
    }
}

/// Flow rates per patch at times within one period.
pub type FlowSeries = Vec<(f64, BTreeMap<String, f64>)>;

/// What a periodic solver hands back to the orchestrator.
#[derive(Debug, Clone, Default)]
pub struct SolverOutput {
    /// `(t, field)` for every requested snapshot time.
    pub snapshots: Vec<(f64, RealField)>,
    pub flow_rates: FlowSeries,
    pub modes: Vec<ModeCost>,
    pub steps: Vec<StepLog>,
    pub n_modes: Option<usize>,
    pub truncation_error: Option<f64>,
    pub linear_solves: usize,
    /// Total CPU seconds.
    pub t_c: f64,
    /// Wall seconds under full parallelism.
    pub t_w: f64,
    pub converged: bool,
    pub solutions: Vec<ModeSolution>,
}

/// A time-periodic solution strategy.
pub trait PeriodicSolver: Send + Sync {
    fn run(&self, case: &PreparedCase) -> Result<SolverOutput>;
}

/// Frequency-domain solver.
pub struct Scvs;

/// Time-domain generalized-α solver.
pub struct Mss;

impl Scvs {
    fn mode_set(case: &PreparedCase) -> Result<ModeSet> {
        let cfg = &case.config.scvs;
        let n = cfg.modes.expect("validated");
        let all = fourier_transform_bcs(&case.waveforms, n, cfg.samples)?;
        let registry = mode_selectors(cfg.threshold);
        let selector = registry
            .get(&cfg.selector)
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(all.select(selector))
    }
}

impl PeriodicSolver for Scvs {
    fn run(&self, case: &PreparedCase) -> Result<SolverOutput> {
        let cfg = &case.config.scvs;
        let (solutions, set, adaptive_ok) = match cfg.adaptive_tol {
            Some(tol) => {
                let a = AdaptiveSettings {
                    tol,
                    max_modes: cfg.max_modes,
                    n_samples: cfg.samples,
                };
                let r =
                    adaptive_mode_refinement(&case.problem, &case.waveforms, &a, &case.settings)
                        .map_err(|e| e.at_stage("modes"))?;
                (r.solutions, r.modes, r.converged)
            }
            None => {
                let set = Self::mode_set(case).map_err(|e| e.at_stage("transform"))?;
                let sols = solve_modes(&case.problem, &set, &case.settings, case.workers)
                    .map_err(|e| e.at_stage("modes"))?;
                (sols, set, true)
            }
        };
        let mesh = case.problem.qmesh.linear();
        let e_m = truncation_error(mesh, &set, cfg.samples).map_err(|e| e.at_stage("transform"))?;
        let snapshots = case
            .config
            .output
            .times
            .iter()
            .map(|&t| (t, reconstruct(&solutions, t)))
            .collect();
        let mut per_mode: BTreeMap<String, Vec<(f64, C)>> = BTreeMap::new();
        for patch in case.flow_patches() {
            let q = solutions
                .iter()
                .map(|s| {
                    Ok((
                        s.omega,
                        flow_rate(&case.problem.qmesh, &s.velocity, &patch)?,
                    ))
                })
                .collect::<Result<_>>()?;
            per_mode.insert(patch, q);
        }
        let m = case.config.output.flow_samples.max(1);
        let flow_rates = (0..m)
            .map(|k| {
                let t = case.period * k as f64 / m as f64;
                let q = per_mode
                    .iter()
                    .map(|(p, qs)| {
                        let v = qs
                            .iter()
                            .map(|(w, q)| (q * C::from_polar(1.0, w * t)).re)
                            .sum();
                        (p.clone(), v)
                    })
                    .collect();
                (t, q)
            })
            .collect();
        let modes: Vec<ModeCost> = solutions.iter().map(ModeCost::of).collect();
        Ok(SolverOutput {
            snapshots,
            flow_rates,
            steps: Vec::new(),
            n_modes: Some(set.indices.last().copied().unwrap_or(0)),
            truncation_error: Some(e_m),
            linear_solves: modes.iter().filter(|m| !m.skipped).count(),
            t_c: modes.iter().map(|m| m.cpu_time).sum(),
            t_w: modes.iter().map(|m| m.wall_time).fold(0.0, f64::max),
            converged: adaptive_ok && modes.iter().all(|m| m.converged),
            modes,
            solutions,
        })
    }
}

impl Mss {
    pub fn steps_per_cycle(case: &PreparedCase) -> Result<usize> {
        let cfg = &case.config.mss;
        match (cfg.steps_per_cycle, cfg.dt) {
            (Some(n), None) if n > 0 => Ok(n),
            (None, Some(dt)) if dt > 0.0 => {
                let n = (case.period / dt).round();
                if n < 1.0 || (n * dt - case.period).abs() > 1e-9 * case.period {
                    return Err(Error::Config(format!(
                        "mss.dt = {dt} does not divide the period {}",
                        case.period
                    )));
                }
                Ok(n as usize)
            }
            _ => Err(Error::Config(
                "set exactly one positive mss.steps_per_cycle or mss.dt".into(),
            )),
        }
    }
}

impl PeriodicSolver for Mss {
    fn run(&self, case: &PreparedCase) -> Result<SolverOutput> {
        let cfg = &case.config.mss;
        let settings = MssSettings {
            rho_inf: cfg.rho_inf,
            steps_per_cycle: Self::steps_per_cycle(case)?,
            cycles: cfg.cycles,
            period: case.period,
            steady_tol: cfg.steady_tol,
            record_times: case.config.output.times.clone(),
        };
        let run = mss_run(&case.problem, &case.waveforms, &settings, &case.settings)
            .map_err(|e| e.at_stage("time stepping"))?;
        let snapshots = run
            .last_cycle
            .iter()
            .map(|(t, s)| {
                (
                    *t,
                    RealField {
                        velocity: s.velocity.clone(),
                        pressure: s.pressure.clone(),
                    },
                )
            })
            .collect();
        let start = if run.stopped_early {
            run.flow_rates.len() - 1
        } else {
            run.flow_rates.len() - settings.steps_per_cycle
        };
        let origin = (settings.cycles - 1) as f64 * case.period;
        let mut flow_rates: FlowSeries = run.flow_rates[start..]
            .iter()
            .map(|(t, q)| {
                let phase = if run.stopped_early {
                    0.0
                } else {
                    (t - origin).rem_euclid(case.period)
                };
                (phase, q.clone())
            })
            .collect();
        flow_rates.sort_by(|a, b| a.0.total_cmp(&b.0));
        let converged =
            run.log.iter().all(|l| l.converged) && (cfg.steady_tol.is_none() || run.stopped_early);
        Ok(SolverOutput {
            snapshots,
            flow_rates,
            modes: Vec::new(),
            n_modes: None,
            truncation_error: None,
            linear_solves: run.linear_solves(),
            t_c: run.cpu_time,
            t_w: run.wall_time,
            converged,
            steps: run.log,
            solutions: Vec::new(),
        })
    }
}

/// `scvs` and `mss`.
pub fn periodic_solvers() -> Registry<dyn PeriodicSolver> {
    let mut r: Registry<dyn PeriodicSolver> = Registry::new("solver");
    r.register("scvs", Box::new(Scvs));
    r.register("mss", Box::new(Mss));
    r
}

/// One row of the metrics file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub case: String,
    /// Womersley number of the first harmonic.
    pub w: f64,
    /// Largest element size.
    pub h: f64,
    pub eps_l: f64,
    pub nm: Option<usize>,
    pub e: f64,
}

pub const METRICS_HEADER: &str = "case,W,h,eps_L,Nm,e";

impl MetricsRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{},{:.16e}",
            self.case,
            self.w,
            self.h,
            self.eps_l,
            self.nm.map_or(String::new(), |n| n.to_string()),
            self.e
        )
    }
}

/// Summary of a run, written as `report.toml`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub solver: String,
    pub period: f64,
    pub dim: usize,
    pub velocity_nodes: usize,
    pub unknowns: usize,
    pub workers: usize,
    pub n_modes: Option<usize>,
    pub truncation_error: Option<f64>,
    pub linear_solves: usize,
    /// Total CPU seconds.
    pub t_c: f64,
    /// Wall seconds under full parallelism.
    pub t_w: f64,
    /// Wall seconds of the whole run, including setup and output.
    pub total_wall: f64,
    pub converged: bool,
    pub snapshot_times: Vec<f64>,
    /// Files written, relative to the output directory.
    pub manifest: Vec<PathBuf>,
    pub modes: Vec<ModeCost>,
    pub metrics: Vec<MetricsRow>,
}

impl RunReport {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("report.toml");
        let text = std::fs::read_to_string(&path)?;
        toml::from_str(&text).map_err(|e| Error::parse(&path, 0, e.to_string()))
    }
}

/// Result of [`run_case`]: the report plus in-memory solver output.
pub struct CaseRun {
    pub report: RunReport,
    pub output: SolverOutput,
    pub case: PreparedCase,
}

/// Velocity error of a snapshot against the configured analytic flow,
/// driven by the oracle patch's waveform.
pub fn oracle_error(case: &PreparedCase, velocity: &[f64], t: f64) -> Result<Option<f64>> {
    let Some(o) = &case.config.oracle else {
        return Ok(None);
    };
    let registry = analytic_cases(o.size, o.length, 1.0, case.problem.props);
    let flow = registry
        .get(&o.case)
        .map_err(|e| Error::Config(e.to_string()))?;
    let native = case
        .waveforms
        .iter()
        .filter_map(|w| w.signal.native_samples())
        .min();
    let n_ref = native.map_or(64, |n| (n / 2).saturating_sub(1).min(64));
    let driving: Vec<BoundaryWaveform> = case
        .waveforms
        .iter()
        .filter(|w| w.patch == o.patch)
        .cloned()
        .collect();
    if driving.is_empty() {
        return Err(Error::Config(format!(
            "oracle patch '{}' has no waveform",
            o.patch
        )));
    }
    let set = fourier_transform_bcs(&driving, n_ref, case.config.scvs.samples)?;
    let mut terms = Vec::new();
    let scale = (0..=n_ref)
        .map(|i| set.coefficients.iter().map(|c| c[i].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    for i in 0..=n_ref {
        let c: C = set
            .coefficients
            .iter()
            .zip(&set.waveforms)
            .map(|(c, w)| c[i] * w.direction[0])
            .sum();
        if c.norm() > 1e-14 * scale {
            terms.push((set.omega(i), c * C::from_polar(1.0, set.omega(i) * t)));
        }
    }
    let oracle = |x: crate::mesh::Point| -> Result<[f64; 3]> {
        let mut u = [0.0; 3];
        for (w, c) in &terms {
            let v = flow.velocity(x, *w)?;
            for k in 0..3 {
                u[k] += (v[k] * c).re;
            }
        }
        Ok(u)
    };
    field_error(&case.problem.qmesh, velocity, &oracle).map(Some)
}

fn write_csv(path: &Path, header: &str, rows: impl IntoIterator<Item = String>) -> Result<()> {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Prepares, solves and writes one case.
pub fn run_case(config: CaseConfig) -> Result<CaseRun> {
    let start = Instant::now();
    let case = PreparedCase::new(config)?;
    let cfg = &case.config;
    let solvers = periodic_solvers();
    let solver = solvers
        .get(&cfg.solver.kind)
        .map_err(|e| Error::Config(e.to_string()).at_stage("config"))?;
    let output = solver.run(&case)?;

    let dir = &cfg.output.directory;
    std::fs::create_dir_all(dir).map_err(|e| Error::from(e).at_stage("output"))?;
    let mut manifest = Vec::new();
    let writers = snapshot_writers();
    for (k, (t, field)) in output.snapshots.iter().enumerate() {
        for format in &cfg.output.formats {
            let ext = writers.get(format)?.extension();
            let name = PathBuf::from(format!("snapshot_{k:03}.{ext}"));
            write_field_snapshot(&case.problem.qmesh, field, *t, &dir.join(&name), format)
                .map_err(|e| e.at_stage("output"))?;
            manifest.push(name);
        }
    }
    let patches: Vec<String> = output
        .flow_rates
        .first()
        .map(|(_, q)| q.keys().cloned().collect())
        .unwrap_or_default();
    let header = std::iter::once("t".to_string())
        .chain(patches.iter().cloned())
        .collect::<Vec<_>>()
        .join(",");
    write_csv(
        &dir.join("flow_rates.csv"),
        &header,
        output.flow_rates.iter().map(|(t, q)| {
            let mut line = format!("{t:.16e}");
            for p in &patches {
                let _ = write!(line, ",{:.16e}", q[p]);
            }
            line
        }),
    )?;
    manifest.push("flow_rates.csv".into());
    if !output.modes.is_empty() {
        write_csv(
            &dir.join("modes.csv"),
            "mode,omega,iterations,residual,converged,skipped,cpu_time,wall_time",
            output.modes.iter().map(|m| {
                format!(
                    "{},{:.16e},{},{:.16e},{},{},{:.16e},{:.16e}",
                    m.index,
                    m.omega,
                    m.iterations,
                    m.residual,
                    m.converged,
                    m.skipped,
                    m.cpu_time,
                    m.wall_time
                )
            }),
        )?;
        manifest.push("modes.csv".into());
    }
    if !output.steps.is_empty() {
        write_csv(
            &dir.join("steps.csv"),
            "step,t,residual,gmres_iters",
            output.steps.iter().map(|s| {
                format!(
                    "{},{:.16e},{:.16e},{}",
                    s.step, s.t, s.residual, s.gmres_iters
                )
            }),
        )?;
        manifest.push("steps.csv".into());
    }
    let mut metrics = Vec::new();
    if let Some(o) = &cfg.oracle {
        let h = element_size(&case.problem.qmesh)?.max;
        let omega1 = 2.0 * std::f64::consts::PI / case.period;
        let w = omega1 * o.size * o.size / case.problem.props.nu();
        for (t, field) in &output.snapshots {
            let e = oracle_error(&case, &field.velocity, *t)
                .map_err(|e| e.at_stage("metrics"))?
                .expect("oracle configured");
            metrics.push(MetricsRow {
                case: format!("{}@t={t}", cfg.name),
                w,
                h,
                eps_l: cfg.solver.tol,
                nm: output.n_modes,
                e,
            });
        }
        write_csv(
            &dir.join("metrics.csv"),
            METRICS_HEADER,
            metrics.iter().map(MetricsRow::csv),
        )?;
        manifest.push("metrics.csv".into());
    }
    std::fs::write(dir.join("config.toml"), cfg.to_toml())?;
    manifest.push("config.toml".into());

    let report = RunReport {
        name: cfg.name.clone(),
        solver: cfg.solver.kind.clone(),
        period: case.period,
        dim: case.problem.qmesh.dim(),
        velocity_nodes: case.problem.qmesh.n_velocity_nodes(),
        unknowns: case.problem.ops.dofs.n_unknowns(),
        workers: case.workers,
        n_modes: output.n_modes,
        truncation_error: output.truncation_error,
        linear_solves: output.linear_solves,
        t_c: output.t_c,
        t_w: output.t_w,
        total_wall: start.elapsed().as_secs_f64(),
        converged: output.converged,
        snapshot_times: output.snapshots.iter().map(|(t, _)| *t).collect(),
        manifest,
        modes: output.modes.clone(),
        metrics,
    };
    let text = toml::to_string(&report).map_err(|e| Error::Invalid(e.to_string()))?;
    std::fs::write(dir.join("report.toml"), text)?;
    Ok(CaseRun {
        report,
        output,
        case,
    })
}

/// Checks that every manifest entry exists and parses.
pub fn check_manifest(dir: &Path, report: &RunReport) -> Result<()> {
    for name in &report.manifest {
        let path = dir.join(name);
        let text = std::fs::read_to_string(&path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("field") => {
                super::snapshot::read_native(&text, &path)?;
            }
            Some("vtk") => {
                if !text.starts_with("# vtk DataFile") {
                    return Err(Error::parse(&path, 1, "missing VTK header"));
                }
            }
            Some("csv") => {
                let mut lines = text.lines();
                let cols = lines.next().map_or(0, |h| h.split(',').count());
                for (i, l) in lines.enumerate() {
                    if l.split(',').count() != cols {
                        return Err(Error::parse(
                            &path,
                            i + 2,
                            "column count differs from header",
                        ));
                    }
                }
            }
            Some("toml") => {
                text.parse::<toml::Table>()
                    .map_err(|e| Error::parse(&path, 0, e.to_string()))?;
            }
            _ => return Err(Error::parse(&path, 0, "unknown file type")),
        }
    }
    Ok(())
}
