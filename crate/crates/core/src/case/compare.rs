use super::config::CaseConfig;
use super::run::{run_case, MetricsRow, RunReport};
use super::snapshot::{read_field_snapshot, FieldSnapshot};
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Errors of run `a` (and `b`, when a reference is given) at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub t: f64,
    pub e_a: f64,
    pub e_b: Option<f64>,
}

/// Side-by-side summary of two runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<CompareRow>,
    /// Relative L2-in-time flow-rate error per patch, for `a` and `b`.
    pub flow_errors: BTreeMap<String, (f64, Option<f64>)>,
    /// `t_C(a) / t_C(b)`
    pub cost_ratio: f64,
    /// `t_W(a) / t_W(b)`
    pub wall_ratio: f64,
}

impl Comparison {
    /// `100 t_C(a) / t_C(b)`
    pub fn relative_cost(&self) -> f64 {
        100.0 * self.cost_ratio
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "t,e_a,e_b")?;
        for r in &self.rows {
            let b = r.e_b.map_or(String::new(), |v| format!("{v:.16e}"));
            writeln!(f, "{:.16e},{:.16e},{b}", r.t, r.e_a)?;
        }
        writeln!(f, "patch,flow_error_a,flow_error_b")?;
        for (p, (a, b)) in &self.flow_errors {
            let b = b.map_or(String::new(), |v| format!("{v:.16e}"));
            writeln!(f, "{p},{a:.16e},{b}")?;
        }
        writeln!(f, "relative_cost_percent,{:.16e}", self.relative_cost())?;
        write!(f, "wall_ratio,{:.16e}", self.wall_ratio)
    }
}

struct LoadedRun {
    report: RunReport,
    snapshots: Vec<FieldSnapshot>,
    flow: Vec<(f64, BTreeMap<String, f64>)>,
}

fn load_run(dir: &Path) -> Result<LoadedRun> {
    let report = RunReport::load(dir)?;
    let snapshots = report
        .manifest
        .iter()
        .filter(|p| p.extension().is_some_and(|e| e == "field"))
        .map(|p| read_field_snapshot(&dir.join(p)))
        .collect::<Result<_>>()?;
    let path = dir.join("flow_rates.csv");
    let text = std::fs::read_to_string(&path)?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .unwrap_or_default()
        .split(',')
        .skip(1)
        .map(str::to_string)
        .collect();
    let mut flow = Vec::new();
    for (i, l) in lines.enumerate() {
        let v: Vec<f64> = l
            .split(',')
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::parse(&path, i + 2, format!("bad number '{t}'")))
            })
            .collect::<Result<_>>()?;
        flow.push((
            v[0],
            header.iter().cloned().zip(v[1..].iter().copied()).collect(),
        ));
    }
    Ok(LoadedRun {
        report,
        snapshots,
        flow,
    })
}

fn nodal_error(a: &FieldSnapshot, reference: &FieldSnapshot) -> Result<f64> {
    if a.velocity.len() != reference.velocity.len() {
        return Err(Error::Invalid("incompatible cases: meshes differ".into()));
    }
    let num: f64 = a
        .velocity
        .iter()
        .zip(&reference.velocity)
        .map(|(x, y)| (x - y).powi(2))
        .sum();
    let den: f64 = reference.velocity.iter().map(|y| y * y).sum();
    Ok(if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    })
}

/// Periodic linear interpolation of a sampled series.
fn interpolate(series: &[(f64, f64)], period: f64, t: f64) -> f64 {
    if series.len() == 1 {
        return series[0].1;
    }
    let t = t.rem_euclid(period);
    let k = series.partition_point(|(s, _)| *s <= t);
    let (t0, v0) = if k == 0 {
        (
            series[series.len() - 1].0 - period,
            series[series.len() - 1].1,
        )
    } else {
        series[k - 1]
    };
    let (t1, v1) = if k == series.len() {
        (series[0].0 + period, series[0].1)
    } else {
        series[k]
    };
    if t1 == t0 {
        v0
    } else {
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }
}

fn flow_error(a: &LoadedRun, reference: &LoadedRun, patch: &str, period: f64) -> Option<f64> {
    let r: Vec<(f64, f64)> = reference
        .flow
        .iter()
        .map(|(t, q)| (*t, q.get(patch).copied()))
        .map(|(t, q)| q.map(|q| (t, q)))
        .collect::<Option<_>>()?;
    let (mut num, mut den) = (0.0, 0.0);
    for (t, q) in &a.flow {
        let qa = *q.get(patch)?;
        let qr = interpolate(&r, period, *t);
        num += (qa - qr).powi(2);
        den += qr * qr;
    }
    Some(if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    })
}

/// Tabulates errors at common snapshot times, flow-rate errors and cost
/// ratios. Without a reference, `a` is measured against `b`.
pub fn compare_runs(a: &Path, b: &Path, reference: Option<&Path>) -> Result<Comparison> {
    let ra = load_run(a)?;
    let rb = load_run(b)?;
    let rr = reference.map(load_run).transpose()?;
    let period = ra.report.period;
    if (rb.report.period - period).abs() > 1e-12 * period || ra.report.dim != rb.report.dim {
        return Err(Error::Invalid(
            "incompatible cases: periods or dimensions differ".into(),
        ));
    }
    let target = rr.as_ref().unwrap_or(&rb);
    let mut rows = Vec::new();
    for sa in &ra.snapshots {
        let Some(st) = target
            .snapshots
            .iter()
            .find(|s| (s.time - sa.time).abs() <= 1e-12 * period)
        else {
            continue;
        };
        let e_b = if rr.is_some() {
            match rb
                .snapshots
                .iter()
                .find(|s| (s.time - sa.time).abs() <= 1e-12 * period)
            {
                Some(sb) => Some(nodal_error(sb, st)?),
                None => None,
            }
        } else {
            None
        };
        rows.push(CompareRow {
            t: sa.time,
            e_a: nodal_error(sa, st)?,
            e_b,
        });
    }
    if rows.is_empty() {
        return Err(Error::Invalid(
            "incompatible cases: no common snapshot times".into(),
        ));
    }
    let mut flow_errors = BTreeMap::new();
    let patches: Vec<String> = ra
        .flow
        .first()
        .map(|(_, q)| q.keys().cloned().collect())
        .unwrap_or_default();
    for p in patches {
        if let Some(ea) = flow_error(&ra, target, &p, period) {
            let eb = if rr.is_some() {
                flow_error(&rb, target, &p, period)
            } else {
                None
            };
            flow_errors.insert(p, (ea, eb));
        }
    }
    let ratio = |x: f64, y: f64| {
        if y > 0.0 {
            x / y
        } else if x == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    };
    Ok(Comparison {
        rows,
        flow_errors,
        cost_ratio: ratio(ra.report.t_c, rb.report.t_c),
        wall_ratio: ratio(ra.report.t_w, rb.report.t_w),
    })
}

/// Parameter varied by [`convergence_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    /// Mesh refinement factor applied to the generator resolution.
    H,
    /// Womersley number of the first harmonic.
    W,
    EpsL,
    Nm,
    Dt,
}

impl FromStr for Sweep {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h" => Ok(Sweep::H),
            "W" | "w" => Ok(Sweep::W),
            "epsL" | "eps_L" | "epsl" => Ok(Sweep::EpsL),
            "Nm" | "nm" => Ok(Sweep::Nm),
            "dt" => Ok(Sweep::Dt),
            other => Err(Error::Config(format!(
                "unknown sweep '{other}' (h, W, epsL, Nm, dt)"
            ))),
        }
    }
}

fn refine(n: Option<usize>, f: f64) -> Option<usize> {
    n.map(|n| ((n as f64) * f).round().max(1.0) as usize)
}

/// Config of one sweep point.
pub fn sweep_config(base: &CaseConfig, sweep: Sweep, value: f64) -> Result<CaseConfig> {
    let mut c = base.clone();
    match sweep {
        Sweep::H => {
            if c.mesh.generator == "file" {
                return Err(Error::Config("mesh sweeps need a generated mesh".into()));
            }
            c.mesh.nx = refine(c.mesh.nx, value);
            c.mesh.ny = refine(c.mesh.ny, value);
            c.mesh.rings = refine(c.mesh.rings, value);
            c.mesh.layers = refine(c.mesh.layers, value);
        }
        Sweep::W => {
            let o = c
                .oracle
                .as_ref()
                .ok_or_else(|| Error::Config("W sweeps need an [oracle] section".into()))?;
            let nu = c.fluid.mu / c.fluid.rho;
            c.period = Some(2.0 * std::f64::consts::PI * o.size * o.size / (nu * value));
        }
        Sweep::EpsL => c.solver.tol = value,
        Sweep::Nm => {
            c.scvs.modes = Some(value.round() as usize);
            c.scvs.adaptive_tol = None;
        }
        Sweep::Dt => {
            c.mss.dt = Some(value);
            c.mss.steps_per_cycle = None;
        }
    }
    Ok(c)
}

/// Runs the case once per value and collects the metrics rows.
pub fn convergence_sweep(
    base: &CaseConfig,
    sweep: Sweep,
    values: &[f64],
) -> Result<Vec<MetricsRow>> {
    if base.oracle.is_none() {
        return Err(Error::Config(
            "convergence sweeps need an [oracle] section".into(),
        ));
    }
    let root: PathBuf = base.output.directory.clone();
    let mut rows = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        let mut c = sweep_config(base, sweep, v)?;
        c.output.directory = root.join(format!("sweep_{k:02}"));
        c.name = format!("{}[{v}]", base.name);
        let run = run_case(c)?;
        rows.extend(run.report.metrics);
    }
    Ok(rows)
}
