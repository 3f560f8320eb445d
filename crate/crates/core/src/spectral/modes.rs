use super::waveform::{BoundaryWaveform, Signal};
use crate::error::{Error, Result};
use crate::fem::{BoundaryData, PatchValue};
use crate::mesh::{Mesh, PatchKind};
use crate::registry::Registry;
use num_complex::Complex64 as C;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Default number of samples taken from analytic signals.
pub const DEFAULT_SAMPLES: usize = 1024;

/// One-sided Fourier coefficients `c_0..=c_N` of a waveform: `c_0` is the
/// mean and `c_i = (2/n) Σ f_k exp(-jω_i t_k)` for `i >= 1`, so that
/// `Re Σ c_i exp(jω_i t)` reproduces the samples of a band-limited input.
pub fn waveform_coefficients(
    w: &BoundaryWaveform,
    n_modes: usize,
    n_samples: usize,
) -> Result<Vec<C>> {
    if let Signal::Modes(c) = &w.signal {
        let mut out = c.clone();
        out.resize(n_modes + 1, C::new(0.0, 0.0));
        return Ok(out);
    }
    let f = w.samples(n_samples);
    let n = f.len();
    if n < 2 * (n_modes + 1) {
        return Err(Error::Invalid(format!(
            "waveform on '{}' has {n} samples, at least {} are needed for {n_modes} modes",
            w.patch,
            2 * (n_modes + 1)
        )));
    }
    let mut c: Vec<C> = (0..=n_modes)
        .map(|i| {
            let mut acc = C::new(0.0, 0.0);
            for (k, &fk) in f.iter().enumerate() {
                // exact phase reduction keeps the transform accurate for long records
                let phase = -2.0 * PI * ((i * k) % n) as f64 / n as f64;
                acc += fk * C::from_polar(1.0, phase);
            }
            if i == 0 {
                C::new(acc.re / n as f64, 0.0)
            } else {
                acc * (2.0 / n as f64)
            }
        })
        .collect();
    // round-off of the transform is not forcing
    let max = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for v in &mut c {
        if v.norm() <= 1e-13 * max {
            *v = C::new(0.0, 0.0);
        }
    }
    Ok(c)
}

/// Coefficients of every boundary waveform and the selected mode indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    pub period: f64,
    /// Truncation bound: coefficients exist for `0..=n_max`.
    pub n_max: usize,
    /// Selected mode indices, sorted and unique.
    pub indices: Vec<usize>,
    pub waveforms: Vec<BoundaryWaveform>,
    /// `coefficients[w][i]` for waveform `w`, mode `i`.
    pub coefficients: Vec<Vec<C>>,
}

impl ModeSet {
    pub fn omega(&self, index: usize) -> f64 {
        2.0 * PI * index as f64 / self.period
    }

    /// Boundary data of one mode (not necessarily selected).
    pub fn mode_data(&self, index: usize) -> BoundaryData<C> {
        let mut data = BoundaryData::new();
        for (w, c) in self.waveforms.iter().zip(&self.coefficients) {
            let ci = c.get(index).copied().unwrap_or_default();
            let target = match w.kind {
                PatchKind::Dirichlet => &mut data.dirichlet,
                _ => &mut data.neumann,
            };
            let entry = target
                .entry(w.patch.clone())
                .or_insert_with(PatchValue::zero);
            if let PatchValue::Uniform(v) = entry {
                for k in 0..3 {
                    v[k] += ci * w.direction[k];
                }
            }
        }
        data
    }

    /// Size of the boundary forcing of each mode `0..=n_max`.
    pub fn magnitudes(&self) -> Vec<f64> {
        (0..=self.n_max)
            .map(|i| {
                self.waveforms
                    .iter()
                    .zip(&self.coefficients)
                    .map(|(w, c)| {
                        let d = w.direction.iter().map(|x| x * x).sum::<f64>().sqrt();
                        d * c.get(i).map_or(0.0, |v| v.norm())
                    })
                    .sum()
            })
            .collect()
    }

    /// Same coefficients with the indices chosen by `selector`.
    pub fn select(&self, selector: &dyn ModeSelector) -> ModeSet {
        let mut indices = selector.select(&self.magnitudes());
        indices.sort_unstable();
        indices.dedup();
        ModeSet {
            indices,
            ..self.clone()
        }
    }

    pub fn with_indices(&self, indices: impl IntoIterator<Item = usize>) -> ModeSet {
        let mut indices: Vec<usize> = indices.into_iter().filter(|&i| i <= self.n_max).collect();
        indices.sort_unstable();
        indices.dedup();
        ModeSet {
            indices,
            ..self.clone()
        }
    }
}

/// Transforms the boundary waveforms and selects modes `0..=n_modes`.
pub fn fourier_transform_bcs(
    waveforms: &[BoundaryWaveform],
    n_modes: usize,
    n_samples: usize,
) -> Result<ModeSet> {
    let period = waveforms.first().map_or(1.0, |w| w.period);
    for w in waveforms {
        if (w.period - period).abs() > 1e-12 * period {
            return Err(Error::Invalid(format!(
                "waveform periods differ ({} vs {period})",
                w.period
            )));
        }
        w.check_periodic()?;
    }
    let coefficients = waveforms
        .iter()
        .map(|w| waveform_coefficients(w, n_modes, n_samples))
        .collect::<Result<_>>()?;
    Ok(ModeSet {
        period,
        n_max: n_modes,
        indices: (0..=n_modes).collect(),
        waveforms: waveforms.to_vec(),
        coefficients,
    })
}

type PatchSamples = (PatchKind, f64, Vec<[f64; 3]>, Vec<[f64; 3]>);

/// Relative truncation error of the boundary data kept by `modes`: the
/// Neumann and Dirichlet terms, each a patch-area weighted discrete L2 norm
/// over one period, added in quadrature. Boundary types without data are
/// skipped.
pub fn truncation_error(mesh: &Mesh, modes: &ModeSet, n_samples: usize) -> Result<f64> {
    let n = modes
        .waveforms
        .iter()
        .find_map(|w| w.signal.native_samples())
        .unwrap_or(n_samples)
        .max(4 * (modes.n_max + 1));
    // per patch: (kind, area, [exact; n], [kept; n])
    let mut patches: BTreeMap<&str, PatchSamples> = BTreeMap::new();
    for (w, c) in modes.waveforms.iter().zip(&modes.coefficients) {
        let area = mesh.patch_measure(&w.patch)?;
        let exact = w.samples(n);
        let entry = patches
            .entry(&w.patch)
            .or_insert_with(|| (w.kind, area, vec![[0.0; 3]; n], vec![[0.0; 3]; n]));
        for k in 0..n {
            let t = modes.period * k as f64 / n as f64;
            let f = if exact.len() == n {
                exact[k]
            } else {
                w.signal.value(t, w.period)
            };
            let kept: f64 = modes
                .indices
                .iter()
                .map(|&i| (c[i] * C::from_polar(1.0, modes.omega(i) * t)).re)
                .sum();
            for d in 0..3 {
                entry.2[k][d] += f * w.direction[d];
                entry.3[k][d] += kept * w.direction[d];
            }
        }
    }
    let mut total = 0.0;
    let mut any = false;
    for kind in [PatchKind::Neumann, PatchKind::Dirichlet] {
        let (mut num, mut den) = (0.0, 0.0);
        for (k, area, exact, kept) in patches.values() {
            if *k != kind {
                continue;
            }
            for (e, h) in exact.iter().zip(kept) {
                for d in 0..3 {
                    num += area * (e[d] - h[d]).powi(2);
                    den += area * e[d].powi(2);
                }
            }
        }
        if den > 0.0 {
            total += num / den;
            any = true;
        }
    }
    if !any {
        log::warn!("all boundary waveforms vanish; truncation error taken as zero");
    }
    Ok(total.sqrt())
}

/// Strategy choosing which modes to solve from their forcing magnitudes.
pub trait ModeSelector: Send + Sync {
    fn select(&self, magnitudes: &[f64]) -> Vec<usize>;
}

/// All modes `0..=N`, optionally without the mean.
pub struct Consecutive {
    pub skip_mean: bool,
}

/// Modes whose magnitude is at least `fraction` of the largest one.
pub struct AmplitudeThreshold {
    pub fraction: f64,
}

impl ModeSelector for Consecutive {
    fn select(&self, magnitudes: &[f64]) -> Vec<usize> {
        let first = usize::from(self.skip_mean);
        (first..magnitudes.len()).collect()
    }
}

impl ModeSelector for AmplitudeThreshold {
    fn select(&self, magnitudes: &[f64]) -> Vec<usize> {
        let max = magnitudes.iter().copied().fold(0.0, f64::max);
        magnitudes
            .iter()
            .enumerate()
            .filter(|&(_, &m)| max > 0.0 && m >= self.fraction * max)
            .map(|(i, _)| i)
            .collect()
    }
}

/// `consecutive`, `skip-mean` and `amplitude` selectors.
pub fn mode_selectors(threshold: f64) -> Registry<dyn ModeSelector> {
    let mut r: Registry<dyn ModeSelector> = Registry::new("mode selector");
    r.register("consecutive", Box::new(Consecutive { skip_mean: false }));
    r.register("skip-mean", Box::new(Consecutive { skip_mean: true }));
    r.register(
        "amplitude",
        Box::new(AmplitudeThreshold {
            fraction: threshold,
        }),
    );
    r
}
