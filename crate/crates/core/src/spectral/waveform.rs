use crate::error::{Error, Result};
use crate::mesh::PatchKind;
use num_complex::Complex64 as C;
use std::f64::consts::PI;
use std::path::Path;

/// Scalar time-periodic signal over one period `[0, T)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Signal {
    Constant(f64),
    /// `amplitude * cos(harmonic * 2πt/T + phase)`
    Cosine {
        amplitude: f64,
        harmonic: usize,
        phase: f64,
    },
    /// `+amplitude` on the first half period, `-amplitude` on the second.
    Square {
        amplitude: f64,
    },
    /// Asymmetric triangle: linear rise from 0 to `amplitude` over the first
    /// `peak` fraction of the period, linear fall back to 0 afterwards.
    Triangle {
        amplitude: f64,
        peak: f64,
    },
    /// Uniform samples at `t_k = kT/n`.
    Samples(Vec<f64>),
    /// One-sided coefficients `c_i` of `Re Σ c_i exp(jω_i t)`.
    Modes(Vec<C>),
}

impl Signal {
    /// Value at time `t` (wrapped into the period). Samples are
    /// interpolated linearly.
    pub fn value(&self, t: f64, period: f64) -> f64 {
        let s = (t / period).rem_euclid(1.0);
        match self {
            Signal::Constant(c) => *c,
            Signal::Cosine {
                amplitude,
                harmonic,
                phase,
            } => amplitude * (2.0 * PI * *harmonic as f64 * s + phase).cos(),
            Signal::Square { amplitude } => {
                if s == 0.0 || s == 0.5 {
                    0.0
                } else if s < 0.5 {
                    *amplitude
                } else {
                    -amplitude
                }
            }
            Signal::Triangle { amplitude, peak } => {
                if s <= *peak {
                    amplitude * s / peak
                } else {
                    amplitude * (1.0 - s) / (1.0 - peak)
                }
            }
            Signal::Samples(v) => {
                let n = v.len();
                let x = s * n as f64;
                let k = (x.floor() as usize).min(n - 1);
                let f = x - k as f64;
                v[k] * (1.0 - f) + v[(k + 1) % n] * f
            }
            Signal::Modes(c) => c
                .iter()
                .enumerate()
                .map(|(i, ci)| (ci * C::from_polar(1.0, 2.0 * PI * i as f64 * s)).re)
                .sum(),
        }
    }

    /// Number of samples this signal carries natively, if any.
    pub fn native_samples(&self) -> Option<usize> {
        match self {
            Signal::Samples(v) => Some(v.len()),
            _ => None,
        }
    }

    /// Reads a waveform file. The first non-comment line is a header
    /// `samples <T>` (followed by `t value` lines over one period; a final
    /// sample at `t = T` is dropped) or `modes <T>` (followed by `i re im`
    /// lines). Returns the signal and its period.
    pub fn parse(text: &str, path: &Path) -> Result<(Signal, f64)> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (ln, header) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "empty waveform file"))?;
        let mut h = header.split_whitespace();
        let tag = h.next().unwrap_or("");
        let period: f64 = h
            .next()
            .and_then(|v| v.parse().ok())
            .filter(|p: &f64| *p > 0.0)
            .ok_or_else(|| Error::parse(path, ln, "header needs a positive period"))?;
        let nums = |ln: usize, l: &str, n: usize| -> Result<Vec<f64>> {
            let v: Vec<f64> = l
                .split_whitespace()
                .map(|x| x.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::parse(path, ln, e.to_string()))?;
            if v.len() != n {
                return Err(Error::parse(path, ln, format!("expected {n} columns")));
            }
            Ok(v)
        };
        match tag {
            "samples" => {
                let mut rows = Vec::new();
                for (ln, l) in lines {
                    let v = nums(ln, l, 2)?;
                    rows.push((ln, v[0], v[1]));
                }
                if let Some(&(_, t, _)) = rows.last() {
                    if rows.len() > 1 && (t - period).abs() <= 1e-9 * period {
                        rows.pop();
                    }
                }
                if rows.len() < 2 {
                    return Err(Error::parse(path, ln, "need at least two samples"));
                }
                let n = rows.len();
                for (k, &(ln, t, _)) in rows.iter().enumerate() {
                    let want = period * k as f64 / n as f64;
                    if (t - want).abs() > 1e-6 * period {
                        return Err(Error::parse(
                            path,
                            ln,
                            format!("samples must be uniform over one period (t = {t}, expected {want})"),
                        ));
                    }
                }
                Ok((
                    Signal::Samples(rows.into_iter().map(|r| r.2).collect()),
                    period,
                ))
            }
            "modes" => {
                let mut coeffs: Vec<C> = Vec::new();
                for (ln, l) in lines {
                    let v = nums(ln, l, 3)?;
                    if v[0] < 0.0 || v[0].fract() != 0.0 {
                        return Err(Error::parse(
                            path,
                            ln,
                            "mode index must be a non-negative integer",
                        ));
                    }
                    let i = v[0] as usize;
                    if coeffs.len() <= i {
                        coeffs.resize(i + 1, C::new(0.0, 0.0));
                    }
                    if i == 0 && v[2] != 0.0 {
                        return Err(Error::parse(path, ln, "mode 0 coefficient must be real"));
                    }
                    coeffs[i] = C::new(v[1], v[2]);
                }
                Ok((Signal::Modes(coeffs), period))
            }
            other => Err(Error::parse(
                path,
                ln,
                format!("unknown waveform header '{other}' (expected 'samples' or 'modes')"),
            )),
        }
    }

    pub fn load(path: &Path) -> Result<(Signal, f64)> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }
}

/// Boundary data of one patch: a fixed vector direction modulated by a
/// periodic signal.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryWaveform {
    pub patch: String,
    pub kind: PatchKind,
    pub direction: [f64; 3],
    pub period: f64,
    pub signal: Signal,
}

impl BoundaryWaveform {
    pub fn new(
        patch: impl Into<String>,
        kind: PatchKind,
        direction: [f64; 3],
        period: f64,
        signal: Signal,
    ) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::Invalid(format!(
                "period must be positive, got {period}"
            )));
        }
        if kind == PatchKind::Wall {
            return Err(Error::Invalid("walls carry no waveform".into()));
        }
        if let Signal::Triangle { peak, .. } = signal {
            if !(peak > 0.0 && peak < 1.0) {
                return Err(Error::Invalid(format!(
                    "triangle peak {peak} not in (0, 1)"
                )));
            }
        }
        Ok(Self {
            patch: patch.into(),
            kind,
            direction,
            period,
            signal,
        })
    }

    /// Vector value at time `t`.
    pub fn value(&self, t: f64) -> [f64; 3] {
        let s = self.signal.value(t, self.period);
        self.direction.map(|d| d * s)
    }

    /// Samples used for the transform: native samples, or `n` uniform
    /// samples of an analytic signal.
    pub fn samples(&self, n: usize) -> Vec<f64> {
        match &self.signal {
            Signal::Samples(v) => v.clone(),
            s => (0..n)
                .map(|k| s.value(self.period * k as f64 / n as f64, self.period))
                .collect(),
        }
    }

    /// Whether a sampled signal is periodic to within its own resolution:
    /// the jump across the period end is no larger than the largest jump
    /// between neighbouring samples.
    pub fn check_periodic(&self) -> Result<()> {
        if let Signal::Samples(v) = &self.signal {
            let interior = v
                .windows(2)
                .map(|w| (w[1] - w[0]).abs())
                .fold(0.0, f64::max);
            let wrap = (v[0] - v[v.len() - 1]).abs();
            if wrap > 2.0 * interior + 1e-12 * v.iter().map(|x| x.abs()).fold(0.0, f64::max) {
                return Err(Error::Invalid(format!(
                    "waveform on '{}' is not periodic: end-to-start jump {wrap:e}",
                    self.patch
                )));
            }
        }
        Ok(())
    }
}
