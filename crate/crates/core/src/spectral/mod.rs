//! Boundary-data transform, per-mode solves and time reconstruction.

mod driver;
mod modes;
pub mod pool;
mod waveform;

pub use driver::{
    adaptive_mode_refinement, reconstruct, solve_modes, AdaptiveResult, AdaptiveSettings,
    ModeSolution, Problem, RealField,
};
pub use modes::{
    fourier_transform_bcs, mode_selectors, truncation_error, waveform_coefficients,
    AmplitudeThreshold, Consecutive, ModeSelector, ModeSet, DEFAULT_SAMPLES,
};
pub use waveform::{BoundaryWaveform, Signal};
