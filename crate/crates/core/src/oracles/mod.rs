//! Analytic reference flows, Bessel functions and error metrics.

mod analytic;
mod bessel;
mod metrics;
mod norms;

pub use analytic::{
    analytic_cases, channel_velocity, pipe_velocity, AnalyticCase, ChannelCase, ChannelFlow,
    PipeCase, PipeFlow,
};
pub use bessel::{bessel_j, bessel_j0123};
pub use metrics::{
    face_normal, field_error, field_norm, fit_bound_constant, flow_rate, loglog_slope,
    power_law_fit, ErrorBudget,
};
pub use norms::{womersley_norms, WomersleyNorms};
