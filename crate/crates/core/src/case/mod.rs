//! Case configuration, run orchestration and result files.

mod compare;
mod config;
mod run;
pub mod snapshot;

pub use compare::{compare_runs, convergence_sweep, sweep_config, CompareRow, Comparison, Sweep};
pub use config::{
    mesh_generators, BoundaryConfig, CaseConfig, CosineConfig, FluidConfig, MeshConfig,
    MeshGenerator, MssConfig, OracleConfig, OutputConfig, ScvsConfig, SolverConfig, SurfaceConfig,
    TriangleConfig,
};
pub use run::{
    check_manifest, oracle_error, periodic_solvers, run_case, CaseRun, FlowSeries, MetricsRow,
    ModeCost, Mss, PeriodicSolver, PreparedCase, RunReport, Scvs, SolverOutput, METRICS_HEADER,
};
pub use snapshot::{read_field_snapshot, write_field_snapshot, FieldSnapshot};
