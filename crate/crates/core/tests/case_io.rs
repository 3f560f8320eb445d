use spectral_stokes::case::{
    check_manifest, compare_runs, convergence_sweep, read_field_snapshot, run_case, sweep_config,
    CaseConfig, PreparedCase, RunReport, Sweep,
};
use spectral_stokes::Error;
use std::path::Path;

fn channel_config(dir: &Path, solver: &str) -> CaseConfig {
    let text = format!(
        r#"
name = "ch"
period = 1.0

[mesh]
generator = "channel"
length = 2.0
half_height = 1.0
nx = 8
ny = 4

[[boundary]]
patch = "inlet"
cosine = {{ amplitude = 1.0, harmonic = 1 }}

[solver]
kind = "{solver}"
tol = 1e-10

[scvs]
modes = 1

[mss]
rho_inf = 1.0
steps_per_cycle = 80
cycles = 8

[output]
directory = "{}"
times = [0.25, 0.5]
formats = ["native", "vtk"]

[oracle]
case = "channel"
size = 1.0
length = 2.0
"#,
        dir.display()
    );
    CaseConfig::parse(&text).unwrap()
}

fn root_message(e: &Error) -> String {
    e.root().to_string()
}

#[test]
fn config_survives_a_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let c = channel_config(dir.path(), "scvs");
    let again = CaseConfig::parse(&c.to_toml()).unwrap();
    assert_eq!(c, again);
    assert_eq!(c.fluid.rho, 1.0);
    assert_eq!(c.solver.restart, 200);
}

#[test]
fn invalid_configs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let base = channel_config(dir.path(), "scvs");
    assert!(matches!(
        CaseConfig::parse("[mesh]\ngenerator = \"channel\"\nbogus = 1\n"),
        Err(Error::Config(_))
    ));

    let mut c = base.clone();
    c.scvs.adaptive_tol = Some(1e-3);
    assert!(c.validate().is_err());

    let mut c = base.clone();
    c.solver.tol = 2.0;
    assert!(c.validate().is_err());

    let mut c = base.clone();
    c.solver.kind = "euler".into();
    assert!(c.validate().is_err());

    let mut c = base.clone();
    c.output.formats = vec!["png".into()];
    assert!(c.validate().is_err());

    let mut c = base.clone();
    c.boundaries[0].constant = Some(1.0);
    assert!(c.validate().is_err());

    let mut c = base.clone();
    c.boundaries[0].cosine = None;
    c.boundaries[0].file = Some(dir.path().join("missing.txt"));
    assert!(c.validate().is_err());

    let mut c = base.clone();
    c.fluid.mu = -1.0;
    assert!(c.validate().is_err());

    let mut c = base;
    c.solver.kind = "mss".into();
    c.mss.cycles = 0;
    assert!(c.validate().is_err());
}

#[test]
fn preparation_errors_name_their_stage() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = channel_config(dir.path(), "scvs");
    c.boundaries[0].patch = "nowhere".into();
    let err = PreparedCase::new(c).err().unwrap();
    assert!(err.to_string().starts_with("waveforms:"), "{err}");
    assert!(matches!(err.root(), Error::PatchNotFound(_)));

    let mut c = channel_config(dir.path(), "scvs");
    c.mesh.generator = "sphere".into();
    let err = PreparedCase::new(c).err().unwrap();
    assert!(err.to_string().starts_with("mesh:"), "{err}");

    let mut c = channel_config(dir.path(), "scvs");
    c.solver.restart = 0;
    let err = PreparedCase::new(c).err().unwrap();
    assert!(
        err.to_string().starts_with("config:"),
        "{}",
        root_message(&err)
    );
}

#[test]
fn scvs_run_writes_a_complete_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_case(channel_config(dir.path(), "scvs")).unwrap();
    let report = RunReport::load(dir.path()).unwrap();
    assert_eq!(report, run.report);
    check_manifest(dir.path(), &report).unwrap();
    for name in [
        "snapshot_000.field",
        "snapshot_001.vtk",
        "flow_rates.csv",
        "modes.csv",
        "metrics.csv",
        "config.toml",
    ] {
        assert!(
            report.manifest.iter().any(|p| p == Path::new(name)),
            "{name}"
        );
    }
    assert_eq!(report.snapshot_times, vec![0.25, 0.5]);
    assert_eq!(report.n_modes, Some(1));
    assert!(report.truncation_error.unwrap() < 1e-14);
    assert!(report.converged);
    assert_eq!(report.linear_solves, 1);
    assert_eq!(report.metrics.len(), 2);
    assert!(report.metrics.iter().all(|m| m.e < 0.1 && m.nm == Some(1)));

    let snap = read_field_snapshot(&dir.path().join("snapshot_000.field")).unwrap();
    assert_eq!(snap.time, 0.25);
    assert_eq!(
        snap.velocity.len(),
        run.case.problem.qmesh.n_velocity_nodes() * 2
    );

    let saved = CaseConfig::load(&dir.path().join("config.toml")).unwrap();
    assert_eq!(saved.scvs, run.case.config.scvs);

    std::fs::remove_file(dir.path().join("modes.csv")).unwrap();
    assert!(check_manifest(dir.path(), &report).is_err());
}

#[test]
fn output_is_independent_of_worker_count() {
    let mut files = Vec::new();
    for workers in [1, 3] {
        let dir = tempfile::tempdir().unwrap();
        let mut c = channel_config(dir.path(), "scvs");
        c.boundaries[0].cosine = None;
        c.boundaries[0].square = Some(1.0);
        c.scvs.modes = Some(5);
        c.solver.workers = Some(workers);
        let run = run_case(c).unwrap();
        assert_eq!(run.report.workers, workers);
        files.push(std::fs::read_to_string(dir.path().join("snapshot_001.field")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn comparing_a_run_with_itself_gives_zero_error() {
    let dir = tempfile::tempdir().unwrap();
    run_case(channel_config(dir.path(), "scvs")).unwrap();
    let c = compare_runs(dir.path(), dir.path(), None).unwrap();
    assert_eq!(c.rows.len(), 2);
    assert!(c.rows.iter().all(|r| r.e_a == 0.0 && r.e_b.is_none()));
    assert!(c.flow_errors.values().all(|(a, _)| *a == 0.0));
    assert_eq!(c.relative_cost(), 100.0);
    assert!(c.to_string().starts_with("t,e_a,e_b\n"));
}

#[test]
fn spectral_and_time_stepping_runs_agree() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let scvs = run_case(channel_config(a.path(), "scvs")).unwrap();
    let mss = run_case(channel_config(b.path(), "mss")).unwrap();
    assert_eq!(mss.report.linear_solves, 640);
    assert_eq!(mss.report.n_modes, None);
    let c = compare_runs(b.path(), a.path(), None).unwrap();
    assert!(c.rows.iter().all(|r| r.e_a < 1e-3), "{c}");
    assert!(c.flow_errors.values().all(|(e, _)| *e < 1e-2), "{c}");
    assert!(c.cost_ratio > 1.0);
    for (m, s) in mss.report.metrics.iter().zip(&scvs.report.metrics) {
        assert!((m.e - s.e).abs() < 1e-3);
    }
}

#[test]
fn sweeps_rewrite_the_right_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let base = channel_config(dir.path(), "scvs");
    let h = sweep_config(&base, Sweep::H, 2.0).unwrap();
    assert_eq!((h.mesh.nx, h.mesh.ny), (Some(16), Some(8)));
    let w = sweep_config(&base, Sweep::W, 4.0).unwrap();
    assert!((w.period.unwrap() - std::f64::consts::PI / 2.0).abs() < 1e-15);
    assert_eq!(
        sweep_config(&base, Sweep::EpsL, 1e-4).unwrap().solver.tol,
        1e-4
    );
    assert_eq!(
        sweep_config(&base, Sweep::Nm, 3.0).unwrap().scvs.modes,
        Some(3)
    );
    let dt = sweep_config(&base, Sweep::Dt, 0.01).unwrap();
    assert_eq!((dt.mss.dt, dt.mss.steps_per_cycle), (Some(0.01), None));
    assert!("x".parse::<Sweep>().is_err());
    assert_eq!("epsL".parse::<Sweep>().unwrap(), Sweep::EpsL);
}

#[test]
fn mesh_sweep_reduces_the_error() {
    let dir = tempfile::tempdir().unwrap();
    let base = channel_config(dir.path(), "scvs");
    let rows = convergence_sweep(&base, Sweep::H, &[0.5, 1.0]).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows[2].h < rows[0].h);
    assert!(rows[2].e < rows[0].e);
    assert!(dir.path().join("sweep_01").join("report.toml").exists());

    let mut no_oracle = base;
    no_oracle.oracle = None;
    assert!(convergence_sweep(&no_oracle, Sweep::H, &[1.0]).is_err());
}
