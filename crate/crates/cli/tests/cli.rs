use std::path::Path;
use std::process::{Command, Output};

fn scvs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scvs"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, solver_extra: &str) -> String {
    let text = format!(
        r#"name = "cli"
period = 1.0

[mesh]
generator = "channel"
length = 2.0
half_height = 1.0
nx = 6
ny = 3

[[boundary]]
patch = "inlet"
cosine = {{ amplitude = 1.0, harmonic = 1 }}

[solver]
kind = "scvs"
{solver_extra}

[scvs]
modes = 1

[output]
directory = "out"
times = [0.25]

[oracle]
case = "channel"
size = 1.0
length = 2.0
"#
    );
    let path = dir.join("case.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_writes_output_next_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tol = 1e-8");
    let o = scvs(&["solve", &cfg]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let out = dir.path().join("out");
    for f in [
        "report.toml",
        "snapshot_000.field",
        "flow_rates.csv",
        "metrics.csv",
        "modes.csv",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let text = stdout(&o);
    assert!(text.contains("case cli (scvs)"));
    assert!(text.contains("cli@t=0.25 e "));

    let c = scvs(&["compare", out.to_str().unwrap(), out.to_str().unwrap()]);
    assert_eq!(c.status.code(), Some(0));
    let text = stdout(&c);
    assert!(text.starts_with("t,e_a,e_b\n2.5000000000000000e-1,0.0000000000000000e0,"));
    assert!(text.contains("relative_cost_percent,1.0000000000000000e2"));
}

#[test]
fn non_convergence_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tol = 1e-12\nrestart = 2\nmax_iters = 2");
    let o = scvs(&["solve", &cfg]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("did not converge"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tol = 5.0");
    assert_eq!(scvs(&["solve", &cfg]).status.code(), Some(2));
    assert_eq!(
        scvs(&["solve", "/nonexistent/case.toml"]).status.code(),
        Some(2)
    );
    std::fs::write(dir.path().join("bad.toml"), "[mesh\n").unwrap();
    assert_eq!(
        scvs(&["solve", dir.path().join("bad.toml").to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(scvs(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn oracle_prints_the_profile() {
    let o = scvs(&["oracle", "channel", "0", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "y,re,im");
    assert_eq!(lines.len(), 6);
    // steady centreline value H^2 / (2 mu L) = 0.5
    let mid: Vec<f64> = lines[3].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(mid[0], 0.0);
    assert!((mid[1] - 0.5).abs() < 1e-15);
    let wall: Vec<f64> = lines[5].split(',').map(|v| v.parse().unwrap()).collect();
    assert!(wall[1].abs() < 1e-15 && wall[2].abs() < 1e-15);

    let p = scvs(&["oracle", "pipe", "25.1", "3"]);
    assert_eq!(p.status.code(), Some(0));
    assert!(stdout(&p).starts_with("r,re,im\n"));
    assert_eq!(scvs(&["oracle", "duct", "1", "3"]).status.code(), Some(2));
}

#[test]
fn convergence_prints_rows_and_slope() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tol = 1e-10");
    let o = scvs(&["convergence", &cfg, "--sweep", "h", "--values", "1,2"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    assert!(text.starts_with("case,W,h,eps_L,Nm,e\n"));
    let slope: f64 = text
        .lines()
        .last()
        .unwrap()
        .strip_prefix("slope ")
        .unwrap()
        .parse()
        .unwrap();
    assert!(slope > 2.0, "{text}");
    assert!(dir.path().join("out/sweep_01/report.toml").exists());
    assert_eq!(
        scvs(&["convergence", &cfg, "--sweep", "q", "--values", "1,2"])
            .status
            .code(),
        Some(2)
    );
}
