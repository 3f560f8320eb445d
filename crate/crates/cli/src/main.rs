use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use spectral_stokes::case::{
    compare_runs, convergence_sweep, run_case, CaseConfig, Sweep, METRICS_HEADER,
};
use spectral_stokes::fem::FluidProps;
use spectral_stokes::oracles::{analytic_cases, loglog_slope};
use spectral_stokes::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "scvs",
    version,
    about = "Time-periodic Stokes flow in the frequency domain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a case and write its output directory.
    Solve { config: PathBuf },
    /// Compare two run directories, optionally against a reference run.
    Compare {
        run_a: PathBuf,
        run_b: PathBuf,
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Print an analytic velocity profile (`channel` or `pipe`).
    Oracle {
        case: String,
        /// Womersley number.
        womersley: f64,
        /// Number of profile points.
        points: usize,
        #[arg(long, default_value_t = 1.0)]
        size: f64,
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[arg(long, default_value_t = 1.0)]
        traction: f64,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
    },
    /// Run a parameter sweep and print the metrics rows with a log-log slope.
    Convergence {
        config: PathBuf,
        /// One of h, W, epsL, Nm, dt.
        #[arg(long)]
        sweep: String,
        /// Comma-separated sweep values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Solve { config } => {
            let cfg = CaseConfig::load(&config)?;
            let run = run_case(cfg)?;
            let r = &run.report;
            println!("case {} ({})", r.name, r.solver);
            println!("unknowns {} linear solves {}", r.unknowns, r.linear_solves);
            if let Some(n) = r.n_modes {
                println!("N_m {n} e_M {:.17e}", r.truncation_error.unwrap_or(0.0));
            }
            for m in &r.metrics {
                println!("{} e {:.17e}", m.case, m.e);
            }
            println!("t_C {:.17e} s t_W {:.17e} s", r.t_c, r.t_w);
            println!("output {}", run.case.config.output.directory.display());
            Ok(r.converged)
        }
        Command::Compare {
            run_a,
            run_b,
            reference,
        } => {
            let c = compare_runs(&run_a, &run_b, reference.as_deref())?;
            println!("{c}");
            Ok(true)
        }
        Command::Oracle {
            case,
            womersley,
            points,
            size,
            length,
            traction,
            rho,
            mu,
        } => {
            if points < 2 {
                bail!("need at least two points");
            }
            let props = FluidProps::new(rho, mu)?;
            let registry = analytic_cases(size, length, traction, props);
            let flow = registry.get(&case)?;
            let omega = flow.omega_for(womersley);
            let (lo, coord) = if case == "pipe" {
                (0.0, "r")
            } else {
                (-size, "y")
            };
            println!("{coord},re,im");
            for k in 0..points {
                let s = lo + (size - lo) * k as f64 / (points - 1) as f64;
                let u = flow.velocity([0.0, s, 0.0], omega)?[0];
                println!("{s:.17e},{:.17e},{:.17e}", u.re, u.im);
            }
            Ok(true)
        }
        Command::Convergence {
            config,
            sweep,
            values,
        } => {
            let kind: Sweep = sweep.parse()?;
            let cfg = CaseConfig::load(&config)?;
            let rows = convergence_sweep(&cfg, kind, &values).context("sweep failed")?;
            println!("{METRICS_HEADER}");
            for r in &rows {
                println!("{}", r.csv());
            }
            let per_point = rows.len() / values.len().max(1);
            if per_point > 0 && values.len() > 1 {
                let e: Vec<f64> = rows.iter().step_by(per_point).map(|r| r.e).collect();
                let x: Vec<f64> = match kind {
                    Sweep::H => rows.iter().step_by(per_point).map(|r| r.h).collect(),
                    _ => values.clone(),
                };
                println!("slope {:.17e}", loglog_slope(&x, &e)?);
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: at least one linear solve did not converge");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<Error>().map(Error::root) {
                Some(Error::Config(_) | Error::Parse { .. }) => 2,
                Some(Error::NotConverged(_)) => 3,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
