use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use cupflow_cli::{
    configure_threads, report_without_timings, run_audit, run_pipeline, Pipeline, RunConfig,
};
use cupflow_core::action::condition_a_certificate;
use cupflow_core::{model_by_name, rest_point_lower_bound};

#[derive(Parser)]
#[command(
    name = "cupflow",
    about = "Fixed-point lower-bound experiments for Hamiltonian flows on torus x projective-space products"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the endpoint-transversality condition for a configured Hamiltonian.
    Certificate {
        config: PathBuf,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
    /// Audit an isolating neighborhood at a fixed radius and interpolation strength.
    Audit {
        config: PathBuf,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
    },
    /// Sweep the interpolation parameter from 0 to 1, auditing at each step.
    #[command(name = "continue")]
    Continue {
        config: PathBuf,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Multistart critical-point search with S^1-family clustering.
    Solve {
        config: PathBuf,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Relative cup length of a named module model ("torus m", "proj n",
    /// "sphere d", "product m n").
    Rcl { model: Vec<String> },
    /// Full pipeline: certificate, radius, continuation, search, bound, report.
    Run { config: PathBuf },
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Certificate { config, samples } => {
            let cfg = RunConfig::from_path(&config)?;
            let pipe = Pipeline::new(cfg)?;
            let cert = condition_a_certificate(
                &pipe.hamiltonian,
                pipe.level.max_mode(),
                pipe.config.eps,
                samples,
                pipe.config.seed,
                pipe.config.certificate.smallness_grid,
            )?;
            println!("{}", serde_json::to_string_pretty(&cert)?);
            Ok(cert.verdict)
        }
        Command::Audit { config, radius, s } => {
            let cfg = RunConfig::from_path(&config)?;
            let audit = run_audit(&cfg, radius, &[s])?;
            println!("{}", serde_json::to_string_pretty(&audit)?);
            Ok(audit.verdict)
        }
        Command::Continue { config, radius } => {
            let cfg = RunConfig::from_path(&config)?;
            let pipe = Pipeline::new(cfg)?;
            let radius = match radius {
                Some(r) => r,
                None => pipe.resolve_radius()?.0,
            };
            let report = pipe.sweep(radius)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(report.pass)
        }
        Command::Solve { config, radius } => {
            let cfg = RunConfig::from_path(&config)?;
            let pipe = Pipeline::new(cfg)?;
            let radius = match radius {
                Some(r) => r,
                None => pipe.resolve_radius()?.0,
            };
            let outcomes = pipe.search(radius);
            let families = pipe.families(&outcomes);
            println!("{}", serde_json::to_string_pretty(&families)?);
            Ok(!families.is_empty())
        }
        Command::Rcl { model } => {
            let name = model.join(" ");
            let module = model_by_name(&name).context("unknown model")?;
            println!("{}", rest_point_lower_bound(&module));
            Ok(true)
        }
        Command::Run { config } => {
            let cfg = RunConfig::from_path(&config)?;
            let report = run_pipeline(cfg)?;
            println!("{}", report_without_timings(&report)?);
            Ok(report.verdict)
        }
    }
}
