//! `nlkbe` — command-line front end for the nonlocal diffusion library.
//!
//! Subcommands: derive | kernel | moments | solve | algebra-check | gauge.
//! Parameter precedence is flags over `--config` file entries over built-in
//! defaults (σ=1, τ=1, ε=0.05, n=4096).  Exit codes: 0 ok, 2 bad input,
//! 3 grid/domain failure, 4 numerical instability.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nlkbe::Error;
use settings::Settings;

#[derive(Parser)]
#[command(name = "nlkbe", version, about = "Nonlocal quantum diffusion toolkit")]
struct Cli {
    /// Flat key=value configuration file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; most commands print to stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads for parameter sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Seed for randomized estimates (operator norms).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive the backward and forward PDE coefficient tables at order N.
    Derive {
        /// Truncation order N >= 2.
        #[arg(long)]
        order: Option<usize>,
    },
    /// Build the fundamental kernel and export it with a JSON sidecar.
    Kernel {
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        /// Nonlocality: dirac | gaussian | triangular | path to a density CSV.
        #[arg(long)]
        h: Option<String>,
        /// Grid points (power of two).
        #[arg(long)]
        grid_n: Option<usize>,
        /// Grid length L; derived from sigma, tau, eps when omitted.
        #[arg(long)]
        grid_len: Option<f64>,
    },
    /// Reconcile kernel moments: series vs partition vs grid quadrature.
    Moments {
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        /// Nonlocality kind: dirac | gaussian | triangular.
        #[arg(long)]
        h: Option<String>,
        /// Highest moment order to reconcile.
        #[arg(long)]
        order: Option<usize>,
    },
    /// Evolve a terminal condition read from CSV.
    Solve {
        /// Two-column CSV (x, value) on a uniform power-of-two grid.
        #[arg(long)]
        payoff: PathBuf,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        h: Option<String>,
        /// spectral | kramers-moyal:N; repeat to cross-validate.
        #[arg(long)]
        method: Vec<String>,
    },
    /// Check unit, associativity, representation, and noncommutativity laws.
    AlgebraCheck {
        /// JSON file {"operators": [fixture, ...]} (2 or 3 entries).
        #[arg(long)]
        fixture: Option<PathBuf>,
        #[arg(long)]
        grid_n: Option<usize>,
    },
    /// Tabulate the gauge translation violation against epsilon.
    Gauge {
        /// Comma-separated epsilon values.
        #[arg(long)]
        eps_list: Option<String>,
        /// Gauge potential v(x) as a two-column CSV; sin(x) when omitted.
        #[arg(long)]
        v: Option<PathBuf>,
        #[arg(long)]
        sigma: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 2 bad input, 3 grid/domain failure, 4 numerical instability.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Unstable { .. } => 4,
        Error::BoundaryMass { .. } | Error::GridMismatch(_) | Error::LogDomain { .. } => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> nlkbe::Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    }
    let settings = Settings::load(cli.config.as_deref())?;
    let output = cli.output.as_deref();
    let seed = cli.seed.or(settings.u64("seed")?).unwrap_or(0);

    match cli.command {
        Command::Derive { order } => {
            let order = settings.resolve_usize("order", order, 6)?;
            commands::derive(order, output)
        }
        Command::Kernel {
            sigma,
            tau,
            eps,
            h,
            grid_n,
            grid_len,
        } => {
            let p = settings.physical(sigma, tau, eps)?;
            let h = commands::parse_nonlocality(
                &settings.resolve_string("h", h, "gaussian"),
                p.eps,
            )?;
            let grid_n = settings.resolve_usize("grid_n", grid_n, 4096)?;
            let grid_len = settings.resolve_opt_f64("grid_len", grid_len)?;
            commands::kernel(p.sigma, p.tau, &h, grid_n, grid_len, output)
        }
        Command::Moments {
            sigma,
            tau,
            eps,
            h,
            order,
        } => {
            let p = settings.physical(sigma, tau, eps)?;
            let kind = settings.resolve_string("h", h, "gaussian");
            let order = settings.resolve_usize("order", order, 6)?;
            commands::moments(p.sigma, p.tau, p.eps, &kind, order, output)
        }
        Command::Solve {
            payoff,
            sigma,
            tau,
            eps,
            h,
            method,
        } => {
            let p = settings.physical(sigma, tau, eps)?;
            let h = commands::parse_nonlocality(
                &settings.resolve_string("h", h, "gaussian"),
                p.eps,
            )?;
            let methods = if method.is_empty() {
                vec![settings.resolve_string("method", None, "spectral")]
            } else {
                method
            };
            commands::solve(&payoff, p.sigma, p.tau, &h, &methods, output)
        }
        Command::AlgebraCheck { fixture, grid_n } => {
            let grid_n = settings.resolve_usize("grid_n", grid_n, 512)?;
            commands::algebra_check(fixture.as_deref(), grid_n, seed, output)
        }
        Command::Gauge { eps_list, v, sigma } => {
            let sigma = settings.resolve_f64("sigma", sigma, 1.0)?;
            let eps_list = settings.resolve_string("eps_list", eps_list, "0,0.05,0.1,0.2");
            commands::gauge(&eps_list, v.as_deref(), sigma, output)
        }
    }
}
