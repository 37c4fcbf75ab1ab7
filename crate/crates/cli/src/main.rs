//! `strqfi` — quantum Fisher information for estimating the conical
//! deficit of a cosmic string from a static two-level detector.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 domain error,
//! 4 convergence failure.

mod commands;
mod config;
mod errors;
mod output;
mod sweep;

use std::path::PathBuf;

use clap::{ArgAction, Parser, Subcommand};

use errors::{CliError, CliResult};
use strqfi::ResponseCache;

#[derive(Parser)]
#[command(
    name = "strqfi",
    version,
    about = "Quantum Fisher information for the cosmic-string deficit parameter nu"
)]
struct Cli {
    /// key = value file whose bindings override the flags below
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Response-cache file: loaded if present, rewritten on success
    #[arg(long, global = true, value_name = "PATH")]
    cache: Option<PathBuf>,

    /// Worker threads for grid scans (default: all cores)
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Vacuum response rates f_i(r_tilde, nu) as CSV
    Response {
        /// Field component: r|radial, a|tangential, z|parallel
        #[arg(long)]
        component: Option<String>,
        /// Distance from the string: VALUE or LO:HI:COUNT[:log|lin]
        #[arg(long, allow_hyphen_values = true)]
        r: Option<String>,
        /// Deficit parameter: VALUE or LO:HI:COUNT[:log|lin]
        #[arg(long, allow_hyphen_values = true)]
        nu: Option<String>,
        /// Output CSV path (stdout when omitted)
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Quantum Fisher information for the deficit parameter as CSV
    Qfi {
        /// Polarization: radial|tangential|parallel or zr,za,zz weights
        #[arg(long)]
        pol: Option<String>,
        /// Distance sweep: VALUE or LO:HI:COUNT[:log|lin]
        #[arg(long, allow_hyphen_values = true)]
        r: Option<String>,
        /// Deficit sweep
        #[arg(long, allow_hyphen_values = true)]
        nu: Option<String>,
        /// Evolution-time sweep (units 1/gamma0)
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<String>,
        /// Initial-state polar angle sweep, radians in [0, pi]
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        /// Output CSV path (stdout when omitted)
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Reproduction datasets: one CSV per polarization plus a manifest
    Figure {
        /// Layout name: fig3 (tau x theta), fig4 (tau x r),
        /// fig5 (r profiles), fig6 (nu x tau)
        name: String,
        /// Output directory for the CSVs and manifest
        #[arg(long, value_name = "DIR", default_value = ".")]
        out_dir: PathBuf,
        /// Sample-count override per axis
        #[arg(long, value_name = "N")]
        grid: Option<String>,
    },
    /// Maximize the QFI over one or two free axes
    Maximize {
        /// Polarization: radial|tangential|parallel or zr,za,zz weights
        #[arg(long)]
        pol: Option<String>,
        /// Fixed distance (required unless r has an axis)
        #[arg(long, allow_hyphen_values = true)]
        r: Option<String>,
        /// Fixed deficit parameter
        #[arg(long, allow_hyphen_values = true)]
        nu: Option<String>,
        /// Fixed evolution time
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<String>,
        /// Fixed initial-state angle
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        /// Free axis NAME[:LO:HI[:COUNT[:log|lin]]]; repeatable, max two
        #[arg(long, action = ArgAction::Append)]
        axis: Vec<String>,
        /// Refinement stop width in parameter units
        #[arg(long, allow_hyphen_values = true)]
        tol: Option<String>,
        /// Write the key=value record here instead of stdout
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}

fn run(mut cli: Cli) -> CliResult<()> {
    apply_config(&mut cli)?;
    configure_jobs(cli.jobs.as_deref())?;

    let cache = match &cli.cache {
        Some(path) => {
            Some(ResponseCache::load(path).map_err(|e| errors::from_response(&e))?)
        }
        None => None,
    };
    let argv: Vec<String> = std::env::args().collect();
    let ctx = commands::Ctx {
        cache: cache.as_ref(),
        argv: &argv,
    };

    let result = dispatch(&cli.command, &ctx);

    if let (Some(path), Some(store)) = (&cli.cache, &cache) {
        let saved = store.save(path).map_err(|e| errors::from_response(&e));
        if result.is_ok() {
            saved?;
        }
    }
    result
}

fn dispatch(command: &Command, ctx: &commands::Ctx) -> CliResult<()> {
    match command {
        Command::Response {
            component,
            r,
            nu,
            out,
        } => commands::cmd_response(component, r, nu, out.as_deref(), ctx),
        Command::Qfi {
            pol,
            r,
            nu,
            tau,
            theta,
            out,
        } => commands::cmd_qfi(pol, r, nu, tau, theta, out.as_deref(), ctx),
        Command::Figure {
            name,
            out_dir,
            grid,
        } => commands::cmd_figure(name, out_dir, grid, ctx),
        Command::Maximize {
            pol,
            r,
            nu,
            tau,
            theta,
            axis,
            tol,
            out,
        } => commands::cmd_maximize(pol, r, nu, tau, theta, axis, tol, out.as_deref(), ctx),
    }
}

fn apply_config(cli: &mut Cli) -> CliResult<()> {
    let Some(path) = cli.config.clone() else {
        return Ok(());
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    for (key, value) in config::parse(&text).map_err(CliError::Usage)? {
        match key.as_str() {
            "cache" => cli.cache = Some(PathBuf::from(value)),
            "jobs" => cli.jobs = Some(value),
            _ => apply_command_key(&mut cli.command, &key, value)?,
        }
    }
    Ok(())
}

fn apply_command_key(command: &mut Command, key: &str, value: String) -> CliResult<()> {
    let unknown = |cmd: &str| {
        Err(CliError::Usage(format!(
            "config: unknown key {key:?} for command {cmd}"
        )))
    };
    match command {
        Command::Response {
            component,
            r,
            nu,
            out,
        } => match key {
            "component" => *component = Some(value),
            "r" => *r = Some(value),
            "nu" => *nu = Some(value),
            "out" => *out = Some(PathBuf::from(value)),
            _ => return unknown("response"),
        },
        Command::Qfi {
            pol,
            r,
            nu,
            tau,
            theta,
            out,
        } => match key {
            "pol" => *pol = Some(value),
            "r" => *r = Some(value),
            "nu" => *nu = Some(value),
            "tau" => *tau = Some(value),
            "theta" => *theta = Some(value),
            "out" => *out = Some(PathBuf::from(value)),
            _ => return unknown("qfi"),
        },
        Command::Figure { out_dir, grid, .. } => match key {
            "out-dir" => *out_dir = PathBuf::from(value),
            "grid" => *grid = Some(value),
            _ => return unknown("figure"),
        },
        Command::Maximize {
            pol,
            r,
            nu,
            tau,
            theta,
            tol,
            out,
            ..
        } => match key {
            "pol" => *pol = Some(value),
            "r" => *r = Some(value),
            "nu" => *nu = Some(value),
            "tau" => *tau = Some(value),
            "theta" => *theta = Some(value),
            "tol" => *tol = Some(value),
            "out" => *out = Some(PathBuf::from(value)),
            _ => return unknown("maximize"),
        },
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn configure_jobs(jobs: Option<&str>) -> CliResult<()> {
    let Some(token) = jobs else { return Ok(()) };
    let n: usize = token
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Usage(format!("--jobs must be a positive integer, got {token:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))
}

#[cfg(not(feature = "parallel"))]
fn configure_jobs(jobs: Option<&str>) -> CliResult<()> {
    // Serial build: scans run on one thread regardless.
    let _ = jobs;
    Ok(())
}
