//! `magtun`: command-line driver for the magnetic double-well tunnelling toolkit.

mod commands;
mod config;
mod table;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::{Failure, LatticeFlags, Outcome, Route};
use crate::config::{parse_h_range, RunConfig};
use crate::table::{Format, Table};

#[derive(Parser)]
#[command(name = "magtun", version, about = "Tunnelling asymptotics for a pair of magnetic radial wells")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration (well, L and optional parameter lists).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Comma-separated list of semiclassical parameters.
    #[arg(long = "h", global = true, value_delimiter = ',', allow_negative_numbers = true)]
    h: Option<Vec<f64>>,
    /// Geometric h grid `lo:hi:n`, listed from hi down to lo.
    #[arg(long = "h-range", global = true, conflicts_with = "h")]
    h_range: Option<String>,
    /// Cut parameters for the W chain, each in (0, a).
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    eta: Option<Vec<f64>>,
    /// Scaling factors for the beta sweep.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    beta: Option<Vec<f64>>,
    /// Lattice spacing for the two-dimensional solver.
    #[arg(long, global = true, allow_negative_numbers = true)]
    grid: Option<f64>,
    /// Lattice box half-widths in x and y.
    #[arg(long = "box", global = true, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true)]
    box_half: Option<Vec<f64>>,
    /// Relative residual target for the lattice eigensolver.
    #[arg(long, global = true, allow_negative_numbers = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Agmon actions, corridor constants and the sharp action.
    Constants,
    /// Lowest two fiber eigenvalues for m in -2..=2.
    Spectrum,
    /// WKB profile error and outer-constant calibration.
    Wkb,
    /// Hopping coefficient by the direct and Bessel routes.
    Hopping {
        #[arg(long, value_enum, default_value_t = Route::Both)]
        route: Route,
    },
    /// Sharp action report, W chain or beta sweep.
    Asymptotics {
        /// Every term of the sharp action (the default).
        #[arg(long, conflicts_with_all = ["wchain", "beta_sweep"])]
        action: bool,
        /// Successive refinements of the hopping asymptotics.
        #[arg(long, conflicts_with = "beta_sweep")]
        wchain: bool,
        /// Rescaled actions for a family of scaled wells.
        #[arg(long = "beta-sweep")]
        beta_sweep: bool,
    },
    /// Two-dimensional lattice splitting against twice the hopping.
    Splitting,
    /// Hopping over an h grid, optionally with lattice splitting.
    Sweep {
        #[arg(long = "with-splitting")]
        with_splitting: bool,
    },
    /// Run the invariant battery.
    Verify {
        /// Only the fast checks.
        #[arg(long)]
        quick: bool,
    },
}

fn init_threads() -> Outcome<()> {
    let Ok(raw) = std::env::var("MAGTUN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::config(format!("MAGTUN_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::config(format!("cannot build thread pool: {e}")))
}

/// File values first, then flags on top.
fn resolve(common: &Common) -> Outcome<RunConfig> {
    let mut rc = match &common.config {
        Some(path) => RunConfig::load(path).map_err(Failure::config)?,
        None => RunConfig::default(),
    };
    if let Some(h) = &common.h {
        rc.h = Some(h.clone());
    }
    if let Some(r) = &common.h_range {
        rc.h = Some(parse_h_range(r).map_err(Failure::config)?);
    }
    if let Some(e) = &common.eta {
        rc.eta = Some(e.clone());
    }
    if let Some(b) = &common.beta {
        rc.beta = Some(b.clone());
    }
    if let Some(g) = common.grid {
        rc.grid = Some(g);
    }
    if let Some(b) = &common.box_half {
        rc.box_half = Some([b[0], b[1]]);
    }
    if let Some(t) = common.tol {
        rc.tol = Some(t);
    }
    rc.validate().map_err(Failure::config)?;
    Ok(rc)
}

fn emit(table: &Table, common: &Common) -> Outcome<()> {
    match &common.output {
        Some(path) => std::fs::File::create(path)
            .map_err(|e| Failure::config(format!("cannot create {}: {e}", path.display())))
            .and_then(|f| {
                let mut w = std::io::BufWriter::new(f);
                table.write(common.format, &mut w).and_then(|_| w.flush()).map_err(io_failure)
            }),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            match table.write(common.format, &mut lock) {
                // A closed downstream pipe (`| head`) is not an error.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r.map_err(io_failure),
            }
        }
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure::check(format!("write failed: {e}"))
}

fn run(cli: &Cli) -> Outcome<()> {
    init_threads()?;
    let rc = resolve(&cli.common)?;
    let config = rc.double_well().map_err(Failure::config)?;
    let hs = |default: &[f64]| rc.h.clone().unwrap_or_else(|| default.to_vec());
    let lattice = LatticeFlags { grid: rc.grid, box_half: rc.box_half, tol: rc.tol };
    let table = match &cli.command {
        Command::Constants => commands::constants(&config)?,
        Command::Spectrum => commands::spectrum(&config, &hs(&[0.2, 0.1, 0.05]))?,
        Command::Wkb => commands::wkb(&config, &hs(&[0.2, 0.14, 0.1, 0.07, 0.05]))?,
        Command::Hopping { route } => commands::hopping(&config, &hs(&[0.5, 0.3]), *route)?,
        Command::Asymptotics { wchain, beta_sweep, .. } => {
            let a = config.well().a();
            if *wchain {
                let etas = rc.eta.clone().unwrap_or_else(|| vec![0.05 * a, 0.1 * a, 0.2 * a]);
                commands::wchain(&config, &hs(&[0.3]), &etas)?
            } else if *beta_sweep {
                let betas = rc.beta.clone().unwrap_or_else(|| vec![1.0, 0.5, 0.2, 0.1, 0.05]);
                commands::beta_sweep(&config, &betas)?
            } else {
                commands::action_report(&config)?
            }
        }
        Command::Splitting => commands::splitting(&config, &hs(&[0.5]), lattice)?,
        Command::Sweep { with_splitting } => {
            commands::sweep(&config, &hs(&[0.6, 0.5, 0.4, 0.3, 0.25]), *with_splitting, lattice)?
        }
        Command::Verify { quick } => {
            let checks = verify::run(&config, &verify::Options { quick: *quick, grid: rc.grid });
            emit(&verify::table(&checks), &cli.common)?;
            let failed: Vec<&str> =
                checks.iter().filter(|c| c.status == verify::Status::Fail).map(|c| c.name).collect();
            if !failed.is_empty() {
                return Err(Failure::check(format!("failed checks: {}", failed.join(", "))));
            }
            return Ok(());
        }
    };
    emit(&table, &cli.common)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("magtun: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
