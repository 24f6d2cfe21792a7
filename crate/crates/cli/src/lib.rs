//! Config-driven front end for the envelope-theory solvers: `solve`, `scan`,
//! `compare` and `validate`.

pub mod compare;
pub mod config;
pub mod error;
pub mod scan;
pub mod solve;
pub mod validate;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
pub use error::CliError;
use scan::{ScanSpec, ScanVar};

#[derive(Debug, Parser)]
#[command(
    name = "envelope",
    version,
    about = "Envelope-theory eigenvalue solver"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SolverFlags {
    /// Residual tolerance; overrides the config file and ET_SOLVER_TOL.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration limit; overrides the config file.
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the compact equations for one system.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Also write the result as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Solve over a range of one parameter and write CSV rows.
    Scan {
        #[arg(long)]
        config: PathBuf,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        scan_var: ScanVar,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Compare the compact route, the extremization route and an oracle.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Run the invariant battery.
    Validate {
        #[command(flatten)]
        solver: SolverFlags,
    },
}

fn load(
    path: &Path,
    flags: &SolverFlags,
) -> Result<(RunConfig, envelope_core::SolverConfig), CliError> {
    let run = RunConfig::load(path)?;
    let cfg = run.solver.resolve(flags.tol, flags.max_iter)?;
    Ok((run, cfg))
}

/// Executes a parsed command, writing reports to `w`.
pub fn execute(cli: &Cli, w: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Solve {
            config,
            out,
            solver,
        } => {
            let (run, cfg) = load(config, solver)?;
            solve::cmd_solve(&run, &cfg, out.as_deref(), w)
        }
        Command::Scan {
            config,
            out,
            scan_var,
            from,
            to,
            steps,
            solver,
        } => {
            let (run, cfg) = load(config, solver)?;
            let spec = ScanSpec {
                var: *scan_var,
                from: *from,
                to: *to,
                steps: *steps,
            };
            let rows = scan::scan(&run.system, &spec, &cfg)?;
            match out {
                Some(path) => {
                    let mut file = std::fs::File::create(path).map_err(|e| {
                        CliError::Output(format!("cannot create {}: {e}", path.display()))
                    })?;
                    scan::write_csv(&rows, spec.var, &run.system, &mut file)?;
                    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
                    writeln!(
                        w,
                        "wrote {} rows ({failed} failed) to {}",
                        rows.len(),
                        path.display()
                    )?;
                    Ok(())
                }
                None => scan::write_csv(&rows, spec.var, &run.system, w),
            }
        }
        Command::Compare { config, solver } => {
            let (run, cfg) = load(config, solver)?;
            let system = run
                .system
                .build()
                .map_err(|e| CliError::Config(e.to_string()))?;
            compare::cmd_compare(&system, &cfg, w)
        }
        Command::Validate { solver } => {
            let cfg = config::SolverOverrides::default().resolve(solver.tol, solver.max_iter)?;
            validate::cmd_validate(&cfg, w)
        }
    }
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
