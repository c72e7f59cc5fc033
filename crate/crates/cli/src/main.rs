//! `supercrit` — command-line front end of the radial supercritical-wave
//! laboratory.
//!
//! Exit codes: `0` success; `1` hard failure (bad scenario, I/O, protocol
//! precondition); `2` usage error; `3` soft failure (a run monitor fired —
//! artifacts for the completed part are on disk and flagged).

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use supercrit_cli::{run, selftest};

#[derive(Parser)]
#[command(
    name = "supercrit",
    version,
    about = "Numerical laboratory for the radial energy-supercritical nonlinear wave equation",
    propagate_version = true
)]
struct Cli {
    /// Output root directory (default: $SUPERCRIT_OUT, then ./out).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a scenario and stream the diagnostics series to CSV.
    Simulate { scenario: PathBuf },
    /// Print scaling/window/bootstrap exponents for a dimension (and power).
    Exponents {
        /// Spatial dimension.
        #[arg(long)]
        d: usize,
        /// Nonlinearity power; adds the power-dependent block.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Linear-pullback scattering probe at checkpoints T/8, T/4, T/2, T.
    Scatter { scenario: PathBuf },
    /// Perturbation-response ladder around the scenario's run.
    Stability { scenario: PathBuf },
    /// Drive a focusing scenario into the overflow monitor and record the
    /// critical-norm growth (requires sign = "focusing").
    Blowup { scenario: PathBuf },
    /// Dispersal diagnostics: frequency-scale history, near-origin
    /// concentration, and the interior monotonicity estimate.
    Morawetz { scenario: PathBuf },
    /// Run the fast invariant self-checks; exits 0 when all pass.
    Selftest,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(dispatch(cli));
}

fn dispatch(cli: Cli) -> i32 {
    let out = cli.out.as_deref();
    let scenario_cmd = |name: &str, path: &PathBuf| -> i32 {
        match run::dispatch_scenario(name, path, out) {
            Ok(artifacts) => {
                println!("{name}: artifacts in {}", artifacts.dir.display());
                if artifacts.flags.overflow_halt {
                    eprintln!("{name}: overflow monitor fired (flagged in manifest)");
                }
                if artifacts.flags.boundary_touched {
                    eprintln!("{name}: signal reached the outer wall (flagged in manifest)");
                }
                artifacts.exit
            }
            Err(e) => {
                eprintln!("supercrit {name}: {e}");
                e.exit_code()
            }
        }
    };
    match &cli.cmd {
        Command::Simulate { scenario } => scenario_cmd("simulate", scenario),
        Command::Scatter { scenario } => scenario_cmd("scatter", scenario),
        Command::Stability { scenario } => scenario_cmd("stability", scenario),
        Command::Blowup { scenario } => scenario_cmd("blowup", scenario),
        Command::Morawetz { scenario } => scenario_cmd("morawetz", scenario),
        Command::Exponents { d, p, format } => match run::exponents_report(*d, *p) {
            Ok(report) => {
                let text = match format {
                    Format::Text => report.to_table(),
                    Format::Json => {
                        let mut s = serde_json::to_string_pretty(&report)
                            .expect("exponents report serializes");
                        s.push('\n');
                        s
                    }
                };
                // Tolerate a closed pipe (e.g. `supercrit exponents | head`).
                use std::io::Write as _;
                let _ = std::io::stdout().write_all(text.as_bytes());
                if let Some(dir) = out {
                    match run::persist_exponents(&report, dir) {
                        Ok(path) => eprintln!("exponents: report written to {}", path.display()),
                        Err(e) => {
                            eprintln!("supercrit exponents: {e}");
                            return e.exit_code();
                        }
                    }
                }
                0
            }
            Err(e) => {
                eprintln!("supercrit exponents: {e}");
                e.exit_code()
            }
        },
        Command::Selftest => selftest::run(),
    }
}
