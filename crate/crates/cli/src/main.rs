use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use opcalc::bench::{CrossValidationConfig, LipschitzConfig};
use opcalc::sincrep::DEFAULT_TRUNCATION;
use opcalc_cli::commands::{self, CliError};

/// Functional calculus for pairs of non-commuting Hermitian matrices.
#[derive(Debug, Parser)]
#[command(name = "opcalc", version)]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate f(A,B) and write it as a matrix file plus a `.report` sidecar.
    Funcalc {
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        matrix_a: PathBuf,
        #[arg(long)]
        matrix_b: PathBuf,
        /// Output matrix file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace-norm Lipschitz ratios over seeded random trials.
    Perturb {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        degree: i32,
        /// Trace norm of each perturbation.
        #[arg(long, default_value_t = 1e-2)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Operator-norm blowup over N = 1, 2, 4, ..., n-max.
    Blowup {
        #[arg(long, default_value_t = 256)]
        n_max: usize,
        /// Random restarts of the Schur-norm ascent.
        #[arg(long, default_value_t = 0)]
        restarts: usize,
        /// Iteration cap of each ascent.
        #[arg(long, default_value_t = 200)]
        iters: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the cross-validation checks.
    Verify {
        /// Print the check names without running them.
        #[arg(long)]
        list: bool,
        /// Directory with function.txt, a.txt, b.txt and expected.txt.
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// Truncation of the sinc checks.
        #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
        truncation: usize,
        /// Replace every check tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Funcalc {
            function,
            matrix_a,
            matrix_b,
            out,
        } => {
            let output = commands::funcalc(&function, &matrix_a, &matrix_b)?;
            emit(out.as_deref(), &output.matrix)?;
            match out {
                Some(path) => emit(Some(&commands::sidecar_path(&path)), &output.sidecar),
                None => Ok(()),
            }
        }
        Command::Perturb {
            trials,
            n,
            degree,
            epsilon,
            out,
        } => {
            let config = LipschitzConfig {
                trials,
                n,
                degree,
                seed: cli.seed,
                epsilon,
                ..LipschitzConfig::default()
            };
            emit(out.as_deref(), &commands::perturb(&config)?)
        }
        Command::Blowup {
            n_max,
            restarts,
            iters,
            out,
        } => emit(
            out.as_deref(),
            &commands::blowup(n_max, restarts, iters, cli.seed)?,
        ),
        Command::Verify {
            list,
            fixture,
            truncation,
            tolerance,
        } => {
            if list {
                return emit(None, &commands::verify_list(fixture.is_some()));
            }
            if truncation == 0 {
                return Err(CliError::Input("--truncation must be positive".into()));
            }
            let config = CrossValidationConfig {
                seed: cli.seed,
                tolerance_override: tolerance,
                truncation,
            };
            match commands::verify(&config, fixture.as_deref()) {
                Ok(text) => emit(None, &text),
                Err((text, e)) => {
                    emit(None, &text)?;
                    Err(e)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("opcalc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
