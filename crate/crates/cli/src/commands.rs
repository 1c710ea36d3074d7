//! Subcommand implementations. Each returns the text it produced so that the
//! binary only handles argument parsing, output and exit codes.

use std::fs;
use std::path::{Path, PathBuf};

use opcalc::bench::{
    crossvalidation_checks, run_crossvalidation, run_lipschitz_trace, run_opnorm_blowup,
    BlowupConfig, CheckOutcome, CrossValidationConfig, LipschitzConfig,
};
use opcalc::doi::eval_f_ab;
use opcalc::functions::{Bivariate, Function2D};
use opcalc::linalg::eig_hermitian;
use opcalc::oracle::projector_double_sum;
use thiserror::Error;

use crate::files::{parse_function, FileError, MatrixFile};
use crate::report::{blowup_table, funcalc_sidecar, perturb_table, verify_lines};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    File { path: PathBuf, source: FileError },
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Dimension(String),
    #[error("{0} verification check(s) failed")]
    Verification(usize),
}

impl CliError {
    /// 0 success, 1 verification failure, 2 input error, 3 dimension or shape error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Io { .. } | CliError::File { .. } | CliError::Input(_) => 2,
            CliError::Dimension(_) => 3,
        }
    }
}

impl From<opcalc::Error> for CliError {
    fn from(e: opcalc::Error) -> Self {
        use opcalc::Error as E;
        match e {
            E::NotSquare { .. }
            | E::DimensionMismatch { .. }
            | E::BadShape { .. }
            | E::WrongShape { .. } => CliError::Dimension(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_matrix(path: &Path) -> Result<MatrixFile, CliError> {
    MatrixFile::parse(&read(path)?).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn read_function(path: &Path) -> Result<Function2D, CliError> {
    parse_function(&read(path)?).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn hermitian(path: &Path, file: &MatrixFile) -> Result<opcalc::linalg::HermitianMatrix, CliError> {
    file.hermitian().map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })
}

/// Matrix file of `f(A,B)` and its sidecar report.
#[derive(Debug, Clone, PartialEq)]
pub struct FuncalcOutput {
    pub matrix: String,
    pub sidecar: String,
}

pub fn funcalc(function: &Path, a: &Path, b: &Path) -> Result<FuncalcOutput, CliError> {
    let f = read_function(function)?;
    let a_file = read_matrix(a)?;
    let b_file = read_matrix(b)?;
    let (a_h, b_h) = (hermitian(a, &a_file)?, hermitian(b, &b_file)?);
    if a_h.dim() != b_h.dim() {
        return Err(CliError::Dimension(format!(
            "A is {0}x{0} but B is {1}x{1}",
            a_h.dim(),
            b_h.dim()
        )));
    }
    let result = eval_f_ab(&f, &a_h, &b_h)?;
    Ok(FuncalcOutput {
        matrix: MatrixFile::general(result.value.clone()).to_text(),
        sidecar: funcalc_sidecar(&result),
    })
}

/// Path of the sidecar report written next to `out`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".report");
    PathBuf::from(name)
}

pub fn perturb(config: &LipschitzConfig) -> Result<String, CliError> {
    Ok(perturb_table(&run_lipschitz_trace(config)?))
}

pub fn blowup(n_max: usize, restarts: usize, iters: usize, seed: u64) -> Result<String, CliError> {
    if n_max == 0 || n_max > BlowupConfig::MAX_SIZE {
        return Err(CliError::Input(format!(
            "--n-max must lie in 1..={}, got {n_max}",
            BlowupConfig::MAX_SIZE
        )));
    }
    let config = BlowupConfig {
        sizes: BlowupConfig::powers_of_two(n_max),
        restarts,
        iters,
        seed,
    };
    Ok(blowup_table(&run_opnorm_blowup(&config)?))
}

pub const FIXTURE_CHECK: &str = "cli.fixture";
const FIXTURE_TOLERANCE: f64 = 1e-10;

/// Names of the checks `verify` would run.
pub fn verify_list(fixture: bool) -> String {
    let mut names = crossvalidation_checks();
    if fixture {
        names.push(FIXTURE_CHECK);
    }
    names.iter().map(|n| format!("{n}\n")).collect()
}

/// A fixture directory holds `function.txt`, `a.txt`, `b.txt` and the expected
/// `expected.txt`. The computed `f(A,B)` must match the expected file and the
/// brute-force projector sum.
fn fixture_check(dir: &Path, seed: u64) -> Result<CheckOutcome, CliError> {
    let f = read_function(&dir.join("function.txt"))?;
    let a_path = dir.join("a.txt");
    let b_path = dir.join("b.txt");
    let e_path = dir.join("expected.txt");
    let a = hermitian(&a_path, &read_matrix(&a_path)?)?;
    let b = hermitian(&b_path, &read_matrix(&b_path)?)?;
    let expected = read_matrix(&e_path)?.matrix;
    let value = eval_f_ab(&f, &a, &b)?.value;
    let oracle = projector_double_sum(|x, y| f.eval(x, y), &eig_hermitian(&a), &eig_hermitian(&b));
    let residual = value
        .sub(&expected)?
        .max_abs()
        .max(value.sub(&oracle)?.max_abs());
    Ok(CheckOutcome {
        name: FIXTURE_CHECK,
        seed,
        residual,
        tolerance: FIXTURE_TOLERANCE,
        passed: residual <= FIXTURE_TOLERANCE,
        error: None,
    })
}

/// Runs every check and returns the per-check lines; fails with
/// [`CliError::Verification`] when any check fails.
pub fn verify(
    config: &CrossValidationConfig,
    fixture: Option<&Path>,
) -> Result<String, (String, CliError)> {
    let extra = match fixture {
        Some(dir) => Some(fixture_check(dir, config.seed).map_err(|e| (String::new(), e))?),
        None => None,
    };
    let mut summary = run_crossvalidation(config);
    summary.checks.extend(extra);
    let text = verify_lines(&summary);
    let failed = summary.failures().count();
    if failed > 0 {
        Err((text, CliError::Verification(failed)))
    } else {
        Ok(text)
    }
}
