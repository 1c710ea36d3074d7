//! Text formats for matrices and functions.
//!
//! Numbers are written with 17 significant digits, which round-trips every
//! finite `f64`. Blank lines and lines starting with `#` are ignored.
//!
//! ```text
//! matrix hermitian 2          function trigpoly        function philattice
//! 1.0e0 0.0e0                 omega 1.0e0              size 2
//! 0.0e0 -1.0e0                terms 1                  1.0e0 0.0e0
//! 0.0e0 1.0e0                 2 -1 5.0e-1 0.0e0        ...
//! 2.0e0 0.0e0
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use opcalc::functions::{Function2D, PhiLattice, Representation, TrigPoly2D};
use opcalc::linalg::{ComplexMatrix, HermitianMatrix};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

/// `{:.16e}`: 17 significant digits.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Hermitian,
    General,
}

impl MatrixKind {
    pub fn tag(self) -> &'static str {
        match self {
            MatrixKind::Hermitian => "hermitian",
            MatrixKind::General => "general",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub kind: MatrixKind,
    pub matrix: ComplexMatrix,
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    /// Next meaningful line as `(line number, tokens)`.
    fn next_tokens(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (idx, raw) in self.inner.by_ref() {
            self.last = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Some((idx + 1, trimmed.split_whitespace().collect()));
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, Vec<&'a str>), FileError> {
        self.next_tokens().ok_or_else(|| FileError::Syntax {
            line: self.last + 1,
            message: format!("unexpected end of file, expected {what}"),
        })
    }

    fn finish(mut self) -> Result<(), FileError> {
        match self.next_tokens() {
            None => Ok(()),
            Some((line, _)) => Err(syntax(line, "unexpected trailing content")),
        }
    }
}

fn syntax(line: usize, message: impl Into<String>) -> FileError {
    FileError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_token<T: FromStr>(line: usize, token: &str, what: &str) -> Result<T, FileError> {
    token
        .parse()
        .map_err(|_| syntax(line, format!("cannot parse {what} from '{token}'")))
}

fn parse_real(line: usize, token: &str) -> Result<f64, FileError> {
    let x: f64 = parse_token(line, token, "a real number")?;
    if !x.is_finite() {
        return Err(syntax(line, format!("non-finite value '{token}'")));
    }
    Ok(x)
}

fn keyword_line<'a>(
    lines: &mut Lines<'a>,
    keyword: &str,
    arity: usize,
) -> Result<(usize, Vec<&'a str>), FileError> {
    let (line, tokens) = lines.expect(keyword)?;
    if tokens.first() != Some(&keyword) || tokens.len() != arity + 1 {
        return Err(syntax(
            line,
            format!("expected '{keyword}' followed by {arity} value(s)"),
        ));
    }
    Ok((line, tokens[1..].to_vec()))
}

fn parse_count(line: usize, token: &str, what: &str) -> Result<usize, FileError> {
    let n: usize = parse_token(line, token, what)?;
    if n == 0 {
        return Err(syntax(line, format!("{what} must be positive")));
    }
    Ok(n)
}

/// `count` lines of `re im`.
fn parse_entries(lines: &mut Lines<'_>, count: usize) -> Result<Vec<Complex64>, FileError> {
    (0..count)
        .map(|i| {
            let (line, tokens) = lines.expect(&format!("entry {} of {count}", i + 1))?;
            if tokens.len() != 2 {
                return Err(syntax(line, "expected two numbers: re im"));
            }
            Ok(Complex64::new(
                parse_real(line, tokens[0])?,
                parse_real(line, tokens[1])?,
            ))
        })
        .collect()
}

fn write_entries(out: &mut String, entries: &[Complex64]) {
    for z in entries {
        let _ = writeln!(out, "{} {}", format_number(z.re), format_number(z.im));
    }
}

impl MatrixFile {
    pub fn general(matrix: ComplexMatrix) -> Self {
        Self {
            kind: MatrixKind::General,
            matrix,
        }
    }

    pub fn parse(text: &str) -> Result<Self, FileError> {
        let mut lines = Lines::new(text);
        let (line, tokens) = lines.expect("header 'matrix <kind> <n>'")?;
        if tokens.len() != 3 || tokens[0] != "matrix" {
            return Err(syntax(
                line,
                "expected header 'matrix <hermitian|general> <n>'",
            ));
        }
        let kind = match tokens[1] {
            "hermitian" => MatrixKind::Hermitian,
            "general" => MatrixKind::General,
            other => return Err(syntax(line, format!("unknown matrix kind '{other}'"))),
        };
        let n = parse_count(line, tokens[2], "dimension")?;
        let entries = parse_entries(&mut lines, n * n)?;
        lines.finish()?;
        let matrix =
            ComplexMatrix::new(n, n, entries).map_err(|e| FileError::Invalid(e.to_string()))?;
        if kind == MatrixKind::Hermitian {
            HermitianMatrix::new(matrix.clone()).map_err(|e| FileError::Invalid(e.to_string()))?;
        }
        Ok(Self { kind, matrix })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("matrix {} {}\n", self.kind.tag(), self.matrix.rows());
        write_entries(&mut out, self.matrix.as_slice());
        out
    }

    /// The matrix as a `HermitianMatrix`; general files must also pass the check.
    pub fn hermitian(&self) -> Result<HermitianMatrix, FileError> {
        HermitianMatrix::new(self.matrix.clone()).map_err(|e| FileError::Invalid(e.to_string()))
    }
}

pub fn parse_function(text: &str) -> Result<Function2D, FileError> {
    let mut lines = Lines::new(text);
    let (line, tokens) = lines.expect("header 'function <kind>'")?;
    if tokens.len() != 2 || tokens[0] != "function" {
        return Err(syntax(
            line,
            "expected header 'function <trigpoly|philattice>'",
        ));
    }
    let function = match tokens[1] {
        "trigpoly" => {
            let (line, v) = keyword_line(&mut lines, "omega", 1)?;
            let omega = parse_real(line, v[0])?;
            let (line, v) = keyword_line(&mut lines, "terms", 1)?;
            let count: usize = parse_token(line, v[0], "term count")?;
            let terms = (0..count)
                .map(|i| {
                    let (line, t) = lines.expect(&format!("term {} of {count}", i + 1))?;
                    if t.len() != 4 {
                        return Err(syntax(line, "expected four values: j k re im"));
                    }
                    Ok((
                        parse_token::<i32>(line, t[0], "an integer frequency")?,
                        parse_token::<i32>(line, t[1], "an integer frequency")?,
                        Complex64::new(parse_real(line, t[2])?, parse_real(line, t[3])?),
                    ))
                })
                .collect::<Result<Vec<_>, _>>()?;
            TrigPoly2D::new(omega, terms)
                .map_err(|e| FileError::Invalid(e.to_string()))?
                .into()
        }
        "philattice" => {
            let (line, v) = keyword_line(&mut lines, "size", 1)?;
            let n = parse_count(line, v[0], "lattice size")?;
            let entries = parse_entries(&mut lines, n * n)?;
            let tau =
                ComplexMatrix::new(n, n, entries).map_err(|e| FileError::Invalid(e.to_string()))?;
            PhiLattice::new(tau)
                .map_err(|e| FileError::Invalid(e.to_string()))?
                .into()
        }
        other => return Err(syntax(line, format!("unknown function kind '{other}'"))),
    };
    lines.finish()?;
    Ok(function)
}

pub fn function_to_text(f: &Function2D) -> String {
    match f.representation() {
        Representation::Trig(p) => {
            let mut out = format!(
                "function trigpoly\nomega {}\nterms {}\n",
                format_number(p.omega()),
                p.num_terms()
            );
            for (j, k, c) in p.terms() {
                let _ = writeln!(
                    out,
                    "{j} {k} {} {}",
                    format_number(c.re),
                    format_number(c.im)
                );
            }
            out
        }
        Representation::Phi(p) => {
            let mut out = format!("function philattice\nsize {}\n", p.size());
            write_entries(&mut out, p.tau().as_slice());
            out
        }
    }
}
