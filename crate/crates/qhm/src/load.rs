//! Loading patterns and group models, and the exit-status error type.

use std::fmt;
use std::path::Path;

use nalgebra::{Complex, DMatrix};
use qhm_core::error::Error;
use qhm_core::lie::{Constraint, LieGroupModel};
use qhm_core::surface::{parse_pattern, stock, GluingPattern};
use serde::Deserialize;

/// Errors that stop a run before a report is complete.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input (exit status 2).
    Input(String),
    /// A numerical solve or precondition failed (exit status 3).
    Solve(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Solve(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Solve(m) => write!(f, "solve failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::InvalidPattern(_)
            | Error::UnknownLetter(_)
            | Error::InvalidModel(_)
            | Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. } => CliError::Input(e.to_string()),
            _ => CliError::Solve(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// A pattern file, or `stock:NAME` for a built-in pattern.
pub fn load_pattern(spec: &str) -> CliResult<GluingPattern> {
    if let Some(name) = spec.strip_prefix("stock:") {
        return stock_pattern(name).ok_or_else(|| CliError::Input(format!("no stock pattern `{name}`")));
    }
    let text = std::fs::read_to_string(spec).map_err(|e| CliError::Input(format!("{spec}: {e}")))?;
    Ok(parse_pattern(&text)?)
}

pub fn stock_pattern(name: &str) -> Option<GluingPattern> {
    if let Some(n) = name.strip_suffix("-gon").and_then(|n| n.parse::<usize>().ok()) {
        return (n >= 1).then(|| stock::ngon(n));
    }
    if let Some(n) = name.strip_prefix("cylinder-").and_then(|n| n.parse::<usize>().ok()) {
        return (n >= 1).then(|| stock::cylinder_multi(n));
    }
    Some(match name {
        "cylinder" => stock::cylinder(),
        "torus-one-hole" => stock::torus_one_hole(),
        "torus-one-hole-cut" => stock::torus_one_hole_cut(),
        "genus-two-one-hole" => stock::genus_two_one_hole(),
        "hexagon-with-boundary" => stock::hexagon_with_boundary(),
        _ => return None,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupFile {
    name: String,
    constraint: String,
    /// Each basis matrix row-major with `[re, im]` entries.
    basis: Vec<Vec<Vec<[f64; 2]>>>,
    gram: Vec<Vec<f64>>,
}

/// A registered model name, or a JSON description file.
pub fn load_group(spec: &str) -> CliResult<LieGroupModel> {
    if let Some(m) = LieGroupModel::by_name(spec) {
        return Ok(m);
    }
    if !Path::new(spec).exists() {
        return Err(CliError::Input(format!("unknown group `{spec}` (registered: SU2, SL2R, T2, SO3)")));
    }
    let text = std::fs::read_to_string(spec).map_err(|e| CliError::Input(format!("{spec}: {e}")))?;
    parse_group(&text)
}

pub fn parse_group(text: &str) -> CliResult<LieGroupModel> {
    let f: GroupFile = serde_json::from_str(text).map_err(|e| CliError::Input(format!("group file: {e}")))?;
    let constraint = Constraint::from_name(&f.constraint)
        .ok_or_else(|| CliError::Input(format!("unknown constraint `{}`", f.constraint)))?;
    let square = |rows: usize, cols: &[usize]| cols.iter().all(|&c| c == rows);
    let mut basis = Vec::with_capacity(f.basis.len());
    for (k, b) in f.basis.iter().enumerate() {
        let n = b.len();
        if n == 0 || !square(n, &b.iter().map(Vec::len).collect::<Vec<_>>()) {
            return Err(CliError::Input(format!("basis matrix {k} is not square")));
        }
        basis.push(DMatrix::from_fn(n, n, |i, j| Complex::new(b[i][j][0], b[i][j][1])));
    }
    let d = f.gram.len();
    if !square(d, &f.gram.iter().map(Vec::len).collect::<Vec<_>>()) {
        return Err(CliError::Input("Gram matrix is not square".into()));
    }
    let gram = DMatrix::from_fn(d, d, |i, j| f.gram[i][j]);
    Ok(LieGroupModel::new(&f.name, basis, gram, constraint)?)
}

/// `--group`, else the pattern's `group:` directive, else SU2.
pub fn resolve_group(flag: Option<&str>, pattern: Option<&GluingPattern>) -> CliResult<LieGroupModel> {
    match flag.or_else(|| pattern.and_then(|p| p.group())) {
        Some(spec) => load_group(spec),
        None => Ok(LieGroupModel::su2()),
    }
}
