//! Text formats for distance matrices, trees and tight-span complexes.

mod complex_json;
mod dot;
mod matrix;
mod newick;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::complex::ComplexError;
use crate::metric::{MetricError, ValidationReport};
use crate::tree::TreeError;

pub use complex_json::{parse_complex_json, serialize_complex_json};
pub use dot::{complex_to_dot, tree_to_dot};
pub use matrix::{parse_distance_matrix, parse_distance_matrix_tol, serialize_distance_matrix};
pub use newick::{parse_newick, write_newick};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormatTag {
    Csv,
    Phylip,
    Json,
    Newick,
    Dot,
    ComplexJson,
}

impl FormatTag {
    pub const ALL: [FormatTag; 6] =
        [FormatTag::Csv, FormatTag::Phylip, FormatTag::Json, FormatTag::Newick, FormatTag::Dot, FormatTag::ComplexJson];

    pub fn name(self) -> &'static str {
        match self {
            FormatTag::Csv => "csv",
            FormatTag::Phylip => "phylip",
            FormatTag::Json => "json",
            FormatTag::Newick => "newick",
            FormatTag::Dot => "dot",
            FormatTag::ComplexJson => "complex-json",
        }
    }

    /// Guesses the format from a file extension.
    pub fn from_extension(path: &str) -> Option<Self> {
        let ext = path.rsplit_once('.')?.1.to_ascii_lowercase();
        match ext.as_str() {
            "csv" => Some(FormatTag::Csv),
            "phy" | "phylip" | "dist" => Some(FormatTag::Phylip),
            "json" => Some(FormatTag::Json),
            "nwk" | "newick" | "tree" => Some(FormatTag::Newick),
            "dot" | "gv" => Some(FormatTag::Dot),
            _ => None,
        }
    }
}

impl fmt::Display for FormatTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FormatTag {
    type Err = IoError;

    fn from_str(s: &str) -> Result<Self, IoError> {
        FormatTag::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| IoError::UnknownFormat(s.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("metric validation failed: {0}")]
    Invalid(Box<ValidationReport>),
    #[error("unknown format `{0}`")]
    UnknownFormat(String),
    #[error("format {format} cannot be used to {operation}")]
    Unsupported { format: FormatTag, operation: &'static str },
    #[error(transparent)]
    Metric(MetricError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

impl From<MetricError> for IoError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::Invalid(report) => IoError::Invalid(report),
            other => IoError::Metric(other),
        }
    }
}

pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> IoError {
    IoError::Syntax { line, column, message: message.into() }
}

/// Formats like C's `%.17g`: 17 significant digits, trailing zeros removed.
/// Always round-trips through `str::parse::<f64>`.
pub fn fmt_g17(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.16e}", v);
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, v))
    } else {
        let mant = trim_zeros(mant.to_string());
        format!("{mant}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
