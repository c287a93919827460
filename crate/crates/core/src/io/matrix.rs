use serde_json::Value;

use super::{fmt_g17, syntax, FormatTag, IoError};
use crate::metric::{FiniteMetricSpace, DEFAULT_TOL};

/// Reads a distance matrix in csv, phylip or json form and validates it.
pub fn parse_distance_matrix(text: &str, format: FormatTag) -> Result<FiniteMetricSpace, IoError> {
    parse_distance_matrix_tol(text, format, DEFAULT_TOL)
}

/// [`parse_distance_matrix`] with an explicit validation tolerance.
pub fn parse_distance_matrix_tol(text: &str, format: FormatTag, tol: f64) -> Result<FiniteMetricSpace, IoError> {
    let (labels, matrix) = match format {
        FormatTag::Csv => read_csv(text)?,
        FormatTag::Phylip => read_phylip(text)?,
        FormatTag::Json => read_json(text)?,
        other => return Err(IoError::Unsupported { format: other, operation: "read a distance matrix" }),
    };
    check_square(&matrix)?;
    Ok(FiniteMetricSpace::new(labels, matrix, tol)?)
}

pub fn serialize_distance_matrix(m: &FiniteMetricSpace, format: FormatTag) -> Result<String, IoError> {
    let n = m.len();
    let row = |i: usize| (0..n).map(|j| fmt_g17(m.d(i, j))).collect::<Vec<_>>();
    match format {
        FormatTag::Csv => {
            let mut w = csv::WriterBuilder::new().flexible(true).from_writer(vec![]);
            let write_err = |e: csv::Error| syntax(0, 0, e.to_string());
            w.write_record(m.labels()).map_err(write_err)?;
            for i in 0..n {
                let mut rec = vec![m.label(i).to_string()];
                rec.extend(row(i));
                w.write_record(&rec).map_err(write_err)?;
            }
            let bytes = w.into_inner().map_err(|e| syntax(0, 0, e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        FormatTag::Phylip => {
            let mut out = format!("{n}\n");
            for i in 0..n {
                out.push_str(m.label(i));
                for v in row(i) {
                    out.push(' ');
                    out.push_str(&v);
                }
                out.push('\n');
            }
            Ok(out)
        }
        FormatTag::Json => {
            let labels: Vec<String> = m.labels().iter().map(|l| Value::from(l.as_str()).to_string()).collect();
            let rows: Vec<String> = (0..n).map(|i| format!("[{}]", row(i).join(","))).collect();
            Ok(format!("{{\"labels\":[{}],\"matrix\":[{}]}}\n", labels.join(","), rows.join(",")))
        }
        other => Err(IoError::Unsupported { format: other, operation: "write a distance matrix" }),
    }
}

fn check_square(matrix: &[Vec<f64>]) -> Result<(), IoError> {
    let n = matrix.len();
    match matrix.iter().position(|r| r.len() != n) {
        Some(row) => Err(IoError::NotSquare { row, len: matrix[row].len(), expected: n }),
        None => Ok(()),
    }
}

fn number(tok: &str, line: usize, column: usize) -> Result<f64, IoError> {
    let v: f64 = tok.trim().parse().map_err(|_| syntax(line, column, format!("expected a number, found `{}`", tok.trim())))?;
    if !v.is_finite() {
        return Err(syntax(line, column, format!("non-finite distance `{}`", tok.trim())));
    }
    Ok(v)
}

/// Header of labels (optionally preceded by an empty or `label` cell), then
/// one `label,v1,...,vn` row per point.
fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), IoError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut header: Option<Vec<String>> = None;
    let mut labels = Vec::new();
    let mut matrix = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            syntax(line, 1, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        let Some(head) = &header else {
            let mut cells: Vec<String> = rec.iter().map(str::to_string).collect();
            if cells.first().is_some_and(|c| c.is_empty() || c.eq_ignore_ascii_case("label")) {
                cells.remove(0);
            }
            header = Some(cells);
            continue;
        };
        let label = rec.get(0).unwrap_or_default().to_string();
        if let Some(expected) = head.get(labels.len()) {
            if *expected != label {
                return Err(syntax(line, 1, format!("row label `{label}` does not match header label `{expected}`")));
            }
        }
        let mut values = Vec::with_capacity(rec.len().saturating_sub(1));
        for (k, cell) in rec.iter().enumerate().skip(1) {
            values.push(number(cell, line, k + 1)?);
        }
        labels.push(label);
        matrix.push(values);
    }
    let header = header.ok_or_else(|| syntax(1, 1, "empty input"))?;
    if header.len() != labels.len() {
        return Err(syntax(1, 1, format!("header lists {} labels but {} rows follow", header.len(), labels.len())));
    }
    Ok((labels, matrix))
}

/// Point count on the first line, then `label v1 ... vn` per line.
fn read_phylip(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), IoError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (first_no, first) = lines.next().ok_or_else(|| syntax(1, 1, "empty input"))?;
    let count: usize = first
        .trim()
        .parse()
        .map_err(|_| syntax(first_no + 1, column_of(first, first.trim()), format!("expected point count, found `{}`", first.trim())))?;
    let mut labels = Vec::with_capacity(count);
    let mut matrix = Vec::with_capacity(count);
    for (no, line) in lines {
        let mut toks = tokens(line);
        let (_, label) = toks.next().expect("nonblank line has a token");
        let mut row = Vec::new();
        for (col, tok) in toks {
            row.push(number(tok, no + 1, col)?);
        }
        labels.push(label.to_string());
        matrix.push(row);
    }
    if labels.len() != count {
        return Err(syntax(first_no + 1, 1, format!("header announces {count} points, found {} rows", labels.len())));
    }
    Ok((labels, matrix))
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    line.split_whitespace().map(move |t| (column_of(line, t), t))
}

fn column_of(line: &str, part: &str) -> usize {
    part.as_ptr() as usize - line.as_ptr() as usize + 1
}

fn read_json(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), IoError> {
    let v: Value = serde_json::from_str(text).map_err(|e| syntax(e.line(), e.column(), e.to_string()))?;
    let schema = |msg: &str| syntax(1, 1, msg.to_string());
    let labels = v
        .get("labels")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("missing array field `labels`"))?
        .iter()
        .map(|l| l.as_str().map(str::to_string).ok_or_else(|| schema("labels must be strings")))
        .collect::<Result<Vec<_>, _>>()?;
    let matrix = json_matrix(v.get("matrix").ok_or_else(|| schema("missing field `matrix`"))?)?;
    Ok((labels, matrix))
}

pub(crate) fn json_matrix(v: &Value) -> Result<Vec<Vec<f64>>, IoError> {
    let schema = |msg: &str| syntax(1, 1, msg.to_string());
    v.as_array()
        .ok_or_else(|| schema("`matrix` must be an array of arrays"))?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| schema("matrix rows must be arrays"))?
                .iter()
                .map(|x| x.as_f64().ok_or_else(|| schema("matrix entries must be numbers")))
                .collect()
        })
        .collect()
}
