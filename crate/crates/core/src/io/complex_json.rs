use serde_json::Value;

use super::matrix::json_matrix;
use super::{fmt_g17, syntax, IoError};
use crate::complex::TightSpanComplex;
use crate::metric::{FiniteMetricSpace, DEFAULT_TOL};

fn num_list(v: &[f64]) -> String {
    v.iter().map(|x| fmt_g17(*x)).collect::<Vec<_>>().join(",")
}

fn id_list(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Lossless json form: base space, vertices with their function values, edges and cells.
pub fn serialize_complex_json(c: &TightSpanComplex) -> String {
    let base = c.base();
    let labels: Vec<String> = base.labels().iter().map(|l| Value::from(l.as_str()).to_string()).collect();
    let rows: Vec<String> = (0..base.len()).map(|i| format!("[{}]", num_list(base.row(i)))).collect();
    let vertices: Vec<String> = c
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{{\"id\":{i},\"f\":[{}]}}", num_list(v.values())))
        .collect();
    let edges: Vec<String> = c.edges().iter().map(|e| format!("[{},{}]", e.a, e.b)).collect();
    let cells: Vec<String> = c.cells2().iter().map(|k| format!("[{}]", id_list(&k.vertices))).collect();
    format!(
        "{{\"base\":{{\"labels\":[{}],\"matrix\":[{}]}},\"vertices\":[{}],\"edges\":[{}],\"cells\":[{}],\"higher_dim_present\":{}}}\n",
        labels.join(","),
        rows.join(","),
        vertices.join(","),
        edges.join(","),
        cells.join(","),
        c.higher_dim_present()
    )
}

pub fn parse_complex_json(text: &str) -> Result<TightSpanComplex, IoError> {
    let v: Value = serde_json::from_str(text).map_err(|e| syntax(e.line(), e.column(), e.to_string()))?;
    let schema = |msg: &str| syntax(1, 1, msg.to_string());
    let base = v.get("base").ok_or_else(|| schema("missing field `base`"))?;
    let labels = base
        .get("labels")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("missing `base.labels`"))?
        .iter()
        .map(|l| l.as_str().map(str::to_string).ok_or_else(|| schema("labels must be strings")))
        .collect::<Result<Vec<_>, _>>()?;
    let matrix = json_matrix(base.get("matrix").ok_or_else(|| schema("missing `base.matrix`"))?)?;
    let base = FiniteMetricSpace::new(labels, matrix, DEFAULT_TOL)?;
    let ids = |x: &Value, what: &str| -> Result<Vec<usize>, IoError> {
        x.as_array()
            .ok_or_else(|| schema(&format!("{what} must be arrays of ids")))?
            .iter()
            .map(|i| i.as_u64().map(|i| i as usize).ok_or_else(|| schema(&format!("{what} ids must be integers"))))
            .collect()
    };
    let mut vertices: Vec<(usize, Vec<f64>)> = Vec::new();
    for vert in v.get("vertices").and_then(Value::as_array).ok_or_else(|| schema("missing array `vertices`"))? {
        let id = vert.get("id").and_then(Value::as_u64).ok_or_else(|| schema("vertex without integer `id`"))? as usize;
        let f = vert
            .get("f")
            .and_then(Value::as_array)
            .ok_or_else(|| schema("vertex without array `f`"))?
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| schema("function values must be numbers")))
            .collect::<Result<Vec<_>, _>>()?;
        vertices.push((id, f));
    }
    vertices.sort_by_key(|(id, _)| *id);
    if vertices.iter().enumerate().any(|(k, (id, _))| k != *id) {
        return Err(schema("vertex ids must be 0..n-1"));
    }
    let mut edges = Vec::new();
    for e in v.get("edges").and_then(Value::as_array).ok_or_else(|| schema("missing array `edges`"))? {
        let pair = ids(e, "edges")?;
        if pair.len() != 2 {
            return Err(schema("edges must have two ids"));
        }
        edges.push((pair[0], pair[1]));
    }
    let cells = v
        .get("cells")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("missing array `cells`"))?
        .iter()
        .map(|c| ids(c, "cells"))
        .collect::<Result<Vec<_>, _>>()?;
    let higher = v.get("higher_dim_present").and_then(Value::as_bool).unwrap_or(false);
    Ok(TightSpanComplex::from_parts(
        base,
        vertices.into_iter().map(|(_, f)| f).collect(),
        edges,
        cells,
        higher,
        DEFAULT_TOL,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::tight_span_complex;
    use crate::fixtures::{make_fixture, Fixture};

    #[test]
    fn round_trip() {
        for f in [Fixture::Seg2, Fixture::Ex33A(8.0), Fixture::Ex33B(8.0), Fixture::IntroVx] {
            let c = tight_span_complex(&make_fixture(f).unwrap()).unwrap();
            let text = serialize_complex_json(&c);
            let d = parse_complex_json(&text).unwrap();
            assert_eq!(d.vertices(), c.vertices(), "{f}");
            assert_eq!(d.edges(), c.edges(), "{f}");
            assert_eq!(d.cells2(), c.cells2(), "{f}");
            assert_eq!(serialize_complex_json(&d), text);
        }
    }

    #[test]
    fn rejects_non_extremal_vertex() {
        let text = r#"{"base":{"labels":["p","q"],"matrix":[[0,2],[2,0]]},"vertices":[{"id":0,"f":[2,2]}],"edges":[],"cells":[]}"#;
        assert!(parse_complex_json(text).is_err());
    }
}
