//! The published numeric examples, recomputed.

use serde::Serialize;

use crate::complex::{tight_span_complex, vertex_distance_multiset};
use crate::extension::extend_tree_relation;
use crate::fixtures::{make_fixture, Fixture};
use crate::gh::{
    gh_distance, gh_lower_bound_diam, line_distortion_lower_bound, min_distortion_map_to_line, z_n_set, Relation,
};
use crate::metric::DEFAULT_TOL;
use crate::tree::{tree_from_metric, SimplicialTree, TreePoint};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReproRow {
    pub quantity: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReproReport {
    pub rows: Vec<ReproRow>,
}

impl ReproReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Pipe-separated table with a header line.
    pub fn to_table(&self) -> String {
        let mut out = String::from("quantity | expected | computed | pass\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{} | {} | {} | {}\n",
                r.quantity,
                r.expected,
                r.computed,
                if r.pass { "pass" } else { "FAIL" }
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Nine decimals with trailing zeros removed.
pub fn short(v: f64) -> String {
    let s = format!("{v:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn list(v: &[f64]) -> String {
    format!("{{{}}}", v.iter().map(|x| short(*x)).collect::<Vec<_>>().join(","))
}

fn close_lists(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

struct Rows(Vec<ReproRow>);

impl Rows {
    fn push(&mut self, quantity: &str, expected: impl Into<String>, computed: impl Into<String>, pass: bool) {
        self.0.push(ReproRow { quantity: quantity.into(), expected: expected.into(), computed: computed.into(), pass });
    }

    fn fail(&mut self, quantity: &str, expected: &str, err: impl std::fmt::Display) {
        self.push(quantity, expected, format!("error: {err}"), false);
    }
}

/// Recomputes the intro example, the rectangle/tree example at `N = 40` and
/// the chain bound for `Z_n`. Errors become failing rows.
pub fn run_reproduce_paper() -> ReproReport {
    let mut rows = Rows(Vec::new());
    let fx = |f| make_fixture(f).expect("fixtures are valid");
    let (a, b) = (fx(Fixture::IntroA), fx(Fixture::IntroB));

    match gh_distance(&a, &b) {
        Ok(s) => rows.push("d_GH(A,B)", "1", short(s.gh()), s.optimal && s.gh() == 1.0),
        Err(e) => rows.fail("d_GH(A,B)", "1", e),
    }
    match gh_distance(&fx(Fixture::IntroVx), &fx(Fixture::IntroVy)) {
        Ok(s) => rows.push("d_GH(V_X,V_Y)", "2", short(s.gh()), s.optimal && s.gh() == 2.0),
        Err(e) => rows.fail("d_GH(V_X,V_Y)", "2", e),
    }

    // Tree bracket at h = 0.25 from the diagonal relation a_i <-> b_i.
    let h = 0.25;
    let trees = tree_from_metric(&a, DEFAULT_TOL).and_then(|x| Ok((x, tree_from_metric(&b, DEFAULT_TOL)?)));
    match trees {
        Ok((x, y)) => {
            let node = |t: &SimplicialTree, l: &str| TreePoint::Node(t.node_by_label(l).expect("labeled leaf"));
            let rel = Relation::from_pairs(
                &x,
                &y,
                a.labels().iter().zip(b.labels()).map(|(la, lb)| (node(&x, la), node(&y, lb))),
            );
            match extend_tree_relation(&x, &y, rel, h, DEFAULT_TOL).and_then(|r| Ok(r.recompute_distortion(&x, &y)?)) {
                Ok(dis) => {
                    rows.push("dis after tree extension (h=0.25)", "2", short(dis), (dis - 2.0).abs() <= 1e-9);
                    let upper = dis / 2.0 + 2.0 * h;
                    rows.push("d_GH(X,Y) upper bound", "<= 1.5", short(upper), upper <= 1.5 + 1e-9);
                }
                Err(e) => rows.fail("dis after tree extension (h=0.25)", "2", e),
            }
            let lower = (x.diameter() - y.diameter()).abs() / 2.0;
            rows.push("d_GH(X,Y) lower bound", "1", short(lower), lower == 1.0);
        }
        Err(e) => rows.fail("tree reconstruction", "trees X, Y", e),
    }
    match gh_lower_bound_diam(&a, &b) {
        Ok(v) => rows.push("|diam A - diam B|/2", "1", short(v), v == 1.0),
        Err(e) => rows.fail("|diam A - diam B|/2", "1", e),
    }

    let n = 40.0;
    match tight_span_complex(&fx(Fixture::Ex33A(n))) {
        Ok(c) => {
            let counts = format!("{}/{}/{}", c.vertices().len(), c.edges().len(), c.cells2().len());
            rows.push("E A(40) vertices/edges/2-cells", "4/4/1", counts.clone(), counts == "4/4/1");
            let want = [4., 4., 40., 40., 44., 44.];
            let got = vertex_distance_multiset(&c);
            rows.push("E A(40) vertex distances", list(&want), list(&got), close_lists(&got, &want, 1e-9));
        }
        Err(e) => rows.fail("E A(40) complex", "4/4/1", e),
    }
    match tight_span_complex(&fx(Fixture::Ex33B(n))) {
        Ok(c) => {
            let counts = format!("{}/{}/{}", c.vertices().len(), c.edges().len(), c.cells2().len());
            rows.push("E B(40) vertices/edges/2-cells", "6/5/0", counts.clone(), counts == "6/5/0");
            let want = [1., 1., 1., 1., 40.];
            let got = c.edge_lengths();
            rows.push("E B(40) edge lengths", list(&want), list(&got), close_lists(&got, &want, 1e-9));
        }
        Err(e) => rows.fail("E B(40) complex", "6/5/0", e),
    }
    match gh_distance(&fx(Fixture::Ex33A(n)), &fx(Fixture::Ex33B(n))) {
        Ok(s) => rows.push("dis(A(40),B(40))", "2", short(s.dis), s.optimal && s.dis == 2.0),
        Err(e) => rows.fail("dis(A(40),B(40))", "2", e),
    }

    for k in 1..=3usize {
        let want = 8.0 * k as f64 / (2.0 * k as f64 + 1.0);
        let label = format!("chain bound Z_{k}");
        let expected = format!("{}/{}", 8 * k, 2 * k + 1);
        match z_n_set(k) {
            Ok(z) => {
                let got = line_distortion_lower_bound(&z);
                rows.push(&label, expected, short(got), (got - want).abs() <= 1e-12);
            }
            Err(e) => rows.fail(&label, &expected, e),
        }
    }
    for k in 1..=2usize {
        let bound = 8.0 * k as f64 / (2.0 * k as f64 + 1.0);
        let label = format!("min line distortion Z_{k}");
        let expected = if k == 1 { "8/3".to_string() } else { format!(">= {}/{}", 8 * k, 2 * k + 1) };
        match z_n_set(k).map_err(|e| e.to_string()).and_then(|z| min_distortion_map_to_line(&z).map_err(|e| e.to_string())) {
            Ok(m) => {
                let pass = if k == 1 { (m.eps - bound).abs() <= 1e-9 } else { m.eps >= bound - 1e-9 };
                rows.push(&label, expected, short(m.eps), pass);
            }
            Err(e) => rows.fail(&label, &expected, e),
        }
    }
    ReproReport { rows: rows.0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(short(8.0 / 3.0), "2.666666667");
        assert_eq!(short(1.0), "1");
        assert_eq!(short(-0.0), "0");
    }

    #[test]
    fn everything_reproduces() {
        let r = run_reproduce_paper();
        let table = r.to_table();
        assert!(r.all_pass(), "{table}");
        assert!(table.contains("d_GH(A,B) | 1 | 1 | pass"));
        assert!(table.contains("d_GH(V_X,V_Y) | 2 | 2 | pass"));
        assert!(table.contains("min line distortion Z_1 | 8/3 | 2.666666667 | pass"));
    }
}
