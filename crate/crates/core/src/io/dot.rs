use std::fmt::Write;

use super::fmt_g17;
use crate::complex::TightSpanComplex;
use crate::tree::SimplicialTree;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Undirected dot graph; edges carry their metric length as `len`.
pub fn tree_to_dot(tree: &SimplicialTree) -> String {
    let mut out = String::from("graph tree {\n");
    for v in 0..tree.node_count() {
        let label = tree.label(v).map(str::to_string).unwrap_or_else(|| format!("n{v}"));
        writeln!(out, "  n{v} [label={}];", quote(&label)).unwrap();
    }
    for e in tree.edges() {
        writeln!(out, "  n{} -- n{} [len={}];", e.a, e.b, fmt_g17(e.length)).unwrap();
    }
    out.push_str("}\n");
    out
}

/// The 1-skeleton as a dot graph; 2-cells appear as comments listing their vertex ids.
pub fn complex_to_dot(complex: &TightSpanComplex) -> String {
    let mut out = String::from("graph tight_span {\n");
    for (i, v) in complex.vertices().iter().enumerate() {
        let f: Vec<String> = v.values().iter().map(|x| fmt_g17(*x)).collect();
        writeln!(out, "  v{i} [label={}];", quote(&format!("v{i} ({})", f.join(", ")))).unwrap();
    }
    for e in complex.edges() {
        writeln!(out, "  v{} -- v{} [len={}];", e.a, e.b, fmt_g17(e.length)).unwrap();
    }
    for (k, c) in complex.cells2().iter().enumerate() {
        let ids: Vec<String> = c.vertices.iter().map(|v| v.to_string()).collect();
        writeln!(out, "  // cell {k}: {}", ids.join(" ")).unwrap();
    }
    if complex.higher_dim_present() {
        out.push_str("  // cells of dimension 3 or more are present\n");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::tight_span_complex;
    use crate::fixtures::{make_fixture, Fixture};
    use crate::io::parse_newick;

    fn lens(dot: &str) -> Vec<String> {
        dot.lines().filter_map(|l| l.split("len=").nth(1)).map(|s| s.trim_end_matches("];").to_string()).collect()
    }

    #[test]
    fn tree_dot() {
        let dot = tree_to_dot(&parse_newick("(p:1,q:1)r;").unwrap());
        assert_eq!(dot.lines().filter(|l| l.contains("[label=")).count(), 3);
        assert_eq!(lens(&dot), vec!["1", "1"]);
    }

    #[test]
    fn complex_dot() {
        let c = tight_span_complex(&make_fixture(Fixture::Seg2).unwrap()).unwrap();
        let dot = complex_to_dot(&c);
        assert_eq!(dot.lines().filter(|l| l.contains("[label=")).count(), 2);
        assert_eq!(lens(&dot), vec!["2"]);
        let c = tight_span_complex(&make_fixture(Fixture::Ex33B(8.0)).unwrap()).unwrap();
        let mut l = lens(&complex_to_dot(&c));
        l.sort();
        assert_eq!(l, vec!["1", "1", "1", "1", "8"]);
        let c = tight_span_complex(&make_fixture(Fixture::Ex33A(8.0)).unwrap()).unwrap();
        assert!(complex_to_dot(&c).contains("// cell 0:"));
    }
}
