use super::{fmt_g17, syntax, IoError};
use crate::tree::{SimplicialTree, TreeEdge};

/// Parses a Newick tree where every non-root node carries a branch length.
///
/// Internal names are optional. Zero-length branches are contracted, merging
/// the child into its parent.
pub fn parse_newick(text: &str) -> Result<SimplicialTree, IoError> {
    let mut p = Parser { chars: text.chars().collect(), pos: 0, line: 1, col: 1, nodes: vec![], edges: vec![] };
    p.skip_ws();
    let root = p.subtree()?;
    p.skip_ws();
    if p.peek() == Some(':') {
        p.bump();
        p.length()?;
    }
    p.skip_ws();
    p.expect(';')?;
    p.skip_ws();
    if p.peek().is_some() {
        return Err(p.error("unexpected text after `;`"));
    }
    debug_assert_eq!(root, 0);
    p.finish()
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    nodes: Vec<Option<String>>,
    /// `(parent, child, length, position of the length)`.
    edges: Vec<(usize, usize, f64, (usize, usize))>,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn error(&self, msg: impl Into<String>) -> IoError {
        syntax(self.line, self.col, msg)
    }

    fn expect(&mut self, c: char) -> Result<(), IoError> {
        match self.peek() {
            Some(d) if d == c => {
                self.bump();
                Ok(())
            }
            Some(d) => Err(self.error(format!("expected `{c}`, found `{d}`"))),
            None if c == ')' => Err(self.error("unbalanced parenthesis: expected `)` before end of input")),
            None => Err(self.error(format!("expected `{c}` before end of input"))),
        }
    }

    fn name(&mut self) -> Option<String> {
        let start = self.pos;
        while self.peek().is_some_and(|c| !c.is_whitespace() && !"(),:;".contains(c)) {
            self.bump();
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().collect())
    }

    fn length(&mut self) -> Result<f64, IoError> {
        self.skip_ws();
        let (line, col) = (self.line, self.col);
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit() || "+-.eE".contains(c)) {
            self.bump();
        }
        let tok: String = self.chars[start..self.pos].iter().collect();
        let v: f64 = tok.parse().map_err(|_| syntax(line, col, format!("expected a branch length, found `{tok}`")))?;
        if !v.is_finite() || v < 0.0 {
            return Err(syntax(line, col, format!("branch length must be finite and nonnegative, got {tok}")));
        }
        Ok(v)
    }

    /// Parses one subtree and returns its node id.
    fn subtree(&mut self) -> Result<usize, IoError> {
        let id = self.nodes.len();
        self.nodes.push(None);
        self.skip_ws();
        if self.peek() == Some('(') {
            self.bump();
            loop {
                self.skip_ws();
                let child = self.subtree()?;
                self.skip_ws();
                let at = (self.line, self.col);
                if self.peek() != Some(':') {
                    return Err(self.error("missing branch length (`:length`)"));
                }
                self.bump();
                let len = self.length()?;
                self.edges.push((id, child, len, at));
                self.skip_ws();
                match self.peek() {
                    Some(',') => {
                        self.bump();
                    }
                    _ => break,
                }
            }
            self.expect(')')?;
        }
        self.skip_ws();
        self.nodes[id] = self.name();
        if self.nodes[id].is_none() && self.edges.iter().all(|e| e.0 != id) {
            return Err(self.error("leaf without a name"));
        }
        Ok(id)
    }

    fn finish(self) -> Result<SimplicialTree, IoError> {
        let n = self.nodes.len();
        // Union zero-length edges.
        let mut rep: Vec<usize> = (0..n).collect();
        fn find(rep: &mut [usize], mut x: usize) -> usize {
            while rep[x] != x {
                rep[x] = rep[rep[x]];
                x = rep[x];
            }
            x
        }
        let mut labels = self.nodes.clone();
        for &(parent, child, len, (line, col)) in &self.edges {
            if len == 0.0 {
                let (p, c) = (find(&mut rep, parent), find(&mut rep, child));
                match (&labels[p], &labels[c]) {
                    (Some(a), Some(b)) => {
                        return Err(syntax(line, col, format!("zero-length branch joins labeled nodes `{a}` and `{b}`")));
                    }
                    (None, Some(_)) => labels[p] = labels[c].take(),
                    _ => {}
                }
                rep[c] = p;
            }
        }
        let mut new_id = vec![usize::MAX; n];
        let mut out_labels = Vec::new();
        for v in 0..n {
            if find(&mut rep, v) == v {
                new_id[v] = out_labels.len();
                out_labels.push(labels[v].take());
            }
        }
        let mut edges = Vec::new();
        for &(parent, child, len, _) in &self.edges {
            if len > 0.0 {
                let (p, c) = (find(&mut rep, parent), find(&mut rep, child));
                edges.push(TreeEdge { a: new_id[p], b: new_id[c], length: len });
            }
        }
        Ok(SimplicialTree::new(out_labels, edges)?)
    }
}

/// Writes the tree rooted at node 0.
pub fn write_newick(tree: &SimplicialTree) -> String {
    fn rec(t: &SimplicialTree, v: usize, parent: Option<usize>, out: &mut String) {
        let children: Vec<(usize, usize)> = t.neighbors(v).iter().copied().filter(|&(w, _)| Some(w) != parent).collect();
        if !children.is_empty() {
            out.push('(');
            for (k, &(w, e)) in children.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                rec(t, w, Some(v), out);
                out.push(':');
                out.push_str(&fmt_g17(t.edges()[e].length));
            }
            out.push(')');
        }
        if let Some(l) = t.label(v) {
            out.push_str(l);
        }
    }
    let mut out = String::new();
    rec(tree, 0, None, &mut out);
    out.push(';');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{make_fixture, Fixture};

    #[test]
    fn intro_tree_x() {
        let t = parse_newick("((a1:2,a2:2)v1:2,a3:2,a4:2)v2;").unwrap();
        assert_eq!(t.node_count(), 6);
        let leaves = t.leaf_metric().unwrap();
        let a = make_fixture(Fixture::IntroA).unwrap();
        for (i, l) in a.labels().iter().enumerate() {
            for (j, k) in a.labels().iter().enumerate() {
                let (u, v) = (t.node_by_label(l).unwrap(), t.node_by_label(k).unwrap());
                assert_eq!(t.node_distance(u, v), a.d(i, j));
            }
        }
        assert_eq!(leaves.len(), 6);
    }

    #[test]
    fn cherry() {
        let t = parse_newick("(p:1,q:1)r;").unwrap();
        assert_eq!(t.node_count(), 3);
        let (p, q) = (t.node_by_label("p").unwrap(), t.node_by_label("q").unwrap());
        assert_eq!(t.node_distance(p, q), 2.0);
    }

    #[test]
    fn errors() {
        match parse_newick("(p:1,q:1") {
            Err(IoError::Syntax { message, .. }) => assert!(message.contains("unbalanced")),
            other => panic!("{other:?}"),
        }
        assert!(parse_newick("(p:-1,q:1);").is_err());
        assert!(parse_newick("(p,q:1);").is_err());
        assert!(parse_newick("(p:1,q:1); x").is_err());
        assert!(parse_newick("(p:0,q:0)r;").is_err());
    }

    #[test]
    fn zero_lengths_contract() {
        let t = parse_newick("((p:1,q:1):0,s:1);").unwrap();
        assert_eq!(t.node_count(), 4);
        let t = parse_newick("(p:0,q:1);").unwrap();
        assert_eq!(t.node_count(), 2);
        assert_eq!(t.label(0), Some("p"));
    }

    #[test]
    fn writer_round_trip() {
        let t = parse_newick("((a1:2,a2:2)v1:2,a3:2,a4:2.5)v2;").unwrap();
        let s = write_newick(&t);
        let u = parse_newick(&s).unwrap();
        assert_eq!(u.leaf_metric().unwrap(), t.leaf_metric().unwrap());
        assert_eq!(u.edge_lengths(), t.edge_lengths());
    }
}
