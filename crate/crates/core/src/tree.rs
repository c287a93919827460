//! Finite weighted trees and the points on their edges.
//!
//! A [`SimplicialTree`] with its edges read as real intervals is a compact
//! metric tree; [`TreePoint`] addresses any point of it. Distances between
//! nodes are precomputed, so point distances and geodesic queries are cheap.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::metric::{FiniteMetricSpace, FourPointViolation, MetricError, MetricSpace, DEFAULT_TOL};

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("tree needs at least one node")]
    Empty,
    #[error("edge {edge} joins unknown or identical nodes ({a}, {b})")]
    BadEdge { edge: usize, a: usize, b: usize },
    #[error("edge {edge} has non-positive length {length}")]
    NonPositiveLength { edge: usize, length: f64 },
    #[error("a tree on {nodes} nodes needs {} edges, got {edges}", nodes - 1)]
    EdgeCount { nodes: usize, edges: usize },
    #[error("graph is not connected")]
    Disconnected,
    #[error("duplicate node label `{0}`")]
    DuplicateLabel(String),
    #[error("invalid tree point: {0}")]
    BadPoint(String),
    #[error("mesh must be positive, got {0}")]
    BadMesh(f64),
    #[error("four-point condition fails on points {:?} (pair sums {:?})", .0.quad, .0.sums)]
    FourPoint(FourPointViolation),
    #[error("points `{0}` and `{1}` are at distance zero")]
    Coincident(String, String),
    #[error("ball intersection failed: {0}")]
    Balls(String),
    #[error("spanned subtree check failed: pair ({0}, {1}) not strictly spanned")]
    NotSpanned(usize, usize),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeEdge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

/// A point of the metric tree: a node, or a point inside an edge at
/// `offset` from the edge's `a` end.
#[derive(Clone, Debug, PartialEq)]
pub enum TreePoint {
    Node(usize),
    OnEdge { edge: usize, offset: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialTree {
    labels: Vec<Option<String>>,
    edges: Vec<TreeEdge>,
    /// `(neighbour, edge id)` per node.
    adj: Vec<Vec<(usize, usize)>>,
    dist: Vec<f64>,
    /// `hop[u * n + v]`: the neighbour of `u` on the path to `v`.
    hop: Vec<usize>,
}

impl SimplicialTree {
    pub fn new(labels: Vec<Option<String>>, edges: Vec<TreeEdge>) -> Result<Self, TreeError> {
        let n = labels.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        if edges.len() != n - 1 {
            return Err(TreeError::EdgeCount { nodes: n, edges: edges.len() });
        }
        let mut seen = std::collections::HashSet::new();
        for l in labels.iter().flatten() {
            if !seen.insert(l.as_str()) {
                return Err(TreeError::DuplicateLabel(l.clone()));
            }
        }
        let mut adj = vec![vec![]; n];
        for (k, e) in edges.iter().enumerate() {
            if e.a >= n || e.b >= n || e.a == e.b {
                return Err(TreeError::BadEdge { edge: k, a: e.a, b: e.b });
            }
            if !(e.length > 0.0 && e.length.is_finite()) {
                return Err(TreeError::NonPositiveLength { edge: k, length: e.length });
            }
            adj[e.a].push((e.b, k));
            adj[e.b].push((e.a, k));
        }
        let mut dist = vec![f64::NAN; n * n];
        let mut hop = vec![usize::MAX; n * n];
        for s in 0..n {
            dist[s * n + s] = 0.0;
            hop[s * n + s] = s;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &(v, k) in &adj[u] {
                    if dist[s * n + v].is_nan() {
                        dist[s * n + v] = dist[s * n + u] + edges[k].length;
                        // First step from s towards v.
                        hop[s * n + v] = if u == s { v } else { hop[s * n + u] };
                        stack.push(v);
                    }
                }
            }
            if dist[s * n..(s + 1) * n].iter().any(|d| d.is_nan()) {
                return Err(TreeError::Disconnected);
            }
        }
        Ok(Self { labels, edges, adj, dist, hop })
    }

    /// A tree with one unlabeled-free node.
    pub fn singleton(label: Option<String>) -> Self {
        Self::new(vec![label], vec![]).expect("one node is a tree")
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn label(&self, node: usize) -> Option<&str> {
        self.labels[node].as_deref()
    }

    pub fn labels(&self) -> &[Option<String>] {
        &self.labels
    }

    pub fn node_by_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.as_deref() == Some(label))
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adj[node].len()
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adj[node]
    }

    /// Nodes of degree at most one.
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&v| self.degree(v) <= 1).collect()
    }

    pub fn node_distance(&self, u: usize, v: usize) -> f64 {
        // Path sums are accumulated from the source, so read one triangle of
        // the table to keep the result exactly symmetric.
        let (u, v) = if u <= v { (u, v) } else { (v, u) };
        self.dist[u * self.node_count() + v]
    }

    /// Nodes on the path from `u` to `v`, both included.
    pub fn path_nodes(&self, u: usize, v: usize) -> Vec<usize> {
        let n = self.node_count();
        let mut out = vec![u];
        let mut x = u;
        while x != v {
            x = self.hop[x * n + v];
            out.push(x);
        }
        out
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.adj[u].iter().find(|&&(w, _)| w == v).map(|&(_, k)| k)
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Edge lengths in ascending order.
    pub fn edge_lengths(&self) -> Vec<f64> {
        let mut l: Vec<f64> = self.edges.iter().map(|e| e.length).collect();
        l.sort_by(f64::total_cmp);
        l
    }

    /// Labeled nodes in node order.
    pub fn labeled_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&v| self.labels[v].is_some()).collect()
    }

    /// Metric on the labeled nodes, in node order.
    pub fn leaf_metric(&self) -> Result<FiniteMetricSpace, TreeError> {
        let nodes = self.labeled_nodes();
        let labels = nodes.iter().map(|&v| self.labels[v].clone().expect("labeled")).collect();
        Ok(FiniteMetricSpace::from_points(labels, &nodes, |&a, &b| self.node_distance(a, b), DEFAULT_TOL)?)
    }

    /// Validated point on `edge` at `offset` from its `a` end; endpoints become nodes.
    pub fn point_on_edge(&self, edge: usize, offset: f64) -> Result<TreePoint, TreeError> {
        let e = self.edges.get(edge).ok_or_else(|| TreeError::BadPoint(format!("no edge {edge}")))?;
        if !(0.0..=e.length).contains(&offset) {
            return Err(TreeError::BadPoint(format!("offset {offset} outside edge {edge} of length {}", e.length)));
        }
        Ok(self.normalize(edge, offset))
    }

    fn normalize(&self, edge: usize, offset: f64) -> TreePoint {
        let e = &self.edges[edge];
        if offset <= 0.0 {
            TreePoint::Node(e.a)
        } else if offset >= e.length {
            TreePoint::Node(e.b)
        } else {
            TreePoint::OnEdge { edge, offset }
        }
    }

    pub fn check_point(&self, p: &TreePoint) -> Result<(), TreeError> {
        match *p {
            TreePoint::Node(v) if v < self.node_count() => Ok(()),
            TreePoint::Node(v) => Err(TreeError::BadPoint(format!("no node {v}"))),
            TreePoint::OnEdge { edge, offset } => self.point_on_edge(edge, offset).map(|_| ()),
        }
    }

    /// Nodes bounding the cell of `p`, with the distance from `p` to each.
    fn anchors(&self, p: &TreePoint) -> ([(usize, f64); 2], usize) {
        match *p {
            TreePoint::Node(v) => ([(v, 0.0), (v, 0.0)], 1),
            TreePoint::OnEdge { edge, offset } => {
                let e = &self.edges[edge];
                ([(e.a, offset), (e.b, e.length - offset)], 2)
            }
        }
    }

    pub fn point_distance(&self, p: &TreePoint, q: &TreePoint) -> f64 {
        if let (TreePoint::OnEdge { edge: e1, offset: o1 }, TreePoint::OnEdge { edge: e2, offset: o2 }) = (p, q) {
            if e1 == e2 {
                return (o1 - o2).abs();
            }
        }
        let (ap, np) = self.anchors(p);
        let (aq, nq) = self.anchors(q);
        let mut best = f64::INFINITY;
        for &(u, du) in &ap[..np] {
            for &(v, dv) in &aq[..nq] {
                best = best.min((du + dv) + self.node_distance(u, v));
            }
        }
        best
    }

    /// Offset of `p` along `edge` from its `a` end, if `p` lies on that edge.
    fn coord_on(&self, p: &TreePoint, edge: usize) -> Option<f64> {
        let e = &self.edges[edge];
        match *p {
            TreePoint::Node(v) if v == e.a => Some(0.0),
            TreePoint::Node(v) if v == e.b => Some(e.length),
            TreePoint::OnEdge { edge: k, offset } if k == edge => Some(offset),
            _ => None,
        }
    }

    /// The point of the geodesic from `p` to `q` at distance `t` from `p`
    /// (clamped to the segment).
    pub fn point_toward(&self, p: &TreePoint, q: &TreePoint, t: f64) -> TreePoint {
        let total = self.point_distance(p, q);
        if t <= 0.0 || total == 0.0 {
            return p.clone();
        }
        if t >= total {
            return q.clone();
        }
        let waypoints = self.geodesic_waypoints(p, q);
        let mut left = t;
        for w in waypoints.windows(2) {
            let len = self.point_distance(&w[0], &w[1]);
            if left <= len && len > 0.0 {
                let edge = self.common_edge(&w[0], &w[1]).expect("consecutive waypoints share an edge");
                let c0 = self.coord_on(&w[0], edge).expect("on edge");
                let c1 = self.coord_on(&w[1], edge).expect("on edge");
                return self.normalize(edge, c0 + (c1 - c0) * (left / len));
            }
            left -= len;
        }
        q.clone()
    }

    /// `p`, the nodes passed in order, then `q`; consecutive entries share an edge.
    fn geodesic_waypoints(&self, p: &TreePoint, q: &TreePoint) -> Vec<TreePoint> {
        if let (TreePoint::OnEdge { edge: e1, .. }, TreePoint::OnEdge { edge: e2, .. }) = (p, q) {
            if e1 == e2 {
                return vec![p.clone(), q.clone()];
            }
        }
        let (ap, np) = self.anchors(p);
        let (aq, nq) = self.anchors(q);
        let mut best = (f64::INFINITY, 0, 0);
        for &(u, du) in &ap[..np] {
            for &(v, dv) in &aq[..nq] {
                let d = du + self.node_distance(u, v) + dv;
                if d < best.0 {
                    best = (d, u, v);
                }
            }
        }
        let mut out = vec![p.clone()];
        out.extend(self.path_nodes(best.1, best.2).into_iter().map(TreePoint::Node));
        out.push(q.clone());
        out.dedup();
        out
    }

    fn common_edge(&self, p: &TreePoint, q: &TreePoint) -> Option<usize> {
        match (p, q) {
            (TreePoint::OnEdge { edge, .. }, _) | (_, TreePoint::OnEdge { edge, .. }) => Some(*edge),
            (TreePoint::Node(u), TreePoint::Node(v)) => self.edge_between(*u, *v),
        }
    }

    /// True when `z` lies on the geodesic from `x` to `y`.
    pub fn on_geodesic(&self, x: &TreePoint, y: &TreePoint, z: &TreePoint, tol: f64) -> bool {
        (self.point_distance(x, z) + self.point_distance(z, y) - self.point_distance(x, y)).abs() <= tol
    }

    /// Merges the two edges at every unlabeled node of degree two.
    pub fn suppress_degree_two(&self) -> SimplicialTree {
        let mut labels = self.labels.clone();
        let mut edges: Vec<Option<TreeEdge>> = self.edges.iter().cloned().map(Some).collect();
        let mut alive = vec![true; labels.len()];
        loop {
            let mut deg = vec![0usize; labels.len()];
            for e in edges.iter().flatten() {
                deg[e.a] += 1;
                deg[e.b] += 1;
            }
            let Some(v) = (0..labels.len()).find(|&v| alive[v] && labels[v].is_none() && deg[v] == 2) else {
                break;
            };
            let inc: Vec<usize> = (0..edges.len())
                .filter(|&k| edges[k].as_ref().is_some_and(|e| e.a == v || e.b == v))
                .collect();
            let (e1, e2) = (edges[inc[0]].take().unwrap(), edges[inc[1]].take().unwrap());
            let far = |e: &TreeEdge| if e.a == v { e.b } else { e.a };
            edges[inc[0]] = Some(TreeEdge { a: far(&e1), b: far(&e2), length: e1.length + e2.length });
            alive[v] = false;
        }
        let mut new_id = vec![usize::MAX; labels.len()];
        let mut kept = Vec::new();
        for v in 0..labels.len() {
            if alive[v] {
                new_id[v] = kept.len();
                kept.push(labels[v].take());
            }
        }
        let edges = edges
            .into_iter()
            .flatten()
            .map(|e| TreeEdge { a: new_id[e.a], b: new_id[e.b], length: e.length })
            .collect();
        SimplicialTree::new(kept, edges).expect("suppression keeps a tree")
    }

    /// For a finite tree, a point set strictly spans the tree exactly when it
    /// contains every leaf.
    pub fn strictly_spanned_by(&self, points: &[TreePoint]) -> bool {
        self.leaves().into_iter().all(|v| points.iter().any(|p| *p == TreePoint::Node(v)))
    }
}

impl MetricSpace for SimplicialTree {
    type Point = TreePoint;

    fn distance(&self, a: &TreePoint, b: &TreePoint) -> f64 {
        self.point_distance(a, b)
    }
}

/// A common point of closed balls in the tree, given pairwise compatible radii.
///
/// The point of the intersection nearest the first centre is either that
/// centre or lies on a geodesic `[c_j, c_0]` at distance `r_j` from `c_j`;
/// all those candidates are tried.
pub fn tree_ball_intersection(
    tree: &SimplicialTree,
    centers: &[TreePoint],
    radii: &[f64],
    tol: f64,
) -> Result<TreePoint, TreeError> {
    if centers.is_empty() || centers.len() != radii.len() {
        return Err(TreeError::Balls(format!("{} centers, {} radii", centers.len(), radii.len())));
    }
    for (i, ci) in centers.iter().enumerate() {
        for (j, cj) in centers.iter().enumerate().skip(i + 1) {
            let d = tree.point_distance(ci, cj);
            if radii[i] + radii[j] < d - tol {
                return Err(TreeError::Balls(format!("balls {i} and {j} are disjoint: {} + {} < {d}", radii[i], radii[j])));
            }
        }
    }
    let inside = |p: &TreePoint| centers.iter().zip(radii).all(|(c, &r)| tree.point_distance(p, c) <= r + tol);
    let c0 = &centers[0];
    if inside(c0) {
        return Ok(c0.clone());
    }
    for (c, &r) in centers.iter().zip(radii).skip(1) {
        let d = tree.point_distance(c, c0);
        let p = tree.point_toward(c, c0, r.max(0.0).min(d));
        if inside(&p) {
            return Ok(p);
        }
    }
    Err(TreeError::Balls("no candidate lies in every ball".into()))
}

/// All nodes plus equal subdivisions of each edge with spacing at most `2h`.
pub fn tree_net(tree: &SimplicialTree, h: f64) -> Result<Vec<TreePoint>, TreeError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(TreeError::BadMesh(h));
    }
    let mut out: Vec<TreePoint> = (0..tree.node_count()).map(TreePoint::Node).collect();
    for (k, e) in tree.edges.iter().enumerate() {
        let pieces = ((e.length / (2.0 * h)) - 1e-9).ceil().max(1.0) as usize;
        for i in 1..pieces {
            out.push(TreePoint::OnEdge { edge: k, offset: e.length * i as f64 / pieces as f64 });
        }
    }
    Ok(out)
}

/// The union of the geodesics between points of a set, as a tree of its own.
#[derive(Clone, Debug)]
pub struct SpannedSubtree {
    pub tree: SimplicialTree,
    /// Node of `tree` for each input point.
    pub embedding: Vec<usize>,
    /// Position in the original tree of each node of `tree`.
    pub node_positions: Vec<TreePoint>,
}

/// The subtree spanned by `points`: nodes of the original tree on some
/// geodesic between two of the points, plus the points themselves.
pub fn spanned_subtree(tree: &SimplicialTree, points: &[TreePoint], tol: f64) -> Result<SpannedSubtree, TreeError> {
    if points.is_empty() {
        return Err(TreeError::BadPoint("spanned subtree of an empty set".into()));
    }
    for p in points {
        tree.check_point(p)?;
    }
    // Cut edges at interior points.
    let mut cuts: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for p in points {
        if let TreePoint::OnEdge { edge, offset } = *p {
            cuts.entry(edge).or_default().push(offset);
        }
    }
    let mut positions: Vec<TreePoint> = (0..tree.node_count()).map(TreePoint::Node).collect();
    let mut labels: Vec<Option<String>> = tree.labels.clone();
    let mut edges: Vec<TreeEdge> = Vec::new();
    for (k, e) in tree.edges.iter().enumerate() {
        let mut offs = cuts.remove(&k).unwrap_or_default();
        offs.sort_by(f64::total_cmp);
        offs.dedup_by(|a, b| (*a - *b).abs() <= tol);
        let mut prev = (e.a, 0.0);
        for o in offs {
            let id = positions.len();
            positions.push(TreePoint::OnEdge { edge: k, offset: o });
            labels.push(None);
            edges.push(TreeEdge { a: prev.0, b: id, length: o - prev.1 });
            prev = (id, o);
        }
        edges.push(TreeEdge { a: prev.0, b: e.b, length: e.length - prev.1 });
    }
    let keep: Vec<bool> = positions
        .iter()
        .map(|v| {
            points.iter().enumerate().any(|(i, a)| {
                points[i..].iter().any(|b| tree.on_geodesic(a, b, v, tol))
            })
        })
        .collect();
    let mut new_id = vec![usize::MAX; positions.len()];
    let mut node_positions = Vec::new();
    let mut new_labels = Vec::new();
    for (v, &k) in keep.iter().enumerate() {
        if k {
            new_id[v] = node_positions.len();
            node_positions.push(positions[v].clone());
            new_labels.push(labels[v].take());
        }
    }
    let new_edges = edges
        .into_iter()
        .filter(|e| keep[e.a] && keep[e.b])
        .map(|e| TreeEdge { a: new_id[e.a], b: new_id[e.b], length: e.length })
        .collect();
    let sub = SimplicialTree::new(new_labels, new_edges)?;
    let embedding = points
        .iter()
        .map(|p| {
            node_positions
                .iter()
                .position(|q| tree.point_distance(p, q) <= tol)
                .expect("every input point is a node of the subtree")
        })
        .collect::<Vec<_>>();
    let emb_points: Vec<TreePoint> = embedding.iter().map(|&v| TreePoint::Node(v)).collect();
    if !sub.strictly_spanned_by(&emb_points) {
        let bad = sub.leaves().into_iter().find(|v| !embedding.contains(v)).unwrap_or(0);
        return Err(TreeError::NotSpanned(bad, bad));
    }
    Ok(SpannedSubtree { tree: sub, embedding, node_positions })
}

/// The minimal tree realizing a four-point metric, leaves labeled by its points.
///
/// Points are inserted one at a time. A new point `z` hangs off the current
/// tree at distance `min_{a,b} (a|b)_z` (the Gromov product at `z`), at the
/// point of the path from `a` to `b` that is `d(a,z) - ℓ` from `a`. Attach
/// points within `tol` of a node snap to it.
pub fn tree_from_metric(m: &FiniteMetricSpace, tol: f64) -> Result<SimplicialTree, TreeError> {
    if m.is_empty() {
        return Err(TreeError::Empty);
    }
    if let Some(v) = m.four_point_violation(tol) {
        return Err(TreeError::FourPoint(v));
    }
    let lab = |i: usize| Some(m.label(i).to_string());
    if m.len() == 1 {
        return Ok(SimplicialTree::singleton(lab(0)));
    }
    let coincident = |i: usize, j: usize| TreeError::Coincident(m.label(i).into(), m.label(j).into());
    if m.d(0, 1) <= tol {
        return Err(coincident(0, 1));
    }
    let mut labels = vec![lab(0), lab(1)];
    let mut edges = vec![TreeEdge { a: 0, b: 1, length: m.d(0, 1) }];
    let mut node_of: Vec<usize> = vec![0, 1];
    let mut tree = SimplicialTree::new(labels.clone(), edges.clone())?;
    for z in 2..m.len() {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..z {
            for b in a + 1..z {
                let l = 0.5 * (m.d(a, z) + m.d(b, z) - m.d(a, b));
                let better = match best {
                    None => true,
                    Some((bl, ba, bb)) => {
                        l < bl - tol
                            || ((l - bl).abs() <= tol
                                && (m.label(a), m.label(b)) < (m.label(ba), m.label(bb)))
                    }
                };
                if better {
                    best = Some((l, a, b));
                }
            }
        }
        let (l, a, b) = best.expect("two inserted points");
        let l = l.max(0.0);
        let at = tree.point_toward(&TreePoint::Node(node_of[a]), &TreePoint::Node(node_of[b]), m.d(a, z) - l);
        // Snap to a node or split the edge.
        let attach = match at {
            TreePoint::Node(v) => v,
            TreePoint::OnEdge { edge, offset } => {
                let e = edges[edge].clone();
                if offset <= tol {
                    e.a
                } else if e.length - offset <= tol {
                    e.b
                } else {
                    let v = labels.len();
                    labels.push(None);
                    edges[edge] = TreeEdge { a: e.a, b: v, length: offset };
                    edges.push(TreeEdge { a: v, b: e.b, length: e.length - offset });
                    v
                }
            }
        };
        if l <= tol {
            if labels[attach].is_some() {
                let other = node_of.iter().position(|&v| v == attach).expect("labeled nodes are points");
                return Err(coincident(other, z));
            }
            labels[attach] = lab(z);
            node_of.push(attach);
        } else {
            let v = labels.len();
            labels.push(lab(z));
            edges.push(TreeEdge { a: attach, b: v, length: l });
            node_of.push(v);
        }
        tree = SimplicialTree::new(labels.clone(), edges.clone())?;
    }
    Ok(tree)
}
