//! Relations, distortion and the Gromov–Hausdorff distance between finite spaces.
//!
//! `d_GH(A, B)` is half the least distortion of a correspondence between `A`
//! and `B`. [`min_distortion_correspondence`] finds an optimal one by branch
//! and bound; the remaining functions give lower bounds used to bracket
//! distances that cannot be computed exactly.

use thiserror::Error;

use crate::metric::{FiniteMetricSpace, MetricError, MetricSpace, DEFAULT_TOL};

/// Default node budget for [`min_distortion_correspondence`].
pub const DEFAULT_BUDGET: u64 = 20_000_000;
/// Largest space accepted by [`min_distortion_map_to_line`].
pub const MAX_LINE_POINTS: usize = 8;

#[derive(Debug, Error)]
pub enum GhError {
    #[error("distortion of an empty relation is undefined")]
    EmptyRelation,
    #[error("both spaces must be nonempty")]
    EmptySpace,
    #[error("relation is not surjective onto the {side} point set")]
    NotSurjective { side: &'static str },
    #[error("at most {max} points supported, got {points}")]
    TooLarge { points: usize, max: usize },
    #[error("Z_n needs n >= 1")]
    BadN,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// The real line, for maps into `R`.
#[derive(Clone, Copy, Debug, Default)]
pub struct RealLine;

impl MetricSpace for RealLine {
    type Point = f64;

    fn distance(&self, a: &f64, b: &f64) -> f64 {
        (a - b).abs()
    }
}

/// `max | |x x'| - |y y'| |` over all pairs of pairs.
pub fn distortion<X: MetricSpace, Y: MetricSpace>(
    x: &X,
    y: &Y,
    pairs: &[(X::Point, Y::Point)],
) -> Result<f64, GhError> {
    if pairs.is_empty() {
        return Err(GhError::EmptyRelation);
    }
    let mut dis: f64 = 0.0;
    for (k, (a, b)) in pairs.iter().enumerate() {
        for (c, d) in &pairs[k + 1..] {
            dis = dis.max((x.distance(a, c) - y.distance(b, d)).abs());
        }
    }
    Ok(dis)
}

/// A finite set of pairs with its distortion kept up to date.
#[derive(Clone, Debug, PartialEq)]
pub struct Relation<L, R> {
    pairs: Vec<(L, R)>,
    dis: f64,
}

impl<L, R> Default for Relation<L, R> {
    fn default() -> Self {
        Self { pairs: Vec::new(), dis: 0.0 }
    }
}

impl<L: Clone + PartialEq, R: Clone + PartialEq> Relation<L, R> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<X, Y>(x: &X, y: &Y, pairs: impl IntoIterator<Item = (L, R)>) -> Self
    where
        X: MetricSpace<Point = L>,
        Y: MetricSpace<Point = R>,
    {
        let mut rel = Self::new();
        for (l, r) in pairs {
            rel.push(x, y, l, r);
        }
        rel
    }

    /// Distortion the relation would have after adding `(l, r)`.
    pub fn distortion_with<X, Y>(&self, x: &X, y: &Y, l: &L, r: &R) -> f64
    where
        X: MetricSpace<Point = L>,
        Y: MetricSpace<Point = R>,
    {
        self.pairs
            .iter()
            .map(|(a, b)| (x.distance(l, a) - y.distance(r, b)).abs())
            .fold(self.dis, f64::max)
    }

    /// Adds a pair; returns false (and changes nothing) if it is already present.
    pub fn push<X, Y>(&mut self, x: &X, y: &Y, l: L, r: R) -> bool
    where
        X: MetricSpace<Point = L>,
        Y: MetricSpace<Point = R>,
    {
        if self.pairs.iter().any(|(a, b)| *a == l && *b == r) {
            return false;
        }
        self.dis = self.distortion_with(x, y, &l, &r);
        self.pairs.push((l, r));
        true
    }

    pub fn distortion(&self) -> Result<f64, GhError> {
        if self.pairs.is_empty() {
            Err(GhError::EmptyRelation)
        } else {
            Ok(self.dis)
        }
    }

    /// Recomputes the distortion from scratch.
    pub fn recompute_distortion<X, Y>(&self, x: &X, y: &Y) -> Result<f64, GhError>
    where
        X: MetricSpace<Point = L>,
        Y: MetricSpace<Point = R>,
    {
        distortion(x, y, &self.pairs)
    }

    pub fn pairs(&self) -> &[(L, R)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Distinct left points in order of first appearance.
    pub fn left(&self) -> Vec<L> {
        let mut out: Vec<L> = Vec::new();
        for (l, _) in &self.pairs {
            if !out.contains(l) {
                out.push(l.clone());
            }
        }
        out
    }

    pub fn right(&self) -> Vec<R> {
        let mut out: Vec<R> = Vec::new();
        for (_, r) in &self.pairs {
            if !out.contains(r) {
                out.push(r.clone());
            }
        }
        out
    }

    /// The inverse relation; the distortion is unchanged.
    pub fn swap(self) -> Relation<R, L> {
        Relation { pairs: self.pairs.into_iter().map(|(l, r)| (r, l)).collect(), dis: self.dis }
    }
}

/// A relation that covers given left and right point sets.
#[derive(Clone, Debug, PartialEq)]
pub struct Correspondence<L, R> {
    relation: Relation<L, R>,
}

impl<L: Clone + PartialEq, R: Clone + PartialEq> Correspondence<L, R> {
    pub fn new(relation: Relation<L, R>, left: &[L], right: &[R]) -> Result<Self, GhError> {
        if left.iter().any(|l| !relation.pairs.iter().any(|(a, _)| a == l)) {
            return Err(GhError::NotSurjective { side: "left" });
        }
        if right.iter().any(|r| !relation.pairs.iter().any(|(_, b)| b == r)) {
            return Err(GhError::NotSurjective { side: "right" });
        }
        if relation.is_empty() {
            return Err(GhError::EmptyRelation);
        }
        Ok(Self { relation })
    }

    pub fn relation(&self) -> &Relation<L, R> {
        &self.relation
    }

    pub fn into_relation(self) -> Relation<L, R> {
        self.relation
    }

    pub fn distortion(&self) -> f64 {
        self.relation.dis
    }

    pub fn pairs(&self) -> &[(L, R)] {
        self.relation.pairs()
    }
}

/// True when the graph of the map `i -> images[i]` has distortion at most `eps + tol`.
pub fn is_rough_isometry<M: MetricSpace>(
    domain: &FiniteMetricSpace,
    target: &M,
    images: &[M::Point],
    eps: f64,
    tol: f64,
) -> bool {
    if images.len() != domain.len() {
        return false;
    }
    let pairs: Vec<(usize, M::Point)> = images.iter().cloned().enumerate().collect();
    match distortion(domain, target, &pairs) {
        Ok(d) => d <= eps + tol,
        Err(_) => true,
    }
}

/// `|diam A - diam B| / 2`, a lower bound for `d_GH(A, B)`.
pub fn gh_lower_bound_diam(a: &FiniteMetricSpace, b: &FiniteMetricSpace) -> Result<f64, GhError> {
    Ok((a.diameter()? - b.diameter()?).abs() / 2.0)
}

/// Outcome of the exact search.
#[derive(Clone, Debug)]
pub struct GhSolution {
    pub correspondence: Correspondence<usize, usize>,
    pub dis: f64,
    /// False when the node budget ran out; `dis` is then only an upper bound.
    pub optimal: bool,
    pub nodes: u64,
}

impl GhSolution {
    pub fn gh(&self) -> f64 {
        self.dis / 2.0
    }
}

/// A least-distortion correspondence between two finite spaces.
///
/// Every correspondence contains one in which each left point has one chosen
/// partner and each right point left uncovered by those has one chosen
/// partner, and such a sub-correspondence has no larger distortion. The search
/// enumerates exactly these, pruning with lower bounds that hold for every
/// completion of a partial relation.
pub fn min_distortion_correspondence(
    a: &FiniteMetricSpace,
    b: &FiniteMetricSpace,
    budget: u64,
) -> Result<GhSolution, GhError> {
    if a.is_empty() || b.is_empty() {
        return Err(GhError::EmptySpace);
    }
    // Branch over partners for the larger side; the smaller side then rarely
    // needs a second stage.
    let swapped = a.len() < b.len();
    let (left, right) = if swapped { (b, a) } else { (a, b) };
    let mut search = Search::new(left, right, budget);
    search.run();
    let mut pairs = search.best_pairs;
    if swapped {
        pairs = pairs.into_iter().map(|(i, j)| (j, i)).collect();
    }
    let relation = Relation::from_pairs(a, b, pairs);
    let dis = relation.dis;
    let correspondence = Correspondence::new(relation, &a.points(), &b.points())?;
    Ok(GhSolution { correspondence, dis, optimal: !search.exhausted, nodes: search.nodes })
}

/// `d_GH(A, B)` with the default budget; `None` in place of the value if the
/// search was cut short.
pub fn gh_distance(a: &FiniteMetricSpace, b: &FiniteMetricSpace) -> Result<GhSolution, GhError> {
    min_distortion_correspondence(a, b, DEFAULT_BUDGET)
}

struct Search<'a> {
    a: &'a FiniteMetricSpace,
    b: &'a FiniteMetricSpace,
    /// Static tie-break order of left points: decreasing eccentricity.
    left_rank: Vec<usize>,
    /// Pairs allowed at all (pair bound below the incumbent), per left and right point.
    allowed: Vec<Vec<bool>>,
    /// `cost[i][j]`: distortion added by pairing `i` with `j` given the current pairs.
    cost: Vec<Vec<f64>>,
    saved: Vec<Vec<Vec<f64>>>,
    pairs: Vec<(usize, usize)>,
    left_done: Vec<bool>,
    right_hits: Vec<u32>,
    best: f64,
    best_pairs: Vec<(usize, usize)>,
    floor: f64,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl<'a> Search<'a> {
    fn new(a: &'a FiniteMetricSpace, b: &'a FiniteMetricSpace, budget: u64) -> Self {
        let (n, m) = (a.len(), b.len());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| a.eccentricity(y).total_cmp(&a.eccentricity(x)).then(x.cmp(&y)));
        let mut left_rank = vec![0; n];
        for (r, &i) in order.iter().enumerate() {
            left_rank[i] = r;
        }
        // Sorted distance profiles give a per-pair bound: each other point
        // needs a partner somewhere.
        let prof_a: Vec<Vec<f64>> = (0..n).map(|i| sorted(a.row(i))).collect();
        let prof_b: Vec<Vec<f64>> = (0..m).map(|j| sorted(b.row(j))).collect();
        let pair_lb: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..m).map(|j| profile_gap(&prof_a[i], &prof_b[j]).max(profile_gap(&prof_b[j], &prof_a[i]))).collect())
            .collect();
        let diam_gap = (a.diameter().unwrap_or(0.0) - b.diameter().unwrap_or(0.0)).abs();
        let row_floor = (0..n).map(|i| pair_lb[i].iter().copied().fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
        let col_floor = (0..m)
            .map(|j| (0..n).map(|i| pair_lb[i][j]).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        let floor = diam_gap.max(row_floor).max(col_floor);

        let mut s = Self {
            a,
            b,
            left_rank,
            allowed: vec![vec![true; m]; n],
            cost: vec![vec![0.0; m]; n],
            saved: Vec::new(),
            pairs: Vec::new(),
            left_done: vec![false; n],
            right_hits: vec![0; m],
            best: f64::INFINITY,
            best_pairs: Vec::new(),
            floor,
            nodes: 0,
            budget,
            exhausted: false,
        };
        let (init_pairs, init_dis) = s.greedy(&prof_a, &prof_b);
        s.best = init_dis;
        s.best_pairs = init_pairs;
        for i in 0..n {
            for j in 0..m {
                s.allowed[i][j] = pair_lb[i][j] < s.best;
            }
        }
        s
    }

    /// Initial incumbent: match distance profiles, then cover the right side.
    fn greedy(&self, pa: &[Vec<f64>], pb: &[Vec<f64>]) -> (Vec<(usize, usize)>, f64) {
        let (n, m) = (self.a.len(), self.b.len());
        let mut rel: Relation<usize, usize> = Relation::new();
        for i in 0..n {
            let j = (0..m)
                .min_by(|&x, &y| quantile_gap(&pa[i], &pb[x]).total_cmp(&quantile_gap(&pa[i], &pb[y])).then(x.cmp(&y)))
                .expect("nonempty");
            rel.push(self.a, self.b, i, j);
        }
        for j in 0..m {
            if !rel.pairs.iter().any(|&(_, r)| r == j) {
                let i = (0..n)
                    .min_by(|&x, &y| {
                        rel.distortion_with(self.a, self.b, &x, &j)
                            .total_cmp(&rel.distortion_with(self.a, self.b, &y, &j))
                            .then(x.cmp(&y))
                    })
                    .expect("nonempty");
                rel.push(self.a, self.b, i, j);
            }
        }
        let dis = rel.dis;
        (rel.pairs, dis)
    }

    fn run(&mut self) {
        if self.best > self.floor {
            self.dfs(0.0);
        }
    }

    fn add(&mut self, i: usize, j: usize) {
        let (n, m) = (self.a.len(), self.b.len());
        self.saved.push(self.cost.clone());
        for x in 0..n {
            let dx = self.a.d(i, x);
            for y in 0..m {
                let c = (dx - self.b.d(j, y)).abs();
                if c > self.cost[x][y] {
                    self.cost[x][y] = c;
                }
            }
        }
        self.pairs.push((i, j));
        self.right_hits[j] += 1;
    }

    fn remove(&mut self) {
        let (_, j) = self.pairs.pop().expect("pair to remove");
        self.right_hits[j] -= 1;
        self.cost = self.saved.pop().expect("saved costs");
    }

    /// Cheapest way to give `i` a partner, or infinity.
    fn left_min(&self, i: usize) -> f64 {
        (0..self.b.len())
            .filter(|&j| self.allowed[i][j])
            .map(|j| self.cost[i][j])
            .fold(f64::INFINITY, f64::min)
    }

    fn right_min(&self, j: usize) -> f64 {
        (0..self.a.len())
            .filter(|&i| self.allowed[i][j])
            .map(|i| self.cost[i][j])
            .fold(f64::INFINITY, f64::min)
    }

    fn dfs(&mut self, cur: f64) {
        if self.exhausted || self.best <= self.floor {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        // Bound over every point still needing a partner; branch on the
        // tightest one (largest bound, then static order).
        let mut bound = cur;
        let mut left_pick: Option<(usize, f64)> = None;
        for i in 0..self.a.len() {
            if !self.left_done[i] {
                let v = self.left_min(i);
                bound = bound.max(v);
                let take = left_pick.map_or(true, |(k, w)| v > w || (v == w && self.left_rank[i] < self.left_rank[k]));
                if take {
                    left_pick = Some((i, v));
                }
            }
        }
        let mut right_pick: Option<(usize, f64)> = None;
        for j in 0..self.b.len() {
            if self.right_hits[j] == 0 {
                let v = self.right_min(j);
                bound = bound.max(v);
                if right_pick.map_or(true, |(_, w)| v > w) {
                    right_pick = Some((j, v));
                }
            }
        }
        if bound >= self.best {
            return;
        }
        let pick = match (left_pick, right_pick) {
            (Some((i, _)), _) => Some((true, i)),
            (None, Some((j, _))) => Some((false, j)),
            (None, None) => None,
        };
        let Some((is_left, p)) = pick else {
            self.best = cur;
            self.best_pairs = self.pairs.clone();
            return;
        };
        let mut options: Vec<(f64, usize)> = if is_left {
            (0..self.b.len()).filter(|&j| self.allowed[p][j]).map(|j| (cur.max(self.cost[p][j]), j)).collect()
        } else {
            (0..self.a.len()).filter(|&i| self.allowed[i][p]).map(|i| (cur.max(self.cost[i][p]), i)).collect()
        };
        options.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for (c, q) in options {
            if c >= self.best || self.exhausted {
                break;
            }
            let (i, j) = if is_left { (p, q) } else { (q, p) };
            self.add(i, j);
            if is_left {
                self.left_done[i] = true;
            }
            self.dfs(c);
            if is_left {
                self.left_done[i] = false;
            }
            self.remove();
        }
    }
}

fn sorted(row: &[f64]) -> Vec<f64> {
    let mut v = row.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// `max_{u in p} min_{v in q} |u - v|` for sorted `q`.
fn profile_gap(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .map(|&u| {
            let k = q.partition_point(|&v| v < u);
            let mut best = f64::INFINITY;
            if k < q.len() {
                best = best.min(q[k] - u);
            }
            if k > 0 {
                best = best.min(u - q[k - 1]);
            }
            best
        })
        .fold(0.0, f64::max)
}

/// Sum of differences between matching quantiles of two sorted profiles.
fn quantile_gap(p: &[f64], q: &[f64]) -> f64 {
    let k = p.len().max(q.len());
    (0..k)
        .map(|t| {
            let u = p[t * p.len() / k];
            let v = q[t * q.len() / k];
            (u - v).abs()
        })
        .sum()
}

/// `({0, 8, .., 8n} x {0}) ∪ ({4, 12, .., 8n-4} x {4})` with the l1 metric.
pub fn z_n_set(n: usize) -> Result<FiniteMetricSpace, GhError> {
    if n < 1 {
        return Err(GhError::BadN);
    }
    let mut pts: Vec<(f64, f64)> = (0..=n).map(|k| (8.0 * k as f64, 0.0)).collect();
    pts.extend((0..n).map(|k| (8.0 * k as f64 + 4.0, 4.0)));
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    let labels = pts.iter().map(|(x, y)| format!("z{x}_{y}")).collect();
    Ok(FiniteMetricSpace::from_points(labels, &pts, |p, q| (p.0 - q.0).abs() + (p.1 - q.1).abs(), DEFAULT_TOL)?)
}

/// `max(0, (m δ - D) / (m + 1))` with `m = |Z| - 1`, `δ` the separation and
/// `D` the diameter: no map `Z -> R` has smaller distortion.
///
/// In the image the `m` consecutive gaps are each at least `δ - ε` and add up
/// to at most `D + ε`.
pub fn line_distortion_lower_bound(z: &FiniteMetricSpace) -> f64 {
    let Some(delta) = z.separation() else {
        return 0.0;
    };
    let m = (z.len() - 1) as f64;
    let diam = z.diameter().unwrap_or(0.0);
    ((m * delta - diam) / (m + 1.0)).max(0.0)
}

/// A least-distortion map of a finite space into the line.
#[derive(Clone, Debug, PartialEq)]
pub struct LineMap {
    /// Image of each point, indexed like the space.
    pub positions: Vec<f64>,
    pub eps: f64,
}

/// Exact minimum distortion of a map `Z -> R`.
///
/// For a fixed left-to-right order of the images the problem is a linear
/// program in difference constraints
/// `d - ε <= y_b - y_a <= d + ε`, `y_b >= y_a`, whose optimum is the largest
/// cycle ratio of the constraint graph. It is found by parametric
/// Bellman–Ford: raise `ε` to the ratio of each negative cycle found until
/// none remains. All orders (up to reversal) are tried.
pub fn min_distortion_map_to_line(z: &FiniteMetricSpace) -> Result<LineMap, GhError> {
    let n = z.len();
    if n == 0 {
        return Err(GhError::EmptySpace);
    }
    if n > MAX_LINE_POINTS {
        return Err(GhError::TooLarge { points: n, max: MAX_LINE_POINTS });
    }
    if n == 1 {
        return Ok(LineMap { positions: vec![0.0], eps: 0.0 });
    }
    let scale = z.diameter()?.max(1.0);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<LineMap> = None;
    loop {
        // A reversed order gives the mirrored map; skip it.
        if perm[0] < perm[n - 1] {
            let (eps, y) = ordered_line_fit(z, &perm, scale);
            if best.as_ref().map_or(true, |b| eps < b.eps - 1e-12 * scale) {
                best = Some(LineMap { positions: y, eps });
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(best.expect("at least one order"))
}

struct Arc {
    from: usize,
    to: usize,
    w: f64,
    /// Coefficient of ε in the arc weight.
    c: f64,
}

fn ordered_line_fit(z: &FiniteMetricSpace, order: &[usize], scale: f64) -> (f64, Vec<f64>) {
    let n = order.len();
    let mut arcs = Vec::new();
    // Constraint y_v - y_u <= w + c ε is the arc u -> v.
    for s in 0..n {
        for t in s + 1..n {
            let (a, b) = (order[s], order[t]);
            let d = z.d(a, b);
            arcs.push(Arc { from: a, to: b, w: d, c: 1.0 });
            arcs.push(Arc { from: b, to: a, w: -d, c: 1.0 });
        }
        if s + 1 < n {
            arcs.push(Arc { from: order[s + 1], to: order[s], w: 0.0, c: 0.0 });
        }
    }
    let cycle_tol = 1e-12 * scale;
    let mut eps = 0.0;
    loop {
        match bellman_ford(n, &arcs, eps, cycle_tol) {
            Ok(pot) => {
                let lo = pot.iter().copied().fold(f64::INFINITY, f64::min);
                return (eps, pot.into_iter().map(|p| p - lo).collect());
            }
            Err(cycle) => {
                let w: f64 = cycle.iter().map(|&k| arcs[k].w).sum();
                let c: f64 = cycle.iter().map(|&k| arcs[k].c).sum();
                // Ordering arcs alone have zero weight, so c > 0 here.
                let next = -w / c;
                if !(next > eps) {
                    return (eps, vec![0.0; n]);
                }
                eps = next;
            }
        }
    }
}

/// Shortest-path potentials from a virtual source, or the arcs of a negative cycle.
fn bellman_ford(n: usize, arcs: &[Arc], eps: f64, tol: f64) -> Result<Vec<f64>, Vec<usize>> {
    let mut dist = vec![0.0; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut last = None;
    for _ in 0..=n {
        last = None;
        for (k, a) in arcs.iter().enumerate() {
            let cand = dist[a.from] + a.w + a.c * eps;
            if cand < dist[a.to] - tol {
                dist[a.to] = cand;
                pred[a.to] = Some(k);
                last = Some(a.to);
            }
        }
        if last.is_none() {
            return Ok(dist);
        }
    }
    // Walk back n steps to land on the cycle, then collect it.
    let mut v = last.expect("relaxation in final round");
    for _ in 0..n {
        v = arcs[pred[v].expect("predecessor")].from;
    }
    let start = v;
    let mut cycle = Vec::new();
    loop {
        let k = pred[v].expect("predecessor");
        cycle.push(k);
        v = arcs[k].from;
        if v == start {
            break;
        }
    }
    Err(cycle)
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{make_fixture, Fixture};

    fn fx(f: Fixture) -> FiniteMetricSpace {
        make_fixture(f).unwrap()
    }

    #[test]
    fn intro_distortion_is_two() {
        let (a, b) = (fx(Fixture::IntroA), fx(Fixture::IntroB));
        let pairs: Vec<(usize, usize)> = (0..4).map(|i| (i, i)).collect();
        assert_eq!(distortion(&a, &b, &pairs).unwrap(), 2.0);
        assert!(is_rough_isometry(&a, &b, &[0, 1, 2, 3], 2.0, DEFAULT_TOL));
        assert!(!is_rough_isometry(&a, &b, &[0, 1, 2, 3], 1.9, DEFAULT_TOL));
    }

    #[test]
    fn z1_into_line() {
        let z = z_n_set(1).unwrap();
        // Points are sorted by x: (0,0), (4,4), (8,0).
        let images = [0.0, 4.0, 8.0];
        let pairs: Vec<(usize, f64)> = images.iter().copied().enumerate().collect();
        assert_eq!(distortion(&z, &RealLine, &pairs).unwrap(), 4.0);
        assert!(is_rough_isometry(&z, &RealLine, &images, 4.0, DEFAULT_TOL));
    }

    #[test]
    fn empty_relation_errors() {
        let a = fx(Fixture::Seg2);
        assert!(matches!(distortion(&a, &a, &[]), Err(GhError::EmptyRelation)));
        assert!(Relation::<usize, usize>::new().distortion().is_err());
    }

    #[test]
    fn relation_caches_distortion() {
        let (a, b) = (fx(Fixture::IntroA), fx(Fixture::IntroB));
        let mut r = Relation::new();
        assert!(r.push(&a, &b, 0, 0));
        assert_eq!(r.distortion().unwrap(), 0.0);
        assert!(!r.push(&a, &b, 0, 0));
        r.push(&a, &b, 2, 2);
        assert_eq!(r.distortion().unwrap(), 2.0);
        assert_eq!(r.recompute_distortion(&a, &b).unwrap(), 2.0);
        let s = r.clone().swap();
        assert_eq!(s.pairs()[1], (2, 2));
        assert_eq!(s.distortion().unwrap(), 2.0);
    }

    #[test]
    fn correspondence_requires_surjectivity() {
        let a = fx(Fixture::Seg2);
        let r = Relation::from_pairs(&a, &a, [(0usize, 0usize)]);
        assert!(matches!(Correspondence::new(r.clone(), &[0, 1], &[0]), Err(GhError::NotSurjective { side: "left" })));
        assert!(Correspondence::new(r, &[0], &[0]).is_ok());
    }

    #[test]
    fn intro_gh() {
        let s = gh_distance(&fx(Fixture::IntroA), &fx(Fixture::IntroB)).unwrap();
        assert!(s.optimal);
        assert_eq!(s.dis, 2.0);
        assert_eq!(s.gh(), 1.0);
        let s = gh_distance(&fx(Fixture::IntroVx), &fx(Fixture::IntroVy)).unwrap();
        assert!(s.optimal);
        assert_eq!(s.dis, 4.0);
    }

    #[test]
    fn self_distance_zero() {
        for f in [Fixture::Seg2, Fixture::IntroA, Fixture::IntroVy, Fixture::Zn(2)] {
            let x = fx(f);
            assert_eq!(gh_distance(&x, &x).unwrap().dis, 0.0, "{f}");
        }
    }

    #[test]
    fn different_sizes() {
        let a = fx(Fixture::Seg2);
        let one = FiniteMetricSpace::with_default_labels(vec![vec![0.0]], DEFAULT_TOL).unwrap();
        let s = gh_distance(&one, &a).unwrap();
        assert_eq!(s.dis, 2.0);
        assert_eq!(s.correspondence.pairs().len(), 2);
    }

    #[test]
    fn diameter_bounds() {
        let (a, b) = (fx(Fixture::IntroA), fx(Fixture::IntroB));
        assert_eq!(gh_lower_bound_diam(&a, &b).unwrap(), 1.0);
        assert_eq!(gh_lower_bound_diam(&a, &a).unwrap(), 0.0);
        let (a, b) = (fx(Fixture::Ex33A(40.0)), fx(Fixture::Ex33B(40.0)));
        assert_eq!(gh_lower_bound_diam(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn zn_shape() {
        let z = z_n_set(2).unwrap();
        assert_eq!(z.len(), 5);
        assert_eq!(z.separation().unwrap(), 8.0);
        assert_eq!(z.diameter().unwrap(), 16.0);
        assert_eq!(z_n_set(1).unwrap().diameter().unwrap(), 8.0);
        assert!(z_n_set(0).is_err());
    }

    #[test]
    fn chain_bounds() {
        for (n, want) in [(1, 8.0 / 3.0), (2, 16.0 / 5.0), (3, 24.0 / 7.0)] {
            assert!((line_distortion_lower_bound(&z_n_set(n).unwrap()) - want).abs() < 1e-12);
        }
        assert_eq!(line_distortion_lower_bound(&fx(Fixture::Seg2)), 0.0);
    }

    #[test]
    fn line_maps() {
        let z1 = z_n_set(1).unwrap();
        let m = min_distortion_map_to_line(&z1).unwrap();
        assert!((m.eps - 8.0 / 3.0).abs() < 1e-9, "{}", m.eps);
        assert!(is_rough_isometry(&z1, &RealLine, &m.positions, m.eps, 1e-9));
        let seg = min_distortion_map_to_line(&fx(Fixture::Seg2)).unwrap();
        assert_eq!(seg.eps, 0.0);
        assert_eq!((seg.positions[0] - seg.positions[1]).abs(), 2.0);
    }

    #[test]
    fn permutations() {
        let mut p = vec![0, 1, 2];
        let mut count = 1;
        while next_permutation(&mut p) {
            count += 1;
        }
        assert_eq!(count, 6);
    }
}
