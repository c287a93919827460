//! The injective hull of a finite metric space as a polyhedral complex.
//!
//! The hull is the union of the bounded faces of
//! `P(X) = { f : f(x) + f(y) >= d(x,y) for all x, y }`. Vertices are found by
//! walking the bounded 1-skeleton of `P(X)` from `d_z`: at each vertex every
//! candidate edge direction is tested against the tangent cone and followed
//! until the next constraint becomes tight. Bounded edge directions of `P(X)`
//! have the form `1_P - 1_Q`, so the candidates are the vectors in
//! `{-1,0,1}^n`.
//!
//! Faces are identified by their sets of tight constraints. A face is bounded
//! exactly when its tight graph touches every point; all faces that are
//! reported are additionally checked for extremality by sampling.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::hull::{self, star, sup_distance, ExtremalFunction, HullError};
use crate::metric::{FiniteMetricSpace, MetricSpace, DEFAULT_TOL};

/// Largest base space accepted by [`tight_span_complex`].
pub const MAX_COMPLEX_POINTS: usize = 8;
const VERTEX_BUDGET: usize = 100_000;

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("tight span enumeration supports at most {max} points, got {points}")]
    TooLarge { points: usize, max: usize },
    #[error("degenerate enumeration ({context}); constraint set {constraints:?}")]
    Degenerate { context: String, constraints: Vec<(usize, usize)> },
    #[error("{0} is not extremal")]
    NotExtremal(String),
    #[error("vertex budget of {0} exceeded")]
    Budget(usize),
    #[error("mesh must be positive, got {0}")]
    BadMesh(f64),
    #[error("complex has cells of dimension 3 or more; sampling is limited to dimension 2")]
    HigherDimensional,
    #[error(transparent)]
    Hull(#[from] HullError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexEdge {
    pub a: usize,
    pub b: usize,
    /// Sup-norm distance between the endpoint functions.
    pub length: f64,
}

/// A 2-dimensional bounded face with an isometric chart onto a plane polygon.
///
/// Every point of the cell is `origin + s * axes[0] + t * axes[1]` where the
/// axes have disjoint supports and entries in `{-1, 0, 1}`, so the sup-norm on
/// the cell is the l-infinity norm of `(s, t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell2 {
    /// Vertex ids in cyclic order around the boundary.
    pub vertices: Vec<usize>,
    origin: Vec<f64>,
    axes: [Vec<f64>; 2],
    /// Chart coordinates of `vertices`, same order.
    polygon: Vec<(f64, f64)>,
}

impl Cell2 {
    pub fn point_at(&self, s: f64, t: f64) -> Vec<f64> {
        self.origin
            .iter()
            .zip(self.axes[0].iter().zip(&self.axes[1]))
            .map(|(o, (a, b))| o + s * a + t * b)
            .collect()
    }

    pub fn polygon(&self) -> &[(f64, f64)] {
        &self.polygon
    }

    /// Whether `(s, t)` is inside the polygon or within `tol` of it. Uses
    /// signed distances to the sides, so very short sides do not widen the
    /// slack.
    fn contains(&self, s: f64, t: f64, tol: f64) -> bool {
        let k = self.polygon.len();
        (0..k).all(|i| {
            let (x0, y0) = self.polygon[i];
            let (x1, y1) = self.polygon[(i + 1) % k];
            let len = (x1 - x0).hypot(y1 - y0);
            len <= tol || ((x1 - x0) * (t - y0) - (y1 - y0) * (s - x0)) / len >= -tol
        })
    }
}

#[derive(Clone, Debug)]
pub struct TightSpanComplex {
    base: FiniteMetricSpace,
    vertices: Vec<ExtremalFunction>,
    edges: Vec<ComplexEdge>,
    cells2: Vec<Cell2>,
    higher_dim_present: bool,
}

impl TightSpanComplex {
    pub fn base(&self) -> &FiniteMetricSpace {
        &self.base
    }

    pub fn vertices(&self) -> &[ExtremalFunction] {
        &self.vertices
    }

    pub fn edges(&self) -> &[ComplexEdge] {
        &self.edges
    }

    pub fn cells2(&self) -> &[Cell2] {
        &self.cells2
    }

    pub fn higher_dim_present(&self) -> bool {
        self.higher_dim_present
    }

    /// Edge lengths in ascending order.
    pub fn edge_lengths(&self) -> Vec<f64> {
        let mut l: Vec<f64> = self.edges.iter().map(|e| e.length).collect();
        l.sort_by(f64::total_cmp);
        l
    }

    /// Index of the vertex equal to `d_z`.
    pub fn embedded_vertex(&self, z: usize, tol: f64) -> Option<usize> {
        let dz = self.base.row(z);
        self.vertices.iter().position(|v| sup_distance(v.values(), dz) <= tol)
    }

    /// Reassembles a complex from stored parts, recomputing edge lengths and cell charts.
    pub fn from_parts(
        base: FiniteMetricSpace,
        vertices: Vec<Vec<f64>>,
        edges: Vec<(usize, usize)>,
        cells: Vec<Vec<usize>>,
        higher_dim_present: bool,
        tol: f64,
    ) -> Result<Self, ComplexError> {
        let vertices = vertices
            .into_iter()
            .map(|v| ExtremalFunction::new(&base, v, tol))
            .collect::<Result<Vec<_>, _>>()?;
        let bad = |what: String| ComplexError::Degenerate { context: what, constraints: vec![] };
        let mut out_edges = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a >= vertices.len() || b >= vertices.len() || a == b {
                return Err(bad(format!("edge ({a},{b}) does not join two distinct vertices")));
            }
            out_edges.push(ComplexEdge { a, b, length: vertices[a].distance(&vertices[b]) });
        }
        let enumerator = Enumerator::new(&base, tol);
        let mut out_cells = Vec::with_capacity(cells.len());
        for ids in cells {
            if ids.len() < 3 || ids.iter().any(|&i| i >= vertices.len()) {
                return Err(bad(format!("cell {ids:?} is not a polygon on known vertices")));
            }
            let mask = ids
                .iter()
                .map(|&i| enumerator.tight_mask(vertices[i].values()))
                .fold(u64::MAX, |acc, m| acc & m);
            let mut cell = enumerator.cell_frame(mask, &ids, &vertices)?;
            // Keep the stored boundary order.
            let pos: HashMap<usize, (f64, f64)> = cell.vertices.iter().copied().zip(cell.polygon.iter().copied()).collect();
            cell.polygon = ids.iter().map(|i| pos[i]).collect();
            cell.vertices = ids;
            if signed_area(&cell.polygon) < 0.0 {
                cell.vertices.reverse();
                cell.polygon.reverse();
            }
            out_cells.push(cell);
        }
        Ok(Self { base, vertices, edges: out_edges, cells2: out_cells, higher_dim_present })
    }

    /// Metric on the vertex set.
    pub fn vertex_metric(&self) -> FiniteMetricSpace {
        let labels = (0..self.vertices.len()).map(|i| format!("v{i}")).collect();
        FiniteMetricSpace::from_points(labels, &self.vertices, |a, b| a.distance(b), DEFAULT_TOL)
            .expect("sup-norm distances form a metric")
    }
}

impl MetricSpace for TightSpanComplex {
    type Point = ExtremalFunction;

    fn distance(&self, a: &ExtremalFunction, b: &ExtremalFunction) -> f64 {
        a.distance(b)
    }
}

/// Enumerates the vertices, edges and 2-cells of the injective hull of `base`.
pub fn tight_span_complex(base: &FiniteMetricSpace) -> Result<TightSpanComplex, ComplexError> {
    let n = base.len();
    if n > MAX_COMPLEX_POINTS {
        return Err(ComplexError::TooLarge { points: n, max: MAX_COMPLEX_POINTS });
    }
    if n == 0 {
        return Ok(TightSpanComplex {
            base: base.clone(),
            vertices: vec![],
            edges: vec![],
            cells2: vec![],
            higher_dim_present: false,
        });
    }
    Enumerator::new(base, DEFAULT_TOL).run()
}

/// `f(x) + f(y) >= d(x, y)` with `x <= y`.
#[derive(Clone, Copy, Debug)]
struct Constraint {
    x: usize,
    y: usize,
}

struct Incident {
    zero_mask: u64,
}

struct Enumerator<'a> {
    base: &'a FiniteMetricSpace,
    n: usize,
    cons: Vec<Constraint>,
    /// Absolute tolerance for tightness and vertex identification.
    eps: f64,
}

impl<'a> Enumerator<'a> {
    fn new(base: &'a FiniteMetricSpace, tol: f64) -> Self {
        let n = base.len();
        let cons = (0..n).flat_map(|x| (x..n).map(move |y| Constraint { x, y })).collect();
        let scale = base.diameter().unwrap_or(0.0).max(1.0);
        Self { base, n, cons, eps: tol * scale }
    }

    fn slack(&self, f: &[f64], c: Constraint) -> f64 {
        f[c.x] + f[c.y] - self.base.d(c.x, c.y)
    }

    fn tight_mask(&self, f: &[f64]) -> u64 {
        self.cons
            .iter()
            .enumerate()
            .filter(|(_, &c)| self.slack(f, c).abs() <= self.eps)
            .fold(0, |m, (i, _)| m | (1 << i))
    }

    fn mask_pairs(&self, mask: u64) -> Vec<(usize, usize)> {
        self.constraints_in(mask).map(|c| (c.x, c.y)).collect()
    }

    fn constraints_in(&self, mask: u64) -> impl Iterator<Item = Constraint> + '_ {
        self.cons
            .iter()
            .enumerate()
            .filter(move |(i, _)| mask >> i & 1 == 1)
            .map(|(_, &c)| c)
    }

    fn row(&self, c: Constraint) -> Vec<f64> {
        let mut r = vec![0.0; self.n];
        r[c.x] += 1.0;
        r[c.y] += 1.0;
        r
    }

    fn rank(&self, mask: u64) -> usize {
        let rows: Vec<Vec<f64>> = self.constraints_in(mask).map(|c| self.row(c)).collect();
        row_echelon(rows, self.n).len()
    }

    /// True when every point occurs in some constraint of `mask`.
    fn covers(&self, mask: u64) -> bool {
        let mut seen = vec![false; self.n];
        for c in self.constraints_in(mask) {
            seen[c.x] = true;
            seen[c.y] = true;
        }
        seen.into_iter().all(|s| s)
    }

    /// Solves the tight system of `mask` for the unique vertex it determines.
    fn solve_vertex(&self, mask: u64) -> Result<Vec<f64>, ComplexError> {
        let n = self.n;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for c in self.constraints_in(mask) {
            let mut r = self.row(c);
            r.push(self.base.d(c.x, c.y));
            rows.push(r);
        }
        // Gauss-Jordan on the augmented rows; keep the first n independent ones.
        let mut pivots = Vec::new();
        let mut m = rows;
        let mut r = 0;
        for col in 0..n {
            let Some(p) = (r..m.len()).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())) else {
                break;
            };
            if m[p][col].abs() < 1e-9 {
                continue;
            }
            m.swap(r, p);
            let pv = m[r][col];
            for v in m[r].iter_mut() {
                *v /= pv;
            }
            for i in 0..m.len() {
                if i != r {
                    let fac = m[i][col];
                    if fac != 0.0 {
                        for j in 0..=n {
                            m[i][j] -= fac * m[r][j];
                        }
                    }
                }
            }
            pivots.push(col);
            r += 1;
        }
        if pivots.len() < n {
            return Err(ComplexError::Degenerate {
                context: format!("tight system has rank {} < {}", pivots.len(), n),
                constraints: self.mask_pairs(mask),
            });
        }
        let mut f = vec![0.0; n];
        for (i, &col) in pivots.iter().enumerate() {
            f[col] = m[i][n];
        }
        Ok(f)
    }

    fn run(&self) -> Result<TightSpanComplex, ComplexError> {
        let n = self.n;
        let start = self.base.row(0).to_vec();
        let mut verts: Vec<Vec<f64>> = vec![start];
        let mut masks: Vec<u64> = vec![self.tight_mask(&verts[0])];
        if self.rank(masks[0]) < n {
            return Err(ComplexError::Degenerate {
                context: "start vertex is not a vertex".into(),
                constraints: self.mask_pairs(masks[0]),
            });
        }
        let mut incident: Vec<Vec<Incident>> = vec![vec![]];
        let mut edge_set: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut queue = VecDeque::from([0usize]);
        let directions = sign_vectors(n);

        while let Some(vi) = queue.pop_front() {
            let v = verts[vi].clone();
            let tight = masks[vi];
            for u in &directions {
                let mut zero = 0u64;
                let feasible = self.constraints_in(tight).zip(tight_indices(tight)).all(|(c, idx)| {
                    let au = u[c.x] + u[c.y];
                    if au == 0 {
                        zero |= 1 << idx;
                    }
                    au >= 0
                });
                if !feasible || (zero.count_ones() as usize) + 1 < n || self.rank(zero) != n - 1 {
                    continue;
                }
                // Step until the first slack constraint becomes tight.
                let mut step = f64::INFINITY;
                for (i, &c) in self.cons.iter().enumerate() {
                    if tight >> i & 1 == 1 {
                        continue;
                    }
                    let au = u[c.x] + u[c.y];
                    if au < 0 {
                        step = step.min(self.slack(&v, c) / f64::from(-au));
                    }
                }
                if !step.is_finite() {
                    continue;
                }
                let raw: Vec<f64> = v.iter().zip(u).map(|(a, &b)| a + step * f64::from(b)).collect();
                let wmask = self.tight_mask(&raw);
                let w = self.solve_vertex(wmask)?;
                let wi = match verts.iter().position(|x| sup_distance(x, &w) <= self.eps) {
                    Some(i) => i,
                    None => {
                        if verts.len() >= VERTEX_BUDGET {
                            return Err(ComplexError::Budget(VERTEX_BUDGET));
                        }
                        masks.push(self.tight_mask(&w));
                        verts.push(w);
                        incident.push(vec![]);
                        queue.push_back(verts.len() - 1);
                        verts.len() - 1
                    }
                };
                incident[vi].push(Incident { zero_mask: zero });
                edge_set.insert((vi.min(wi), vi.max(wi)));
            }
        }

        // Canonical ids: lexicographic order of the function values.
        let mut order: Vec<usize> = (0..verts.len()).collect();
        order.sort_by_key(|&i| verts[i].iter().map(|v| (v * 1e9).round() as i64).collect::<Vec<_>>());
        let mut new_id = vec![0; verts.len()];
        for (k, &i) in order.iter().enumerate() {
            new_id[i] = k;
        }
        let vertices: Vec<ExtremalFunction> = order
            .iter()
            .map(|&i| ExtremalFunction::from_values_unchecked(verts[i].clone()))
            .collect();
        let vmasks: Vec<u64> = order.iter().map(|&i| masks[i]).collect();
        let mut edges: Vec<ComplexEdge> = edge_set
            .iter()
            .map(|&(a, b)| {
                let (a, b) = (new_id[a].min(new_id[b]), new_id[a].max(new_id[b]));
                ComplexEdge { a, b, length: vertices[a].distance(&vertices[b]) }
            })
            .collect();
        edges.sort_by_key(|e| (e.a, e.b));

        // 2-faces (and the existence of 3-faces) from pairs/triples of edges at a vertex.
        let mut face_masks: BTreeSet<u64> = BTreeSet::new();
        let mut higher = false;
        for inc in &incident {
            for (i, e1) in inc.iter().enumerate() {
                for (j, e2) in inc.iter().enumerate().skip(i + 1) {
                    let m12 = e1.zero_mask & e2.zero_mask;
                    if n >= 2 && self.rank(m12) == n - 2 && self.covers(m12) {
                        face_masks.insert(m12);
                    }
                    if n >= 6 && !higher {
                        for e3 in inc.iter().skip(j + 1) {
                            let m = m12 & e3.zero_mask;
                            if self.rank(m) == n - 3 && self.covers(m) {
                                higher = true;
                                break;
                            }
                        }
                    }
                }
            }
        }
        let mut cells2 = Vec::with_capacity(face_masks.len());
        for &mask in &face_masks {
            let ids: Vec<usize> = (0..vertices.len()).filter(|&k| vmasks[k] & mask == mask).collect();
            cells2.push(self.cell_frame(mask, &ids, &vertices)?);
        }
        cells2.sort_by(|a, b| a.vertices.cmp(&b.vertices));

        let complex = TightSpanComplex { base: self.base.clone(), vertices, edges, cells2, higher_dim_present: higher };
        self.verify(&complex)?;
        Ok(complex)
    }

    /// Builds the chart of the 2-face with tight set `mask` and vertex ids `ids`.
    fn cell_frame(&self, mask: u64, ids: &[usize], vertices: &[ExtremalFunction]) -> Result<Cell2, ComplexError> {
        let n = self.n;
        let degenerate = |context: &str| ComplexError::Degenerate {
            context: context.to_string(),
            constraints: self.mask_pairs(mask),
        };
        // Two-colour the tight graph; bipartite components are the free directions.
        let mut adj = vec![vec![]; n];
        let mut looped = vec![false; n];
        for c in self.constraints_in(mask) {
            if c.x == c.y {
                looped[c.x] = true;
            } else {
                adj[c.x].push(c.y);
                adj[c.y].push(c.x);
            }
        }
        let mut colour: Vec<Option<bool>> = vec![None; n];
        let mut axes: Vec<Vec<f64>> = Vec::new();
        let mut anchors: Vec<usize> = Vec::new();
        for s in 0..n {
            if colour[s].is_some() {
                continue;
            }
            let mut comp = vec![s];
            let mut bipartite = !looped[s];
            colour[s] = Some(true);
            let mut k = 0;
            while k < comp.len() {
                let x = comp[k];
                k += 1;
                for &y in &adj[x] {
                    let want = !colour[x].unwrap();
                    match colour[y] {
                        None => {
                            colour[y] = Some(want);
                            bipartite &= !looped[y];
                            comp.push(y);
                        }
                        Some(c) if c != want => bipartite = false,
                        _ => {}
                    }
                }
            }
            if bipartite {
                let mut axis = vec![0.0; n];
                for &x in &comp {
                    axis[x] = if colour[x] == Some(true) { 1.0 } else { -1.0 };
                }
                axes.push(axis);
                anchors.push(s);
            }
        }
        if axes.len() != 2 || ids.len() < 3 {
            return Err(degenerate("2-face without a two-parameter chart"));
        }
        let origin = vertices[ids[0]].values().to_vec();
        let coords: Vec<(f64, f64)> = ids
            .iter()
            .map(|&i| {
                let w = vertices[i].values();
                (w[anchors[0]] - origin[anchors[0]], w[anchors[1]] - origin[anchors[1]])
            })
            .collect();
        let axes = [axes[0].clone(), axes[1].clone()];
        let mut cell = Cell2 { vertices: ids.to_vec(), origin, axes, polygon: coords };
        for (&i, &(s, t)) in ids.iter().zip(&cell.polygon) {
            if sup_distance(&cell.point_at(s, t), vertices[i].values()) > self.eps * 10.0 {
                return Err(degenerate("face vertex off its chart plane"));
            }
        }
        // Cyclic order by angle about the centroid.
        let k = cell.polygon.len() as f64;
        let (cx, cy) = cell.polygon.iter().fold((0.0, 0.0), |(a, b), (s, t)| (a + s / k, b + t / k));
        let mut idx: Vec<usize> = (0..cell.vertices.len()).collect();
        idx.sort_by(|&a, &b| {
            let (sa, ta) = cell.polygon[a];
            let (sb, tb) = cell.polygon[b];
            (ta - cy).atan2(sa - cx).total_cmp(&(tb - cy).atan2(sb - cx))
        });
        cell.vertices = idx.iter().map(|&i| ids[i]).collect();
        cell.polygon = idx.iter().map(|&i| cell.polygon[i]).collect();
        Ok(cell)
    }

    fn verify(&self, c: &TightSpanComplex) -> Result<(), ComplexError> {
        let tol = self.eps * 10.0;
        for (i, v) in c.vertices.iter().enumerate() {
            if !hull::is_extremal(self.base, v.values(), tol) {
                return Err(ComplexError::NotExtremal(format!("vertex {i}")));
            }
        }
        for e in &c.edges {
            let mid: Vec<f64> = midpoint(c.vertices[e.a].values(), c.vertices[e.b].values());
            if !hull::is_extremal(self.base, &mid, tol) {
                return Err(ComplexError::NotExtremal(format!("midpoint of edge ({},{})", e.a, e.b)));
            }
        }
        for cell in &c.cells2 {
            let k = cell.vertices.len() as f64;
            let mut bary = vec![0.0; self.n];
            for &i in &cell.vertices {
                for (b, v) in bary.iter_mut().zip(c.vertices[i].values()) {
                    *b += v / k;
                }
            }
            if !hull::is_extremal(self.base, &bary, tol) {
                return Err(ComplexError::NotExtremal(format!("barycenter of cell {:?}", cell.vertices)));
            }
        }
        for z in 0..self.n {
            if c.embedded_vertex(z, tol).is_none() {
                return Err(ComplexError::Degenerate {
                    context: format!("d_{z} missing from the vertex set"),
                    constraints: vec![],
                });
            }
        }
        Ok(())
    }
}

fn tight_indices(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

/// All nonzero vectors in `{-1, 0, 1}^n`.
fn sign_vectors(n: usize) -> Vec<Vec<i32>> {
    let total = 3usize.pow(n as u32);
    (1..total)
        .map(|mut k| {
            (0..n)
                .map(|_| {
                    let d = (k % 3) as i32 - 1;
                    k /= 3;
                    d
                })
                .collect::<Vec<i32>>()
        })
        .filter(|u| u.iter().any(|&x| x != 0))
        .collect()
}

/// Rows of a row-echelon form of `rows` (the independent part).
fn row_echelon(mut rows: Vec<Vec<f64>>, ncols: usize) -> Vec<Vec<f64>> {
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..rows.len()).max_by(|&a, &b| rows[a][col].abs().total_cmp(&rows[b][col].abs())) else {
            break;
        };
        if rows[p][col].abs() < 1e-9 {
            continue;
        }
        rows.swap(r, p);
        for i in r + 1..rows.len() {
            let fac = rows[i][col] / rows[r][col];
            if fac != 0.0 {
                for j in col..ncols {
                    rows[i][j] -= fac * rows[r][j];
                }
            }
        }
        r += 1;
    }
    rows.truncate(r);
    rows
}

fn midpoint(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

fn signed_area(poly: &[(f64, f64)]) -> f64 {
    let k = poly.len();
    (0..k)
        .map(|i| {
            let (x0, y0) = poly[i];
            let (x1, y1) = poly[(i + 1) % k];
            x0 * y1 - x1 * y0
        })
        .sum::<f64>()
        / 2.0
}

/// A finite subset of the complex with a covering-radius bound.
#[derive(Clone, Debug)]
pub struct NetSample {
    pub points: Vec<ExtremalFunction>,
    pub mesh: f64,
}

/// Samples the complex so that every point of it is within `h` of a sample.
///
/// Vertices are always included. Edges are subdivided at spacing at most
/// `2h`, except edges on the boundary of a 2-cell, which use spacing at most
/// `h`; each 2-cell gets a chart grid of spacing at most `h`. Grid points
/// outside the cell are dropped, and the finer boundary keeps the covering
/// radius at `h` near the boundary.
pub fn sample_net(complex: &TightSpanComplex, h: f64) -> Result<NetSample, ComplexError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(ComplexError::BadMesh(h));
    }
    if complex.higher_dim_present {
        return Err(ComplexError::HigherDimensional);
    }
    let on_cell: BTreeSet<(usize, usize)> = complex
        .cells2
        .iter()
        .flat_map(|c| {
            let k = c.vertices.len();
            (0..k).map(move |i| {
                let (a, b) = (c.vertices[i], c.vertices[(i + 1) % k]);
                (a.min(b), a.max(b))
            })
        })
        .collect();
    let mut pts: Vec<Vec<f64>> = complex.vertices.iter().map(|v| v.values().to_vec()).collect();
    for e in &complex.edges {
        let spacing = if on_cell.contains(&(e.a, e.b)) { h } else { 2.0 * h };
        let k = pieces(e.length, spacing);
        let (fa, fb) = (complex.vertices[e.a].values(), complex.vertices[e.b].values());
        for i in 1..k {
            let t = i as f64 / k as f64;
            pts.push(fa.iter().zip(fb).map(|(a, b)| a + t * (b - a)).collect());
        }
    }
    let scale = complex.base.diameter().unwrap_or(0.0).max(1.0);
    for cell in &complex.cells2 {
        let (smin, smax) = span(cell.polygon.iter().map(|p| p.0));
        let (tmin, tmax) = span(cell.polygon.iter().map(|p| p.1));
        let (ks, kt) = (pieces(smax - smin, h), pieces(tmax - tmin, h));
        for i in 0..=ks {
            let s = smin + (smax - smin) * i as f64 / ks as f64;
            for j in 0..=kt {
                let t = tmin + (tmax - tmin) * j as f64 / kt as f64;
                if cell.contains(s, t, CHART_TOL * scale) {
                    let p = cell.point_at(s, t);
                    // Rounding in the chart can still leave a boundary point
                    // off the hull; such points are covered by the edge samples.
                    if sup_distance(&p, &star(&complex.base, &p)) <= CHART_TOL * scale {
                        pts.push(p);
                    }
                }
            }
        }
    }
    let dedup_tol = 1e-9 * scale;
    pts.sort_by_key(|v| v.iter().map(|x| (x * 1e9).round() as i64).collect::<Vec<_>>());
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(pts.len());
    for p in pts {
        if !kept.iter().any(|q| sup_distance(q, &p) <= dedup_tol) {
            kept.push(p);
        }
    }
    Ok(NetSample { points: kept.into_iter().map(ExtremalFunction::from_values_unchecked).collect(), mesh: h })
}

/// Slack, relative to the diameter, for chart points near a cell boundary.
const CHART_TOL: f64 = 1e-12;

/// Number of equal pieces of length at most `spacing` covering `len`.
fn pieces(len: f64, spacing: f64) -> usize {
    ((len / spacing) - 1e-9).ceil().max(1.0) as usize
}

fn span(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Sorted pairwise distance multiset of the complex vertices.
pub fn vertex_distance_multiset(complex: &TightSpanComplex) -> Vec<f64> {
    let v = &complex.vertices;
    let mut out: Vec<f64> = (0..v.len())
        .flat_map(|i| (i + 1..v.len()).map(move |j| (i, j)))
        .map(|(i, j)| v[i].distance(&v[j]))
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Groups sorted lengths into `(value, count)` with tolerance `tol`.
pub fn length_histogram(lengths: &[f64], tol: f64) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for l in lengths {
        let key = format!("{:.6}", (l / tol.max(1e-12)).round() * tol.max(1e-12));
        *out.entry(key).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{make_fixture, Fixture};
    use crate::metric::covering_radius;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9)
    }

    #[test]
    fn segment() {
        let c = tight_span_complex(&make_fixture(Fixture::Seg2).unwrap()).unwrap();
        assert_eq!(c.vertices().len(), 2);
        assert_eq!(c.edges().len(), 1);
        assert_eq!(c.edge_lengths(), vec![2.0]);
        assert!(c.cells2().is_empty());
        assert!(!c.higher_dim_present());
    }

    #[test]
    fn rectangle_for_non_tree_quadruple() {
        let c = tight_span_complex(&make_fixture(Fixture::Ex33A(8.0)).unwrap()).unwrap();
        assert_eq!(c.vertices().len(), 4);
        assert_eq!(c.edges().len(), 4);
        assert_eq!(c.cells2().len(), 1);
        assert_eq!(vertex_distance_multiset(&c), vec![4., 4., 8., 8., 12., 12.]);
        assert_eq!(c.cells2()[0].vertices.len(), 4);
    }

    #[test]
    fn tree_for_ex33_b() {
        let c = tight_span_complex(&make_fixture(Fixture::Ex33B(8.0)).unwrap()).unwrap();
        assert_eq!(c.vertices().len(), 6);
        assert_eq!(c.edge_lengths(), vec![1., 1., 1., 1., 8.]);
        assert!(c.cells2().is_empty());
    }

    #[test]
    fn single_point() {
        let m = FiniteMetricSpace::with_default_labels(vec![vec![0.0]], DEFAULT_TOL).unwrap();
        let c = tight_span_complex(&m).unwrap();
        assert_eq!(c.vertices().len(), 1);
        assert!(c.edges().is_empty());
    }

    #[test]
    fn too_large() {
        let n = 9;
        let m = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
        let m = FiniteMetricSpace::with_default_labels(m, DEFAULT_TOL).unwrap();
        assert!(matches!(tight_span_complex(&m), Err(ComplexError::TooLarge { .. })));
    }

    #[test]
    fn seg2_nets() {
        let c = tight_span_complex(&make_fixture(Fixture::Seg2).unwrap()).unwrap();
        let net = sample_net(&c, 0.5).unwrap();
        assert_eq!(net.points.len(), 3);
        let vals: Vec<&[f64]> = net.points.iter().map(|p| p.values()).collect();
        assert!(close(vals[0], &[0., 2.]));
        assert!(close(vals[1], &[1., 1.]));
        assert!(close(vals[2], &[2., 0.]));
        assert_eq!(sample_net(&c, 2.0).unwrap().points.len(), 2);
        assert!(matches!(sample_net(&c, 0.0), Err(ComplexError::BadMesh(_))));
    }

    #[test]
    fn ex33_b_net_count() {
        // Central edge of length 8 at spacing 1 gives 9 points; the unit legs
        // add only their four leaves.
        let c = tight_span_complex(&make_fixture(Fixture::Ex33B(8.0)).unwrap()).unwrap();
        assert_eq!(sample_net(&c, 0.5).unwrap().points.len(), 13);
    }

    #[test]
    fn rectangle_net_covers_against_finer_sample() {
        let c = tight_span_complex(&make_fixture(Fixture::Ex33A(8.0)).unwrap()).unwrap();
        for h in [0.5, 1.0, 3.0] {
            let net = sample_net(&c, h).unwrap();
            let fine = sample_net(&c, h / 4.0).unwrap();
            assert!(covering_radius(&c, &fine.points, &net.points) <= h + 1e-9);
            for p in &net.points {
                assert!(hull::is_extremal(c.base(), p.values(), 1e-9));
            }
        }
    }

    #[test]
    fn sliver_cells_yield_extremal_net_points() {
        use rand::{Rng, SeedableRng};
        // A random 5-point metric whose hull has a 2-cell about 6e-7 wide.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2180);
        let (na, nb) = (rng.gen_range(2..=5), rng.gen_range(2..=5));
        let _ = crate::random::random_metric(&mut rng, na);
        let m = crate::random::random_metric(&mut rng, nb);
        let c = tight_span_complex(&m).unwrap();
        assert!(c.edges().iter().any(|e| e.length < 1e-6));
        for p in sample_net(&c, 0.25).unwrap().points {
            assert!(sup_distance(p.values(), &star(&m, p.values())) <= 1e-11);
        }
    }
}
