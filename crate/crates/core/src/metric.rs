//! Finite metric spaces and the set-level predicates used throughout the crate.
//!
//! A [`FiniteMetricSpace`] is a list of labels with a validated distance matrix.
//! Everything else in the crate either consumes one of these or produces a
//! point space that implements [`MetricSpace`] (tight spans, trees), so the
//! predicates here are written against the trait.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Default absolute tolerance for metric comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A space of points with a distance oracle.
pub trait MetricSpace {
    type Point: Clone + fmt::Debug;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> f64;
}

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("metric validation failed: {0}")]
    Invalid(Box<ValidationReport>),
    #[error("{labels} labels given for a {size}x{size} matrix")]
    LabelCount { labels: usize, size: usize },
    #[error("operation requires a nonempty space")]
    Empty,
    #[error("unknown point label `{0}`")]
    UnknownLabel(String),
    #[error("invalid point subset: {0}")]
    Subset(String),
}

/// One failed metric axiom, with the first offending index tuple.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NotSquare { row: usize, len: usize, expected: usize },
    NotFinite { i: usize, j: usize, value: f64 },
    Negative { i: usize, j: usize, value: f64 },
    NonzeroDiagonal { i: usize, value: f64 },
    Asymmetric { i: usize, j: usize, forward: f64, backward: f64 },
    /// `d(i,j) > d(i,k) + d(k,j)`.
    Triangle { i: usize, j: usize, k: usize, direct: f64, detour: f64 },
    EmptyLabel { index: usize },
    DuplicateLabel { label: String, first: usize, second: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotSquare { row, len, expected } => {
                write!(f, "row {row} has {len} entries, expected {expected}")
            }
            Violation::NotFinite { i, j, value } => write!(f, "entry ({i},{j}) = {value} is not finite"),
            Violation::Negative { i, j, value } => write!(f, "entry ({i},{j}) = {value} is negative"),
            Violation::NonzeroDiagonal { i, value } => write!(f, "diagonal entry ({i},{i}) = {value}"),
            Violation::Asymmetric { i, j, forward, backward } => {
                write!(f, "asymmetry at ({i},{j}): {forward} vs {backward}")
            }
            Violation::Triangle { i, j, k, direct, detour } => {
                write!(f, "triangle violation at ({i},{j},{k}): {direct} > {detour}")
            }
            Violation::EmptyLabel { index } => write!(f, "label {index} is empty"),
            Violation::DuplicateLabel { label, first, second } => {
                write!(f, "label `{label}` used for points {first} and {second}")
            }
        }
    }
}

/// Per-axiom outcome of [`validate_metric`]; `None` means the axiom holds.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub size: usize,
    pub shape: Option<Violation>,
    pub finite_nonnegative: Option<Violation>,
    pub zero_diagonal: Option<Violation>,
    pub symmetry: Option<Violation>,
    pub triangle: Option<Violation>,
    pub labels: Option<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations().next().is_none()
    }

    pub fn violations(&self) -> impl Iterator<Item = &Violation> {
        [
            &self.shape,
            &self.finite_nonnegative,
            &self.zero_diagonal,
            &self.symmetry,
            &self.triangle,
            &self.labels,
        ]
        .into_iter()
        .flatten()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "{}-point metric: pass", self.size);
        }
        let msgs: Vec<String> = self.violations().map(|v| v.to_string()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

/// Checks the metric axioms on a candidate matrix without modifying it.
pub fn validate_metric(matrix: &[Vec<f64>], tol: f64) -> ValidationReport {
    let n = matrix.len();
    let mut report = ValidationReport { size: n, ..Default::default() };
    if let Some((row, r)) = matrix.iter().enumerate().find(|(_, r)| r.len() != n) {
        report.shape = Some(Violation::NotSquare { row, len: r.len(), expected: n });
        return report;
    }
    'outer: for i in 0..n {
        for j in 0..n {
            let v = matrix[i][j];
            if !v.is_finite() {
                report.finite_nonnegative = Some(Violation::NotFinite { i, j, value: v });
                break 'outer;
            }
            if v < 0.0 {
                report.finite_nonnegative = Some(Violation::Negative { i, j, value: v });
                break 'outer;
            }
        }
    }
    if report.finite_nonnegative.is_some() {
        return report;
    }
    report.zero_diagonal = (0..n)
        .find(|&i| matrix[i][i].abs() > tol)
        .map(|i| Violation::NonzeroDiagonal { i, value: matrix[i][i] });
    'sym: for i in 0..n {
        for j in i + 1..n {
            if (matrix[i][j] - matrix[j][i]).abs() > tol {
                report.symmetry = Some(Violation::Asymmetric {
                    i,
                    j,
                    forward: matrix[i][j],
                    backward: matrix[j][i],
                });
                break 'sym;
            }
        }
    }
    'tri: for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let detour = matrix[i][k] + matrix[k][j];
                if matrix[i][j] > detour + tol {
                    report.triangle = Some(Violation::Triangle { i, j, k, direct: matrix[i][j], detour });
                    break 'tri;
                }
            }
        }
    }
    report
}

fn label_violation(labels: &[String]) -> Option<Violation> {
    if let Some(index) = labels.iter().position(|l| l.is_empty()) {
        return Some(Violation::EmptyLabel { index });
    }
    let mut seen = HashMap::new();
    for (i, l) in labels.iter().enumerate() {
        if let Some(&first) = seen.get(l.as_str()) {
            return Some(Violation::DuplicateLabel { label: l.clone(), first, second: i });
        }
        seen.insert(l.as_str(), i);
    }
    None
}

/// Labeled points with a validated, exactly symmetric distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<f64>,
}

impl FiniteMetricSpace {
    /// Builds a space from a matrix, symmetrizing entries that disagree by at
    /// most `tol` and rejecting anything that fails [`validate_metric`].
    pub fn new(labels: Vec<String>, matrix: Vec<Vec<f64>>, tol: f64) -> Result<Self, MetricError> {
        let n = matrix.len();
        let mut report = validate_metric(&matrix, tol);
        report.labels = label_violation(&labels);
        if report.shape.is_none() && labels.len() != n {
            return Err(MetricError::LabelCount { labels: labels.len(), size: n });
        }
        if !report.passed() {
            return Err(MetricError::Invalid(Box::new(report)));
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (matrix[i][j] + matrix[j][i]);
                dist[i * n + j] = v;
                dist[j * n + i] = v;
            }
        }
        Ok(Self { labels, dist })
    }

    /// Builds the metric induced on `points` by `dist`.
    pub fn from_points<P>(
        labels: Vec<String>,
        points: &[P],
        dist: impl Fn(&P, &P) -> f64,
        tol: f64,
    ) -> Result<Self, MetricError> {
        let matrix = points
            .iter()
            .map(|p| points.iter().map(|q| dist(p, q)).collect())
            .collect();
        Self::new(labels, matrix, tol)
    }

    /// Labels `p0, p1, ...`.
    pub fn with_default_labels(matrix: Vec<Vec<f64>>, tol: f64) -> Result<Self, MetricError> {
        let labels = (0..matrix.len()).map(|i| format!("p{i}")).collect();
        Self::new(labels, matrix, tol)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize, MetricError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| MetricError::UnknownLabel(label.to_string()))
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.dist[i * n..(i + 1) * n]
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.row(i).to_vec()).collect()
    }

    /// All point indices, for use with the generic predicates.
    pub fn points(&self) -> Vec<usize> {
        (0..self.len()).collect()
    }

    pub fn diameter(&self) -> Result<f64, MetricError> {
        if self.is_empty() {
            return Err(MetricError::Empty);
        }
        Ok(self.dist.iter().copied().fold(0.0, f64::max))
    }

    pub fn eccentricity(&self, i: usize) -> f64 {
        self.row(i).iter().copied().fold(0.0, f64::max)
    }

    /// Smallest distance between distinct points, `None` for fewer than two points.
    pub fn separation(&self) -> Option<f64> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| self.d(i, j))
            .reduce(f64::min)
    }

    /// The space with points reordered so that new point `k` is old point `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.len(), "permutation length mismatch");
        let n = self.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = self.d(perm[i], perm[j]);
            }
        }
        Self { labels: perm.iter().map(|&k| self.labels[k].clone()).collect(), dist }
    }

    /// The induced subspace on `indices`, in the given order.
    pub fn subspace(&self, indices: &[usize]) -> Self {
        let k = indices.len();
        let mut dist = vec![0.0; k * k];
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                dist[a * k + b] = self.d(i, j);
            }
        }
        Self { labels: indices.iter().map(|&i| self.labels[i].clone()).collect(), dist }
    }

    /// First quadruple violating the four-point condition, if any.
    pub fn four_point_violation(&self, tol: f64) -> Option<FourPointViolation> {
        let n = self.len();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    for l in k + 1..n {
                        let mut sums = [
                            self.d(i, j) + self.d(k, l),
                            self.d(i, k) + self.d(j, l),
                            self.d(i, l) + self.d(j, k),
                        ];
                        sums.sort_by(f64::total_cmp);
                        if sums[2] - sums[1] > tol {
                            return Some(FourPointViolation { quad: [i, j, k, l], sums });
                        }
                    }
                }
            }
        }
        None
    }

    /// True when every quadruple satisfies the four-point condition within `tol`.
    pub fn is_four_point(&self, tol: f64) -> bool {
        self.four_point_violation(tol).is_none()
    }
}

impl MetricSpace for FiniteMetricSpace {
    type Point = usize;

    fn distance(&self, a: &usize, b: &usize) -> f64 {
        self.d(*a, *b)
    }
}

/// A quadruple whose two largest pairing sums differ by more than the tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct FourPointViolation {
    pub quad: [usize; 4],
    /// Pairing sums in ascending order.
    pub sums: [f64; 3],
}

/// Distinct, in-range indices into a point list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSubset(Vec<usize>);

impl PointSubset {
    pub fn new(indices: Vec<usize>, len: usize) -> Result<Self, MetricError> {
        let mut seen = vec![false; len];
        for &i in &indices {
            if i >= len {
                return Err(MetricError::Subset(format!("index {i} out of range for {len} points")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(MetricError::Subset(format!("index {i} repeated")));
            }
        }
        Ok(Self(indices))
    }

    pub fn all(len: usize) -> Self {
        Self((0..len).collect())
    }

    /// Resolves labels against a finite space.
    pub fn from_labels(space: &FiniteMetricSpace, labels: &[&str]) -> Result<Self, MetricError> {
        let idx = labels.iter().map(|l| space.index_of(l)).collect::<Result<Vec<_>, _>>()?;
        Self::new(idx, space.len())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpanMode {
    /// `|xx'| = sup_a (|xa| - |x'a|)` for every ordered pair.
    Spans,
    /// Some `a` attains `|xx'| + |x'a| = |xa|` for every ordered pair.
    StrictlySpans,
}

/// Outcome of [`spans_check`]: the first violating ordered pair, if any.
#[derive(Clone, Debug, PartialEq)]
pub struct SpanReport {
    pub holds: bool,
    pub violation: Option<(usize, usize)>,
}

/// Exhaustive spanning check over all ordered pairs of `points`.
///
/// On a finite point list the supremum is a maximum, so both modes reduce to
/// the same test; they are kept apart so callers can state which property a
/// construction relies on.
pub fn spans_check<M: MetricSpace>(
    space: &M,
    points: &[M::Point],
    subset: &PointSubset,
    mode: SpanMode,
    tol: f64,
) -> SpanReport {
    let anchors: Vec<&M::Point> = subset.indices().iter().map(|&i| &points[i]).collect();
    for (i, x) in points.iter().enumerate() {
        for (j, xp) in points.iter().enumerate() {
            let dxx = space.distance(x, xp);
            let ok = match mode {
                SpanMode::Spans => {
                    let best = anchors
                        .iter()
                        .map(|a| space.distance(x, a) - space.distance(xp, a))
                        .fold(f64::NEG_INFINITY, f64::max);
                    (best - dxx).abs() <= tol
                }
                SpanMode::StrictlySpans => anchors
                    .iter()
                    .any(|a| (dxx + space.distance(xp, a) - space.distance(x, a)).abs() <= tol),
            };
            if !ok {
                return SpanReport { holds: false, violation: Some((i, j)) };
            }
        }
    }
    SpanReport { holds: true, violation: None }
}

/// Largest distance from a point of `points` to the nearest member of `subset`.
pub fn covering_radius<M: MetricSpace>(space: &M, points: &[M::Point], subset: &[M::Point]) -> f64 {
    points
        .iter()
        .map(|x| {
            subset
                .iter()
                .map(|z| space.distance(x, z))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// True when every point lies within `alpha` (plus `tol`) of the subset.
pub fn is_net<M: MetricSpace>(
    space: &M,
    points: &[M::Point],
    subset: &PointSubset,
    alpha: f64,
    tol: f64,
) -> bool {
    if subset.is_empty() {
        return points.is_empty();
    }
    let members: Vec<M::Point> = subset.indices().iter().map(|&i| points[i].clone()).collect();
    covering_radius(space, points, &members) <= alpha + tol
}
