//! Extremal functions on a finite metric space and the hyperconvex operations on them.
//!
//! A function `f` on the points of `X` is *admissible* when
//! `f(x) + f(y) >= d(x,y)` for all `x, y`, and *extremal* when it is a fixed
//! point of [`star`], i.e. `f(x) = max_y (d(x,y) - f(y))`. The extremal
//! functions with the sup-norm form the injective hull of `X`.

use std::collections::HashMap;

use thiserror::Error;

use crate::metric::FiniteMetricSpace;

/// Stopping threshold for [`retract`], relative to the scale of the base metric.
pub const RETRACT_EPS: f64 = 1e-12;
/// Iteration cap for [`retract`].
pub const RETRACT_MAX_ITERS: usize = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum HullError {
    #[error("function has {got} values, base space has {expected} points")]
    Length { got: usize, expected: usize },
    #[error("not admissible: f({x}) + f({y}) = {sum} < d = {dist}")]
    Inadmissible { x: usize, y: usize, sum: f64, dist: f64 },
    #[error("function is admissible but not extremal (|f - f*| = {residual:e})")]
    NotExtremal { residual: f64 },
    #[error("retraction did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("ball intersection needs at least one ball with matching radii ({centers} centers, {radii} radii)")]
    BallShape { centers: usize, radii: usize },
    #[error("negative radius {radius} for ball {index}")]
    NegativeRadius { index: usize, radius: f64 },
    #[error("balls {i} and {j} are incompatible: {ri} + {rj} < {dist}")]
    Incompatible { i: usize, j: usize, ri: f64, rj: f64, dist: f64 },
    #[error("intersection point misses ball {index}: distance {dist} > radius {radius}")]
    Containment { index: usize, dist: f64, radius: f64 },
    #[error("unknown point index {0}")]
    UnknownPoint(usize),
}

/// A point of the injective hull, as a function vector over the base points.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtremalFunction(Vec<f64>);

impl ExtremalFunction {
    /// Wraps values that are already known to be extremal.
    pub fn from_values_unchecked(values: Vec<f64>) -> Self {
        Self(values)
    }

    /// Wraps `values` after checking extremality against `base`.
    pub fn new(base: &FiniteMetricSpace, values: Vec<f64>, tol: f64) -> Result<Self, HullError> {
        check_len(base, &values)?;
        if let Some((x, y)) = admissibility_violation(base, &values, tol) {
            return Err(inadmissible(base, &values, x, y));
        }
        if !is_extremal(base, &values, tol) {
            return Err(HullError::NotExtremal { residual: star_residual(base, &values) });
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn distance(&self, other: &Self) -> f64 {
        sup_distance(&self.0, &other.0)
    }
}

impl AsRef<[f64]> for ExtremalFunction {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub fn sup_distance(f: &[f64], g: &[f64]) -> f64 {
    f.iter().zip(g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn check_len(base: &FiniteMetricSpace, f: &[f64]) -> Result<(), HullError> {
    if f.len() != base.len() {
        return Err(HullError::Length { got: f.len(), expected: base.len() });
    }
    Ok(())
}

fn inadmissible(base: &FiniteMetricSpace, f: &[f64], x: usize, y: usize) -> HullError {
    HullError::Inadmissible { x, y, sum: f[x] + f[y], dist: base.d(x, y) }
}

fn metric_scale(base: &FiniteMetricSpace) -> f64 {
    base.diameter().unwrap_or(0.0).max(1.0)
}

/// `(f*)(x) = max_y (d(x,y) - f(y))`.
pub fn star(base: &FiniteMetricSpace, f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    star_into(base, f, &mut out);
    out
}

fn star_into(base: &FiniteMetricSpace, f: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.extend((0..f.len()).map(|x| {
        base.row(x)
            .iter()
            .zip(f)
            .map(|(d, fy)| d - fy)
            .fold(f64::NEG_INFINITY, f64::max)
    }));
}

fn star_residual(base: &FiniteMetricSpace, f: &[f64]) -> f64 {
    sup_distance(f, &star(base, f))
}

/// First pair `(x, y)`, `x <= y`, with `f(x) + f(y) < d(x,y) - tol`.
pub fn admissibility_violation(base: &FiniteMetricSpace, f: &[f64], tol: f64) -> Option<(usize, usize)> {
    let n = f.len();
    (0..n)
        .flat_map(|x| (x..n).map(move |y| (x, y)))
        .find(|&(x, y)| f[x] + f[y] < base.d(x, y) - tol)
}

pub fn is_admissible(base: &FiniteMetricSpace, f: &[f64], tol: f64) -> bool {
    f.len() == base.len() && admissibility_violation(base, f, tol).is_none()
}

pub fn is_extremal(base: &FiniteMetricSpace, f: &[f64], tol: f64) -> bool {
    is_admissible(base, f, tol) && star_residual(base, f) <= tol
}

/// The distance function `d_z` of a base point.
pub fn canonical_embed(base: &FiniteMetricSpace, z: usize) -> Result<ExtremalFunction, HullError> {
    if z >= base.len() {
        return Err(HullError::UnknownPoint(z));
    }
    Ok(ExtremalFunction(base.row(z).to_vec()))
}

/// Nonexpansive retraction of an admissible function onto the extremal functions.
///
/// Iterates `f <- (f + f*) / 2`. For admissible `f` we have `f* <= f`, the
/// average stays admissible, and the sequence decreases to an extremal limit
/// below `g`.
pub fn retract(base: &FiniteMetricSpace, g: &[f64], tol: f64) -> Result<ExtremalFunction, HullError> {
    check_len(base, g)?;
    if let Some((x, y)) = admissibility_violation(base, g, tol) {
        return Err(inadmissible(base, g, x, y));
    }
    retract_unchecked(base, g)
}

pub(crate) fn retract_unchecked(base: &FiniteMetricSpace, g: &[f64]) -> Result<ExtremalFunction, HullError> {
    let eps = RETRACT_EPS * metric_scale(base);
    let mut f = g.to_vec();
    let mut fs = Vec::with_capacity(f.len());
    let mut residual = f64::INFINITY;
    for _ in 0..RETRACT_MAX_ITERS {
        star_into(base, &f, &mut fs);
        residual = sup_distance(&f, &fs);
        if residual <= eps {
            return Ok(ExtremalFunction(f));
        }
        for (a, b) in f.iter_mut().zip(&fs) {
            *a = 0.5 * (*a + b);
        }
    }
    Err(HullError::NoConvergence { iterations: RETRACT_MAX_ITERS, residual })
}

/// A common point of the closed balls `B(centers[i], radii[i])` in the hull.
///
/// Requires pairwise compatible radii. The answer is the retraction of the
/// pointwise minimum of `center + radius`; containment in every ball is
/// re-verified before returning.
pub fn ball_intersection(
    base: &FiniteMetricSpace,
    centers: &[ExtremalFunction],
    radii: &[f64],
    tol: f64,
) -> Result<ExtremalFunction, HullError> {
    if centers.is_empty() || centers.len() != radii.len() {
        return Err(HullError::BallShape { centers: centers.len(), radii: radii.len() });
    }
    for c in centers {
        check_len(base, c.values())?;
    }
    if let Some(index) = radii.iter().position(|&r| r < -tol || !r.is_finite()) {
        return Err(HullError::NegativeRadius { index, radius: radii[index] });
    }
    let balls = merge_equal_centers(centers, radii);
    for (a, &(i, ri)) in balls.iter().enumerate() {
        for &(j, rj) in &balls[a + 1..] {
            let dist = centers[i].distance(&centers[j]);
            if ri + rj < dist - tol {
                return Err(HullError::Incompatible { i, j, ri, rj, dist });
            }
        }
    }
    let n = base.len();
    let mut envelope = vec![f64::INFINITY; n];
    for &(i, r) in &balls {
        for (e, v) in envelope.iter_mut().zip(centers[i].values()) {
            *e = e.min(v + r.max(0.0));
        }
    }
    let f = retract_unchecked(base, &envelope)?;
    for (index, (c, &radius)) in centers.iter().zip(radii).enumerate() {
        let dist = f.distance(c);
        if dist > radius + tol {
            return Err(HullError::Containment { index, dist, radius });
        }
    }
    Ok(f)
}

/// Collapses bit-identical centers to one ball with the smallest radius.
/// Returns `(first index, radius)` pairs in first-occurrence order.
fn merge_equal_centers(centers: &[ExtremalFunction], radii: &[f64]) -> Vec<(usize, f64)> {
    let mut slot: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (i, (c, &r)) in centers.iter().zip(radii).enumerate() {
        let key: Vec<u64> = c.values().iter().map(|v| v.to_bits()).collect();
        match slot.get(&key) {
            Some(&k) => out[k].1 = out[k].1.min(r),
            None => {
                slot.insert(key, out.len());
                out.push((i, r));
            }
        }
    }
    out
}
