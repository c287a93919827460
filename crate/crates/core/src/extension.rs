//! Extending a relation between injective spaces without raising its distortion.
//!
//! Given a relation `R` between injective spaces `X` and `Y` whose left
//! projection spans `X`, every point `x̄` of `X` can be matched with some pair
//! `(x0, y0)` such that `|x̄ x0| <= α = dis(R)/2` and `R ∪ {(x0, y0)}` still has
//! distortion `dis(R)`. When `X` is a tree whose left projection strictly spans
//! it, `x̄` itself can be added. Both steps are built from ball
//! intersections, which always succeed in injective spaces.

use serde::Serialize;
use thiserror::Error;

use crate::complex::{sample_net, tight_span_complex, ComplexError, TightSpanComplex};
use crate::gh::{min_distortion_correspondence, Correspondence, GhError, Relation, DEFAULT_BUDGET};
use crate::hull::{self, ExtremalFunction, HullError};
use crate::io::fmt_g17;
use crate::metric::{covering_radius, FiniteMetricSpace, MetricSpace};
use crate::tree::{tree_ball_intersection, tree_from_metric, tree_net, SimplicialTree, TreeError, TreePoint};

#[derive(Debug, Error)]
pub enum ExtensionError {
    #[error("relation is empty")]
    EmptyRelation,
    #[error("projection does not span the space: |x xq| = {dist} but the best anchor gives {best}")]
    NotSpanning { dist: f64, best: f64 },
    #[error("projection does not strictly span the tree (leaf node {0} missing)")]
    NotStrictlySpanning(usize),
    #[error("distortion rose from {before} to {after}")]
    DistortionIncrease { before: f64, after: f64 },
    #[error("new point is {dist} from the query, more than alpha = {alpha}")]
    FarFromQuery { dist: f64, alpha: f64 },
    #[error("no pair (x2, y2) with the query on the geodesic from x1 to x2")]
    NoWitness,
    #[error("completion needs nonempty nets")]
    EmptyNet,
    #[error("completion distortion {dis} exceeds {bound}")]
    CompletionBound { dis: f64, bound: f64 },
    #[error(transparent)]
    Hull(#[from] HullError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Gh(#[from] GhError),
}

/// A metric space in which compatible balls always meet, with a finite net sampler.
pub trait InjectiveSpace: MetricSpace
where
    Self::Point: PartialEq,
{
    fn ball_intersection(&self, centers: &[Self::Point], radii: &[f64], tol: f64) -> Result<Self::Point, ExtensionError>;

    /// Points within `h` of every point of the space.
    fn net(&self, h: f64) -> Result<Vec<Self::Point>, ExtensionError>;
}

impl InjectiveSpace for TightSpanComplex {
    fn ball_intersection(&self, centers: &[ExtremalFunction], radii: &[f64], tol: f64) -> Result<ExtremalFunction, ExtensionError> {
        Ok(hull::ball_intersection(self.base(), centers, radii, tol)?)
    }

    fn net(&self, h: f64) -> Result<Vec<ExtremalFunction>, ExtensionError> {
        Ok(sample_net(self, h)?.points)
    }
}

impl InjectiveSpace for SimplicialTree {
    fn ball_intersection(&self, centers: &[TreePoint], radii: &[f64], tol: f64) -> Result<TreePoint, ExtensionError> {
        Ok(tree_ball_intersection(self, centers, radii, tol)?)
    }

    fn net(&self, h: f64) -> Result<Vec<TreePoint>, ExtensionError> {
        Ok(tree_net(self, h)?)
    }
}

/// A relation between two injective spaces, grown one point at a time.
pub struct ExtensionState<'a, X: InjectiveSpace, Y: InjectiveSpace>
where
    X::Point: PartialEq,
    Y::Point: PartialEq,
{
    pub x: &'a X,
    pub y: &'a Y,
    relation: Relation<X::Point, Y::Point>,
    /// Distortion of the relation the state was created with.
    dis0: f64,
    pub tol: f64,
}

impl<'a, X: InjectiveSpace, Y: InjectiveSpace> ExtensionState<'a, X, Y>
where
    X::Point: PartialEq,
    Y::Point: PartialEq,
{
    pub fn new(x: &'a X, y: &'a Y, relation: Relation<X::Point, Y::Point>, tol: f64) -> Result<Self, ExtensionError> {
        let dis0 = relation.distortion().map_err(|_| ExtensionError::EmptyRelation)?;
        Ok(Self { x, y, relation, dis0, tol })
    }

    pub fn relation(&self) -> &Relation<X::Point, Y::Point> {
        &self.relation
    }

    pub fn into_relation(self) -> Relation<X::Point, Y::Point> {
        self.relation
    }

    /// Half the distortion of the starting relation.
    pub fn alpha(&self) -> f64 {
        self.dis0 / 2.0
    }

    /// The same relation seen from the other side.
    pub fn swap(self) -> ExtensionState<'a, Y, X> {
        ExtensionState { x: self.y, y: self.x, relation: self.relation.swap(), dis0: self.dis0, tol: self.tol }
    }

    fn partner_of(&self, xq: &X::Point) -> Option<Y::Point> {
        self.relation.pairs().iter().find(|(x, _)| x == xq).map(|(_, y)| y.clone())
    }

    /// Checks `|x xq| = max_a (|x a| - |xq a|)` over the projection, both ways,
    /// for every `x` in the projection.
    fn check_spans(&self, xq: &X::Point) -> Result<(), ExtensionError> {
        let proj = self.relation.left();
        for x in &proj {
            let dist = self.x.distance(x, xq);
            for (p, q) in [(x, xq), (xq, x)] {
                let best = proj
                    .iter()
                    .map(|a| self.x.distance(p, a) - self.x.distance(q, a))
                    .fold(f64::NEG_INFINITY, f64::max);
                if (best - dist).abs() > self.tol {
                    return Err(ExtensionError::NotSpanning { dist, best });
                }
            }
        }
        Ok(())
    }

    /// `y0`: a point within `|x_i xq| + α` of every `y_i`.
    fn y0(&self, xq: &X::Point) -> Result<Y::Point, ExtensionError> {
        let alpha = self.alpha();
        let (centers, radii): (Vec<Y::Point>, Vec<f64>) = self
            .relation
            .pairs()
            .iter()
            .map(|(x, y)| (y.clone(), self.x.distance(x, xq) + alpha))
            .unzip();
        self.y.ball_intersection(&centers, &radii, self.tol)
    }

    fn push_checked(&mut self, x: X::Point, y: Y::Point) -> Result<(), ExtensionError> {
        let after = self.relation.distortion_with(self.x, self.y, &x, &y);
        if after > self.dis0 + self.tol {
            return Err(ExtensionError::DistortionIncrease { before: self.dis0, after });
        }
        self.relation.push(self.x, self.y, x, y);
        Ok(())
    }

    /// One step of the injective extension: finds `(x0, y0)` with
    /// `|xq x0| <= α` and adds it without raising the distortion.
    pub fn extend_step_injective(&mut self, xq: &X::Point) -> Result<(X::Point, Y::Point), ExtensionError> {
        if let Some(y) = self.partner_of(xq) {
            return Ok((xq.clone(), y));
        }
        self.check_spans(xq)?;
        let alpha = self.alpha();
        let y0 = self.y0(xq)?;
        let (mut centers, mut radii): (Vec<X::Point>, Vec<f64>) = self
            .relation
            .pairs()
            .iter()
            .map(|(x, y)| (x.clone(), self.y.distance(y, &y0) + 2.0 * alpha))
            .unzip();
        centers.push(xq.clone());
        radii.push(alpha);
        let x0 = self.x.ball_intersection(&centers, &radii, self.tol)?;
        let dist = self.x.distance(xq, &x0);
        if dist > alpha + self.tol {
            return Err(ExtensionError::FarFromQuery { dist, alpha });
        }
        self.push_checked(x0.clone(), y0.clone())?;
        Ok((x0, y0))
    }

    /// Runs [`Self::extend_step_injective`] on every point of a net of `X`.
    /// Returns the queries, in the order they were processed.
    pub fn extend_to_net(&mut self, h: f64) -> Result<Vec<X::Point>, ExtensionError> {
        let net = self.x.net(h)?;
        for q in &net {
            self.extend_step_injective(q)?;
        }
        Ok(net)
    }
}

impl<'a, Y: InjectiveSpace> ExtensionState<'a, SimplicialTree, Y>
where
    Y::Point: PartialEq,
{
    /// Adds `xq` itself to the left projection, partnered so that the
    /// distortion stays the same. Requires the projection to contain every
    /// leaf of the tree.
    pub fn extend_step_tree(&mut self, xq: &TreePoint) -> Result<Y::Point, ExtensionError> {
        if let Some(y) = self.partner_of(xq) {
            return Ok(y);
        }
        let proj = self.relation.left();
        if let Some(leaf) = self.x.leaves().into_iter().find(|&v| !proj.contains(&TreePoint::Node(v))) {
            return Err(ExtensionError::NotStrictlySpanning(leaf));
        }
        let alpha = self.alpha();
        let tol = self.tol;
        let y0 = self.y0(xq)?;
        // Pairs whose right point is too close to y0.
        let violation = |(x, y): &(TreePoint, Y::Point)| self.x.distance(x, xq) - alpha - self.y.distance(y, &y0);
        let mut worst: Option<(usize, f64)> = None;
        for (k, pair) in self.relation.pairs().iter().enumerate() {
            let v = violation(pair);
            if v > tol && worst.map_or(true, |(_, w)| v > w) {
                worst = Some((k, v));
            }
        }
        let ybar = match worst {
            None => y0,
            Some((k, _)) => {
                let x1 = &self.relation.pairs()[k].0;
                let d1 = self.x.distance(x1, xq);
                let (_, y2) = self
                    .relation
                    .pairs()
                    .iter()
                    .find(|(x2, _)| (d1 + self.x.distance(xq, x2) - self.x.distance(x1, x2)).abs() <= tol)
                    .ok_or(ExtensionError::NoWitness)?;
                let d02 = self.y.distance(&y0, y2);
                let t = alpha.min(d02);
                self.y.ball_intersection(&[y0.clone(), y2.clone()], &[t, d02 - t], tol)?
            }
        };
        self.push_checked(xq.clone(), ybar.clone())?;
        Ok(ybar)
    }
}

/// Extends a relation between two trees over nets of both: first every point
/// of `tree_net(X, h)` joins the left projection, then every point of
/// `tree_net(Y, h)` joins the right one. The distortion is unchanged.
pub fn extend_tree_relation(
    x: &SimplicialTree,
    y: &SimplicialTree,
    relation: Relation<TreePoint, TreePoint>,
    h: f64,
    tol: f64,
) -> Result<Relation<TreePoint, TreePoint>, ExtensionError> {
    let mut st = ExtensionState::new(x, y, relation, tol)?;
    for q in tree_net(x, h)? {
        st.extend_step_tree(&q)?;
    }
    let mut back = st.swap();
    for q in tree_net(y, h)? {
        back.extend_step_tree(&q)?;
    }
    Ok(back.into_relation().swap())
}

/// Result of [`complete_to_correspondence`].
#[derive(Clone, Debug)]
pub struct Completion<L, R> {
    pub correspondence: Correspondence<L, R>,
    /// Covering radii of the projections over the two nets, before completion.
    pub beta_left: f64,
    pub beta_right: f64,
}

/// Pairs every net point missing from a projection with the partner of the
/// nearest projected point, giving a correspondence over both nets whose
/// distortion is at most `dis(R) + 2 max(β_L, β_R)`.
pub fn complete_to_correspondence<X, Y>(
    x: &X,
    y: &Y,
    relation: &Relation<X::Point, Y::Point>,
    left_net: &[X::Point],
    right_net: &[Y::Point],
    tol: f64,
) -> Result<Completion<X::Point, Y::Point>, ExtensionError>
where
    X: MetricSpace,
    Y: MetricSpace,
    X::Point: PartialEq,
    Y::Point: PartialEq,
{
    if left_net.is_empty() || right_net.is_empty() {
        return Err(ExtensionError::EmptyNet);
    }
    let dis = relation.distortion().map_err(|_| ExtensionError::EmptyRelation)?;
    let (pl, pr) = (relation.left(), relation.right());
    let beta_left = covering_radius(x, left_net, &pl);
    let beta_right = covering_radius(y, right_net, &pr);
    let mut out = relation.clone();
    let nearest = |p: &X::Point| {
        relation
            .pairs()
            .iter()
            .map(|(a, b)| (x.distance(p, a), b))
            .min_by(|u, v| u.0.total_cmp(&v.0))
            .map(|(_, b)| b.clone())
            .expect("nonempty relation")
    };
    for u in left_net {
        if !pl.contains(u) {
            out.push(x, y, u.clone(), nearest(u));
        }
    }
    for w in right_net {
        if !pr.contains(w) {
            let partner = relation
                .pairs()
                .iter()
                .map(|(a, b)| (y.distance(w, b), a))
                .min_by(|u, v| u.0.total_cmp(&v.0))
                .map(|(_, a)| a.clone())
                .expect("nonempty relation");
            out.push(x, y, partner, w.clone());
        }
    }
    let bound = dis + 2.0 * beta_left.max(beta_right);
    let got = out.distortion().map_err(|_| ExtensionError::EmptyRelation)?;
    if got > bound + tol {
        return Err(ExtensionError::CompletionBound { dis: got, bound });
    }
    let correspondence = Correspondence::new(out, left_net, right_net)?;
    Ok(Completion { correspondence, beta_left, beta_right })
}

/// Which stability statement a certificate instantiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Theorem {
    /// `d_GH(E A, E B) <= 2 d_GH(A, B)`; the interface names it "3.1".
    #[serde(rename = "3.1")]
    Hulls,
    /// `d_GH(X, Y) <= d_GH(A, B)` for trees spanned by `A` and `B`; named "3.2".
    #[serde(rename = "3.2")]
    Trees,
}

/// Outcome of [`stability_certificate`]. Serializes with keys in this order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub dis0: f64,
    pub dis_final: f64,
    pub alpha: f64,
    pub mesh: f64,
    pub bound_chain: Vec<String>,
    pub theorem: Theorem,
    pub pass: bool,
}

impl StabilityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Certifies the stability bound for the hulls (or trees) of `A` and `B` at mesh `h`.
///
/// An optimal correspondence between `A` and `B` is embedded and extended. If
/// both metrics are tree metrics the tree extension is used and the final
/// distortion must equal the initial one; otherwise both hulls are extended
/// over nets, completed to a correspondence between the nets, and the final
/// distortion must be at most `2 dis0 + 2h`.
pub fn stability_certificate(
    a: &FiniteMetricSpace,
    b: &FiniteMetricSpace,
    h: f64,
    tol: f64,
) -> Result<StabilityReport, ExtensionError> {
    let sol = min_distortion_correspondence(a, b, DEFAULT_BUDGET)?;
    let dis0 = sol.dis;
    let alpha = dis0 / 2.0;
    let mut chain = vec![if sol.optimal {
        format!("d_GH(A,B) = dis0/2 = {}", fmt_g17(alpha))
    } else {
        format!("d_GH(A,B) <= dis0/2 = {} (search budget exhausted)", fmt_g17(alpha))
    }];
    let pairs = sol.correspondence.pairs().to_vec();

    if a.is_four_point(tol) && b.is_four_point(tol) {
        let x = tree_from_metric(a, tol)?;
        let y = tree_from_metric(b, tol)?;
        let node = |t: &SimplicialTree, m: &FiniteMetricSpace, i: usize| {
            TreePoint::Node(t.node_by_label(m.label(i)).expect("every point labels a node"))
        };
        let rel = Relation::from_pairs(&x, &y, pairs.iter().map(|&(i, j)| (node(&x, a, i), node(&y, b, j))));
        let out = extend_tree_relation(&x, &y, rel, h, tol)?;
        let dis_final = out.recompute_distortion(&x, &y)?;
        let pass = (dis_final - dis0).abs() <= tol;
        chain.push(format!("dis(R_final) = {} over h-nets of both trees", fmt_g17(dis_final)));
        chain.push(format!("d_GH(X,Y) <= dis_final/2 + 2h = {}", fmt_g17(dis_final / 2.0 + 2.0 * h)));
        chain.push(format!("d_GH(X,Y) >= |diam X - diam Y|/2 = {}", fmt_g17((x.diameter() - y.diameter()).abs() / 2.0)));
        return Ok(StabilityReport { dis0, dis_final, alpha, mesh: h, bound_chain: chain, theorem: Theorem::Trees, pass });
    }

    let ea = tight_span_complex(a)?;
    let eb = tight_span_complex(b)?;
    let embed = |m: &FiniteMetricSpace, i: usize| hull::canonical_embed(m, i);
    let rel = Relation::from_pairs(
        &ea,
        &eb,
        pairs
            .iter()
            .map(|&(i, j)| Ok((embed(a, i)?, embed(b, j)?)))
            .collect::<Result<Vec<_>, HullError>>()?,
    );
    let mut st = ExtensionState::new(&ea, &eb, rel, tol)?;
    let net_a = st.extend_to_net(h)?;
    let mut back = st.swap();
    let net_b = back.extend_to_net(h)?;
    let extended = back.into_relation().swap();
    let done = complete_to_correspondence(&ea, &eb, &extended, &net_a, &net_b, tol)?;
    let dis_final = done.correspondence.relation().recompute_distortion(&ea, &eb)?;
    let bound = 2.0 * dis0 + 2.0 * h;
    let pass = dis_final <= bound + tol;
    chain.push(format!(
        "dis(R_final) = {} <= 2*dis0 + 2h = {}",
        fmt_g17(dis_final),
        fmt_g17(bound)
    ));
    chain.push(format!("d_GH(EA,EB) <= dis_final/2 + 2h = {}", fmt_g17(dis_final / 2.0 + 2.0 * h)));
    Ok(StabilityReport { dis0, dis_final, alpha, mesh: h, bound_chain: chain, theorem: Theorem::Hulls, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{make_fixture, Fixture};
    use crate::metric::DEFAULT_TOL;

    fn fx(f: Fixture) -> FiniteMetricSpace {
        make_fixture(f).unwrap()
    }

    fn diagonal(a: &FiniteMetricSpace, b: &FiniteMetricSpace, ea: &TightSpanComplex, eb: &TightSpanComplex) -> Relation<ExtremalFunction, ExtremalFunction> {
        Relation::from_pairs(ea, eb, (0..a.len()).map(|i| (hull::canonical_embed(a, i).unwrap(), hull::canonical_embed(b, i).unwrap())))
    }

    #[test]
    fn injective_step_on_intro() {
        let (a, b) = (fx(Fixture::IntroA), fx(Fixture::IntroB));
        let (ea, eb) = (tight_span_complex(&a).unwrap(), tight_span_complex(&b).unwrap());
        let mut st = ExtensionState::new(&ea, &eb, diagonal(&a, &b, &ea, &eb), DEFAULT_TOL).unwrap();
        let xq = ExtremalFunction::new(&a, vec![2., 2., 4., 4.], DEFAULT_TOL).unwrap();
        let (x0, _) = st.extend_step_injective(&xq).unwrap();
        assert!(x0.distance(&xq) <= 1.0 + 1e-9);
        assert!((st.relation().recompute_distortion(&ea, &eb).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn injective_step_exact_when_alpha_zero() {
        let s = fx(Fixture::Seg2);
        let e = tight_span_complex(&s).unwrap();
        let mut st = ExtensionState::new(&e, &e, diagonal(&s, &s, &e, &e), DEFAULT_TOL).unwrap();
        let mid = ExtremalFunction::new(&s, vec![1., 1.], DEFAULT_TOL).unwrap();
        let (x0, y0) = st.extend_step_injective(&mid).unwrap();
        assert!(x0.distance(&mid) < 1e-9 && y0.distance(&mid) < 1e-9);
        let existing = hull::canonical_embed(&s, 0).unwrap();
        assert_eq!(st.extend_step_injective(&existing).unwrap().0, existing);
    }

    #[test]
    fn tree_step_on_intro() {
        let (x, y) = (tree_from_metric(&fx(Fixture::IntroA), 1e-9).unwrap(), tree_from_metric(&fx(Fixture::IntroB), 1e-9).unwrap());
        let node = |t: &SimplicialTree, l: &str| TreePoint::Node(t.node_by_label(l).unwrap());
        let rel = Relation::from_pairs(&x, &y, (1..=4).map(|i| (node(&x, &format!("a{i}")), node(&y, &format!("b{i}")))));
        let mut st = ExtensionState::new(&x, &y, rel, DEFAULT_TOL).unwrap();
        // The internal node next to a1 and a2.
        let v1 = (0..x.node_count()).find(|&v| x.degree(v) == 3 && x.node_distance(v, x.node_by_label("a1").unwrap()) == 2.0).unwrap();
        let ybar = st.extend_step_tree(&TreePoint::Node(v1)).unwrap();
        assert_eq!(y.point_distance(&ybar, &node(&y, "b1")), 3.0);
        assert_eq!(y.point_distance(&ybar, &node(&y, "b3")), 5.0);
        assert_eq!(st.relation().distortion().unwrap(), 2.0);
    }

    #[test]
    fn certificates() {
        let r = stability_certificate(&fx(Fixture::IntroA), &fx(Fixture::IntroB), 0.25, DEFAULT_TOL).unwrap();
        assert_eq!(r.theorem, Theorem::Trees);
        assert!(r.pass);
        assert_eq!((r.dis0, r.dis_final), (2.0, 2.0));
        let r = stability_certificate(&fx(Fixture::Ex33A(8.0)), &fx(Fixture::Ex33B(8.0)), 0.5, DEFAULT_TOL).unwrap();
        assert_eq!(r.theorem, Theorem::Hulls);
        assert_eq!(r.dis0, 2.0);
        assert!(r.dis_final <= 5.0 + 1e-9 && r.pass, "{r:?}");
        let js = r.to_json();
        assert!(js.starts_with("{\"dis0\":2.0,\"dis_final\""), "{js}");
        assert!(js.contains("\"theorem\":\"3.1\""));
    }

    #[test]
    fn completion_of_single_pair() {
        let s = fx(Fixture::IntroA);
        let rel = Relation::from_pairs(&s, &s, [(0usize, 0usize)]);
        let pts = s.points();
        let c = complete_to_correspondence(&s, &s, &rel, &pts, &pts, DEFAULT_TOL).unwrap();
        assert!(c.correspondence.distortion() <= 2.0 * 6.0);
        assert_eq!(c.beta_left, 6.0);
    }
}
