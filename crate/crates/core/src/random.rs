//! Seeded generators for random metrics and trees.

use rand::Rng;

use crate::metric::{FiniteMetricSpace, DEFAULT_TOL};
use crate::tree::{SimplicialTree, TreeEdge};

/// Side of the cube the sample points are drawn from.
pub const CUBE_SIDE: f64 = 5.0;
/// Range of tree edge lengths; lengths are log-uniform in it.
pub const EDGE_LENGTHS: (f64, f64) = (0.1, 10.0);

/// `n` points of a cube of random dimension (1 to 4) under the l∞ metric,
/// with every off-diagonal distance then raised by an amount in `[c/2, c]`.
/// Raises in that band cannot break a triangle inequality and make the
/// metric generic.
pub fn random_metric<R: Rng>(rng: &mut R, n: usize) -> FiniteMetricSpace {
    let dim = rng.gen_range(1..=4);
    let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen_range(0.0..CUBE_SIDE)).collect()).collect();
    let c = rng.gen_range(0.05..1.0);
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let linf = pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let v = linf + rng.gen_range(c / 2.0..=c);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    FiniteMetricSpace::with_default_labels(m, DEFAULT_TOL).expect("construction preserves the metric axioms")
}

fn log_uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// A random tree with `leaves` labeled leaves (`t0`, `t1`, ...) and no
/// unlabeled node of degree two. New leaves hang off a random edge (split at
/// a new node) or, sometimes, off an existing internal node.
pub fn random_tree<R: Rng>(rng: &mut R, leaves: usize) -> SimplicialTree {
    assert!(leaves >= 2, "a random tree needs at least two leaves");
    let mut labels: Vec<Option<String>> = vec![Some("t0".into()), Some("t1".into())];
    let mut edges: Vec<(usize, usize)> = vec![(0, 1)];
    for k in 2..leaves {
        let internal: Vec<usize> = (0..labels.len()).filter(|&v| labels[v].is_none()).collect();
        let leaf = labels.len();
        labels.push(Some(format!("t{k}")));
        if !internal.is_empty() && rng.gen_bool(0.2) {
            let v = internal[rng.gen_range(0..internal.len())];
            edges.push((v, leaf));
        } else {
            let e = rng.gen_range(0..edges.len());
            let (a, b) = edges[e];
            let mid = labels.len();
            labels.push(None);
            edges[e] = (a, mid);
            edges.push((mid, b));
            edges.push((mid, leaf));
        }
    }
    let edges = edges.into_iter().map(|(a, b)| TreeEdge { a, b, length: log_uniform(rng, EDGE_LENGTHS) }).collect();
    SimplicialTree::new(labels, edges).expect("construction yields a tree")
}

/// The same tree with every edge length moved by up to `eta` (kept at least
/// a tenth of the smallest allowed length). Leaf metrics of the result still
/// satisfy the four-point condition.
pub fn perturb_tree<R: Rng>(rng: &mut R, tree: &SimplicialTree, eta: f64) -> SimplicialTree {
    let floor = EDGE_LENGTHS.0 / 10.0;
    let edges = tree
        .edges()
        .iter()
        .map(|e| TreeEdge { a: e.a, b: e.b, length: (e.length + rng.gen_range(-eta..=eta)).max(floor) })
        .collect();
    SimplicialTree::new(tree.labels().to_vec(), edges).expect("same topology")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn metrics_are_valid_and_seeded() {
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        for n in 1..7 {
            assert_eq!(random_metric(&mut r1, n), random_metric(&mut r2, n));
        }
    }

    #[test]
    fn trees_have_labeled_leaves() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for leaves in 2..8 {
            let t = random_tree(&mut rng, leaves);
            assert_eq!(t.leaves().len(), leaves);
            assert!(t.leaves().iter().all(|&v| t.label(v).is_some()));
            assert!((0..t.node_count()).all(|v| t.label(v).is_some() || t.degree(v) >= 3));
            assert!(t.edges().iter().all(|e| (0.1..=10.0).contains(&e.length)));
            let p = perturb_tree(&mut rng, &t, 0.5);
            assert!(p.leaf_metric().unwrap().is_four_point(1e-9));
        }
    }
}
