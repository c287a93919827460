//! Small named metric spaces used by the tests, the reproduction table and the CLI.

use std::fmt;

use crate::metric::{FiniteMetricSpace, MetricError, DEFAULT_TOL};

/// Named fixture, with its parameter where it has one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Fixture {
    /// Two points at distance 2.
    Seg2,
    /// Leaves of the tree with five edges of length 2.
    IntroA,
    /// Leaves of the tree with a central edge 6 and legs 1.
    IntroB,
    /// All six vertices of the `IntroA` tree.
    IntroVx,
    /// All six vertices of the `IntroB` tree.
    IntroVy,
    /// Four points whose hull is an `N x 4` rectangle with the l1 metric.
    Ex33A(f64),
    /// Four leaves of a tree with central edge `N` and legs 1.
    Ex33B(f64),
    /// The `2n+1` point zigzag in the strip `R x [0,4]`.
    Zn(usize),
}

impl Fixture {
    pub const NAMES: [&'static str; 8] =
        ["SEG2", "INTRO_A", "INTRO_B", "INTRO_VX", "INTRO_VY", "EX33_A", "EX33_B", "Z_n"];

    /// Resolves a fixture identifier; `param` is `N` for the `EX33_*` pair and `n` for `Z_n`.
    pub fn parse(name: &str, param: Option<f64>) -> Result<Self, MetricError> {
        let need = |p: Option<f64>| {
            p.ok_or_else(|| MetricError::Subset(format!("fixture {name} needs a parameter")))
        };
        Ok(match name {
            "SEG2" => Fixture::Seg2,
            "INTRO_A" => Fixture::IntroA,
            "INTRO_B" => Fixture::IntroB,
            "INTRO_VX" => Fixture::IntroVx,
            "INTRO_VY" => Fixture::IntroVy,
            "EX33_A" => Fixture::Ex33A(need(param)?),
            "EX33_B" => Fixture::Ex33B(need(param)?),
            "Z_n" | "Z_N" | "ZN" => {
                let n = need(param)?;
                if n.fract() != 0.0 || n < 1.0 {
                    return Err(MetricError::Subset(format!("Z_n needs an integer n >= 1, got {n}")));
                }
                Fixture::Zn(n as usize)
            }
            other => return Err(MetricError::UnknownLabel(other.to_string())),
        })
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fixture::Seg2 => write!(f, "SEG2"),
            Fixture::IntroA => write!(f, "INTRO_A"),
            Fixture::IntroB => write!(f, "INTRO_B"),
            Fixture::IntroVx => write!(f, "INTRO_VX"),
            Fixture::IntroVy => write!(f, "INTRO_VY"),
            Fixture::Ex33A(n) => write!(f, "EX33_A({n})"),
            Fixture::Ex33B(n) => write!(f, "EX33_B({n})"),
            Fixture::Zn(n) => write!(f, "Z_{n}"),
        }
    }
}

fn labeled(names: &[&str], m: Vec<Vec<f64>>) -> Result<FiniteMetricSpace, MetricError> {
    FiniteMetricSpace::new(names.iter().map(|s| s.to_string()).collect(), m, DEFAULT_TOL)
}

fn param_error(msg: String) -> MetricError {
    MetricError::Subset(msg)
}

pub fn make_fixture(fixture: Fixture) -> Result<FiniteMetricSpace, MetricError> {
    match fixture {
        Fixture::Seg2 => labeled(&["p", "q"], vec![vec![0., 2.], vec![2., 0.]]),
        Fixture::IntroA => labeled(
            &["a1", "a2", "a3", "a4"],
            vec![
                vec![0., 4., 6., 6.],
                vec![4., 0., 6., 6.],
                vec![6., 6., 0., 4.],
                vec![6., 6., 4., 0.],
            ],
        ),
        Fixture::IntroB => labeled(
            &["b1", "b2", "b3", "b4"],
            vec![
                vec![0., 2., 8., 8.],
                vec![2., 0., 8., 8.],
                vec![8., 8., 0., 2.],
                vec![8., 8., 2., 0.],
            ],
        ),
        Fixture::IntroVx => labeled(
            &["a1", "a2", "a3", "a4", "v1", "v2"],
            vec![
                vec![0., 4., 6., 6., 2., 4.],
                vec![4., 0., 6., 6., 2., 4.],
                vec![6., 6., 0., 4., 4., 2.],
                vec![6., 6., 4., 0., 4., 2.],
                vec![2., 2., 4., 4., 0., 2.],
                vec![4., 4., 2., 2., 2., 0.],
            ],
        ),
        Fixture::IntroVy => labeled(
            &["b1", "b2", "b3", "b4", "w1", "w2"],
            vec![
                vec![0., 2., 8., 8., 1., 7.],
                vec![2., 0., 8., 8., 1., 7.],
                vec![8., 8., 0., 2., 7., 1.],
                vec![8., 8., 2., 0., 7., 1.],
                vec![1., 1., 7., 7., 0., 6.],
                vec![7., 7., 1., 1., 6., 0.],
            ],
        ),
        Fixture::Ex33A(n) => {
            if !(n > 4.0 && n.is_finite()) {
                return Err(param_error(format!("EX33_A needs N > 4, got {n}")));
            }
            labeled(
                &["a1", "a2", "a3", "a4"],
                vec![
                    vec![0., 4., n, n + 4.],
                    vec![4., 0., n + 4., n],
                    vec![n, n + 4., 0., 4.],
                    vec![n + 4., n, 4., 0.],
                ],
            )
        }
        Fixture::Ex33B(n) => {
            if !(n > 4.0 && n.is_finite()) {
                return Err(param_error(format!("EX33_B needs N > 4, got {n}")));
            }
            let f = n + 2.;
            labeled(
                &["b1", "b2", "b3", "b4"],
                vec![
                    vec![0., 2., f, f],
                    vec![2., 0., f, f],
                    vec![f, f, 0., 2.],
                    vec![f, f, 2., 0.],
                ],
            )
        }
        Fixture::Zn(n) => crate::gh::z_n_set(n).map_err(|e| param_error(e.to_string())),
    }
}
