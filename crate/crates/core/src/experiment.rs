//! Randomized checks of the stability certificates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::extension::{stability_certificate, ExtensionError, Theorem};
use crate::io::fmt_g17;
use crate::random::{perturb_tree, random_metric, random_tree};
use crate::tree::TreeError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    /// Leaf metrics of a random tree and of a perturbed copy.
    Tree,
    /// Two independent random metrics.
    General,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub tol: f64,
    pub mesh: f64,
    pub instances: usize,
    pub kind: InstanceKind,
    /// Inclusive range of point (or leaf) counts.
    pub min_points: usize,
    pub max_points: usize,
    /// Edge-length noise for tree instances.
    pub noise: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            tol: 1e-9,
            mesh: 0.25,
            instances: 50,
            kind: InstanceKind::Tree,
            min_points: 3,
            max_points: 5,
            noise: 0.5,
        }
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("instance {index}: {source}")]
    Instance { index: usize, source: ExtensionError },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.to_string()));
        if !(self.mesh > 0.0) {
            return bad("mesh must be positive");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if self.instances < 1 {
            return bad("instance count must be at least 1");
        }
        if self.min_points < 2 || self.min_points > self.max_points {
            return bad("need 2 <= min_points <= max_points");
        }
        if self.kind == InstanceKind::General && self.max_points > 6 {
            return bad("general instances support at most 6 points");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceRow {
    pub index: usize,
    pub kind: InstanceKind,
    pub points_a: usize,
    pub points_b: usize,
    pub theorem: Theorem,
    pub dis0: f64,
    pub dis_final: f64,
    pub mesh: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub instances: usize,
    pub violations: usize,
    /// Largest `dis_final / dis0` over instances with `dis0 > 0`.
    pub max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentOutcome {
    pub rows: Vec<InstanceRow>,
    pub summary: ExperimentSummary,
}

impl ExperimentOutcome {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,kind,points_a,points_b,theorem,dis0,dis_final,mesh,pass\n");
        for r in &self.rows {
            let theorem = match r.theorem {
                Theorem::Hulls => "3.1",
                Theorem::Trees => "3.2",
            };
            let kind = match r.kind {
                InstanceKind::Tree => "tree",
                InstanceKind::General => "general",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.index,
                kind,
                r.points_a,
                r.points_b,
                theorem,
                fmt_g17(r.dis0),
                fmt_g17(r.dis_final),
                fmt_g17(r.mesh),
                r.pass
            ));
        }
        let s = &self.summary;
        out.push_str(&format!(
            "# instances={} violations={} max_ratio={}\n",
            s.instances,
            s.violations,
            fmt_g17(s.max_ratio)
        ));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("outcome serializes")
    }
}

/// Runs `cfg.instances` certificates. Instance `i` draws from its own
/// generator seeded with `seed + i`, so output does not depend on anything
/// but the configuration.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentOutcome, ExperimentError> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.instances);
    for index in 0..cfg.instances {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(index as u64));
        let (a, b) = match cfg.kind {
            InstanceKind::Tree => {
                let leaves = rng.gen_range(cfg.min_points..=cfg.max_points);
                let t = random_tree(&mut rng, leaves);
                let u = perturb_tree(&mut rng, &t, cfg.noise);
                (t.leaf_metric()?, u.leaf_metric()?)
            }
            InstanceKind::General => {
                let na = rng.gen_range(cfg.min_points..=cfg.max_points);
                let nb = rng.gen_range(cfg.min_points..=cfg.max_points);
                (random_metric(&mut rng, na), random_metric(&mut rng, nb))
            }
        };
        let report =
            stability_certificate(&a, &b, cfg.mesh, cfg.tol).map_err(|source| ExperimentError::Instance { index, source })?;
        rows.push(InstanceRow {
            index,
            kind: cfg.kind,
            points_a: a.len(),
            points_b: b.len(),
            theorem: report.theorem,
            dis0: report.dis0,
            dis_final: report.dis_final,
            mesh: cfg.mesh,
            pass: report.pass,
        });
    }
    let violations = rows.iter().filter(|r| !r.pass).count();
    let max_ratio = rows
        .iter()
        .filter(|r| r.dis0 > 0.0)
        .map(|r| r.dis_final / r.dis0)
        .fold(0.0, f64::max);
    let summary = ExperimentSummary { instances: rows.len(), violations, max_ratio };
    Ok(ExperimentOutcome { rows, summary })
}
