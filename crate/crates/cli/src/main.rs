//! `tightspan` command-line front end.
//!
//! Exit codes: 0 success, 1 input validation failure, 2 a checked bound or
//! reproduction row failed, 3 parse or internal error.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use tightspan::complex::{sample_net, tight_span_complex, vertex_distance_multiset, ComplexError, TightSpanComplex};
use tightspan::experiment::{run_experiment, ExperimentError, InstanceKind, RunConfig};
use tightspan::extension::{extend_tree_relation, stability_certificate, ExtensionError, ExtensionState};
use tightspan::fixtures::{make_fixture, Fixture};
use tightspan::gh::{gh_lower_bound_diam, min_distortion_correspondence, GhError, Relation, DEFAULT_BUDGET};
use tightspan::hull::{canonical_embed, HullError};
use tightspan::io::{
    complex_to_dot, fmt_g17, parse_distance_matrix_tol, parse_newick, serialize_complex_json,
    serialize_distance_matrix, tree_to_dot, write_newick, FormatTag, IoError,
};
use tightspan::metric::{validate_metric, FiniteMetricSpace, MetricError, DEFAULT_TOL};
use tightspan::reproduce::run_reproduce_paper;
use tightspan::tree::{tree_from_metric, SimplicialTree, TreeError, TreePoint};

#[derive(Parser)]
#[command(name = "tightspan", version, about = "Tight spans, metric trees and Gromov-Hausdorff distances of finite metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Inputs are file paths or `fixture:NAME[:PARAM]`, e.g. `fixture:EX33_A:40`.
#[derive(Subcommand)]
enum Command {
    /// Check the metric axioms of a distance matrix.
    Validate {
        input: String,
        #[command(flatten)]
        common: Common,
    },
    /// Tight span complex: vertices, edges, 2-cells, optional net.
    Span {
        input: String,
        /// Also sample a net of this mesh.
        #[arg(long)]
        mesh: Option<f64>,
        #[arg(long, value_enum, default_value = "summary")]
        emit: SpanEmit,
        #[command(flatten)]
        common: Common,
    },
    /// Tree reconstruction from a tree metric, or leaf metric of a Newick tree.
    Tree {
        input: String,
        #[arg(long, value_enum)]
        emit: Option<TreeEmit>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact Gromov-Hausdorff distance by branch and bound.
    Gh {
        a: String,
        b: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Extend an optimal correspondence over nets of the hulls (or trees).
    Extend {
        a: String,
        b: String,
        #[arg(long, default_value_t = 0.25)]
        mesh: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Stability certificate for the hulls (or trees) of two metrics.
    Certify {
        a: String,
        b: String,
        #[arg(long, default_value_t = 0.25)]
        mesh: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Recompute the published numeric examples.
    Paper {
        #[command(flatten)]
        common: Common,
    },
    /// Randomized certificate runs.
    Experiment {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        instances: usize,
        #[arg(long, value_enum, default_value = "tree")]
        kind: Kind,
        #[arg(long, default_value_t = 0.25)]
        mesh: f64,
        #[arg(long, default_value_t = 3)]
        min_points: usize,
        #[arg(long, default_value_t = 5)]
        max_points: usize,
        /// Edge-length noise for tree instances.
        #[arg(long, default_value_t = 0.5)]
        noise: f64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Input format (csv, phylip, json, newick); guessed from the extension otherwise.
    #[arg(long)]
    format: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Machine-readable json output.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpanEmit {
    Summary,
    Dot,
    ComplexJson,
}

#[derive(Clone, Copy, ValueEnum)]
enum TreeEmit {
    Newick,
    Dot,
    Csv,
    Phylip,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Tree,
    General,
}

enum Failure {
    /// Exit 1.
    Invalid(String),
    /// Exit 2, with whatever output was produced.
    Violation(String),
    /// Exit 3.
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Violation(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Invalid(_) | IoError::NotSquare { .. } | IoError::Metric(_) => Failure::Invalid(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

impl From<MetricError> for Failure {
    fn from(e: MetricError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<TreeError> for Failure {
    fn from(e: TreeError) -> Self {
        match e {
            TreeError::FourPoint(..) | TreeError::Coincident(..) | TreeError::Empty => Failure::Invalid(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

impl From<ComplexError> for Failure {
    fn from(e: ComplexError) -> Self {
        match e {
            ComplexError::TooLarge { .. } | ComplexError::BadMesh(_) => Failure::Invalid(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

macro_rules! internal {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Internal(e.to_string())
            }
        }
    )*};
}

internal!(GhError, HullError, ExtensionError, std::io::Error);

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Config(_) => Failure::Invalid(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

enum Input {
    Metric(FiniteMetricSpace),
    Tree(SimplicialTree),
}

fn format_of(source: &str, common: &Common) -> Result<FormatTag, Failure> {
    match &common.format {
        Some(f) => Ok(f.parse()?),
        None => Ok(FormatTag::from_extension(source).unwrap_or(FormatTag::Csv)),
    }
}

fn read_input(source: &str, common: &Common) -> Result<Input, Failure> {
    if let Some(spec) = source.strip_prefix("fixture:") {
        let (name, param) = match spec.split_once(':') {
            Some((n, p)) => {
                let v: f64 = p.parse().map_err(|_| Failure::Invalid(format!("bad fixture parameter `{p}`")))?;
                (n, Some(v))
            }
            None => (spec, None),
        };
        let fixture = Fixture::parse(name, param).map_err(|e| match e {
            MetricError::UnknownLabel(n) => {
                Failure::Invalid(format!("unknown fixture `{n}` (known: {})", Fixture::NAMES.join(", ")))
            }
            other => other.into(),
        })?;
        return Ok(Input::Metric(make_fixture(fixture)?));
    }
    let text = fs::read_to_string(source).map_err(|e| Failure::Internal(format!("{source}: {e}")))?;
    match format_of(source, common)? {
        FormatTag::Newick => Ok(Input::Tree(parse_newick(&text)?)),
        f => Ok(Input::Metric(parse_distance_matrix_tol(&text, f, common.tol)?)),
    }
}

fn read_metric(source: &str, common: &Common) -> Result<FiniteMetricSpace, Failure> {
    match read_input(source, common)? {
        Input::Metric(m) => Ok(m),
        Input::Tree(t) => Ok(t.leaf_metric()?),
    }
}

fn emit(common: &Common, text: &str) -> Result<(), Failure> {
    match &common.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn num_list(v: &[f64]) -> String {
    v.iter().map(|x| fmt_g17(*x)).collect::<Vec<_>>().join(", ")
}

fn validate(input: &str, common: &Common) -> Result<(), Failure> {
    let m = match read_metric(input, common) {
        Ok(m) => m,
        Err(Failure::Invalid(msg)) => {
            let out = if common.json {
                format!("{}\n", json!({"valid": false, "error": msg}))
            } else {
                format!("invalid: {msg}\n")
            };
            emit(common, &out)?;
            return Err(Failure::Invalid(msg));
        }
        Err(e) => return Err(e),
    };
    let report = validate_metric(&m.matrix(), common.tol);
    let diameter = m.diameter()?;
    let four_point = m.is_four_point(common.tol);
    let out = if common.json {
        format!(
            "{}\n",
            json!({"valid": report.passed(), "points": m.len(), "diameter": diameter, "four_point": four_point})
        )
    } else {
        format!("{report}\ndiameter: {}\nfour-point: {}\n", fmt_g17(diameter), if four_point { "yes" } else { "no" })
    };
    emit(common, &out)
}

fn span(input: &str, mesh: Option<f64>, what: SpanEmit, common: &Common) -> Result<(), Failure> {
    let m = read_metric(input, common)?;
    let c = tight_span_complex(&m)?;
    let net = mesh.map(|h| sample_net(&c, h)).transpose()?;
    let out = match what {
        SpanEmit::Dot => complex_to_dot(&c),
        SpanEmit::ComplexJson => serialize_complex_json(&c),
        SpanEmit::Summary if common.json => {
            let mut v = json!({
                "vertices": c.vertices().iter().map(|f| f.values().to_vec()).collect::<Vec<_>>(),
                "edges": c.edges().iter().map(|e| json!([e.a, e.b, e.length])).collect::<Vec<_>>(),
                "cells": c.cells2().iter().map(|k| k.vertices.clone()).collect::<Vec<_>>(),
                "higher_dim_present": c.higher_dim_present(),
                "vertex_distances": vertex_distance_multiset(&c),
            });
            if let Some(n) = &net {
                v["net"] = json!({"points": n.points.len(), "mesh": n.mesh});
            }
            format!("{v}\n")
        }
        SpanEmit::Summary => summary(&m, &c, net.as_ref().map(|n| (n.points.len(), n.mesh))),
    };
    emit(common, &out)
}

fn summary(m: &FiniteMetricSpace, c: &TightSpanComplex, net: Option<(usize, f64)>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "points: {} ({})", m.len(), m.labels().join(" "));
    let _ = writeln!(s, "vertices: {}", c.vertices().len());
    for (i, f) in c.vertices().iter().enumerate() {
        let _ = writeln!(s, "  v{i} = ({})", num_list(f.values()));
    }
    let _ = writeln!(s, "edges: {}", c.edges().len());
    for e in c.edges() {
        let _ = writeln!(s, "  v{} -- v{}  length {}", e.a, e.b, fmt_g17(e.length));
    }
    let _ = writeln!(s, "2-cells: {}", c.cells2().len());
    for k in c.cells2() {
        let ids: Vec<String> = k.vertices.iter().map(|v| format!("v{v}")).collect();
        let _ = writeln!(s, "  {}", ids.join(" "));
    }
    if c.higher_dim_present() {
        let _ = writeln!(s, "cells of dimension >= 3 present");
    }
    if let Some((n, h)) = net {
        let _ = writeln!(s, "net: {n} points, mesh {}", fmt_g17(h));
    }
    s
}

fn tree(input: &str, what: Option<TreeEmit>, common: &Common) -> Result<(), Failure> {
    let (t, from_newick) = match read_input(input, common)? {
        Input::Tree(t) => (t, true),
        Input::Metric(m) => (tree_from_metric(&m, common.tol)?, false),
    };
    let default = if from_newick { TreeEmit::Csv } else { TreeEmit::Newick };
    let out = match (what.unwrap_or(default), common.json) {
        (TreeEmit::Newick, true) => format!(
            "{}\n",
            json!({
                "newick": write_newick(&t).trim_end(),
                "nodes": t.node_count(),
                "edges": t.edges().iter().map(|e| json!([e.a, e.b, e.length])).collect::<Vec<_>>(),
                "labels": t.labels(),
            })
        ),
        (TreeEmit::Newick, false) => {
            let mut s = write_newick(&t);
            if !s.ends_with('\n') {
                s.push('\n');
            }
            s
        }
        (TreeEmit::Dot, _) => tree_to_dot(&t),
        (TreeEmit::Csv, _) => serialize_distance_matrix(&t.leaf_metric()?, FormatTag::Csv)?,
        (TreeEmit::Phylip, _) => serialize_distance_matrix(&t.leaf_metric()?, FormatTag::Phylip)?,
        (TreeEmit::Json, _) => serialize_distance_matrix(&t.leaf_metric()?, FormatTag::Json)?,
    };
    emit(common, &out)
}

fn gh(a: &str, b: &str, budget: u64, common: &Common) -> Result<(), Failure> {
    let (ma, mb) = (read_metric(a, common)?, read_metric(b, common)?);
    let sol = min_distortion_correspondence(&ma, &mb, budget)?;
    let lower = gh_lower_bound_diam(&ma, &mb)?;
    let pairs: Vec<(String, String)> =
        sol.correspondence.pairs().iter().map(|&(i, j)| (ma.label(i).to_string(), mb.label(j).to_string())).collect();
    let out = if common.json {
        format!(
            "{}\n",
            json!({"dis": sol.dis, "gh": sol.gh(), "optimal": sol.optimal, "nodes": sol.nodes,
                   "lower_bound_diam": lower, "pairs": pairs})
        )
    } else {
        let mut s = String::new();
        let rel = if sol.optimal { "=" } else { "<=" };
        let _ = writeln!(s, "dis = {}", fmt_g17(sol.dis));
        let _ = writeln!(s, "d_GH {rel} {}", fmt_g17(sol.gh()));
        let _ = writeln!(s, "|diam A - diam B|/2 = {}", fmt_g17(lower));
        let _ = writeln!(s, "search nodes: {}{}", sol.nodes, if sol.optimal { "" } else { " (budget exhausted)" });
        let _ = writeln!(s, "correspondence: {}", pairs.iter().map(|(l, r)| format!("{l}-{r}")).collect::<Vec<_>>().join(" "));
        s
    };
    emit(common, &out)
}

fn extend(a: &str, b: &str, h: f64, common: &Common) -> Result<(), Failure> {
    if !(h > 0.0) {
        return Err(Failure::Invalid(format!("mesh must be positive, got {h}")));
    }
    let tol = common.tol;
    let (ma, mb) = (read_metric(a, common)?, read_metric(b, common)?);
    let sol = min_distortion_correspondence(&ma, &mb, DEFAULT_BUDGET)?;
    let pairs = sol.correspondence.pairs().to_vec();
    let (model, dis_after, size) = if ma.is_four_point(tol) && mb.is_four_point(tol) {
        let x = tree_from_metric(&ma, tol)?;
        let y = tree_from_metric(&mb, tol)?;
        let node = |t: &SimplicialTree, m: &FiniteMetricSpace, i: usize| {
            TreePoint::Node(t.node_by_label(m.label(i)).expect("every point labels a node"))
        };
        let rel = Relation::from_pairs(&x, &y, pairs.iter().map(|&(i, j)| (node(&x, &ma, i), node(&y, &mb, j))));
        let out = extend_tree_relation(&x, &y, rel, h, tol)?;
        ("trees", out.recompute_distortion(&x, &y)?, out.len())
    } else {
        let ea = tight_span_complex(&ma)?;
        let eb = tight_span_complex(&mb)?;
        let rel = Relation::from_pairs(
            &ea,
            &eb,
            pairs
                .iter()
                .map(|&(i, j)| Ok((canonical_embed(&ma, i)?, canonical_embed(&mb, j)?)))
                .collect::<Result<Vec<_>, HullError>>()?,
        );
        let mut st = ExtensionState::new(&ea, &eb, rel, tol)?;
        st.extend_to_net(h)?;
        let mut back = st.swap();
        back.extend_to_net(h)?;
        let out = back.into_relation().swap();
        ("hulls", out.recompute_distortion(&ea, &eb)?, out.len())
    };
    let preserved = (dis_after - sol.dis).abs() <= tol;
    let out = if common.json {
        format!(
            "{}\n",
            json!({"model": model, "dis_before": sol.dis, "dis_after": dis_after, "pairs": size,
                   "mesh": h, "preserved": preserved})
        )
    } else {
        format!(
            "model: {model}\ndis before: {}\ndis after: {}\npairs: {size}\nmesh: {}\ndistortion preserved: {}\n",
            fmt_g17(sol.dis),
            fmt_g17(dis_after),
            fmt_g17(h),
            if preserved { "yes" } else { "NO" }
        )
    };
    emit(common, &out)?;
    if preserved {
        Ok(())
    } else {
        Err(Failure::Violation(format!("distortion changed from {} to {}", fmt_g17(sol.dis), fmt_g17(dis_after))))
    }
}

fn certify(a: &str, b: &str, h: f64, common: &Common) -> Result<(), Failure> {
    if !(h > 0.0) {
        return Err(Failure::Invalid(format!("mesh must be positive, got {h}")));
    }
    let (ma, mb) = (read_metric(a, common)?, read_metric(b, common)?);
    let r = stability_certificate(&ma, &mb, h, common.tol)?;
    let out = if common.json {
        format!("{}\n", r.to_json())
    } else {
        let theorem = serde_json::to_value(r.theorem).expect("serializes");
        let mut s = format!(
            "theorem: {}\ndis0: {}\ndis_final: {}\nalpha: {}\nmesh: {}\n",
            theorem.as_str().unwrap_or_default(),
            fmt_g17(r.dis0),
            fmt_g17(r.dis_final),
            fmt_g17(r.alpha),
            fmt_g17(r.mesh)
        );
        for line in &r.bound_chain {
            let _ = writeln!(s, "  {line}");
        }
        let _ = writeln!(s, "{}", if r.pass { "pass" } else { "FAIL" });
        s
    };
    emit(common, &out)?;
    if r.pass {
        Ok(())
    } else {
        Err(Failure::Violation("certificate inequality fails".into()))
    }
}

fn paper(common: &Common) -> Result<(), Failure> {
    let r = run_reproduce_paper();
    let out = if common.json { format!("{}\n", r.to_json()) } else { r.to_table() };
    emit(common, &out)?;
    if r.all_pass() {
        Ok(())
    } else {
        Err(Failure::Violation("some rows do not reproduce".into()))
    }
}

fn experiment(cfg: RunConfig, common: &Common) -> Result<(), Failure> {
    let o = run_experiment(&cfg)?;
    let out = if common.json { format!("{}\n", o.to_json()) } else { o.to_csv() };
    emit(common, &out)?;
    match o.summary.violations {
        0 => Ok(()),
        v => Err(Failure::Violation(format!("{v} instance(s) violate the bound"))),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { input, common } => validate(&input, &common),
        Command::Span { input, mesh, emit, common } => span(&input, mesh, emit, &common),
        Command::Tree { input, emit, common } => tree(&input, emit, &common),
        Command::Gh { a, b, budget, common } => gh(&a, &b, budget, &common),
        Command::Extend { a, b, mesh, common } => extend(&a, &b, mesh, &common),
        Command::Certify { a, b, mesh, common } => certify(&a, &b, mesh, &common),
        Command::Paper { common } => paper(&common),
        Command::Experiment { seed, instances, kind, mesh, min_points, max_points, noise, common } => {
            let kind = match kind {
                Kind::Tree => InstanceKind::Tree,
                Kind::General => InstanceKind::General,
            };
            let cfg = RunConfig { seed, tol: common.tol, mesh, instances, kind, min_points, max_points, noise };
            experiment(cfg, &common)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Invalid(m) | Failure::Internal(m) => eprintln!("error: {m}"),
                Failure::Violation(m) => eprintln!("violation: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
