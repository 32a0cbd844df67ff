//! The `tightspan` command: metric of a graph, its four-point constant,
//! sampled extremal functions and the covering-radius report.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use bicomb::rng;
use bicomb::tight_span::*;
use bicomb::PropertyReport;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct ExtremalSample {
    pub start: Vec<f64>,
    pub extremal: Vec<f64>,
    pub residual: f64,
    /// Index of the nearest Kuratowski image and the distance to it.
    pub nearest: usize,
    pub distance: f64,
}

#[derive(Debug, Serialize)]
pub struct TightSpanSummary {
    pub vertices: usize,
    pub edges: usize,
    pub delta: f64,
    pub diameter: f64,
    /// The tree realizing the metric when the four-point constant is 0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<WeightedTree>,
    pub samples: Vec<ExtremalSample>,
    pub covering_passed: bool,
}

pub struct TightSpanRun {
    pub summary: TightSpanSummary,
    pub report: PropertyReport,
}

/// Parse errors, empty input and disconnected graphs are usage errors.
pub fn run(text: &str, samples: usize, seed: u64) -> Result<TightSpanRun> {
    let (n, edges) = parse_edge_list(text)?;
    if n == 0 {
        bail!("graph file has no vertices");
    }
    let d = graph_metric(n, &edges)?;
    let delta = four_point_delta(&d);
    let tree = if delta == 0.0 { Some(tree_realization(&d)?) } else { None };
    let shown = samples.min(10);
    let mut list = Vec::new();
    for i in 0..shown as u64 {
        let mut r = rng::stream(seed, i);
        let g = random_admissible(&d, &mut r);
        let f = project_extremal(&g, &d, 1e-12, 10_000)?;
        let (distance, nearest) = (0..d.n)
            .map(|x| (linf_distance(&f, &kuratowski(x, &d).expect("index")).expect("sizes"), x))
            .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a });
        list.push(ExtremalSample {
            residual: extremality_residual(&f.values, &d),
            start: g.values,
            extremal: f.values,
            nearest,
            distance,
        });
    }
    let report = covering_radius_check(&d, delta, samples, seed, 1e-9);
    let summary = TightSpanSummary {
        vertices: n,
        edges: edges.len(),
        delta,
        diameter: d.diameter(),
        tree,
        samples: list,
        covering_passed: report.passed,
    };
    Ok(TightSpanRun { summary, report })
}

/// Read the graph, run, and write `metric.csv`, `tightspan.json` and
/// `covering_radius.json` into `out`.
pub fn cmd(graph: &Path, samples: usize, seed: u64, out: &Path) -> Result<TightSpanRun> {
    let text = fs::read_to_string(graph).with_context(|| format!("cannot read {}", graph.display()))?;
    let res = run(&text, samples, seed)?;
    let (n, edges) = parse_edge_list(&text)?;
    let d = graph_metric(n, &edges)?;
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    fs::write(out.join("metric.csv"), d.to_csv())?;
    fs::write(out.join("tightspan.json"), serde_json::to_string_pretty(&res.summary)?)?;
    fs::write(out.join("covering_radius.json"), res.report.to_json())?;
    Ok(res)
}
