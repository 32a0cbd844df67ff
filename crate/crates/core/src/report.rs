//! Property reports and the deterministic sample sweep behind them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::rng::{self, SampleRng};
use crate::space::DistanceMode;

/// Version of the JSON report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Margins kept per report for plotting.
const MAX_MARGINS: usize = 4096;

/// A named curve attached to a report, e.g. residual against `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub schema: u32,
    pub check: String,
    pub space: String,
    pub seed: u64,
    pub n: usize,
    pub tol: f64,
    pub max_violation: f64,
    pub witness: Value,
    pub passed: bool,
    pub mode: String,
    pub checks_run: usize,
    pub skipped: usize,
    /// `rhs - lhs` for the first samples; negative means a violation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub margins: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<Series>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl PropertyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn with_series(mut self, series: Series) -> Self {
        self.series.push(series);
        self
    }

    /// Merge reports of sub-checks into one, keeping the worst witness.
    pub fn combine(check: &str, parts: Vec<PropertyReport>) -> PropertyReport {
        let first =
            parts.first().cloned().unwrap_or_else(|| Tally::new(check, "", 0, 0.0, DistanceMode::Exact).finish());
        let mut out = PropertyReport { check: check.to_string(), ..first.clone() };
        out.n = 0;
        out.checks_run = 0;
        out.skipped = 0;
        out.margins.clear();
        out.series.clear();
        out.max_violation = 0.0;
        out.witness = Value::Null;
        out.passed = true;
        let mut details = Vec::new();
        for p in parts {
            out.n += p.n;
            out.checks_run += p.checks_run;
            out.skipped += p.skipped;
            out.passed &= p.passed;
            if p.max_violation > out.max_violation || out.witness.is_null() {
                out.max_violation = out.max_violation.max(p.max_violation);
                out.witness = p.witness.clone();
            }
            if out.mode != p.mode {
                out.mode = DistanceMode::OneSided.as_str().to_string();
            }
            out.margins.extend(p.margins.iter().take(MAX_MARGINS.saturating_sub(out.margins.len())));
            out.series.extend(p.series.clone());
            details.push(serde_json::json!({
                "check": p.check,
                "max_violation": p.max_violation,
                "passed": p.passed,
                "checks_run": p.checks_run,
            }));
        }
        out.details = Value::Array(details);
        out
    }
}

/// Result of one sampled instance: `excess = lhs - rhs` (positive is a
/// violation), plus its inputs for replay.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub excess: f64,
    pub witness: Value,
    pub skipped: bool,
}

impl Outcome {
    pub fn new(excess: f64, witness: Value) -> Self {
        Outcome { excess, witness, skipped: false }
    }

    pub fn skip(witness: Value) -> Self {
        Outcome { excess: f64::NEG_INFINITY, witness, skipped: true }
    }

    /// Keep the larger of two sub-check outcomes for the same sample.
    pub fn worst(self, other: Outcome) -> Outcome {
        if other.excess > self.excess || self.excess.is_nan() {
            other
        } else {
            self
        }
    }
}

/// Accumulates outcomes in sample order.
#[derive(Debug, Clone)]
pub struct Tally {
    check: String,
    space: String,
    seed: u64,
    tol: f64,
    mode: DistanceMode,
    n: usize,
    run: usize,
    skipped: usize,
    worst: f64,
    witness: Value,
    margins: Vec<f64>,
}

impl Tally {
    pub fn new(check: &str, space: &str, seed: u64, tol: f64, mode: DistanceMode) -> Self {
        Tally {
            check: check.to_string(),
            space: space.to_string(),
            seed,
            tol,
            mode,
            n: 0,
            run: 0,
            skipped: 0,
            worst: f64::NEG_INFINITY,
            witness: Value::Null,
            margins: Vec::new(),
        }
    }

    pub fn push(&mut self, o: Outcome) {
        self.n += 1;
        if o.skipped {
            self.skipped += 1;
            return;
        }
        self.run += 1;
        // NaN counts as an infinite violation.
        let excess = if o.excess.is_nan() { f64::INFINITY } else { o.excess };
        if excess > self.worst {
            self.worst = excess;
            self.witness = o.witness;
        }
        if self.margins.len() < MAX_MARGINS {
            self.margins.push(-excess);
        }
    }

    pub fn finish(self) -> PropertyReport {
        let max_violation = self.worst.max(0.0);
        PropertyReport {
            schema: REPORT_SCHEMA_VERSION,
            check: self.check,
            space: self.space,
            seed: self.seed,
            n: self.n,
            tol: self.tol,
            max_violation,
            witness: self.witness,
            passed: max_violation <= self.tol,
            mode: self.mode.as_str().to_string(),
            checks_run: self.run,
            skipped: self.skipped,
            margins: self.margins,
            series: Vec::new(),
            details: Value::Null,
        }
    }
}

/// Run `f` on samples `0..n`, each with its own `(seed, index)` stream, in
/// parallel, and reduce in index order.
pub fn sweep<F>(tally: Tally, n: usize, seed: u64, f: F) -> PropertyReport
where
    F: Fn(u64, &mut SampleRng) -> Outcome + Sync,
{
    let outcomes: Vec<Outcome> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, i);
            f(i, &mut rng)
        })
        .collect();
    let mut tally = tally;
    for o in outcomes {
        tally.push(o);
    }
    tally.finish()
}
