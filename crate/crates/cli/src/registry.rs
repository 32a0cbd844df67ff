//! Named spaces and checks, and the table of which check runs where.

use anyhow::{anyhow, bail, Result};
use bicomb::checks::*;
use bicomb::contraction::{check_contraction, constants_sweep, contraction_constants, shadow_lemma_sweep};
use bicomb::controls::{BrokenSpace, NonIsometrySpace};
use bicomb::flow::{flow_bounds_sweep, restriction_sweep, weight_normalization_sweep};
use bicomb::h2::{area_bound_sweep, g_profile_check, holonomy_sweep};
use bicomb::product::product_space;
use bicomb::sl2::{
    chain_check_sweep, length_difference_sweep, sl2_convexity_modulus, sl2_length_modulus, strip_bounds_sweep,
};
use bicomb::tight_span::{
    covering_sweep, four_point_sweep, graph_metric, kuratowski_sweep, parse_edge_list, projection_sweep,
    small_cases_check, tree_tight_span, TreeSpace,
};
use bicomb::transfer::{
    check_h_semigroup, check_homotopy_axioms, check_iota_equivariance, check_transfer_condition, transfer_constants,
    AffineH2Action, GroupAction, LatticeAction,
};
use bicomb::{
    linear_modulus, BicombingSpace, CheckParams, ConvexityModulus, Error, Euclidean, FarField, H2Space, LengthModulus,
    PropertyReport, SL2Space,
};

use crate::config::{CheckConfig, SweepConfig};

pub const SPACES: [&str; 7] = ["euclidean", "h2", "sl2r-model", "tree", "product-r2-h2", "broken", "non-isometry"];

/// Spaces whose checks are expected to fail.
pub const CONTROLS: [&str; 2] = ["broken", "non-isometry"];

pub const CHECKS: [&str; 24] = [
    "axioms",
    "consistent",
    "equivariant",
    "a_convex",
    "length_modulus",
    "endpoint_convergence",
    "weight_normalization",
    "flow_bounds",
    "restriction",
    "contraction",
    "shadow",
    "constants_sweep",
    "chain",
    "length_difference",
    "strip_bounds",
    "holonomy",
    "area_bound",
    "g_profile",
    "transfer",
    "projection",
    "four_point",
    "kuratowski",
    "covering_radius",
    "small_cases",
];

const GENERIC: [&str; 6] =
    ["axioms", "consistent", "equivariant", "a_convex", "length_modulus", "endpoint_convergence"];
const FLOW: [&str; 3] = ["weight_normalization", "flow_bounds", "restriction"];

pub fn applicable(space: &str, check: &str) -> bool {
    let control = CONTROLS.contains(&space);
    match check {
        c if GENERIC.contains(&c) => true,
        c if FLOW.contains(&c) => !control,
        "contraction" | "transfer" => matches!(space, "euclidean" | "h2"),
        "shadow" | "constants_sweep" => matches!(space, "euclidean" | "h2" | "sl2r-model"),
        "chain" | "length_difference" | "strip_bounds" => space == "sl2r-model",
        "holonomy" | "area_bound" | "g_profile" => space == "h2",
        "projection" | "four_point" | "kuratowski" | "covering_radius" | "small_cases" => space == "tree",
        _ => false,
    }
}

/// Default tolerance of the bicombing suites on each space.
pub fn space_tol(space: &str) -> f64 {
    match space {
        "euclidean" | "tree" => 1e-12,
        "sl2r-model" => 1e-6,
        _ => 1e-9,
    }
}

fn default_n(check: &str) -> usize {
    match check {
        c if GENERIC.contains(&c) && c != "endpoint_convergence" => 10_000,
        "endpoint_convergence" | "flow_bounds" | "strip_bounds" | "transfer" | "g_profile" => 1000,
        "area_bound" => 10_000,
        "contraction" | "chain" | "length_difference" => 500,
        "restriction" | "shadow" | "holonomy" => 200,
        "weight_normalization" | "projection" => 100,
        "four_point" | "kuratowski" => 50,
        "covering_radius" => 20,
        _ => 1,
    }
}

fn default_tol(space: &str, check: &str) -> f64 {
    match check {
        "weight_normalization" => 1e-8,
        "flow_bounds" => 1e-7,
        "holonomy" => 1e-6,
        "chain" | "length_difference" | "strip_bounds" => 1e-6,
        "transfer" => 1e-8,
        "projection" | "covering_radius" => 1e-9,
        "four_point" | "kuratowski" | "g_profile" => 0.0,
        "area_bound" | "small_cases" => 1e-12,
        _ => space_tol(space),
    }
}

/// Sample count, tolerance, seed and extra keys of one check.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub n: usize,
    pub tol: f64,
    pub seed: u64,
    pub extra: CheckConfig,
}

impl Resolved {
    fn num(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.extra.num(key)?.unwrap_or(default))
    }

    fn count(&self, key: &str, default: usize) -> Result<usize> {
        let v = self.num(key, default as f64)?;
        if !(v >= 1.0 && v.fract() == 0.0) {
            bail!("`{key}` must be a positive integer, got {v}");
        }
        Ok(v as usize)
    }

    fn params(&self) -> Result<CheckParams> {
        Ok(CheckParams::new(self.n, self.tol, self.seed).with_scale(self.num("scale", 2.0)?))
    }
}

pub fn resolve(cfg: &SweepConfig, space: &str, check: &str) -> Resolved {
    let c = cfg.check.get(check).cloned().unwrap_or_default();
    Resolved {
        n: c.n.unwrap_or_else(|| default_n(check)),
        tol: c.tol.unwrap_or_else(|| default_tol(space, check)),
        seed: c.seed.unwrap_or(1),
        extra: c,
    }
}

/// Errors from a check: bad inputs are usage errors, numerical trouble is
/// a failed report carrying the message.
fn settle(space: &str, check: &str, r: &Resolved, out: bicomb::Result<PropertyReport>) -> Result<PropertyReport> {
    match out {
        Ok(rep) => Ok(rep),
        Err(
            e @ (Error::Configuration(_) | Error::Precondition(_) | Error::Parse { .. } | Error::Disconnected { .. }),
        ) => Err(anyhow!("{space}/{check}: {e}")),
        Err(e) => {
            let mut rep = bicomb::report::Tally::new(check, space, r.seed, r.tol, bicomb::DistanceMode::Exact).finish();
            rep.passed = false;
            rep.max_violation = f64::INFINITY;
            rep.witness = serde_json::json!({"error": e.to_string()});
            Ok(rep)
        }
    }
}

fn generic<S: BicombingSpace>(
    space: &S,
    a: &ConvexityModulus,
    f: &LengthModulus,
    check: &str,
    r: &Resolved,
) -> Result<Option<bicomb::Result<PropertyReport>>> {
    let p = r.params()?;
    let scale = p.scale;
    Ok(Some(match check {
        "axioms" => check_bicombing_axioms(space, &p),
        "consistent" => check_consistent(space, &p),
        "equivariant" => check_equivariant(space, &p),
        "a_convex" => check_a_convex(space, a, &p),
        "length_modulus" => check_length_modulus(space, f, &p),
        "endpoint_convergence" => endpoint_convergence_check(space, a, &p),
        "weight_normalization" => Ok(weight_normalization_sweep(space, r.n, r.tol, 1e-10, r.seed, scale)),
        "flow_bounds" => {
            Ok(flow_bounds_sweep(space, r.n, r.tol, r.num("quad_tol", 1e-8)?, r.seed, r.num("scale", 3.0)?))
        }
        "restriction" => Ok(restriction_sweep(space, r.n, r.tol, r.seed, r.num("scale", 3.0)?)),
        _ => return Ok(None),
    }))
}

/// Shadowing and the constants-vs-delta sweep, with per-space defaults.
fn recipe<S: BicombingSpace>(
    space: &S,
    a: &ConvexityModulus,
    f: &LengthModulus,
    default_beta: f64,
    check: &str,
    r: &Resolved,
) -> Result<Option<bicomb::Result<PropertyReport>>> {
    let beta = r.num("beta", default_beta)?;
    let l = r.num("l", 1.0)?;
    Ok(Some(match check {
        "shadow" => {
            let grid = r.count("grid", 100)?;
            contraction_constants(beta, l, r.num("delta", 10.0)?, a, f)
                .map(|c| shadow_lemma_sweep(space, a, &c, r.n, grid, r.tol, r.seed))
        }
        "constants_sweep" => {
            let deltas = r.extra.nums("deltas")?.unwrap_or_else(|| vec![1.0, 0.1, 0.01]);
            constants_sweep(&space.name(), a, f, beta, l, &deltas)
        }
        _ => return Ok(None),
    }))
}

fn contraction<S: FarField>(space: &S, r: &Resolved) -> Result<bicomb::Result<PropertyReport>> {
    let (a, f) = (linear_modulus(), LengthModulus::identity());
    let settings = match (r.extra.num("beta")?, r.extra.num("l")?, r.extra.num("delta")?) {
        (None, None, None) => vec![(1.0, 1.0, 0.1), (1.0, 1.0, 0.01), (2.0, 1.0, 0.1)],
        (b, l, d) => vec![(b.unwrap_or(1.0), l.unwrap_or(1.0), d.unwrap_or(0.1))],
    };
    let mut parts = Vec::new();
    for (beta, l, delta) in settings {
        match check_contraction(space, &a, &f, beta, l, delta, r.n, r.seed) {
            Ok(rep) => parts.push(rep),
            Err(e) => return Ok(Err(e)),
        }
    }
    Ok(Ok(PropertyReport::combine("contraction", parts)))
}

fn transfer<A: GroupAction>(action: &A, k: usize, r: &Resolved) -> Result<bicomb::Result<PropertyReport>> {
    let f = LengthModulus::identity();
    let s = action.symmetric_set();
    let k = r.count("k", k)?;
    let cfg = match transfer_constants(action, &linear_modulus(), &f, &s, k, r.num("delta", 0.1)?) {
        Ok(c) => c,
        Err(e) => return Ok(Err(e)),
    };
    let instances = r.count("instances", 200)?;
    let parts = vec![
        check_homotopy_axioms(action, &cfg, r.n, r.tol, r.seed),
        check_h_semigroup(action, &cfg, r.n, r.tol, r.seed),
        check_iota_equivariance(action, &cfg, r.count("points", 100)?, r.count("times", 100)?, 1e-9, r.seed),
        check_transfer_condition(action, &f, &cfg, instances, r.seed),
    ];
    let mut rep = PropertyReport::combine("transfer", parts);
    let summary = serde_json::json!({
        "k": k, "delta": cfg.delta, "beta'": cfg.beta_prime, "beta": cfg.beta, "T": cfg.t, "R": cfg.r,
        "finite": cfg.t.is_finite() && cfg.r.is_finite(),
    });
    rep.details = serde_json::json!({"parts": rep.details, "constants": summary});
    Ok(Ok(rep))
}

/// Default tree: a spider with three legs of lengths 1 then 2, so it has
/// branch structure and six symmetries.
pub const DEFAULT_TREE: &str = "0 1 1\n1 2 2\n0 3 1\n3 4 2\n0 5 1\n5 6 2\n";

pub fn tree_space(cfg: &SweepConfig) -> Result<TreeSpace> {
    let text = cfg.space.get("tree").and_then(|s| s.edges.clone()).unwrap_or_else(|| DEFAULT_TREE.to_string());
    let (n, edges) = parse_edge_list(&text)?;
    let d = graph_metric(n, &edges)?;
    Ok(tree_tight_span(&d)?.1)
}

fn tight_span_check(check: &str, r: &Resolved) -> Result<bicomb::Result<PropertyReport>> {
    Ok(Ok(match check {
        "projection" => projection_sweep(r.n, r.tol, r.count("max_iter", 100)?, r.seed),
        "four_point" => four_point_sweep(r.n, r.seed),
        "kuratowski" => kuratowski_sweep(r.n, r.seed),
        "covering_radius" => covering_sweep(r.n, r.count("max_vertices", 10)?, r.count("samples", 50)?, r.tol, r.seed),
        "small_cases" => small_cases_check(r.tol),
        _ => unreachable!("tight span check {check}"),
    }))
}

/// Run one `(space, check)` pair. Errors are usage errors; numerical
/// trouble inside a check comes back as a failed report.
pub fn run_check(cfg: &SweepConfig, space: &str, check: &str) -> Result<PropertyReport> {
    if !SPACES.contains(&space) {
        return Err(anyhow!("unknown space `{space}`; known: {}", SPACES.join(", ")));
    }
    if !CHECKS.contains(&check) {
        return Err(anyhow!("unknown check `{check}`; known: {}", CHECKS.join(", ")));
    }
    if !applicable(space, check) {
        return Err(anyhow!("check `{check}` does not apply to space `{space}`"));
    }
    let r = resolve(cfg, space, check);
    let (lin, id) = (linear_modulus(), LengthModulus::identity());
    let mesh = cfg.space.get("sl2r-model").and_then(|s| s.mesh).unwrap_or(96);
    let out = match space {
        "euclidean" => {
            let e = Euclidean::plane();
            match check {
                "contraction" => contraction(&e, &r)?,
                "transfer" => transfer(&LatticeAction::unit(), 2, &r)?,
                _ => match generic(&e, &lin, &id, check, &r)? {
                    Some(v) => v,
                    None => recipe(&e, &lin, &id, 1.0, check, &r)?.expect("applicable"),
                },
            }
        }
        "h2" => match check {
            "contraction" => contraction(&H2Space, &r)?,
            "transfer" => transfer(&AffineH2Action::reference(), 1, &r)?,
            "holonomy" => Ok(holonomy_sweep(r.n, r.tol, r.seed, r.count("samples", 10_000)?, r.num("diameter", 5.0)?)),
            "area_bound" => Ok(area_bound_sweep(r.n, r.tol, r.seed, r.num("scale", 5.0)?)),
            "g_profile" => Ok(g_profile_check(r.n, r.num("r_max", 20.0)?)),
            _ => match generic(&H2Space, &lin, &id, check, &r)? {
                Some(v) => v,
                None => recipe(&H2Space, &lin, &id, 1.0, check, &r)?.expect("applicable"),
            },
        },
        "sl2r-model" => {
            let s = SL2Space { mesh };
            let diameter = r.num("diameter", 3.0)?;
            match check {
                "chain" => Ok(chain_check_sweep(&s, r.n, r.tol, r.seed, diameter)),
                "length_difference" => Ok(length_difference_sweep(&s, r.n, r.tol, r.seed, diameter)),
                "strip_bounds" => Ok(strip_bounds_sweep(&s, r.n, r.tol, r.seed, r.num("scale", 3.0)?)),
                _ => {
                    let (a, f) = (sl2_convexity_modulus(), sl2_length_modulus());
                    match generic(&s, &a, &f, check, &r)? {
                        Some(v) => v,
                        None => recipe(&s, &a, &f, 0.25, check, &r)?.expect("applicable"),
                    }
                }
            }
        }
        "tree" => {
            if GENERIC.contains(&check) || FLOW.contains(&check) {
                let t = tree_space(cfg)?;
                generic(&t, &lin, &id, check, &r)?.expect("applicable")
            } else {
                tight_span_check(check, &r)?
            }
        }
        "product-r2-h2" => {
            let (p, a) = match product_space(Euclidean::plane(), &lin, H2Space, &lin) {
                Ok(v) => v,
                Err(e) => return Err(anyhow!("{e}")),
            };
            generic(&p, &a, &id, check, &r)?.expect("applicable")
        }
        "broken" => generic(&BrokenSpace, &lin, &id, check, &r)?.expect("applicable"),
        "non-isometry" => generic(&NonIsometrySpace, &lin, &id, check, &r)?.expect("applicable"),
        _ => unreachable!(),
    };
    let mut rep = settle(space, check, &r, out)?;
    rep.space = space.to_string();
    rep.check = check.to_string();
    Ok(rep)
}
