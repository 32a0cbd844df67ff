//! Sampled checkers for the bicombing axioms and the moduli inequalities.
//!
//! In one-sided mode the left-hand side of an upper bound on a distance is
//! taken from `dist_lower`, while distances inside the arguments of an
//! increasing modulus come from the upper estimate `dist`. A violation is
//! then a genuine counterexample. Checks that only concern chosen paths
//! (endpoints, chords, consistency, equivariance) compare with `dist`,
//! which makes a pass a certified statement.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::modulus::{ConvexityModulus, LengthModulus};
use crate::report::{sweep, Outcome, PropertyReport, Series, Tally};
use crate::rng;
use crate::space::BicombingSpace;

/// Sample count, tolerance, seed and sampling scale of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckParams {
    pub n: usize,
    pub tol: f64,
    pub seed: u64,
    pub scale: f64,
}

impl CheckParams {
    pub fn new(n: usize, tol: f64, seed: u64) -> Self {
        CheckParams { n, tol, seed, scale: 2.0 }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Configuration("sample count must be at least 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::Configuration(format!("tolerance must be nonnegative, got {}", self.tol)));
        }
        Ok(())
    }
}

fn tally<S: BicombingSpace>(check: &str, space: &S, p: &CheckParams) -> Tally {
    Tally::new(check, &space.name(), p.seed, p.tol, space.mode())
}

/// Segments used for the sampled polyline length.
const POLYLINE_SEGMENTS: usize = 16;

/// Endpoints, chord bound `d(γ(t), γ(t')) <= |t - t'| l`, polyline length,
/// `l >= d` and `γ_{x,x} ≡ x`.
pub fn check_bicombing_axioms<S: BicombingSpace>(space: &S, p: &CheckParams) -> Result<PropertyReport> {
    p.validate()?;
    let one_sided = space.mode() == crate::space::DistanceMode::OneSided;
    Ok(sweep(tally("bicombing_axioms", space, p), p.n, p.seed, |_, rng| {
        let x = space.sample(rng, p.scale);
        let y = space.sample(rng, p.scale);
        let t = rng::unit(rng);
        let t2 = rng::unit(rng);
        let l = space.path_length(&x, &y);
        let g0 = space.bicombe(&x, &y, 0.0);
        let g1 = space.bicombe(&x, &y, 1.0);
        let gt = space.bicombe(&x, &y, t);
        let gt2 = space.bicombe(&x, &y, t2);
        let endpoints = space.dist(&g0, &x).max(space.dist(&g1, &y));
        let chord = space.dist(&gt, &gt2) - (t - t2).abs() * l;
        let mut prev = g0;
        let mut poly = 0.0;
        for i in 1..=POLYLINE_SEGMENTS {
            let q = space.bicombe(&x, &y, i as f64 / POLYLINE_SEGMENTS as f64);
            poly += space.dist(&prev, &q);
            prev = q;
        }
        let polyline = if one_sided { poly - l } else { (poly - l).abs() };
        let length_ge_dist = space.dist_lower(&x, &y) - l;
        let constant = space.dist(&space.bicombe(&x, &x, t), &x);
        let parts = [
            ("endpoints", endpoints),
            ("chord", chord),
            ("polyline", polyline),
            ("length_ge_dist", length_ge_dist),
            ("constant_path", constant),
        ];
        let (which, excess) =
            parts
                .iter()
                .copied()
                .fold(("", f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 || c.1.is_nan() { c } else { acc });
        Outcome::new(excess, json!({"x": x, "y": y, "t": t, "t2": t2, "failing": which, "excess": excess}))
    }))
}

/// `d(γ_{x,y}(t), γ_{x',y'}(t)) <= A(t, d(x, x'), d(y, y'))`.
pub fn check_a_convex<S: BicombingSpace>(space: &S, a: &ConvexityModulus, p: &CheckParams) -> Result<PropertyReport> {
    p.validate()?;
    let report = sweep(tally("a_convex", space, p), p.n, p.seed, |_, rng| {
        let x = space.sample(rng, p.scale);
        let y = space.sample(rng, p.scale);
        // Half the samples perturb an existing pair so small distances are covered.
        let near = rng::unit(rng) < 0.5;
        let s = if near { 0.1 * p.scale } else { p.scale };
        let x2 = space.sample(rng, s);
        let y2 = space.sample(rng, s);
        let (x2, y2) = if near { (x.clone(), y2) } else { (x2, y2) };
        let t = rng::unit(rng);
        let lhs = space.dist_lower(&space.bicombe(&x, &y, t), &space.bicombe(&x2, &y2, t));
        let rhs = a.eval(t, space.dist(&x, &x2), space.dist(&y, &y2));
        Outcome::new(lhs - rhs, json!({"x": x, "y": y, "x2": x2, "y2": y2, "t": t, "lhs": lhs, "rhs": rhs}))
    });
    Ok(report.with_details(json!({"modulus": a.name()})))
}

/// `γ_{x,y}(t) = γ_{γ(s), γ(s')}((t - s) / (s' - s))` for `s <= t <= s'`.
pub fn check_consistent<S: BicombingSpace>(space: &S, p: &CheckParams) -> Result<PropertyReport> {
    p.validate()?;
    Ok(sweep(tally("consistent", space, p), p.n, p.seed, |_, rng| {
        let x = space.sample(rng, p.scale);
        let y = space.sample(rng, p.scale);
        let (u, v) = (rng::unit(rng), rng::unit(rng));
        let (s, s2) = if u <= v { (u, v) } else { (v, u) };
        let w = rng::unit(rng);
        if s2 - s < 1e-9 {
            return Outcome::skip(json!({"s": s, "s2": s2}));
        }
        let t = s + w * (s2 - s);
        let direct = space.bicombe(&x, &y, t);
        let a = space.bicombe(&x, &y, s);
        let b = space.bicombe(&x, &y, s2);
        let restricted = space.bicombe(&a, &b, (t - s) / (s2 - s));
        let excess = space.dist(&direct, &restricted);
        Outcome::new(excess, json!({"x": x, "y": y, "s": s, "s2": s2, "t": t, "excess": excess}))
    }))
}

/// Every declared isometry preserves distances and commutes with the
/// bicombing.
pub fn check_equivariant<S: BicombingSpace>(space: &S, p: &CheckParams) -> Result<PropertyReport> {
    p.validate()?;
    let isos = space.isometries();
    if isos.is_empty() {
        return Err(Error::Configuration(format!("space {} declares no isometries", space.name())));
    }
    Ok(sweep(tally("equivariant", space, p), p.n, p.seed, |i, rng| {
        let g = &isos[(i as usize) % isos.len()];
        let x = space.sample(rng, p.scale);
        let y = space.sample(rng, p.scale);
        let t = rng::unit(rng);
        let (gx, gy) = (g.apply(&x), g.apply(&y));
        let isometry = (space.dist(&gx, &gy) - space.dist(&x, &y)).abs();
        let commute = space.dist(&g.apply(&space.bicombe(&x, &y, t)), &space.bicombe(&gx, &gy, t));
        let excess = isometry.max(commute);
        Outcome::new(
            excess,
            json!({"isometry": g.label, "x": x, "y": y, "t": t, "dist_defect": isometry, "commute_defect": commute}),
        )
    }))
}

/// `|l(γ_{x,y}) - l(γ_{x',y'})| <= f(d(x, x') + d(y, y'))`.
pub fn check_length_modulus<S: BicombingSpace>(
    space: &S,
    f: &LengthModulus,
    p: &CheckParams,
) -> Result<PropertyReport> {
    p.validate()?;
    let report = sweep(tally("length_modulus", space, p), p.n, p.seed, |_, rng| {
        let x = space.sample(rng, p.scale);
        let y = space.sample(rng, p.scale);
        let near = rng::unit(rng) < 0.5;
        let s = if near { 0.1 * p.scale } else { p.scale };
        let x2 = if near { x.clone() } else { space.sample(rng, s) };
        let y2 = space.sample(rng, s);
        let lhs = (space.path_length(&x, &y) - space.path_length(&x2, &y2)).abs();
        let rhs = f.eval(space.dist(&x, &x2) + space.dist(&y, &y2));
        Outcome::new(lhs - rhs, json!({"x": x, "y": y, "x2": x2, "y2": y2, "lhs": lhs, "rhs": rhs}))
    });
    Ok(report.with_details(json!({"modulus": f.name()})))
}

/// Times approaching 1 used by the endpoint convergence check.
pub const CONVERGENCE_TIMES: [f64; 6] = [0.5, 0.9, 0.99, 0.999, 0.9999, 1.0];

/// Paths with a common end get close: `d(γ_{x,y}(t), γ_{x',y}(t)) <=
/// A(t, d(x, x'), 0)`, and the bound itself vanishes at `t = 1`.
pub fn endpoint_convergence_check<S: BicombingSpace>(
    space: &S,
    a: &ConvexityModulus,
    p: &CheckParams,
) -> Result<PropertyReport> {
    p.validate()?;
    let report = sweep(tally("endpoint_convergence", space, p), p.n, p.seed, |_, rng| {
        let x = space.sample(rng, p.scale);
        let x2 = space.sample(rng, p.scale);
        let y = space.sample(rng, p.scale);
        let s = space.dist(&x, &x2);
        let mut out = Outcome::new(a.eval(1.0, s, 0.0), json!({"x": x, "x2": x2, "y": y, "t": 1.0, "boundary": true}));
        for &t in &CONVERGENCE_TIMES {
            let lhs = space.dist_lower(&space.bicombe(&x, &y, t), &space.bicombe(&x2, &y, t));
            let rhs = a.eval(t, s, 0.0);
            out = out.worst(Outcome::new(lhs - rhs, json!({"x": x, "x2": x2, "y": y, "t": t, "lhs": lhs, "rhs": rhs})));
        }
        out
    });
    let points = CONVERGENCE_TIMES.iter().map(|&t| (t, a.eval(t, 1.0, 0.0))).collect();
    Ok(report.with_series(Series {
        label: format!("bound A(t, 1, 0) for {}", a.name()),
        x_label: "t".into(),
        y_label: "bound".into(),
        points,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclid::Euclidean;
    use crate::h2::H2Space;
    use crate::modulus::linear_modulus;

    #[test]
    fn euclidean_passes_axioms_exactly() {
        let r = check_bicombing_axioms(&Euclidean::plane(), &CheckParams::new(500, 1e-12, 3)).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn h2_passes_core_checks() {
        let p = CheckParams::new(400, 1e-9, 5);
        assert!(check_bicombing_axioms(&H2Space, &p).unwrap().passed);
        assert!(check_consistent(&H2Space, &p).unwrap().passed);
        assert!(check_a_convex(&H2Space, &linear_modulus(), &p).unwrap().passed);
        assert!(check_equivariant(&H2Space, &p).unwrap().passed);
    }

    #[test]
    fn halved_modulus_fails_on_h2() {
        let r = check_a_convex(&H2Space, &linear_modulus().scaled(0.5), &CheckParams::new(200, 1e-9, 5)).unwrap();
        assert!(!r.passed);
        assert!(!r.witness.is_null());
    }

    #[test]
    fn zero_sample_count_is_rejected() {
        assert!(check_consistent(&H2Space, &CheckParams::new(0, 1e-9, 1)).is_err());
    }
}
