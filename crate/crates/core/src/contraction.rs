//! Constants for the contraction of far-away trails, the shadowing
//! estimate behind them and sampled checks of both.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{domain, Error, Result};
use crate::flow::{weighted_integral, Trail};
use crate::modulus::{ConvexityModulus, LengthModulus};
use crate::report::{sweep, Outcome, PropertyReport, Series, Tally};
use crate::rng::{self, SampleRng};
use crate::space::{BicombingSpace, FarField};

/// Largest `r″` tried before giving up.
const R2_CAP: f64 = 1e15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionConstants {
    pub beta: f64,
    pub l: f64,
    pub delta: f64,
    pub f_beta: f64,
    pub r_prime: f64,
    pub delta_prime: f64,
    pub r_double_prime: f64,
    pub r: f64,
    #[serde(rename = "T")]
    pub t: f64,
}

/// One defining inequality `lhs <= rhs` after substitution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Condition {
    fn le(name: &str, lhs: f64, rhs: f64) -> Self {
        Condition { name: name.into(), lhs, rhs, holds: lhs <= rhs }
    }

    fn eq(name: &str, lhs: f64, rhs: f64) -> Self {
        Condition { name: name.into(), lhs, rhs, holds: lhs == rhs }
    }
}

/// `∫_{-∞}^{-r'} (1 + |t|) e^{-|t|} dt`.
fn outer_integral(r_prime: f64) -> f64 {
    (2.0 + r_prime) * (-r_prime).exp()
}

/// `∫_{-r'}^{r'} δ' e^{-|t|} dt`.
fn inner_integral(r_prime: f64, delta_prime: f64) -> f64 {
    2.0 * delta_prime * -(-r_prime).exp_m1()
}

impl ContractionConstants {
    /// `2r′ + f(β) + L`.
    pub fn spread(&self) -> f64 {
        2.0 * self.r_prime + self.f_beta + self.l
    }

    /// `r″ / (r″ + 2r′ + f(β) + L)`.
    pub fn ratio(&self) -> f64 {
        self.r_double_prime / (self.r_double_prime + self.spread())
    }

    /// `A(ratio, β, 0) + f(β)(2r′ + f(β) + L) / r″`.
    pub fn shadow_bound(&self, a: &ConvexityModulus) -> f64 {
        a.eval(self.ratio(), self.beta, 0.0) + self.f_beta * self.spread() / self.r_double_prime
    }

    /// Every defining condition, substituted back in closed form.
    pub fn verify(&self, a: &ConvexityModulus, f: &LengthModulus) -> Vec<Condition> {
        let f_beta = f.eval(self.beta);
        vec![
            Condition::eq("f(beta) recorded", self.f_beta, f_beta),
            Condition::le("outer integral (2+r')e^-r' <= delta/3", outer_integral(self.r_prime), self.delta / 3.0),
            Condition::le(
                "inner integral 2 delta'(1-e^-r') <= delta/3",
                inner_integral(self.r_prime, self.delta_prime),
                self.delta / 3.0,
            ),
            Condition::le("ratio >= 2/3", 2.0 / 3.0, self.ratio()),
            Condition::le("shadow bound <= delta'", self.shadow_bound(a), self.delta_prime),
            Condition::eq("r = 2r' + r'' + f(beta)", self.r, 2.0 * self.r_prime + self.r_double_prime + self.f_beta),
            Condition::eq("T = r - r' - f(beta)", self.t, self.r - self.r_prime - self.f_beta),
            Condition::le("r' > 1", 1.0 + f64::EPSILON, self.r_prime),
            Condition::le("delta' < 1", self.delta_prime, 1.0 - f64::EPSILON),
            Condition::le("delta' > 0", f64::MIN_POSITIVE, self.delta_prime),
            Condition::le("r'' > f(beta)", self.f_beta * (1.0 + f64::EPSILON) + f64::MIN_POSITIVE, self.r_double_prime),
        ]
    }

    pub fn all_hold(&self, a: &ConvexityModulus, f: &LengthModulus) -> bool {
        self.verify(a, f).iter().all(|c| c.holds)
    }
}

/// Smallest point of `[lo, hi]` where the monotone predicate `ok` holds,
/// given `ok(hi)` and not `ok(lo)`.
fn bisect(mut lo: f64, mut hi: f64, ok: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Deterministic choice of `r′, δ′, r″, r, T`: `r′` minimal, `δ′` maximal,
/// `r″` minimal, each found by doubling and then bisection.
pub fn contraction_constants(
    beta: f64,
    l: f64,
    delta: f64,
    a: &ConvexityModulus,
    f: &LengthModulus,
) -> Result<ContractionConstants> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(domain(format!("beta must be a nonnegative number, got {beta}")));
    }
    if !(l > 0.0 && l.is_finite()) || !(delta > 0.0 && delta.is_finite()) {
        return Err(domain(format!("L and delta must be positive, got L = {l}, delta = {delta}")));
    }
    let at_one = a.eval(1.0, beta, 0.0);
    let tail: Vec<f64> = (1..=8).map(|k| a.eval(1.0 - 10f64.powi(-k), beta, 0.0)).collect();
    if !(at_one.abs() <= 1e-12 * (1.0 + beta)) || !tail.iter().all(|v| v.is_finite()) || tail[7] > tail[0].max(1e-300) {
        return Err(Error::Precondition(format!(
            "A(t, {beta}, 0) does not tend to 0 as t -> 1 (value at 1: {at_one}, approach: {tail:?})"
        )));
    }
    let f_beta = f.eval(beta);
    if !f_beta.is_finite() {
        return Err(domain(format!("f({beta}) is not finite")));
    }

    let outer_ok = |r: f64| r > 1.0 && outer_integral(r) <= delta / 3.0;
    let r_prime = if outer_ok(1.0 + 1e-9) {
        1.0 + 1e-9
    } else {
        let mut hi = 2.0;
        while !outer_ok(hi) {
            hi *= 2.0;
        }
        bisect(1.0, hi, outer_ok)
    };

    let mut delta_prime = (delta / (6.0 * -(-r_prime).exp_m1())).min(0.999);
    while inner_integral(r_prime, delta_prime) > delta / 3.0 {
        delta_prime *= 1.0 - 1e-12;
    }

    let spread = 2.0 * r_prime + f_beta + l;
    let inner_ok = |r2: f64| {
        r2 > f_beta
            && r2 / (r2 + spread) >= 2.0 / 3.0
            && a.eval(r2 / (r2 + spread), beta, 0.0) + f_beta * spread / r2 <= delta_prime
    };
    let start = (2.0 * spread).max(f_beta * (1.0 + 1e-12) + 1e-12);
    let r_double_prime = if inner_ok(start) {
        start
    } else {
        let mut lo = start;
        let mut hi = 2.0 * start;
        while !inner_ok(hi) {
            if hi > R2_CAP {
                return Err(Error::NoConvergence(format!(
                    "no r'' below {R2_CAP:e} meets delta' = {delta_prime}; A(t, {beta}, 0) does not vanish fast enough"
                )));
            }
            lo = hi;
            hi *= 2.0;
        }
        bisect(lo, hi, inner_ok)
    };

    let r = 2.0 * r_prime + r_double_prime + f_beta;
    let consts = ContractionConstants {
        beta,
        l,
        delta,
        f_beta,
        r_prime,
        delta_prime,
        r_double_prime,
        r,
        t: r - r_prime - f_beta,
    };
    if let Some(c) = consts.verify(a, f).into_iter().find(|c| !c.holds) {
        return Err(Error::NoConvergence(format!("constants fail re-substitution: {c:?}")));
    }
    Ok(consts)
}

/// Residual `lhs - bound` on the `t` grid for one shadowing instance;
/// returns the worst outcome and the curve.
fn shadow_instance<S: BicombingSpace>(
    space: &S,
    a: &ConvexityModulus,
    consts: &ContractionConstants,
    x1: &S::Point,
    x2: &S::Point,
    x: &S::Point,
    grid: usize,
) -> Result<(Outcome, Vec<(f64, f64)>)> {
    let gap = space.dist(x1, x2);
    if gap > consts.beta * (1.0 + 1e-12) + 1e-12 {
        return Err(Error::Precondition(format!("d(x1, x2) = {gap} exceeds beta = {}", consts.beta)));
    }
    let reach = consts.r + consts.l;
    let c1 = Trail::new(space, x1.clone(), x.clone(), 0.0);
    let c2 = Trail::new(space, x2.clone(), x.clone(), 0.0);
    if c1.length > reach * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!("l(c_x1,x) = {} exceeds r + L = {reach}", c1.length)));
    }
    let tau = c2.length - c1.length;
    let bound = consts.shadow_bound(a);
    let grid = grid.max(2);
    let mut worst = Outcome::new(f64::NEG_INFINITY, json!(null));
    let mut curve = Vec::with_capacity(grid);
    for i in 0..grid {
        let t = consts.t - consts.r_prime + 2.0 * consts.r_prime * i as f64 / (grid - 1) as f64;
        let lhs = space.dist_lower(&c1.eval(space, t), &c2.eval(space, t + tau));
        curve.push((t, lhs - bound));
        worst = worst.worst(Outcome::new(
            lhs - bound,
            json!({"x1": x1, "x2": x2, "x": x, "t": t, "tau": tau, "lhs": lhs, "bound": bound}),
        ));
    }
    Ok((worst, curve))
}

/// `d(c_{x₁,x}(t), c_{x₂,x}(t + τ)) <= A(ratio, β, 0) + f(β)(2r′ + f(β) + L)/r″`
/// on `grid` times in `[T - r′, T + r′]`, with `τ = l(c_{x₂,x}) - l(c_{x₁,x})`.
pub fn check_shadow_lemma<S: BicombingSpace>(
    space: &S,
    a: &ConvexityModulus,
    consts: &ContractionConstants,
    x1: &S::Point,
    x2: &S::Point,
    x: &S::Point,
    grid: usize,
    tol: f64,
) -> Result<PropertyReport> {
    let (worst, curve) = shadow_instance(space, a, consts, x1, x2, x, grid)?;
    let mut tally = Tally::new("shadow_lemma", &space.name(), 0, tol, space.mode());
    tally.push(worst);
    Ok(tally.finish().with_series(Series {
        label: "residual".into(),
        x_label: "t".into(),
        y_label: "lhs - bound".into(),
        points: curve,
    }))
}

/// Random admissible `(x₁, x₂, x)`: `x₂` at path length at most `β` from
/// `x₁`, `x` at path length at most `r + L`, half of them beyond `T - r′ - 1`.
pub fn sample_shadow_triple<S: BicombingSpace>(
    space: &S,
    consts: &ContractionConstants,
    rng: &mut SampleRng,
    scale: f64,
) -> (S::Point, S::Point, S::Point) {
    let reach = consts.r + consts.l;
    let x1 = space.sample(rng, scale);
    let along = |rng: &mut SampleRng, len: f64, far: f64| {
        let w = space.sample(rng, far);
        let total = space.path_length(&x1, &w);
        if total <= len {
            w
        } else {
            space.bicombe(&x1, &w, len / total)
        }
    };
    let rho = consts.beta * rng::unit(rng);
    let x2 = along(rng, rho, scale);
    let lo = if rng::unit(rng) < 0.5 { (consts.t - consts.r_prime - 1.0).max(0.0) } else { 0.0 };
    let lambda = rng::uniform(rng, lo, reach);
    let x = along(rng, lambda, 2.5 * reach);
    (x1, x2, x)
}

/// `n` random admissible instances; the first five curves are attached.
pub fn shadow_lemma_sweep<S: BicombingSpace>(
    space: &S,
    a: &ConvexityModulus,
    consts: &ContractionConstants,
    n: usize,
    grid: usize,
    tol: f64,
    seed: u64,
) -> PropertyReport {
    let run = |rng: &mut SampleRng| {
        let (x1, x2, x) = sample_shadow_triple(space, consts, rng, 2.0);
        shadow_instance(space, a, consts, &x1, &x2, &x, grid)
    };
    let tally = Tally::new("shadow_lemma", &space.name(), seed, tol, space.mode());
    let mut report = sweep(tally, n, seed, |_, rng| match run(rng) {
        Ok((o, _)) => o,
        Err(e) => Outcome::new(f64::INFINITY, json!({"error": e.to_string()})),
    });
    for i in 0..n.min(5) {
        if let Ok((_, curve)) = run(&mut rng::stream(seed, i as u64)) {
            report = report.with_series(Series {
                label: format!("instance {i}"),
                x_label: "t".into(),
                y_label: "lhs - bound".into(),
                points: curve,
            });
        }
    }
    report.with_details(json!({"constants": consts, "bound": consts.shadow_bound(a), "grid": grid}))
}

/// Half-width of the window in which far trails are evaluated.
pub const FAR_WINDOW: f64 = 100.0;

/// Flow distance between `Φ_T c_{x₁, c_{x₁,x}(r)}` and
/// `Φ_{T+τ} c_{x₂, c_{x₂,x}(r)}` for the configuration `(l1, ρ, θ)` seen from
/// the apex. Inside the window both trails are points on the rays from
/// the apex; outside, the Lipschitz tail bound applies.
pub fn far_trail_distance<S: FarField>(
    space: &S,
    consts: &ContractionConstants,
    l1: f64,
    l2: f64,
    dir2: f64,
    tau: f64,
    quad_tol: f64,
) -> Result<(f64, f64)> {
    let apex = space.apex();
    let up = space.up();
    let (r, big_t) = (consts.r, consts.t);
    let at = |len: f64, dir: f64, shift: f64, s: f64| {
        let run = len.min(r);
        space.ray(&apex, dir, len - (shift + s).clamp(0.0, run))
    };
    let dist = |s: f64| space.dist(&at(l1, up, big_t, s), &at(l2, dir2, big_t + tau, s));
    let breaks = [-big_t, l1.min(r) - big_t, -big_t - tau, l2.min(r) - big_t - tau];
    let fd = weighted_integral(dist, (None, None), &breaks, quad_tol, FAR_WINDOW)?;
    Ok((fd.value, fd.error_bound))
}

/// Grid of `τ` values tried when the witness does not certify.
const TAU_GRID: usize = 201;

/// For `n` sampled far configurations, the witness `τ = l2 - l1` (or one of
/// [`TAU_GRID`] values in `[-f(β), f(β)]`) brings the two trails within
/// `δ` in the flow metric, up to quadrature error.
pub fn check_contraction<S: FarField>(
    space: &S,
    a: &ConvexityModulus,
    f: &LengthModulus,
    beta: f64,
    l: f64,
    delta: f64,
    n: usize,
    seed: u64,
) -> Result<PropertyReport> {
    let consts = contraction_constants(beta, l, delta, a, f)?;
    let quad_tol = 1e-3 * delta;
    let reach = consts.r + consts.l;
    let tally = Tally::new("contraction", &space.name(), seed, quad_tol, space.mode());
    let report = sweep(tally, n, seed, |_, rng| {
        // Half the samples start where the trails still move near time 0.
        let u = rng::unit(rng);
        let lo = if u < 0.5 {
            (consts.t - consts.r_prime - consts.f_beta - consts.l).max(0.0)
        } else if u < 0.75 {
            (consts.t - FAR_WINDOW - consts.r_prime).max(0.0)
        } else {
            0.0
        };
        let l1 = rng::uniform(rng, lo, reach);
        let rho = beta * rng::unit(rng);
        let theta = rng::uniform(rng, -std::f64::consts::PI, std::f64::consts::PI);
        let (l2, dir2) = space.far_triangle(l1, rho, theta);
        let witness = l2 - l1;
        let mut instance = json!({"l1": l1, "rho": rho, "theta": theta, "l2": l2, "tau": witness});
        let eval = |tau: f64| far_trail_distance(space, &consts, l1, l2, dir2, tau, quad_tol);
        let result = (|| -> Result<Outcome> {
            if witness.abs() > consts.f_beta * (1.0 + 1e-12) + 1e-12 {
                return Ok(Outcome::new(
                    f64::INFINITY,
                    json!({"instance": instance, "reason": "witness outside [-f(beta), f(beta)]"}),
                ));
            }
            let (v, err) = eval(witness)?;
            instance["distance"] = json!(v);
            instance["error_bound"] = json!(err);
            if v - err <= delta {
                return Ok(Outcome::new(v - err - delta, json!({"instance": instance, "via": "witness"})));
            }
            let mut best = (v - err - delta, witness);
            for k in 0..TAU_GRID {
                let tau = consts.f_beta * (2.0 * k as f64 / (TAU_GRID - 1) as f64 - 1.0);
                let (v, err) = eval(tau)?;
                if v - err - delta < best.0 {
                    best = (v - err - delta, tau);
                }
            }
            Ok(Outcome::new(best.0, json!({"instance": instance, "via": "grid", "tau": best.1})))
        })();
        result.unwrap_or_else(|e| Outcome::new(f64::INFINITY, json!({"error": e.to_string()})))
    });
    Ok(report.with_details(json!({"constants": consts, "quad_tol": quad_tol, "window": FAR_WINDOW})))
}

/// Recipe constants over a list of `delta` values. Every defining
/// inequality must hold, and `T` must not decrease as `delta` shrinks.
/// `T`, `r` and `r'` against `delta` are attached as series.
pub fn constants_sweep(
    space: &str,
    a: &ConvexityModulus,
    f: &LengthModulus,
    beta: f64,
    l: f64,
    deltas: &[f64],
) -> Result<PropertyReport> {
    if deltas.is_empty() {
        return Err(Error::Configuration("constants sweep needs at least one delta".into()));
    }
    let mut sorted = deltas.to_vec();
    sorted.sort_by(|x, y| y.total_cmp(x));
    let mut tally = Tally::new("constants_sweep", space, 0, 0.0, crate::space::DistanceMode::Exact);
    let mut all = Vec::new();
    let mut prev_t: Option<f64> = None;
    for &delta in &sorted {
        let c = contraction_constants(beta, l, delta, a, f)?;
        for cond in c.verify(a, f) {
            let excess = if cond.holds {
                (cond.lhs - cond.rhs).min(0.0)
            } else {
                (cond.lhs - cond.rhs).abs().max(f64::MIN_POSITIVE)
            };
            tally.push(Outcome::new(
                excess,
                json!({"delta": delta, "condition": cond.name, "lhs": cond.lhs, "rhs": cond.rhs}),
            ));
        }
        if let Some(t) = prev_t {
            tally.push(Outcome::new(t - c.t, json!({"delta": delta, "T": c.t, "previous T": t})));
        }
        prev_t = Some(c.t);
        all.push(c);
    }
    let curve = |label: &str, get: &dyn Fn(&ContractionConstants) -> f64| Series {
        label: label.into(),
        x_label: "delta".into(),
        y_label: label.into(),
        points: all.iter().map(|c| (c.delta, get(c))).collect(),
    };
    let series = vec![curve("T", &|c| c.t), curve("r", &|c| c.r), curve("r'", &|c| c.r_prime)];
    let mut report = tally.finish().with_details(json!({"beta": beta, "L": l, "constants": all}));
    report.series = series;
    Ok(report)
}
