//! Trails, the flow, restriction and the flow-space metric
//! `d(c, d) = ∫ d(c(t), d(t)) / (2 e^{|t|}) dt`.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{domain, Error, Result};
use crate::quad::piecewise;
use crate::report::{sweep, Outcome, PropertyReport, Tally};
use crate::rng::{self, SampleRng};
use crate::space::BicombingSpace;

/// Largest half-width of the integration window.
pub const T_MAX: f64 = 100.0;

/// `Φ_shift c_{x,y}`: runs along the chosen path from `x` to `y` at unit
/// speed during `[-shift, length - shift]` and is constant outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trail<P> {
    pub space: String,
    pub x: P,
    pub y: P,
    pub shift: f64,
    pub length: f64,
}

impl<P: Clone + PartialEq> Trail<P> {
    /// The length always comes from the space; constant trails carry shift 0.
    pub fn new<S: BicombingSpace<Point = P>>(space: &S, x: P, y: P, shift: f64) -> Self {
        let length = if x == y { 0.0 } else { space.path_length(&x, &y) };
        let shift = if length > 0.0 { shift } else { 0.0 };
        Trail { space: space.name(), x, y, shift, length }
    }

    pub fn constant<S: BicombingSpace<Point = P>>(space: &S, x: P) -> Self {
        Trail::new(space, x.clone(), x, 0.0)
    }

    pub fn is_constant(&self) -> bool {
        self.length == 0.0
    }

    /// Start `c₋ = -shift` of the moving part.
    pub fn c_minus(&self) -> f64 {
        -self.shift
    }

    /// End `c₊ = length - shift` of the moving part.
    pub fn c_plus(&self) -> f64 {
        self.length - self.shift
    }

    pub fn eval<S: BicombingSpace<Point = P>>(&self, space: &S, t: f64) -> P {
        let u = t + self.shift;
        if self.is_constant() || u <= 0.0 {
            return self.x.clone();
        }
        if u >= self.length {
            return self.y.clone();
        }
        space.bicombe(&self.x, &self.y, u / self.length)
    }

    /// `Φ_τ c`, i.e. `t -> c(t + τ)`.
    pub fn flow(&self, tau: f64) -> Self {
        let mut out = self.clone();
        if !self.is_constant() {
            out.shift += tau;
        }
        out
    }

    /// `res_{[a,b]} c` in canonical form `Φ_{-max(a, c₋)} c_{c(a), c(b)}`.
    pub fn restrict<S: BicombingSpace<Point = P>>(&self, space: &S, a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(domain(format!("restriction needs a < b, got [{a}, {b}]")));
        }
        if self.is_constant() {
            return Ok(self.clone());
        }
        let start = a.max(self.c_minus());
        Ok(Trail::new(space, self.eval(space, a), self.eval(space, b), -start))
    }

    /// Times where the trail stops being smooth.
    fn breakpoints(&self) -> Vec<f64> {
        if self.is_constant() {
            Vec::new()
        } else {
            vec![self.c_minus(), self.c_plus()]
        }
    }
}

/// Value of the flow metric with a bound on its numerical error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowDistance {
    pub value: f64,
    pub error_bound: f64,
}

impl FlowDistance {
    pub fn upper(&self) -> f64 {
        self.value + self.error_bound
    }

    pub fn lower(&self) -> f64 {
        (self.value - self.error_bound).max(0.0)
    }
}

/// Which certified distance the integrand uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Upper,
    Lower,
}

fn side_dist<S: BicombingSpace>(space: &S, side: Side, a: &S::Point, b: &S::Point) -> f64 {
    match side {
        Side::Upper => space.dist(a, b),
        Side::Lower => space.dist_lower(a, b),
    }
}

/// `∫_w^∞ (D + 2 (t - w)) e^{-t} / 2 dt`: tail bound for a 2-Lipschitz
/// integrand starting at `D`.
pub fn lipschitz_tail(d_w: f64, w: f64) -> f64 {
    (-w).exp() * (d_w + 2.0) / 2.0
}

/// Weighted integral of `dist(t)` over the real line.
///
/// `settled` gives times `(left, right)` beyond which the integrand is
/// constant, if known; those tails are integrated exactly. Other tails are
/// cut where the Lipschitz bound drops below `tol / 8`, at most at
/// `cap`, and the bound is added to the error.
pub fn weighted_integral<F: Fn(f64) -> f64>(
    dist: F,
    settled: (Option<f64>, Option<f64>),
    breaks: &[f64],
    tol: f64,
    cap: f64,
) -> Result<FlowDistance> {
    let mut error_bound = 0.0;
    let mut tails = 0.0;
    let mut edge = |settle: Option<f64>, sign: f64| -> Result<f64> {
        match settle {
            Some(s) if sign * s <= cap => {
                let w = (sign * s).max(0.0);
                tails += dist(sign * w) * (-w).exp() / 2.0;
                Ok(w)
            }
            _ => {
                let mut w: f64 = 1.0;
                loop {
                    let bound = lipschitz_tail(dist(sign * w), w);
                    if bound <= tol / 8.0 || (w >= cap && bound <= tol / 2.0) {
                        error_bound += bound;
                        return Ok(w);
                    }
                    if w >= cap {
                        return Err(Error::Accuracy(format!(
                            "tail bound {bound:e} at window {cap} exceeds tolerance {tol:e}"
                        )));
                    }
                    w = (w + 1.0).min(cap);
                }
            }
        }
    };
    let hi = edge(settled.1, 1.0)?;
    let lo = -edge(settled.0, -1.0)?;
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|b| b.is_finite()).collect();
    cuts.push(0.0);
    let q = piecewise(|t| dist(t) * 0.5 * (-t.abs()).exp(), lo, hi, &cuts, tol / 2.0)?;
    Ok(FlowDistance { value: q.value + tails, error_bound: error_bound + q.error_estimate })
}

/// Flow-space distance between two trails of one space.
pub fn fs_distance<S: BicombingSpace>(
    space: &S,
    c: &Trail<S::Point>,
    d: &Trail<S::Point>,
    tol: f64,
) -> Result<FlowDistance> {
    fs_distance_side(space, c, d, tol, Side::Upper)
}

pub fn fs_distance_side<S: BicombingSpace>(
    space: &S,
    c: &Trail<S::Point>,
    d: &Trail<S::Point>,
    tol: f64,
    side: Side,
) -> Result<FlowDistance> {
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    let dist = |t: f64| side_dist(space, side, &c.eval(space, t), &d.eval(space, t));
    if c.is_constant() && d.is_constant() {
        return Ok(FlowDistance { value: dist(0.0), error_bound: 0.0 });
    }
    let moving: Vec<&Trail<S::Point>> = [c, d].into_iter().filter(|t| !t.is_constant()).collect();
    let left = moving.iter().map(|t| t.c_minus()).fold(f64::INFINITY, f64::min);
    let right = moving.iter().map(|t| t.c_plus()).fold(f64::NEG_INFINITY, f64::max);
    let mut breaks = c.breakpoints();
    breaks.extend(d.breakpoints());
    weighted_integral(dist, (Some(left), Some(right)), &breaks, tol, T_MAX)
}

/// Random trail: endpoints at `scale`, shift in `[-shift_range, shift_range]`,
/// constant one time in ten.
pub fn random_trail<S: BicombingSpace>(
    space: &S,
    rng: &mut SampleRng,
    scale: f64,
    shift_range: f64,
) -> Trail<S::Point> {
    let x = space.sample(rng, scale);
    if rng::unit(rng) < 0.1 {
        return Trail::constant(space, x);
    }
    let y = space.sample(rng, scale);
    let shift = rng::uniform(rng, -shift_range, shift_range);
    Trail::new(space, x, y, shift)
}

/// Compares `restrict(c, a, b)` with `t -> c(clamp(t, a, b))` at `samples`
/// times spread over `[a - 2, b + 2]`.
pub fn check_restriction_consistency<S: BicombingSpace>(
    space: &S,
    c: &Trail<S::Point>,
    a: f64,
    b: f64,
    tol: f64,
    samples: usize,
) -> Result<PropertyReport> {
    let r = c.restrict(space, a, b)?;
    let mut tally = Tally::new("restriction_consistency", &space.name(), 0, tol, space.mode());
    let samples = samples.max(2);
    for i in 0..samples {
        let t = (a - 2.0) + (b - a + 4.0) * i as f64 / (samples - 1) as f64;
        let lhs = r.eval(space, t);
        let rhs = c.eval(space, t.clamp(a, b));
        let excess = space.dist(&lhs, &rhs);
        tally.push(Outcome::new(excess, json!({"t": t, "a": a, "b": b, "trail": c})));
    }
    Ok(tally.finish())
}

pub fn restriction_sweep<S: BicombingSpace>(space: &S, n: usize, tol: f64, seed: u64, scale: f64) -> PropertyReport {
    let tally = Tally::new("restriction_consistency", &space.name(), seed, tol, space.mode());
    sweep(tally, n, seed, |_, rng| {
        let c = random_trail(space, rng, scale, 3.0);
        let a = rng::uniform(rng, -4.0, 4.0);
        let b = a + rng::uniform(rng, 0.01, 6.0);
        match check_restriction_consistency(space, &c, a, b, tol, 25) {
            Ok(r) => Outcome::new(r.max_violation, r.witness),
            Err(e) => Outcome::new(f64::INFINITY, json!({"error": e.to_string()})),
        }
    })
}

/// Times `t₀` used by the evaluation bound.
pub const EVAL_TIMES: [f64; 7] = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];

/// `d(c(t₀), d(t₀)) <= e^{|t₀|} d_FS(c, d) + 2` using the upper value of
/// the flow distance; returns `lhs - rhs`.
pub fn eval_bound_excess<S: BicombingSpace>(
    space: &S,
    c: &Trail<S::Point>,
    d: &Trail<S::Point>,
    t0: f64,
    fs: &FlowDistance,
) -> f64 {
    let lhs = space.dist_lower(&c.eval(space, t0), &d.eval(space, t0));
    lhs - (t0.abs().exp() * fs.upper() + 2.0)
}

pub fn check_eval_bound<S: BicombingSpace>(
    space: &S,
    c: &Trail<S::Point>,
    d: &Trail<S::Point>,
    t0: f64,
    tol: f64,
) -> Result<PropertyReport> {
    let fs = fs_distance(space, c, d, tol.max(1e-12))?;
    let mut tally = Tally::new("eval_bound", &space.name(), 0, tol, space.mode());
    tally.push(Outcome::new(eval_bound_excess(space, c, d, t0, &fs), json!({"t0": t0, "c": c, "d": d})));
    Ok(tally.finish())
}

/// `d(Φ_τ c, Φ_σ d) <= e^{|τ|} d(c, d) + |σ - τ|`, lower flow distance on
/// the left and upper on the right; returns `lhs - rhs`.
pub fn shift_bound_excess<S: BicombingSpace>(
    space: &S,
    c: &Trail<S::Point>,
    d: &Trail<S::Point>,
    tau: f64,
    sigma: f64,
    quad_tol: f64,
) -> Result<f64> {
    let moved = fs_distance_side(space, &c.flow(tau), &d.flow(sigma), quad_tol, Side::Lower)?;
    let base = fs_distance_side(space, c, d, quad_tol, Side::Upper)?;
    Ok(moved.lower() - (tau.abs().exp() * base.upper() + (sigma - tau).abs()))
}

pub fn check_shift_bound<S: BicombingSpace>(
    space: &S,
    c: &Trail<S::Point>,
    d: &Trail<S::Point>,
    tau: f64,
    sigma: f64,
    tol: f64,
) -> Result<PropertyReport> {
    let excess = shift_bound_excess(space, c, d, tau, sigma, tol.max(1e-12))?;
    let mut tally = Tally::new("shift_bound", &space.name(), 0, tol, space.mode());
    tally.push(Outcome::new(excess, json!({"tau": tau, "sigma": sigma, "c": c, "d": d})));
    Ok(tally.finish())
}

/// Grid of flow parameters `(τ, σ)` in `[-3, 3]²`.
pub fn shift_grid() -> Vec<(f64, f64)> {
    let g = [-3.0, -1.5, 0.0, 1.5, 3.0];
    g.iter().flat_map(|&a| g.iter().map(move |&b| (a, b))).collect()
}

/// Both bounds on `n` random trail pairs: every `t₀` in [`EVAL_TIMES`] and
/// one `(τ, σ)` from [`shift_grid`] per pair, cycling through the grid.
pub fn flow_bounds_sweep<S: BicombingSpace>(
    space: &S,
    n: usize,
    tol: f64,
    quad_tol: f64,
    seed: u64,
    scale: f64,
) -> PropertyReport {
    let grid = shift_grid();
    let tally = Tally::new("flow_bounds", &space.name(), seed, tol, space.mode());
    sweep(tally, n, seed, |i, rng| {
        let c = random_trail(space, rng, scale, 3.0);
        let d = random_trail(space, rng, scale, 3.0);
        let (tau, sigma) = grid[(i as usize) % grid.len()];
        let run = || -> Result<Outcome> {
            let fs = fs_distance(space, &c, &d, quad_tol)?;
            let mut out = Outcome::new(f64::NEG_INFINITY, json!(null));
            for &t0 in &EVAL_TIMES {
                let e = eval_bound_excess(space, &c, &d, t0, &fs);
                out = out.worst(Outcome::new(e, json!({"bound": "eval", "t0": t0, "c": c, "d": d})));
            }
            let e = shift_bound_excess(space, &c, &d, tau, sigma, quad_tol)?;
            Ok(out.worst(Outcome::new(e, json!({"bound": "shift", "tau": tau, "sigma": sigma, "c": c, "d": d}))))
        };
        run().unwrap_or_else(|e| Outcome::new(f64::INFINITY, json!({"error": e.to_string()})))
    })
    .with_details(json!({"quad_tol": quad_tol, "eval_times": EVAL_TIMES, "shift_grid": grid}))
}

/// Constant trails: `|fs(x, y) - d(x, y)|`, compared with `tol` directly.
pub fn weight_normalization_sweep<S: BicombingSpace>(
    space: &S,
    n: usize,
    tol: f64,
    quad_tol: f64,
    seed: u64,
    scale: f64,
) -> PropertyReport {
    let tally = Tally::new("weight_normalization", &space.name(), seed, tol, space.mode());
    sweep(tally, n, seed, |_, rng| {
        let (x, y) = (space.sample(rng, scale), space.sample(rng, scale));
        let d = space.dist(&x, &y);
        match fs_distance(space, &Trail::constant(space, x.clone()), &Trail::constant(space, y.clone()), quad_tol) {
            Ok(fs) => Outcome::new(
                (fs.value - d).abs(),
                json!({"x": x, "y": y, "fs": fs.value, "d": d, "error_bound": fs.error_bound}),
            ),
            Err(e) => Outcome::new(f64::INFINITY, json!({"x": x, "y": y, "error": e.to_string()})),
        }
    })
}
