//! Transfer maps: the retraction onto `P_R(x₀)`, the homotopy action
//! `Ψ = H₀ ∘ Ω`, the map `ι`, and sampled checks of the transfer condition.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::contraction::{contraction_constants, ContractionConstants};
use crate::error::{domain, Error, Result};
use crate::euclid::Euclidean;
use crate::flow::{fs_distance, Trail};
use crate::h2::{point_at, H2Point, H2Space, Mobius};
use crate::modulus::{ConvexityModulus, LengthModulus};
use crate::report::{sweep, Outcome, PropertyReport, Tally};
use crate::rng::{self, SampleRng};
use crate::space::BicombingSpace;

pub type Pt<A> = <<A as GroupAction>::Space as BicombingSpace>::Point;

/// A group acting by isometries, with exact arithmetic on its elements.
pub trait GroupAction: Send + Sync {
    type Space: BicombingSpace;
    type Elem: Clone + Eq + Hash + Debug + Serialize + Send + Sync;

    fn name(&self) -> String;
    fn space(&self) -> &Self::Space;
    fn identity(&self) -> Self::Elem;
    /// The product `a b`, acting as `x -> a (b x)`.
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inverse(&self, a: &Self::Elem) -> Self::Elem;
    fn act(&self, g: &Self::Elem, x: &Pt<Self>) -> Pt<Self>;
    /// Generators without inverses.
    fn generators(&self) -> Vec<Self::Elem>;

    fn base_point(&self) -> Pt<Self> {
        self.space().base_point()
    }

    /// Random point with `l(c_{x₀,y}) <= radius`.
    fn sample_within(&self, rng: &mut SampleRng, radius: f64) -> Pt<Self>;

    /// `{e} ∪ generators ∪ inverses`, without repeats.
    fn symmetric_set(&self) -> Vec<Self::Elem> {
        let mut s = vec![self.identity()];
        for g in self.generators() {
            for h in [self.inverse(&g), g] {
                if !s.contains(&h) {
                    s.push(h);
                }
            }
        }
        s
    }

    fn product(&self, word: &[Self::Elem]) -> Self::Elem {
        word.iter().fold(self.identity(), |acc, g| self.mul(&acc, g))
    }
}

/// Path length drawn so that half of the samples sit within 30 of
/// `radius`, where the flowed trails still move near time 0.
fn sample_length(rng: &mut SampleRng, radius: f64) -> f64 {
    if rng::unit(rng) < 0.5 {
        radius - (0.02 * radius).min(30.0) * rng::unit(rng)
    } else {
        radius * rng::unit(rng)
    }
}

/// `Z²` acting on the plane by `(m, n) · x = x + m v₁ + n v₂`.
#[derive(Debug, Clone)]
pub struct LatticeAction {
    pub plane: Euclidean,
    pub v1: [f64; 2],
    pub v2: [f64; 2],
}

impl LatticeAction {
    pub fn new(v1: [f64; 2], v2: [f64; 2]) -> Result<Self> {
        let det = v1[0] * v2[1] - v1[1] * v2[0];
        if !(det.abs() > 1e-12) || !v1.iter().chain(&v2).all(|c| c.is_finite()) {
            return Err(domain(format!("translation vectors {v1:?}, {v2:?} are not independent")));
        }
        Ok(LatticeAction { plane: Euclidean::plane(), v1, v2 })
    }

    pub fn unit() -> Self {
        LatticeAction::new([1.0, 0.0], [0.0, 1.0]).expect("unit lattice")
    }
}

impl GroupAction for LatticeAction {
    type Space = Euclidean;
    type Elem = [i64; 2];

    fn name(&self) -> String {
        "z2-translations".into()
    }

    fn space(&self) -> &Euclidean {
        &self.plane
    }

    fn identity(&self) -> [i64; 2] {
        [0, 0]
    }

    fn mul(&self, a: &[i64; 2], b: &[i64; 2]) -> [i64; 2] {
        [a[0] + b[0], a[1] + b[1]]
    }

    fn inverse(&self, a: &[i64; 2]) -> [i64; 2] {
        [-a[0], -a[1]]
    }

    fn act(&self, g: &[i64; 2], x: &Vec<f64>) -> Vec<f64> {
        let (m, n) = (g[0] as f64, g[1] as f64);
        vec![x[0] + m * self.v1[0] + n * self.v2[0], x[1] + m * self.v1[1] + n * self.v2[1]]
    }

    fn generators(&self) -> Vec<[i64; 2]> {
        vec![[1, 0], [0, 1]]
    }

    fn sample_within(&self, rng: &mut SampleRng, radius: f64) -> Vec<f64> {
        let len = sample_length(rng, radius);
        let a = rng::uniform(rng, -std::f64::consts::PI, std::f64::consts::PI);
        vec![len * a.cos(), len * a.sin()]
    }
}

/// Element `z -> λⁿ z + b Σ c_j λ^j` of the affine group generated by
/// `z -> λ z` and `z -> λ z + b`, kept symbolically so equality is exact.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineElem {
    pub n: i64,
    pub c: BTreeMap<i64, i64>,
}

/// Two hyperbolic isometries of the upper half-plane sharing the fixed
/// point `∞`: `z -> λ z` and `z -> λ z + b`.
#[derive(Debug, Clone)]
pub struct AffineH2Action {
    pub lambda: f64,
    pub b: f64,
}

impl AffineH2Action {
    pub fn new(lambda: f64, b: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite() && lambda != 1.0 && b.is_finite()) {
            return Err(domain(format!("need positive lambda != 1 and finite b, got {lambda}, {b}")));
        }
        Ok(AffineH2Action { lambda, b })
    }

    /// Translation length 0.05 for both generators.
    pub fn reference() -> Self {
        AffineH2Action::new(0.05f64.exp(), 0.05).expect("reference action")
    }

    pub fn mobius(&self, g: &AffineElem) -> Mobius {
        let shift: f64 = g.c.iter().map(|(&j, &c)| c as f64 * self.lambda.powi(j as i32)).sum();
        Mobius::affine(self.lambda.powi(g.n as i32), self.b * shift).expect("affine map")
    }
}

fn clean(mut c: BTreeMap<i64, i64>) -> BTreeMap<i64, i64> {
    c.retain(|_, v| *v != 0);
    c
}

impl GroupAction for AffineH2Action {
    type Space = H2Space;
    type Elem = AffineElem;

    fn name(&self) -> String {
        "h2-affine".into()
    }

    fn space(&self) -> &H2Space {
        &H2Space
    }

    fn identity(&self) -> AffineElem {
        AffineElem { n: 0, c: BTreeMap::new() }
    }

    fn mul(&self, a: &AffineElem, b: &AffineElem) -> AffineElem {
        // a(b z) = λ^{n_a + n_b} z + b (λ^{n_a} p_b + p_a).
        let mut c = a.c.clone();
        for (&j, &v) in &b.c {
            *c.entry(j + a.n).or_insert(0) += v;
        }
        AffineElem { n: a.n + b.n, c: clean(c) }
    }

    fn inverse(&self, a: &AffineElem) -> AffineElem {
        let c = a.c.iter().map(|(&j, &v)| (j - a.n, -v)).collect();
        AffineElem { n: -a.n, c: clean(c) }
    }

    fn act(&self, g: &AffineElem, x: &H2Point) -> H2Point {
        self.mobius(g).apply(x)
    }

    fn generators(&self) -> Vec<AffineElem> {
        vec![AffineElem { n: 1, c: BTreeMap::new() }, AffineElem { n: 1, c: BTreeMap::from([(0, 1)]) }]
    }

    /// Far points lie on the axis through `x₀` and `∞`, where coordinates
    /// stay accurate; rotating about `x₀` conjugates the action, so this
    /// loses nothing up to the choice of generators.
    fn sample_within(&self, rng: &mut SampleRng, radius: f64) -> H2Point {
        let len = sample_length(rng, radius);
        let angle = if len > 10.0 {
            std::f64::consts::FRAC_PI_2
        } else {
            rng::uniform(rng, -std::f64::consts::PI, std::f64::consts::PI)
        };
        point_at(&H2Point::ORIGIN, angle, len)
    }
}

/// `y ∈ P_r(x₀)`, i.e. `l(c_{x₀,y}) <= r`.
pub fn p_radius_membership<S: BicombingSpace>(space: &S, x0: &S::Point, r: f64, y: &S::Point) -> bool {
    y == x0 || space.path_length(x0, y) <= r
}

/// `H(x, t) = c_{x₀,x}((1 - t)(R - l) + l)` with `l = l(c_{x₀,x})`.
pub fn retract_h<S: BicombingSpace>(space: &S, x0: &S::Point, r: f64, x: &S::Point, t: f64) -> S::Point {
    let c = Trail::new(space, x0.clone(), x.clone(), 0.0);
    c.eval(space, (1.0 - t) * (r - c.length) + c.length)
}

/// Arguments `(g_j, t_j, ..., t_1, g_0)` of `Ψ` stored innermost first:
/// `g[i]` is `g_i` and `t[i - 1]` is `t_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyWord<E> {
    pub g: Vec<E>,
    pub t: Vec<f64>,
}

impl<E: Clone> HomotopyWord<E> {
    pub fn new(g: Vec<E>, t: Vec<f64>) -> Result<Self> {
        if g.is_empty() || t.len() + 1 != g.len() {
            return Err(domain(format!(
                "{} group elements need {} times, got {}",
                g.len(),
                g.len().max(1) - 1,
                t.len()
            )));
        }
        if let Some(bad) = t.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(domain(format!("time {bad} outside [0, 1]")));
        }
        Ok(HomotopyWord { g, t })
    }

    pub fn single(g: E) -> Self {
        HomotopyWord { g: vec![g], t: Vec::new() }
    }

    /// Index `j` of the outermost element.
    pub fn depth(&self) -> usize {
        self.g.len() - 1
    }
}

/// Base point, radius and flow time of a transfer, derived from `S`, `k`, `δ`.
#[derive(Debug, Clone, Serialize)]
pub struct TransferConfig<E, P> {
    pub s: Vec<E>,
    pub k: usize,
    pub delta: f64,
    pub x0: P,
    pub beta_prime: f64,
    pub beta: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "R")]
    pub r: f64,
    /// Constants for pairs at distance `β′`, targeting `δ / (e^β (k + 1))`.
    pub constants: ContractionConstants,
    /// `β′ = 0`: all of `S` fixes `x₀`.
    pub degenerate: bool,
    /// `2 dim(X) + 1`, carried as metadata.
    pub n_dominated: Option<usize>,
}

pub fn transfer_constants<A: GroupAction>(
    action: &A,
    a: &ConvexityModulus,
    f: &LengthModulus,
    s: &[A::Elem],
    k: usize,
    delta: f64,
) -> Result<TransferConfig<A::Elem, Pt<A>>> {
    if !s.contains(&action.identity()) {
        return Err(Error::Precondition("the subset S must contain the identity".into()));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(domain(format!("delta must be positive, got {delta}")));
    }
    let space = action.space();
    let x0 = action.base_point();
    let images: Vec<Pt<A>> = s.iter().map(|g| action.act(g, &x0)).collect();
    let mut beta_prime: f64 = 0.0;
    for p in &images {
        for q in &images {
            beta_prime = beta_prime.max(space.dist(p, q));
        }
    }
    let beta = (k + 1) as f64 * f.eval(beta_prime);
    let target = delta / (beta.exp() * (k + 1) as f64);
    let constants = contraction_constants(beta_prime, beta.max(f64::MIN_POSITIVE), target, a, f)?;
    Ok(TransferConfig {
        s: s.to_vec(),
        k,
        delta,
        x0,
        beta_prime,
        beta,
        t: constants.t,
        r: constants.r,
        constants,
        degenerate: beta_prime == 0.0,
        n_dominated: None,
    })
}

type Config<A> = TransferConfig<<A as GroupAction>::Elem, Pt<A>>;

/// `Ω(g_j, t_j, ..., g_0, x) = g_j H_{t_j}(Ω(g_{j-1}, ..., x))`, `Ω(g, x) = g x`.
pub fn omega<A: GroupAction>(action: &A, cfg: &Config<A>, w: &HomotopyWord<A::Elem>, x: &Pt<A>) -> Pt<A> {
    let space = action.space();
    let mut y = action.act(&w.g[0], x);
    for i in 1..w.g.len() {
        y = action.act(&w.g[i], &retract_h(space, &cfg.x0, cfg.r, &y, w.t[i - 1]));
    }
    y
}

/// Slack on `P_R` membership for points produced by floating point.
fn in_p_r<A: GroupAction>(action: &A, cfg: &Config<A>, x: &Pt<A>) -> bool {
    let space = action.space();
    x == &cfg.x0 || space.path_length(&cfg.x0, x) <= cfg.r * (1.0 + 1e-12) + 1e-12
}

/// `Ψ = H₀ ∘ Ω` on `P_R(x₀)`.
pub fn homotopy_action_eval<A: GroupAction>(
    action: &A,
    cfg: &Config<A>,
    w: &HomotopyWord<A::Elem>,
    x: &Pt<A>,
) -> Result<Pt<A>> {
    if !in_p_r(action, cfg, x) {
        return Err(Error::Precondition(format!("point {x:?} lies outside P_R(x0) with R = {}", cfg.r)));
    }
    Ok(retract_h(action.space(), &cfg.x0, cfg.r, &omega(action, cfg, w, x), 0.0))
}

/// All `(g_k, ..., g_0)` over `S` with `g_k ⋯ g_0 = a`, innermost first.
pub fn factorizations<A: GroupAction>(action: &A, s: &[A::Elem], a: &A::Elem, k: usize) -> Vec<Vec<A::Elem>> {
    // Depth-first over S^{k+1}, pruning with the set of products reachable
    // by the remaining letters.
    let mut reach: Vec<Vec<A::Elem>> = vec![vec![action.identity()]];
    for _ in 0..=k {
        let last = reach.last().expect("nonempty");
        let mut next: Vec<A::Elem> = Vec::new();
        for p in last {
            for g in s {
                let q = action.mul(g, p);
                if !next.contains(&q) {
                    next.push(q);
                }
            }
        }
        reach.push(next);
    }
    let mut out = Vec::new();
    // Choose g_k first; `need` is what g_{i} ⋯ g_0 must equal.
    fn dfs<A: GroupAction>(
        action: &A,
        s: &[A::Elem],
        reach: &[Vec<A::Elem>],
        i: usize,
        need: A::Elem,
        acc: &mut Vec<A::Elem>,
        out: &mut Vec<Vec<A::Elem>>,
    ) {
        if !reach[i + 1].contains(&need) {
            return;
        }
        for g in s {
            let rest = action.mul(&action.inverse(g), &need);
            acc.push(g.clone());
            if i == 0 {
                if rest == action.identity() {
                    out.push(acc.iter().rev().cloned().collect());
                }
            } else {
                dfs(action, s, reach, i - 1, rest, acc, out);
            }
            acc.pop();
        }
    }
    dfs(action, s, &reach, k, a.clone(), &mut Vec::new(), &mut out);
    out.dedup();
    out
}

/// `m` elements of `F_a(Ψ, S, k)` with uniform random times.
pub fn sample_f<A: GroupAction>(
    action: &A,
    s: &[A::Elem],
    a: &A::Elem,
    k: usize,
    m: usize,
    seed: u64,
) -> Result<Vec<HomotopyWord<A::Elem>>> {
    let facts = factorizations(action, s, a, k);
    if facts.is_empty() {
        return Err(Error::Unrepresentable(format!("{a:?} is not a product of {} elements of S", k + 1)));
    }
    Ok((0..m as u64)
        .map(|i| {
            let mut r = rng::stream(seed, i);
            let g = facts[(rng::unit(&mut r) * facts.len() as f64) as usize % facts.len()].clone();
            let t = (0..k).map(|_| rng::unit(&mut r)).collect();
            HomotopyWord { g, t }
        })
        .collect())
}

/// `ι(g, x) = c_{g x₀, g x}`.
pub fn iota<A: GroupAction>(action: &A, cfg: &Config<A>, g: &A::Elem, x: &Pt<A>) -> Trail<Pt<A>> {
    Trail::new(action.space(), action.act(g, &cfg.x0), action.act(g, x), 0.0)
}

fn random_word<A: GroupAction>(
    action: &A,
    cfg: &Config<A>,
    rng: &mut SampleRng,
    depth: usize,
) -> HomotopyWord<A::Elem> {
    let e = action.identity();
    let g = (0..=depth)
        .map(|_| {
            if rng::unit(rng) < 0.3 {
                e.clone()
            } else {
                cfg.s[(rng::unit(rng) * cfg.s.len() as f64) as usize % cfg.s.len()].clone()
            }
        })
        .collect();
    let t = (0..depth).map(|_| rng::unit(rng)).collect();
    HomotopyWord { g, t }
}

/// The six identities of a strong homotopy action, each tested on a
/// random word of depth at most 2 modified to meet its hypothesis.
pub fn check_homotopy_axioms<A: GroupAction>(
    action: &A,
    cfg: &Config<A>,
    n: usize,
    tol: f64,
    seed: u64,
) -> PropertyReport {
    let space = action.space();
    let tally = Tally::new("homotopy_action_axioms", &space.name(), seed, tol, space.mode());
    sweep(tally, n, seed, |_, rng| {
        let x = action.sample_within(rng, cfg.r);
        let depth = (rng::unit(rng) * 3.0) as usize % 3;
        let w = random_word(action, cfg, rng, depth);
        let psi = |w: &HomotopyWord<A::Elem>, x: &Pt<A>| homotopy_action_eval(action, cfg, w, x);
        let run = || -> Result<Outcome> {
            let mut out = Outcome::new(f64::NEG_INFINITY, Value::Null);
            let mut record = |axiom: u8, w: &HomotopyWord<A::Elem>, lhs: Pt<A>, rhs: Pt<A>| {
                let d = space.dist(&lhs, &rhs);
                out = std::mem::replace(&mut out, Outcome::new(0.0, Value::Null))
                    .worst(Outcome::new(d, json!({"axiom": axiom, "word": w, "x": x, "defect": d})));
            };
            let j = w.depth();
            for l in 1..=j {
                let mut w0 = w.clone();
                w0.t[l - 1] = 0.0;
                let inner = HomotopyWord { g: w.g[..l].to_vec(), t: w.t[..l - 1].to_vec() };
                let outer = HomotopyWord { g: w.g[l..].to_vec(), t: w.t[l..].to_vec() };
                record(1, &w0, psi(&w0, &x)?, psi(&outer, &psi(&inner, &x)?)?);

                let mut w1 = w.clone();
                w1.t[l - 1] = 1.0;
                let mut merged = w.clone();
                let prod = action.mul(&w.g[l], &w.g[l - 1]);
                merged.g.splice(l - 1..=l, [prod]);
                merged.t.remove(l - 1);
                record(2, &w1, psi(&w1, &x)?, psi(&merged, &x)?);
            }
            if j >= 1 {
                let mut w3 = w.clone();
                w3.g[j] = action.identity();
                let shorter = HomotopyWord { g: w.g[..j].to_vec(), t: w.t[..j - 1].to_vec() };
                record(3, &w3, psi(&w3, &x)?, psi(&shorter, &x)?);

                let mut w5 = w.clone();
                w5.g[0] = action.identity();
                let dropped = HomotopyWord { g: w.g[1..].to_vec(), t: w.t[1..].to_vec() };
                record(5, &w5, psi(&w5, &x)?, psi(&dropped, &x)?);
            }
            for l in 2..=j {
                let mut w4 = w.clone();
                w4.g[l - 1] = action.identity();
                let mut merged = w.clone();
                merged.g.remove(l - 1);
                merged.t[l - 1] = w.t[l - 1] * w.t[l - 2];
                merged.t.remove(l - 2);
                record(4, &w4, psi(&w4, &x)?, psi(&merged, &x)?);
            }
            record(
                6,
                &HomotopyWord::single(action.identity()),
                psi(&HomotopyWord::single(action.identity()), &x)?,
                x.clone(),
            );
            Ok(out)
        };
        run().unwrap_or_else(|e| Outcome::new(f64::INFINITY, json!({"error": e.to_string(), "word": w, "x": x})))
    })
}

/// `H_t ∘ H_{t'} = H_{t t'}` at random points of the whole space.
pub fn check_h_semigroup<A: GroupAction>(action: &A, cfg: &Config<A>, n: usize, tol: f64, seed: u64) -> PropertyReport {
    let space = action.space();
    let tally = Tally::new("h_semigroup", &space.name(), seed, tol, space.mode());
    sweep(tally, n, seed, |_, rng| {
        // Reach a little beyond P_R, where H actually moves points.
        let x = action.sample_within(rng, cfg.r + (0.2 * cfg.r).min(20.0));
        let (t, t2) = (rng::unit(rng), rng::unit(rng));
        let h = |y: &Pt<A>, s: f64| retract_h(space, &cfg.x0, cfg.r, y, s);
        let d = space.dist(&h(&h(&x, t2), t), &h(&x, t * t2));
        Outcome::new(d, json!({"x": x, "t": t, "t2": t2}))
    })
}

/// `ι(h g, x)(s) = h ι(g, x)(s)` at `times` points for random `h, g, x`.
pub fn check_iota_equivariance<A: GroupAction>(
    action: &A,
    cfg: &Config<A>,
    n: usize,
    times: usize,
    tol: f64,
    seed: u64,
) -> PropertyReport {
    let space = action.space();
    let tally = Tally::new("iota_equivariance", &space.name(), seed, tol, space.mode());
    sweep(tally, n, seed, |_, rng| {
        let pick = |rng: &mut SampleRng| {
            let w = random_word(action, cfg, rng, 1);
            action.product(&w.g)
        };
        let (h, g) = (pick(rng), pick(rng));
        let x = action.sample_within(rng, cfg.r.min(20.0));
        let lhs = iota(action, cfg, &action.mul(&h, &g), &x);
        let rhs = iota(action, cfg, &g, &x);
        let span = lhs.length.max(1.0);
        let mut worst: f64 = 0.0;
        for i in 0..times.max(2) {
            let s = -1.0 + (span + 2.0) * i as f64 / (times.max(2) - 1) as f64;
            worst = worst.max(space.dist(&lhs.eval(space, s), &action.act(&h, &rhs.eval(space, s))));
        }
        Outcome::new(worst, json!({"h": h, "g": g, "x": x}))
    })
}

/// One step of the inductive witness: trails compared after step `m`.
#[derive(Debug, Clone, Serialize)]
pub struct TransferStep {
    pub m: usize,
    pub tau_step: f64,
    pub tau: f64,
    pub distance: f64,
    pub error_bound: f64,
    pub bound: f64,
}

/// Quadrature tolerance used for transfer distances.
fn transfer_quad_tol<E, P>(cfg: &TransferConfig<E, P>) -> f64 {
    1e-3 * cfg.delta / (cfg.k + 1) as f64
}

/// Fallback grid over `[-β, β]`.
const TAU_GRID: usize = 201;

/// Evaluate condition (∗) at `(e, z)` for `f = Ψ(g_k, t_k, ..., g_0, ·)`:
/// the witness `τ = Σ τ_m` with `τ_m = l(c_{g_m⁻¹x₀, w_m}) - l(c_{x₀, w_m})`,
/// where `w_0 = z` and `w_m = H_{t_m}(Ω(g_{m-1}, ..., g_0, z))`, and the
/// stepwise bounds `(m + 1) δ / (k + 1)`.
pub fn transfer_instance<A: GroupAction>(
    action: &A,
    f: &LengthModulus,
    cfg: &Config<A>,
    word: &HomotopyWord<A::Elem>,
    z: &Pt<A>,
) -> Result<Outcome> {
    let space = action.space();
    let k = word.depth();
    let quad_tol = transfer_quad_tol(cfg);
    let f_step = f.eval(cfg.beta_prime);
    let start = iota(action, cfg, &action.identity(), z).flow(cfg.t);
    let mut steps = Vec::with_capacity(k + 1);
    let mut tau = 0.0;
    let mut excess = f64::NEG_INFINITY;
    let mut inner = z.clone();
    let mut last = None;
    for m in 0..=k {
        let wm = if m == 0 { z.clone() } else { retract_h(space, &cfg.x0, cfg.r, &inner, word.t[m - 1]) };
        let gm_inv = action.inverse(&word.g[m]);
        let tau_step = space.path_length(&action.act(&gm_inv, &cfg.x0), &wm) - space.path_length(&cfg.x0, &wm);
        excess = excess.max(tau_step.abs() - f_step * (1.0 + 1e-12) - 1e-12);
        tau += tau_step;
        let prefix = HomotopyWord { g: word.g[..=m].to_vec(), t: word.t[..m].to_vec() };
        inner = omega(action, cfg, &prefix, z);
        let image = retract_h(space, &cfg.x0, cfg.r, &inner, 0.0);
        let a_inv = action.inverse(&action.product(&prefix.g.iter().rev().cloned().collect::<Vec<_>>()));
        let target = iota(action, cfg, &a_inv, &image);
        let fd = fs_distance(space, &start, &target.flow(cfg.t + tau), quad_tol)?;
        let bound = (m + 1) as f64 * cfg.delta / (k + 1) as f64;
        excess = excess.max(fd.lower() - bound);
        steps.push(TransferStep { m, tau_step, tau, distance: fd.value, error_bound: fd.error_bound, bound });
        last = Some(target);
    }
    let target = last.expect("at least one step");
    let mut via = "witness";
    let mut grid_tau = Value::Null;
    if excess > 0.0 {
        let mut best = f64::INFINITY;
        for i in 0..TAU_GRID {
            let tau = cfg.beta * (2.0 * i as f64 / (TAU_GRID - 1) as f64 - 1.0);
            let fd = fs_distance(space, &start, &target.flow(cfg.t + tau), quad_tol)?;
            if fd.lower() - cfg.delta < best {
                best = fd.lower() - cfg.delta;
                grid_tau = json!(tau);
            }
        }
        if best <= 0.0 {
            via = "grid";
            excess = best;
        }
    }
    Ok(Outcome::new(excess, json!({"z": z, "word": word, "steps": steps, "via": via, "grid_tau": grid_tau})))
}

/// Condition (∗) on `n` samples: `z ∈ P_R(x₀)`, a word of `k + 1` random
/// elements of `S`, random times.
pub fn check_transfer_condition<A: GroupAction>(
    action: &A,
    f: &LengthModulus,
    cfg: &Config<A>,
    n: usize,
    seed: u64,
) -> PropertyReport {
    let space = action.space();
    let quad_tol = transfer_quad_tol(cfg);
    let tally = Tally::new("transfer_condition", &space.name(), seed, quad_tol, space.mode());
    sweep(tally, n, seed, |_, rng| {
        let z = action.sample_within(rng, cfg.r);
        let g =
            (0..=cfg.k).map(|_| cfg.s[(rng::unit(rng) * cfg.s.len() as f64) as usize % cfg.s.len()].clone()).collect();
        let t = (0..cfg.k).map(|_| rng::unit(rng)).collect();
        let word = HomotopyWord { g, t };
        transfer_instance(action, f, cfg, &word, &z)
            .unwrap_or_else(|e| Outcome::new(f64::INFINITY, json!({"error": e.to_string(), "word": word, "z": z})))
    })
    .with_details(json!({"config": cfg}))
}

/// Times tried for each factorization in the witness search.
const WITNESS_TIMES: [f64; 3] = [0.0, 0.5, 1.0];

fn time_vectors(k: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out.into_iter().flat_map(|v| WITNESS_TIMES.iter().map(move |&t| [v.clone(), vec![t]].concat())).collect();
    }
    out
}

/// Membership `(h, y) ∈ S¹(g, x)` certified by an explicit
/// `a, b ∈ S`, `f ∈ F_a`, `f' ∈ F_b` with `d(f(x), f'(y)) <= tol` and
/// `h = g a⁻¹ b`. Tries every factorization with times on a small grid,
/// then `m` random ones. Returns the witness when found.
pub fn s1_witness_check<A: GroupAction>(
    action: &A,
    cfg: &Config<A>,
    (g, x): (&A::Elem, &Pt<A>),
    (h, y): (&A::Elem, &Pt<A>),
    tol: f64,
    m: usize,
    seed: u64,
) -> Result<Option<Value>> {
    let space = action.space();
    type Images<E, P> = Result<Vec<(HomotopyWord<E>, P)>>;
    let images = |a: &A::Elem, p: &Pt<A>, salt: u64| -> Images<A::Elem, Pt<A>> {
        let mut words = Vec::new();
        for fact in factorizations(action, &cfg.s, a, cfg.k) {
            for t in time_vectors(cfg.k) {
                words.push(HomotopyWord { g: fact.clone(), t });
            }
        }
        if !words.is_empty() {
            words.extend(sample_f(action, &cfg.s, a, cfg.k, m, seed ^ salt)?);
        }
        words.into_iter().map(|w| homotopy_action_eval(action, cfg, &w, p).map(|q| (w, q))).collect()
    };
    for a in &cfg.s {
        for b in &cfg.s {
            let candidate = action.mul(&action.mul(g, &action.inverse(a)), b);
            if &candidate != h {
                continue;
            }
            let left = images(a, x, 1)?;
            let right = images(b, y, 2)?;
            for (wf, fx) in &left {
                for (wf2, fy) in &right {
                    let d = space.dist(fx, fy);
                    if d <= tol {
                        return Ok(Some(json!({"a": a, "b": b, "f": wf, "f_prime": wf2, "distance": d})));
                    }
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulus::linear_modulus;

    fn z2() -> (LatticeAction, Config<LatticeAction>) {
        let act = LatticeAction::unit();
        let s = act.symmetric_set();
        let cfg = transfer_constants(&act, &linear_modulus(), &LengthModulus::identity(), &s, 2, 0.1).unwrap();
        (act, cfg)
    }

    #[test]
    fn affine_arithmetic_matches_mobius() {
        let act = AffineH2Action::reference();
        let gens = act.symmetric_set();
        let p = H2Point::new(0.3, 1.7).unwrap();
        for a in &gens {
            for b in &gens {
                let ab = act.mul(a, b);
                let direct = act.act(a, &act.act(b, &p));
                let q = act.act(&ab, &p);
                assert!((q.x - direct.x).abs() < 1e-12 && (q.y - direct.y).abs() < 1e-12);
                assert_eq!(act.mul(&ab, &act.inverse(&ab)), act.identity());
            }
        }
    }

    #[test]
    fn retraction_fixes_the_ball_and_lands_in_it() {
        let (act, cfg) = z2();
        let inside = vec![3.0, 4.0];
        assert_eq!(retract_h(&act.plane, &cfg.x0, cfg.r, &inside, 0.3), inside);
        let far = vec![2.0 * cfg.r, 0.0];
        let h0 = retract_h(&act.plane, &cfg.x0, cfg.r, &far, 0.0);
        assert!((h0[0] - cfg.r).abs() < 1e-6 * cfg.r);
        assert_eq!(retract_h(&act.plane, &cfg.x0, cfg.r, &cfg.x0, 0.5), cfg.x0);
    }

    #[test]
    fn factorizations_of_small_words() {
        let act = LatticeAction::unit();
        let s = act.symmetric_set();
        assert_eq!(factorizations(&act, &s, &[0, 0], 0), vec![vec![[0, 0]]]);
        let f = factorizations(&act, &s, &[1, 0], 1);
        assert!(f.contains(&vec![[1, 0], [0, 0]]) && f.contains(&vec![[0, 0], [1, 0]]));
        assert!(factorizations(&act, &s, &[1, 1], 2).len() >= 2);
        assert!(sample_f(&act, &s, &[3, 0], 1, 2, 0).is_err());
    }

    #[test]
    fn identity_word_is_identity() {
        let (act, cfg) = z2();
        let x = vec![1.0, -2.0];
        assert_eq!(homotopy_action_eval(&act, &cfg, &HomotopyWord::single([0, 0]), &x).unwrap(), x);
        assert_eq!(homotopy_action_eval(&act, &cfg, &HomotopyWord::single([1, 0]), &x).unwrap(), vec![2.0, -2.0]);
        assert!(homotopy_action_eval(&act, &cfg, &HomotopyWord::single([0, 0]), &vec![cfg.r * 2.0, 0.0]).is_err());
    }

    #[test]
    fn trivial_subset_is_degenerate() {
        let act = LatticeAction::unit();
        let cfg = transfer_constants(&act, &linear_modulus(), &LengthModulus::identity(), &[[0, 0]], 1, 0.1).unwrap();
        assert!(cfg.degenerate && cfg.beta == 0.0);
        assert!(transfer_constants(&act, &linear_modulus(), &LengthModulus::identity(), &[[1, 0]], 1, 0.1).is_err());
    }
}
