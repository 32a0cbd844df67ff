//! The universal cover of the unit tangent bundle of the hyperbolic plane.
//!
//! A point is a base point in the upper half-plane together with a lifted
//! angle `fiber`, measured against the coordinate frame of the half-plane.
//! The Riemannian metric is `ds² = ds²_H + (dθ + dx/y)²`, so horizontal
//! (parallel) motion has `dθ = -dx/y`.
//!
//! Over a base geodesic the preimage is a flat strip. The bicombing runs
//! straight in that strip: the base moves along the geodesic at constant
//! speed while the fiber, relative to parallel transport, changes linearly.
//!
//! True distances are not computed. `upper_estimate` minimises the length
//! of the best path over constant-curvature base curves, whose length and
//! enclosed area are known in closed form; the base distance is a lower
//! bound since the projection is 1-Lipschitz.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{domain, ensure_finite, Result};
use crate::h2::{self, distance, g_unchecked, geodesic_drift, h2_geodesic, H2Point, Mobius};
use crate::modulus::{ConvexityModulus, LengthModulus, MonotoneFlags};
use crate::report::{sweep, Outcome, PropertyReport, Tally};
use crate::rng::{self, SampleRng};
use crate::space::{BicombingSpace, DistanceMode, Isometry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SLPoint {
    pub base: H2Point,
    pub fiber: f64,
}

impl SLPoint {
    pub fn new(base: H2Point, fiber: f64) -> Result<Self> {
        base.validate()?;
        ensure_finite("fiber", fiber)?;
        Ok(SLPoint { base, fiber })
    }
}

/// Coordinates in the flat strip over the base geodesic from `start` to
/// `end`: arclength `s` along the line and fiber offset `u` relative to
/// parallel transport of `start_fiber`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripCoords {
    pub start: H2Point,
    pub end: H2Point,
    pub start_fiber: f64,
    pub s: f64,
    pub u: f64,
}

impl StripCoords {
    pub fn new(start: H2Point, end: H2Point, start_fiber: f64, s: f64, u: f64) -> Result<Self> {
        if start == end {
            return Err(domain("strip base line needs two distinct points"));
        }
        Ok(StripCoords { start, end, start_fiber, s, u })
    }

    /// The point of the model with these strip coordinates.
    pub fn to_point(&self) -> SLPoint {
        let len = distance(&self.start, &self.end);
        let base = h2::point_at(&self.start, h2::direction_toward(&self.start, &self.end), self.s.max(0.0));
        let base = if self.s == len { self.end } else { base };
        SLPoint { base, fiber: self.start_fiber - geodesic_drift(&self.start, &base) + self.u }
    }
}

/// `(d_base, h_B)`: base distance and the fiber of `b` minus the parallel
/// transport of `a`'s fiber along the base geodesic.
pub fn strip_coordinates(a: &SLPoint, b: &SLPoint) -> (f64, f64) {
    let d = distance(&a.base, &b.base);
    let h = b.fiber - a.fiber + geodesic_drift(&a.base, &b.base);
    (d, h)
}

pub fn sl2_bicombe(a: &SLPoint, b: &SLPoint, t: f64) -> SLPoint {
    if t <= 0.0 {
        return *a;
    }
    if t >= 1.0 {
        return *b;
    }
    if a.base == b.base {
        return SLPoint { base: a.base, fiber: a.fiber + t * (b.fiber - a.fiber) };
    }
    let (_, h) = strip_coordinates(a, b);
    let base = h2_geodesic(&a.base, &b.base, t);
    SLPoint { base, fiber: a.fiber - geodesic_drift(&a.base, &base) + t * h }
}

/// `sqrt(d_base² + h_B²)`.
pub fn sl2_path_length(a: &SLPoint, b: &SLPoint) -> f64 {
    let (d, h) = strip_coordinates(a, b);
    d.hypot(h)
}

/// Length of a sampled path under `ds² = ds²_H + (dθ + dx/y)²`, each
/// sample interval taken as one straight step. Used as an oracle.
pub fn polyline_length(points: &[SLPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| {
            let path = h2::H2Path::new(vec![(0.0, w[0].base), (1.0, w[1].base)]);
            let drift = path.map(|p| h2::parallel_transport_drift(&p)).unwrap_or(0.0);
            distance(&w[0].base, &w[1].base).hypot(w[1].fiber - w[0].fiber + drift)
        })
        .sum()
}

/// `f'(x) = sqrt(x² + (3x + g(x))²)`.
pub fn f_prime(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(domain(format!("modulus needs x >= 0, got {x}")));
    }
    Ok(f_prime_unchecked(x))
}

fn f_prime_unchecked(x: f64) -> f64 {
    x.hypot(3.0 * x + g_unchecked(x))
}

/// `f(s) = 2 f'(s)`.
pub fn sl2_modulus_f(s: f64) -> Result<f64> {
    Ok(2.0 * f_prime(s)?)
}

/// `a(t, r) = sqrt((t r)² + (4 t r + t g(r) + g(t r))²)`.
pub fn a_fn(t: f64, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(domain(format!("t must lie in [0, 1], got {t}")));
    }
    if !(r >= 0.0) {
        return Err(domain(format!("r must be nonnegative, got {r}")));
    }
    Ok(a_unchecked(t, r))
}

fn a_unchecked(t: f64, r: f64) -> f64 {
    let tr = t * r;
    tr.hypot(4.0 * tr + t * g_unchecked(r) + g_unchecked(tr))
}

/// `A(t, x, x') = a(t, x) + a(1 - t, x')` as written.
pub fn sl2_modulus_a(t: f64, x: f64, x2: f64) -> Result<f64> {
    Ok(a_fn(t, x)? + a_fn(1.0 - t, x2)?)
}

/// Convexity modulus of the model in the argument order `A(t, d(x, x'),
/// d(y, y'))`.
///
/// `a(t, ·)` bounds paths sharing their start point and differing in the
/// end point, so with distinct starts and ends the triangle inequality
/// gives `a(1 - t, d(x, x')) + a(t, d(y, y'))`. That is `sl2_modulus_a`
/// with its distance arguments swapped, and it vanishes at the boundary.
pub fn sl2_convexity_modulus() -> ConvexityModulus {
    ConvexityModulus::new(
        "sl2",
        MonotoneFlags { increasing_in_distances: true, outer_thirds_shape: false },
        |t, s, s2| {
            let t = t.clamp(0.0, 1.0);
            a_unchecked(t, s2.max(0.0)) + a_unchecked(1.0 - t, s.max(0.0))
        },
    )
}

pub fn sl2_length_modulus() -> LengthModulus {
    LengthModulus::new("sl2", |s| 2.0 * f_prime_unchecked(s.max(0.0)))
}

pub fn sl2_length_modulus_prime() -> LengthModulus {
    LengthModulus::new("sl2-prime", |s| f_prime_unchecked(s.max(0.0)))
}

/// Length and enclosed area of the constant-curvature base curve with
/// family parameter `u ∈ [0, 3]` joining two points at distance `d > 0`.
///
/// `[0, 1)` are hypercycles with curvature `u`, `1` the horocycle,
/// `(1, 2]` minor circle arcs with central angle `π (u - 1)` and `(2, 3)`
/// major arcs with central angle `2π - π (3 - u)`. The area is the one
/// between the curve and the geodesic chord, from Gauss-Bonnet:
/// `area = κ L - 2ε` with `ε` the angle between curve and chord.
pub fn arc_family(d: f64, u: f64) -> Option<(f64, f64)> {
    let half = 0.5 * d;
    let sh = half.sinh();
    if u <= 0.0 {
        return Some((d, 0.0));
    }
    if u < 1.0 {
        let ch_h = 1.0 / (1.0 - u * u).sqrt();
        let sh_h = u * ch_h;
        let ell = 2.0 * (sh / ch_h).asinh();
        // Corner angle between hypercycle and chord: sin ε = κ tanh(d / 2).
        let eps = (u * half.tanh()).asin();
        return Some((ell * ch_h, ell * sh_h - 2.0 * eps));
    }
    if u == 1.0 {
        let len = 2.0 * sh;
        let eps = sh.atan();
        return Some((len, len - 2.0 * eps));
    }
    let (theta, major) = if u <= 2.0 { (PI * (u - 1.0), false) } else { (PI * (3.0 - u), true) };
    if theta <= 0.0 {
        return None;
    }
    let sinh_r = sh / (0.5 * theta).sin();
    let cosh_r = sinh_r.hypot(1.0);
    let coth_r = cosh_r / sinh_r;
    // Angle between arc and chord at the ends, π/2 minus the base angle of
    // the isosceles triangle over the chord.
    let corner = (cosh_r * (0.5 * theta).tan()).atan();
    let (len, eps) = if major { ((2.0 * PI - theta) * sinh_r, PI - corner) } else { (theta * sinh_r, corner) };
    let area = coth_r * len - 2.0 * eps;
    if len.is_finite() && area.is_finite() {
        Some((len, area))
    } else {
        None
    }
}

/// Upper-bound candidate `sqrt(L² + (|h| - area)²)` at family parameter `u`.
fn candidate(d: f64, h: f64, u: f64) -> f64 {
    if d == 0.0 {
        // Circles of radius r through the base point.
        let r_star = (1.0 + h.abs() / (2.0 * PI)).acosh();
        let r = 2.0 * r_star * u / 3.0;
        let len = 2.0 * PI * r.sinh();
        let area = 2.0 * PI * (r.cosh() - 1.0);
        return len.hypot(h.abs() - area);
    }
    match arc_family(d, u) {
        Some((len, area)) => len.hypot(h.abs() - area),
        None => f64::INFINITY,
    }
}

/// Certified `(lower, upper)` bounds on the distance.
///
/// `upper` is the least candidate on the nested grid `u_i = 3 i / mesh`, so
/// doubling `mesh` never increases it. It never exceeds the path length.
pub fn sl2_distance_bounds(a: &SLPoint, b: &SLPoint, mesh: usize) -> Result<(f64, f64)> {
    if mesh < 8 {
        return Err(domain(format!("mesh must be at least 8, got {mesh}")));
    }
    if a == b {
        return Ok((0.0, 0.0));
    }
    let (d, h) = strip_coordinates(a, b);
    Ok((d, grid_upper(d, h, mesh).0))
}

fn grid_upper(d: f64, h: f64, mesh: usize) -> (f64, usize) {
    let mut best = (d.hypot(h), 0);
    for i in 1..=mesh {
        let v = candidate(d, h, 3.0 * i as f64 / mesh as f64);
        if v < best.0 {
            best = (v, i);
        }
    }
    best
}

/// Grid minimum followed by golden-section refinement next to it.
pub fn upper_estimate(a: &SLPoint, b: &SLPoint, mesh: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let (d, h) = strip_coordinates(a, b);
    let (best, i) = grid_upper(d, h, mesh.max(8));
    if h == 0.0 {
        return best;
    }
    let step = 3.0 / mesh.max(8) as f64;
    let (mut lo, mut hi) = ((i as f64 - 1.0).max(0.0) * step, ((i + 1) as f64 * step).min(3.0));
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - inv_phi * (hi - lo);
    let mut e = lo + inv_phi * (hi - lo);
    let (mut fc, mut fe) = (candidate(d, h, c), candidate(d, h, e));
    let mut out = best.min(fc).min(fe);
    for _ in 0..60 {
        if fc < fe {
            hi = e;
            e = c;
            fe = fc;
            c = hi - inv_phi * (hi - lo);
            fc = candidate(d, h, c);
            out = out.min(fc);
        } else {
            lo = c;
            c = e;
            fc = fe;
            e = lo + inv_phi * (hi - lo);
            fe = candidate(d, h, e);
            out = out.min(fe);
        }
    }
    out
}

/// Lift of a Möbius map: `(z, θ) -> (g z, θ + arg g'(z))`.
pub fn lift_isometry(m: &Mobius, p: &SLPoint) -> SLPoint {
    SLPoint { base: m.apply(&p.base), fiber: p.fiber + m.rotation_at(&p.base) }
}

/// The model space with its strip bicombing; `dist` is the refined upper
/// estimate and `dist_lower` the base distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SL2Space {
    pub mesh: usize,
}

impl Default for SL2Space {
    fn default() -> Self {
        SL2Space { mesh: 96 }
    }
}

impl BicombingSpace for SL2Space {
    type Point = SLPoint;

    fn name(&self) -> String {
        "sl2r-model".into()
    }

    fn dist(&self, x: &SLPoint, y: &SLPoint) -> f64 {
        upper_estimate(x, y, self.mesh)
    }

    fn dist_lower(&self, x: &SLPoint, y: &SLPoint) -> f64 {
        distance(&x.base, &y.base)
    }

    fn mode(&self) -> DistanceMode {
        DistanceMode::OneSided
    }

    fn bicombe(&self, x: &SLPoint, y: &SLPoint, t: f64) -> SLPoint {
        sl2_bicombe(x, y, t)
    }

    fn path_length(&self, x: &SLPoint, y: &SLPoint) -> f64 {
        sl2_path_length(x, y)
    }

    fn sample(&self, rng: &mut SampleRng, scale: f64) -> SLPoint {
        let base = h2::random_point(rng, &H2Point::ORIGIN, 0.5 * scale);
        SLPoint { base, fiber: rng::uniform(rng, -0.5 * scale, 0.5 * scale) }
    }

    fn base_point(&self) -> SLPoint {
        SLPoint { base: H2Point::ORIGIN, fiber: 0.0 }
    }

    fn isometries(&self) -> Vec<Isometry<SLPoint>> {
        let mut out: Vec<Isometry<SLPoint>> = h2::H2Space::reference_isometries()
            .into_iter()
            .map(|(label, m)| Isometry::new(label, move |p: &SLPoint| lift_isometry(&m, p)))
            .collect();
        out.push(Isometry::new("fiber-shift", |p: &SLPoint| SLPoint { base: p.base, fiber: p.fiber + 0.7 }));
        out
    }
}

/// Residuals of the three links of the convexity chain for
/// `C = γ_{A,B}(t)`, `C' = γ_{A,B'}(t)`; positive means violated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainLinks {
    /// `d(p(C), p(C')) - t d(p(B), p(B'))`.
    pub base_contraction: f64,
    /// `|l(C, C') - sqrt(d(p(C), p(C'))² + (t h_B - t h_B' - σ area)²)|`.
    pub strip_identity: f64,
    /// `l(C, C') - a(t, upper(B, B'))`.
    pub modulus_bound: f64,
}

impl ChainLinks {
    pub fn worst(&self) -> f64 {
        self.base_contraction.max(self.strip_identity).max(self.modulus_bound)
    }
}

pub fn chain_links(space: &SL2Space, a: &SLPoint, b: &SLPoint, b2: &SLPoint, t: f64) -> ChainLinks {
    let c = sl2_bicombe(a, b, t);
    let c2 = sl2_bicombe(a, b2, t);
    let d_c = distance(&c.base, &c2.base);
    let base_contraction = d_c - t * distance(&b.base, &b2.base);
    let (_, h_b) = strip_coordinates(a, b);
    let (_, h_b2) = strip_coordinates(a, b2);
    let sigma = h2::orientation(&a.base, &c.base, &c2.base);
    let area = h2::triangle_area(&a.base, &c.base, &c2.base);
    let l = sl2_path_length(&c, &c2);
    let predicted = d_c.hypot(t * h_b - t * h_b2 - sigma * area);
    let bound = a_unchecked(t, space.dist(b, b2));
    ChainLinks { base_contraction, strip_identity: (l - predicted).abs(), modulus_bound: l - bound }
}

/// The convexity chain for one configuration.
pub fn chain_check_convexity(
    space: &SL2Space,
    a: &SLPoint,
    b: &SLPoint,
    b2: &SLPoint,
    t: f64,
    tol: f64,
) -> Result<PropertyReport> {
    if !(0.0..=1.0).contains(&t) {
        return Err(domain(format!("t must lie in [0, 1], got {t}")));
    }
    let links = chain_links(space, a, b, b2, t);
    let mut tally = Tally::new("chain_convexity", &space.name(), 0, tol, DistanceMode::OneSided);
    tally.push(Outcome::new(links.worst(), json!({"a": a, "b": b, "b2": b2, "t": t, "links": links})));
    Ok(tally.finish().with_details(json!({"links": links})))
}

/// Three points within `diameter / 2` of the base point, roughly.
fn sample_triple(rng: &mut SampleRng, diameter: f64) -> [SLPoint; 3] {
    let space = SL2Space::default();
    [space.sample(rng, diameter), space.sample(rng, diameter), space.sample(rng, diameter)]
}

/// The convexity chain on `n` random `(A, B, B', t)`.
pub fn chain_check_sweep(space: &SL2Space, n: usize, tol: f64, seed: u64, diameter: f64) -> PropertyReport {
    let tally = Tally::new("chain_convexity", &space.name(), seed, tol, DistanceMode::OneSided);
    let report = sweep(tally, n, seed, |_, rng| {
        let [a, b, b2] = sample_triple(rng, diameter);
        let t = rng::unit(rng);
        let links = chain_links(space, &a, &b, &b2, t);
        Outcome::new(links.worst(), json!({"a": a, "b": b, "b2": b2, "t": t, "links": links}))
    });
    report.with_details(json!({"diameter": diameter}))
}

/// `|l(γ_{A,B}) - l(γ_{A,B'})| - f'(upper(B, B'))`.
pub fn length_difference_excess(space: &SL2Space, a: &SLPoint, b: &SLPoint, b2: &SLPoint) -> f64 {
    (sl2_path_length(a, b) - sl2_path_length(a, b2)).abs() - f_prime_unchecked(space.dist(b, b2))
}

pub fn length_difference_check(space: &SL2Space, a: &SLPoint, b: &SLPoint, b2: &SLPoint, tol: f64) -> PropertyReport {
    let mut tally = Tally::new("length_difference", &space.name(), 0, tol, DistanceMode::OneSided);
    tally.push(Outcome::new(length_difference_excess(space, a, b, b2), json!({"a": a, "b": b, "b2": b2})));
    tally.finish()
}

pub fn length_difference_sweep(space: &SL2Space, n: usize, tol: f64, seed: u64, diameter: f64) -> PropertyReport {
    let tally = Tally::new("length_difference", &space.name(), seed, tol, DistanceMode::OneSided);
    sweep(tally, n, seed, |_, rng| {
        let [a, b, b2] = sample_triple(rng, diameter);
        let excess = length_difference_excess(space, &a, &b, &b2);
        Outcome::new(excess, json!({"a": a, "b": b, "b2": b2}))
    })
}

/// Implied strip bounds `|h_B| <= 3 upper(A, B)` and
/// `l(γ_{A,B}) <= sqrt(10) upper(A, B)`.
pub fn strip_bounds_sweep(space: &SL2Space, n: usize, tol: f64, seed: u64, scale: f64) -> PropertyReport {
    let tally = Tally::new("strip_bounds", &space.name(), seed, tol, DistanceMode::OneSided);
    sweep(tally, n, seed, |_, rng| {
        let a = space.sample(rng, scale);
        let b = space.sample(rng, scale);
        let (_, h) = strip_coordinates(&a, &b);
        let up = space.dist(&a, &b);
        let excess = (h.abs() - 3.0 * up).max(sl2_path_length(&a, &b) - 10f64.sqrt() * up);
        Outcome::new(excess, json!({"a": a, "b": b, "h": h, "upper": up}))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(x: f64, y: f64, f: f64) -> SLPoint {
        SLPoint::new(H2Point::new(x, y).unwrap(), f).unwrap()
    }

    #[test]
    fn strip_examples() {
        let a = sp(0.2, 1.0, 0.3);
        let b0 = sp(1.0, 2.0, 0.0);
        let (_, h0) = strip_coordinates(&a, &b0);
        let b = SLPoint { fiber: b0.fiber - h0, ..b0 };
        assert!(strip_coordinates(&a, &b).1.abs() < 1e-14);
        let same = sp(0.2, 1.0, 1.7);
        assert_eq!(strip_coordinates(&a, &same), (0.0, 1.7 - 0.3));
    }

    #[test]
    fn bicombe_endpoints_and_same_fiber() {
        let a = sp(0.0, 1.0, 0.0);
        let b = sp(0.0, 1.0, 2.0);
        assert_eq!(sl2_bicombe(&a, &b, 0.0), a);
        assert_eq!(sl2_bicombe(&a, &b, 1.0), b);
        assert_eq!(sl2_bicombe(&a, &b, 0.25).fiber, 0.5);
        assert_eq!(sl2_path_length(&a, &b), 2.0);
    }

    #[test]
    fn modulus_values() {
        assert_eq!(sl2_modulus_f(0.0).unwrap(), 0.0);
        let g1 = PI - 2.0 * 0.5f64.tanh().acos();
        let expect = 2.0 * (1.0 + (3.0 + g1).powi(2)).sqrt();
        assert!((sl2_modulus_f(1.0).unwrap() - expect).abs() < 1e-14);
        assert!(sl2_modulus_f(-1.0).is_err());
        assert_eq!(a_fn(0.0, 3.0).unwrap(), 0.0);
        assert_eq!(a_fn(0.7, 0.0).unwrap(), 0.0);
        let s = 1.3;
        let a1 = (s * s + (4.0 * s + 2.0 * g_unchecked(s)).powi(2)).sqrt();
        assert!((sl2_modulus_a(1.0, s, 0.0).unwrap() - a1).abs() < 1e-14);
        let m = sl2_convexity_modulus();
        assert_eq!(m.eval(1.0, s, 0.0), 0.0);
        assert_eq!(m.eval(0.0, 0.0, s), 0.0);
    }

    #[test]
    fn bounds_for_identical_and_horizontal_pairs() {
        let a = sp(0.1, 0.8, 0.4);
        assert_eq!(sl2_distance_bounds(&a, &a, 8).unwrap(), (0.0, 0.0));
        assert!(sl2_distance_bounds(&a, &a, 7).is_err());
        let b0 = sp(-0.5, 1.6, 0.0);
        let (_, h) = strip_coordinates(&a, &b0);
        let b = SLPoint { fiber: b0.fiber - h, ..b0 };
        let (lo, up) = sl2_distance_bounds(&a, &b, 64).unwrap();
        assert!((up - lo).abs() < 1e-6, "{lo} {up}");
    }

    #[test]
    fn upper_is_monotone_under_mesh_doubling() {
        let a = sp(0.0, 1.0, 0.0);
        let b = sp(0.7, 1.4, 2.5);
        let mut prev = f64::INFINITY;
        for mesh in [8, 16, 32, 64, 128] {
            let (lo, up) = sl2_distance_bounds(&a, &b, mesh).unwrap();
            assert!(lo <= up && up <= prev && up <= sl2_path_length(&a, &b) + 1e-15);
            prev = up;
        }
    }

    #[test]
    fn arc_family_areas_are_complementary() {
        // Minor and major arcs of one circle bound the whole disk.
        let d = 1.2;
        let u = 1.6;
        let (l1, a1) = arc_family(d, u).unwrap();
        let (l2, a2) = arc_family(d, 4.0 - u).unwrap();
        let theta = PI * (u - 1.0);
        let sinh_r = (0.5 * d).sinh() / (0.5 * theta).sin();
        let cosh_r = sinh_r.hypot(1.0);
        assert!(((l1 + l2) - 2.0 * PI * sinh_r).abs() < 1e-12);
        assert!(((a1 + a2) - 2.0 * PI * (cosh_r - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn chain_collapses_for_equal_ends_and_t_zero() {
        let space = SL2Space::default();
        let a = sp(0.1, 1.1, 0.2);
        let b = sp(-0.4, 0.7, 1.0);
        let r = chain_check_convexity(&space, &a, &b, &b, 0.6, 1e-12).unwrap();
        assert!(r.passed, "{r:?}");
        let b2 = sp(0.9, 2.0, -1.0);
        let links = chain_links(&space, &a, &b, &b2, 0.0);
        assert!(links.worst() <= 0.0);
    }
}
