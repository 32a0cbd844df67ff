//! Hyperbolic plane in the upper half-plane model.
//!
//! Points are `(x, y)` with `y > 0`. The global frame used for parallel
//! transport is the coordinate frame of the half-plane; with it the
//! Levi-Civita connection form is `dx / y`, so the rotation a parallel
//! vector picks up along a curve is a plain line integral.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{domain, ensure_finite, Result};
use crate::report::{sweep, Outcome, PropertyReport, Series, Tally};
use crate::rng::{self, SampleRng};
use crate::space::{BicombingSpace, DistanceMode, FarField, Isometry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H2Point {
    pub x: f64,
    pub y: f64,
}

impl H2Point {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let p = H2Point { x, y };
        p.validate()?;
        Ok(p)
    }

    /// The point `i`.
    pub const ORIGIN: H2Point = H2Point { x: 0.0, y: 1.0 };

    pub fn validate(&self) -> Result<()> {
        ensure_finite("x", self.x)?;
        ensure_finite("y", self.y)?;
        if self.y <= 0.0 {
            return Err(domain(format!("y must be positive, got {}", self.y)));
        }
        Ok(())
    }
}

/// Hyperbolic distance, validating both points.
pub fn h2_distance(p: &H2Point, q: &H2Point) -> Result<f64> {
    p.validate()?;
    q.validate()?;
    Ok(distance(p, q))
}

/// Hyperbolic distance `arcosh(1 + |p-q|^2 / (2 py qy))`, evaluated through
/// the half-distance form `2 asinh(|p-q| / (2 sqrt(py qy)))` which keeps
/// full relative precision for nearby points.
pub fn distance(p: &H2Point, q: &H2Point) -> f64 {
    if p == q {
        return 0.0;
    }
    let chord = (q.x - p.x).hypot(q.y - p.y);
    2.0 * (chord / (2.0 * (p.y.sqrt() * q.y.sqrt()))).asinh()
}

/// Euclidean angle of the unit tangent at `p` of the geodesic toward `q`.
///
/// After the affine isometry sending `p` to `i`, the tangent at `i` toward
/// `w` is parallel to `(2 w.x, |w|^2 - 1)`. Nearby points use the
/// cancellation-free form of `|w|^2 - 1`; far points divide both
/// components by `|w|` so nothing overflows.
pub fn direction_toward(p: &H2Point, q: &H2Point) -> f64 {
    let wx = (q.x - p.x) / p.y;
    let dy = (q.y - p.y) / p.y;
    let n = wx.hypot(1.0 + dy);
    if n < 1e8 {
        (wx * wx + dy * (2.0 + dy)).atan2(2.0 * wx)
    } else {
        (n - 1.0 / n).atan2(2.0 * wx / n)
    }
}

/// Point reached from `p` after hyperbolic distance `s >= 0` in Euclidean
/// direction `angle`.
pub fn point_at(p: &H2Point, angle: f64, s: f64) -> H2Point {
    if s == 0.0 {
        return *p;
    }
    // Elliptic rotation about i by (angle - pi/2) applied to i e^s.
    let half = 0.5 * (angle - 0.5 * PI);
    let (sn, c) = half.sin_cos();
    let em1 = (-2.0 * s).exp_m1();
    let inv_e = (-s).exp();
    let den = sn * sn + c * c * (-2.0 * s).exp();
    let (wx, wy) = if den > 0.0 {
        (sn * c * em1 / den, inv_e / den)
    } else {
        // Straight up and too far for the scaled form.
        (0.0, s.exp() / (c * c))
    };
    H2Point { x: p.y * wx + p.x, y: p.y * wy }
}

/// Constant-speed geodesic from `p` (t = 0) to `q` (t = 1).
pub fn h2_geodesic(p: &H2Point, q: &H2Point, t: f64) -> H2Point {
    if t <= 0.0 || p == q {
        return *p;
    }
    if t >= 1.0 {
        return *q;
    }
    point_at(p, direction_toward(p, q), t * distance(p, q))
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// `∫ dx / y` along the geodesic segment from `p` to `q`, in closed form.
///
/// Along a geodesic the tangent angle turns by exactly minus this integral,
/// so the drift is read off the tangent angles at the two ends.
pub fn geodesic_drift(p: &H2Point, q: &H2Point) -> f64 {
    if p == q {
        return 0.0;
    }
    let start = direction_toward(p, q);
    let end = direction_toward(q, p) + PI;
    -wrap_angle(end - start)
}

/// A sampled curve in the hyperbolic plane with strictly increasing times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H2Path {
    samples: Vec<(f64, H2Point)>,
}

impl H2Path {
    pub fn new(samples: Vec<(f64, H2Point)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(domain("a path needs at least two samples"));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(domain("sample times must be strictly increasing"));
            }
        }
        for (_, p) in &samples {
            p.validate()?;
        }
        Ok(H2Path { samples })
    }

    /// `n + 1` samples along the geodesic from `p` to `q`, times in `[0, 1]`.
    pub fn geodesic(p: &H2Point, q: &H2Point, n: usize) -> Self {
        let n = n.max(1);
        let samples = (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                (t, h2_geodesic(p, q, t))
            })
            .collect();
        H2Path { samples }
    }

    pub fn samples(&self) -> &[(f64, H2Point)] {
        &self.samples
    }

    pub fn points(&self) -> impl Iterator<Item = &H2Point> {
        self.samples.iter().map(|(_, p)| p)
    }

    pub fn reversed(&self) -> Self {
        let end = self.samples.last().map(|s| s.0).unwrap_or(0.0);
        let samples = self.samples.iter().rev().map(|(t, p)| (end - t, *p)).collect();
        H2Path { samples }
    }

    /// Concatenate, dropping the duplicated joint sample when present.
    pub fn concat(&self, other: &H2Path) -> Self {
        let mut samples = self.samples.clone();
        let offset = samples.last().map(|s| s.0).unwrap_or(0.0);
        let first = other.samples[0].0;
        for (i, (t, p)) in other.samples.iter().enumerate() {
            if i == 0 && Some(p) == samples.last().map(|s| &s.1) {
                continue;
            }
            let shifted = offset + (t - first) + if i == 0 { 1e-12 } else { 0.0 };
            samples.push((shifted, *p));
        }
        H2Path { samples }
    }
}

/// Rotation of a parallel frame relative to the global frame: `∫ dx / y`
/// along the path, each sample interval integrated exactly along its
/// Euclidean chord. Counter-clockwise loops give positive drift equal to
/// the enclosed area.
pub fn parallel_transport_drift(path: &H2Path) -> f64 {
    path.samples.windows(2).map(|w| chord_drift(&w[0].1, &w[1].1)).sum()
}

fn chord_drift(a: &H2Point, b: &H2Point) -> f64 {
    let u = (b.y - a.y) / a.y;
    let factor = if u.abs() < 1e-8 { 1.0 - 0.5 * u + u * u / 3.0 } else { u.ln_1p() / u };
    (b.x - a.x) * factor / a.y
}

/// Unsigned area of the geodesic triangle, from its side lengths
/// (L'Huilier's form of the hyperbolic angle defect).
pub fn triangle_area(p: &H2Point, q: &H2Point, r: &H2Point) -> f64 {
    let a = distance(q, r);
    let b = distance(p, r);
    let c = distance(p, q);
    if a == 0.0 || b == 0.0 || c == 0.0 {
        return 0.0;
    }
    let s = 0.5 * (a + b + c);
    let prod = (0.5 * s).tanh() * (0.5 * (s - a)).tanh() * (0.5 * (s - b)).tanh() * (0.5 * (s - c)).tanh();
    if prod <= 0.0 {
        return 0.0;
    }
    4.0 * prod.sqrt().atan()
}

/// +1 for counter-clockwise `p, q, r`, -1 for clockwise, 0 if degenerate.
pub fn orientation(p: &H2Point, q: &H2Point, r: &H2Point) -> f64 {
    if p == q || p == r || q == r {
        return 0.0;
    }
    let turn = wrap_angle(direction_toward(p, r) - direction_toward(p, q));
    if turn > 0.0 {
        1.0
    } else if turn < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn oriented_area(p: &H2Point, q: &H2Point, r: &H2Point) -> f64 {
    orientation(p, q, r) * triangle_area(p, q, r)
}

/// Maximal area of a triangle with one side of length `r`:
/// `pi - 2 acos(tanh(r / 2))`.
pub fn max_area_g(r: f64) -> Result<f64> {
    if !(r >= 0.0) || r.is_nan() {
        return Err(domain(format!("g needs r >= 0, got {r}")));
    }
    Ok(g_unchecked(r))
}

pub(crate) fn g_unchecked(r: f64) -> f64 {
    PI - 2.0 * (0.5 * r).tanh().acos()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolonomyCheck {
    pub loop_drift: f64,
    pub area: f64,
    pub residual: f64,
}

/// Transport around the sampled triangle `p -> q -> r -> p` and compare
/// the drift with the area.
pub fn holonomy_check(p: &H2Point, q: &H2Point, r: &H2Point, n: usize) -> Result<HolonomyCheck> {
    if n < 10 {
        return Err(domain(format!("holonomy check needs n >= 10 samples, got {n}")));
    }
    let per_side = (n / 3).max(1);
    let path = H2Path::geodesic(p, q, per_side)
        .concat(&H2Path::geodesic(q, r, per_side))
        .concat(&H2Path::geodesic(r, p, per_side));
    let loop_drift = parallel_transport_drift(&path);
    let area = triangle_area(p, q, r);
    Ok(HolonomyCheck { loop_drift, area, residual: (loop_drift.abs() - area).abs() })
}

/// Orientation-preserving isometry `z -> (a z + b) / (c z + d)` with
/// `ad - bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mobius {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return Err(domain(format!("Möbius matrix needs positive determinant, got {det}")));
        }
        let k = det.sqrt();
        Ok(Mobius { a: a / k, b: b / k, c: c / k, d: d / k })
    }

    pub const IDENTITY: Mobius = Mobius { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    /// `z -> lambda z + shift`, hyperbolic for `lambda != 1`.
    pub fn affine(lambda: f64, shift: f64) -> Result<Self> {
        Mobius::new(lambda, shift, 0.0, 1.0)
    }

    /// Hyperbolic translation of length `len` along the geodesic through `i`
    /// with tangent angle `angle` there.
    pub fn translation(angle: f64, len: f64) -> Self {
        let r = Mobius::rotation_about_i(angle - 0.5 * PI);
        let h = (0.5 * len).exp();
        let t = Mobius { a: h, b: 0.0, c: 0.0, d: 1.0 / h };
        r.compose(&t).compose(&r.inverse())
    }

    pub fn rotation_about_i(phi: f64) -> Self {
        let (s, c) = (0.5 * phi).sin_cos();
        Mobius { a: c, b: s, c: -s, d: c }
    }

    pub fn apply(&self, z: &H2Point) -> H2Point {
        let nx = self.a * z.x + self.b;
        let ny = self.a * z.y;
        let dx = self.c * z.x + self.d;
        let dy = self.c * z.y;
        let den = dx * dx + dy * dy;
        H2Point { x: (nx * dx + ny * dy) / den, y: z.y / den }
    }

    /// `arg g'(z) = -2 arg(c z + d)`: how much tangent directions at `z`
    /// rotate. Continuous on the half-plane (it never crosses the branch cut).
    pub fn rotation_at(&self, z: &H2Point) -> f64 {
        -2.0 * (self.c * z.y).atan2(self.c * z.x + self.d)
    }

    /// `self ∘ other`.
    pub fn compose(&self, o: &Mobius) -> Mobius {
        Mobius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }
}

/// Random point within hyperbolic distance `scale` of `center`.
pub fn random_point(rng: &mut SampleRng, center: &H2Point, scale: f64) -> H2Point {
    let angle = rng::uniform(rng, -PI, PI);
    let r = scale * rng::unit(rng);
    point_at(center, angle, r)
}

/// The hyperbolic plane with its geodesic bicombing.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct H2Space;

impl H2Space {
    pub fn reference_isometries() -> Vec<(String, Mobius)> {
        vec![
            ("translation".to_string(), Mobius::translation(0.4, 0.9)),
            (
                "dilation".to_string(),
                Mobius { a: 1.5f64.sqrt(), b: 0.3 / 1.5f64.sqrt(), c: 0.0, d: 1.0 / 1.5f64.sqrt() },
            ),
            ("rotation".to_string(), Mobius::rotation_about_i(1.1)),
        ]
    }
}

impl BicombingSpace for H2Space {
    type Point = H2Point;

    fn name(&self) -> String {
        "h2".into()
    }

    fn dist(&self, x: &H2Point, y: &H2Point) -> f64 {
        distance(x, y)
    }

    fn bicombe(&self, x: &H2Point, y: &H2Point, t: f64) -> H2Point {
        h2_geodesic(x, y, t)
    }

    fn sample(&self, rng: &mut SampleRng, scale: f64) -> H2Point {
        random_point(rng, &H2Point::ORIGIN, scale)
    }

    fn base_point(&self) -> H2Point {
        H2Point::ORIGIN
    }

    fn isometries(&self) -> Vec<Isometry<H2Point>> {
        H2Space::reference_isometries()
            .into_iter()
            .map(|(label, m)| Isometry::new(label, move |p: &H2Point| m.apply(p)))
            .collect()
    }
}

/// Above this apex distance the far configuration is handled in the log
/// domain instead of by placing `x1` explicitly.
const FAR_MATERIALIZE: f64 = 300.0;

impl FarField for H2Space {
    fn apex(&self) -> H2Point {
        H2Point::ORIGIN
    }

    fn ray(&self, from: &H2Point, angle: f64, s: f64) -> H2Point {
        point_at(from, angle, s)
    }

    fn far_triangle(&self, l1: f64, rho: f64, theta: f64) -> (f64, f64) {
        let apex = H2Point::ORIGIN;
        if l1 <= FAR_MATERIALIZE {
            let x1 = point_at(&apex, 0.5 * PI, l1);
            let back = if l1 > 0.0 { direction_toward(&x1, &apex) } else { -0.5 * PI };
            let x2 = point_at(&x1, back + theta, rho);
            if x2 == apex {
                return (0.0, 0.5 * PI);
            }
            return (distance(&apex, &x2), direction_toward(&apex, &x2));
        }
        // cosh l2 = (e^l1 (C - S) + e^-l1 (C + S)) / 2, kept in logs.
        let c = rho.cosh();
        let s = rho.sinh() * theta.cos();
        let log_cosh = l1 - std::f64::consts::LN_2 + ((c - s) + (-2.0 * l1).exp() * (c + s)).ln();
        let l2 = log_cosh + (1.0 + (1.0 - (-2.0 * log_cosh).exp()).sqrt()).ln();
        // Law of sines with sinh l2 = e^l2 / 2 at this range.
        let alpha = (2.0 * rho.sinh() * theta.sin().abs() * (-l2).exp()).min(1.0).asin();
        let side = if theta.sin() > 0.0 { -1.0 } else { 1.0 };
        (l2, 0.5 * PI + side * alpha)
    }
}

/// Holonomy against area on random triangles inside a ball of radius
/// `diameter / 2`, each side sampled with `samples / 3` points.
pub fn holonomy_sweep(n: usize, tol: f64, seed: u64, samples: usize, diameter: f64) -> PropertyReport {
    let tally = Tally::new("holonomy", "h2", seed, tol, DistanceMode::Exact);
    sweep(tally, n, seed, |_, rng| {
        let c = random_point(rng, &H2Point::ORIGIN, 3.0);
        let [p, q, r] = [0; 3].map(|_| random_point(rng, &c, 0.5 * diameter));
        match holonomy_check(&p, &q, &r, samples) {
            Ok(h) => Outcome::new(h.residual, json!({"p": p, "q": q, "r": r, "drift": h.loop_drift, "area": h.area})),
            Err(e) => Outcome::new(f64::INFINITY, json!({"error": e.to_string()})),
        }
    })
}

/// `area <= min over sides of g(side)` on random triangles.
pub fn area_bound_sweep(n: usize, tol: f64, seed: u64, scale: f64) -> PropertyReport {
    let tally = Tally::new("area_bound", "h2", seed, tol, DistanceMode::Exact);
    sweep(tally, n, seed, |_, rng| {
        let [p, q, r] = [0; 3].map(|_| random_point(rng, &H2Point::ORIGIN, scale));
        let area = triangle_area(&p, &q, &r);
        let bound = [distance(&p, &q), distance(&q, &r), distance(&p, &r)]
            .into_iter()
            .map(g_unchecked)
            .fold(f64::INFINITY, f64::min);
        Outcome::new(area - bound, json!({"p": p, "q": q, "r": r, "area": area, "g": bound}))
    })
}

/// `g(0) = 0`, `g` strictly increasing on `steps + 1` points of `[0, r_max]`
/// and `g(50) >= pi - 1e-9`. The curve is attached as a series.
pub fn g_profile_check(steps: usize, r_max: f64) -> PropertyReport {
    let mut tally = Tally::new("g_profile", "h2", 0, 0.0, DistanceMode::Exact);
    let pts: Vec<(f64, f64)> = (0..=steps)
        .map(|k| {
            let r = r_max * k as f64 / steps as f64;
            (r, g_unchecked(r))
        })
        .collect();
    tally.push(Outcome::new(g_unchecked(0.0).abs(), json!({"r": 0.0})));
    for w in pts.windows(2) {
        // Strictness: a step that does not increase is a violation.
        let excess = if w[1].1 > w[0].1 { w[0].1 - w[1].1 } else { (w[0].1 - w[1].1).max(f64::MIN_POSITIVE) };
        tally.push(Outcome::new(excess, json!({"r": w[1].0})));
    }
    tally.push(Outcome::new(PI - 1e-9 - g_unchecked(50.0), json!({"r": 50.0})));
    tally.finish().with_series(Series { label: "g".into(), x_label: "r".into(), y_label: "g(r)".into(), points: pts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn pt(x: f64, y: f64) -> H2Point {
        H2Point::new(x, y).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(h2_distance(&pt(0.0, 1.0), &pt(0.0, 1.0)).unwrap(), 0.0);
        let d = h2_distance(&pt(0.0, 1.0), &pt(0.0, E)).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        let nan = H2Point { x: f64::NAN, y: 1.0 };
        assert!(h2_distance(&nan, &pt(0.0, 1.0)).is_err());
        assert!(H2Point::new(0.0, -1.0).is_err());
    }

    #[test]
    fn geodesic_examples() {
        let m = h2_geodesic(&pt(0.0, 1.0), &pt(0.0, E * E), 0.5);
        assert!((m.x).abs() < 1e-14 && (m.y - E).abs() < 1e-14, "{m:?}");
        let p = pt(0.3, 0.7);
        for t in [0.0, 0.2, 1.0] {
            assert_eq!(h2_geodesic(&p, &p, t), p);
        }
        let apex = h2_geodesic(&pt(-1.0, 1.0), &pt(1.0, 1.0), 0.5);
        assert!(apex.x.abs() < 1e-14 && (apex.y - 2f64.sqrt()).abs() < 1e-14, "{apex:?}");
    }

    #[test]
    fn geodesic_reaches_far_points_upward() {
        let p = pt(0.2, 1.3);
        let q = H2Point { x: 3.0e100, y: 1.0e150 };
        let d = distance(&p, &q);
        let m = h2_geodesic(&p, &q, 0.5);
        assert!((distance(&p, &m) - 0.5 * d).abs() < 1e-9 * d);
        assert!((distance(&m, &q) - 0.5 * d).abs() < 1e-9 * d);
    }

    #[test]
    fn geodesic_drift_matches_semicircle_angles() {
        // Unit semicircle from angle 3pi/4 to pi/4 sweeps pi/2 rightward.
        let s = 0.5f64.sqrt();
        let drift = geodesic_drift(&pt(-s, s), &pt(s, s));
        assert!((drift - 0.5 * PI).abs() < 1e-14);
        assert_eq!(geodesic_drift(&pt(0.0, 1.0), &pt(0.0, 3.0)), 0.0);
    }

    #[test]
    fn drift_of_vertical_and_reversed_paths() {
        let v = H2Path::geodesic(&pt(0.0, 1.0), &pt(0.0, 2.0), 50);
        assert_eq!(parallel_transport_drift(&v), 0.0);
        let path = H2Path::geodesic(&pt(-0.4, 0.6), &pt(1.1, 2.0), 200);
        let fwd = parallel_transport_drift(&path);
        let back = parallel_transport_drift(&path.reversed());
        assert!((fwd + back).abs() < 1e-14);
    }

    #[test]
    fn g_boundary_values() {
        assert_eq!(max_area_g(0.0).unwrap(), 0.0);
        assert!((max_area_g(50.0).unwrap() - PI).abs() < 1e-9);
        assert!(max_area_g(-1.0).is_err());
    }

    #[test]
    fn degenerate_triangles_have_zero_area() {
        let p = pt(0.1, 0.9);
        let q = pt(1.0, 2.0);
        assert_eq!(triangle_area(&p, &p, &q), 0.0);
        let h = holonomy_check(&p, &p, &q, 30).unwrap();
        assert!(h.loop_drift.abs() < 1e-12 && h.area == 0.0);
        assert!(holonomy_check(&p, &p, &q, 9).is_err());
    }

    #[test]
    fn holonomy_orientation_flips_sign() {
        let (p, q, r) = (pt(0.0, 1.0), pt(1.0, 1.5), pt(-0.5, 2.5));
        let a = holonomy_check(&p, &q, &r, 3000).unwrap();
        let b = holonomy_check(&p, &r, &q, 3000).unwrap();
        assert!((a.loop_drift + b.loop_drift).abs() < 1e-9);
        assert!(a.loop_drift > 0.0);
        assert_eq!(orientation(&p, &q, &r), 1.0);
    }

    #[test]
    fn mobius_translation_moves_origin_by_length() {
        let m = Mobius::translation(0.7, 1.3);
        let o = H2Point::ORIGIN;
        assert!((distance(&o, &m.apply(&o)) - 1.3).abs() < 1e-12);
        let back = m.inverse().apply(&m.apply(&pt(0.3, 0.4)));
        assert!((back.x - 0.3).abs() < 1e-12 && (back.y - 0.4).abs() < 1e-12);
    }

    #[test]
    fn far_triangle_branches_agree() {
        let h = H2Space;
        for theta in [0.3, -1.2, 2.5] {
            let l1 = FAR_MATERIALIZE;
            let (l2a, da) = h.far_triangle(l1, 0.8, theta);
            let (l2b, db) = h.far_triangle(l1 + 1e-9, 0.8, theta);
            assert!((l2a - l2b).abs() < 1e-7, "{l2a} {l2b}");
            assert!((da - db).abs() < 1e-12, "{da} {db}");
        }
        let (l2, _) = h.far_triangle(10.0, 1.0, 0.0);
        assert!((l2 - 9.0).abs() < 1e-10, "{l2}");
    }
}
