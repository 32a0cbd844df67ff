//! Convexity moduli `A(t, s, s')` and length moduli `f(s)`.

use std::fmt::Debug;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

type Fn3 = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Monotonicity shape of a convexity modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct MonotoneFlags {
    /// Increasing in `s` and in `s'`.
    pub increasing_in_distances: bool,
    /// Increasing in `t` on `[0, 1/3]` and decreasing on `[2/3, 1]`.
    pub outer_thirds_shape: bool,
}

impl MonotoneFlags {
    pub const FULL: MonotoneFlags = MonotoneFlags { increasing_in_distances: true, outer_thirds_shape: true };

    pub fn is_full(&self) -> bool {
        self.increasing_in_distances && self.outer_thirds_shape
    }
}

/// A function `A(t, s, s')` bounding `d(γ_{x,y}(t), γ_{x',y'}(t))` in terms
/// of `s = d(x, x')` and `s' = d(y, y')`.
#[derive(Clone)]
pub struct ConvexityModulus {
    name: String,
    eval: Fn3,
    pub flags: MonotoneFlags,
}

impl Debug for ConvexityModulus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConvexityModulus").field("name", &self.name).field("flags", &self.flags).finish()
    }
}

impl ConvexityModulus {
    pub fn new(
        name: impl Into<String>,
        flags: MonotoneFlags,
        eval: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ConvexityModulus { name: name.into(), eval: Arc::new(eval), flags }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, t: f64, s: f64, s2: f64) -> f64 {
        (self.eval)(t, s, s2)
    }

    /// `c · A`, used for negative controls.
    pub fn scaled(&self, c: f64) -> ConvexityModulus {
        let inner = self.clone();
        ConvexityModulus::new(format!("{}*{c}", self.name), self.flags, move |t, s, s2| c * inner.eval(t, s, s2))
    }

    /// Boundary values `A(1, s, 0)` and `A(0, 0, s)` on a sample grid; the
    /// largest absolute value is returned together with where it occurred.
    pub fn boundary_defect(&self, s_max: f64, steps: usize) -> (f64, f64) {
        let mut worst = (0.0, 0.0);
        for i in 0..=steps {
            let s = s_max * i as f64 / steps as f64;
            let v = self.eval(1.0, s, 0.0).abs().max(self.eval(0.0, 0.0, s).abs());
            if v > worst.0 {
                worst = (v, s);
            }
        }
        worst
    }
}

/// `A(t, s, s') = (1 - t) s + t s'`, the modulus of convex bicombings.
pub fn linear_modulus() -> ConvexityModulus {
    ConvexityModulus::new(
        "linear",
        MonotoneFlags { increasing_in_distances: true, outer_thirds_shape: false },
        |t, s, s2| (1.0 - t) * s + t * s2,
    )
}

pub fn zero_modulus() -> ConvexityModulus {
    ConvexityModulus::new("zero", MonotoneFlags::FULL, |_, _, _| 0.0)
}

/// A function `f` bounding `|l(γ_{x,y}) - l(γ_{x',y'})|` by
/// `f(d(x, x') + d(y, y'))`.
#[derive(Clone)]
pub struct LengthModulus {
    name: String,
    eval: Fn1,
}

impl Debug for LengthModulus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LengthModulus").field("name", &self.name).finish()
    }
}

impl LengthModulus {
    pub fn new(name: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        LengthModulus { name: name.into(), eval: Arc::new(eval) }
    }

    pub fn identity() -> Self {
        LengthModulus::new("identity", |s| s)
    }

    pub fn zero() -> Self {
        LengthModulus::new("zero", |_| 0.0)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.eval)(s)
    }

    /// First grid point where `f` decreases, if any.
    pub fn monotone_on_grid(&self, s_max: f64, steps: usize) -> Option<f64> {
        let mut prev = self.eval(0.0);
        for i in 1..=steps {
            let s = s_max * i as f64 / steps as f64;
            let v = self.eval(s);
            if v < prev {
                return Some(s);
            }
            prev = v;
        }
        None
    }
}

/// Tabulated Remark-2.5 monotonization of a convexity modulus.
///
/// `B(t, s, s')` is the maximum of `A(t, r, r')` over grid points
/// `r <= s`, `r' <= s'`. The result is the running maximum of `B` in `t`
/// from the left on `[0, 1/3]`, from the right on `[2/3, 1]`, and in the
/// middle third the larger of `B` and the linear interpolation between
/// the values at `1/3` and `2/3`.
#[derive(Debug, Clone)]
struct MonotoneTable {
    ts: Vec<f64>,
    ds: f64,
    ns: usize,
    /// `B` on the grid, indexed `[t][s][s']`.
    b: Vec<f64>,
    /// The monotonized values on the grid.
    a: Vec<f64>,
}

impl MonotoneTable {
    fn idx(&self, ti: usize, si: usize, sj: usize) -> usize {
        (ti * (self.ns + 1) + si) * (self.ns + 1) + sj
    }

    fn build(a: &ConvexityModulus, thirds: usize, ns: usize, s_max: f64) -> Self {
        let nt = 3 * thirds;
        let ts: Vec<f64> = (0..=nt).map(|i| i as f64 / nt as f64).collect();
        let ds = s_max / ns as f64;
        let side = ns + 1;
        let mut table = MonotoneTable { ts, ds, ns, b: vec![0.0; (nt + 1) * side * side], a: Vec::new() };
        for ti in 0..=nt {
            let t = table.ts[ti];
            for si in 0..side {
                for sj in 0..side {
                    let mut v = a.eval(t, si as f64 * ds, sj as f64 * ds);
                    if si > 0 {
                        v = v.max(table.b[table.idx(ti, si - 1, sj)]);
                    }
                    if sj > 0 {
                        v = v.max(table.b[table.idx(ti, si, sj - 1)]);
                    }
                    let k = table.idx(ti, si, sj);
                    table.b[k] = v;
                }
            }
        }
        let mut out = table.b.clone();
        let (lo, hi) = (thirds, 2 * thirds);
        for si in 0..side {
            for sj in 0..side {
                for ti in 1..=lo {
                    let prev = out[table.idx(ti - 1, si, sj)];
                    let k = table.idx(ti, si, sj);
                    out[k] = out[k].max(prev);
                }
                for ti in (hi..nt).rev() {
                    let next = out[table.idx(ti + 1, si, sj)];
                    let k = table.idx(ti, si, sj);
                    out[k] = out[k].max(next);
                }
                let (a_lo, a_hi) = (out[table.idx(lo, si, sj)], out[table.idx(hi, si, sj)]);
                for ti in lo + 1..hi {
                    let t = table.ts[ti];
                    let interp = (3.0 * t - 1.0) * a_hi + (2.0 - 3.0 * t) * a_lo;
                    let k = table.idx(ti, si, sj);
                    out[k] = out[k].max(interp);
                }
            }
        }
        table.a = out;
        table
    }

    fn eval(&self, t: f64, s: f64, s2: f64) -> f64 {
        let s_max = self.ds * self.ns as f64;
        if s > s_max * (1.0 + 1e-12) || s2 > s_max * (1.0 + 1e-12) {
            return f64::INFINITY;
        }
        let round_up = |v: f64| (((v / self.ds) - 1e-9).ceil().max(0.0) as usize).min(self.ns);
        let (si, sj) = (round_up(s), round_up(s2));
        let nt = self.ts.len() - 1;
        let thirds = nt / 3;
        let pos = t.clamp(0.0, 1.0) * nt as f64;
        let lo_i = ((pos + 1e-9).floor() as usize).min(nt);
        let hi_i = ((pos - 1e-9).ceil().max(0.0) as usize).min(nt);
        if hi_i <= thirds {
            self.a[self.idx(hi_i, si, sj)]
        } else if lo_i >= 2 * thirds {
            self.a[self.idx(lo_i, si, sj)]
        } else {
            let a_lo = self.a[self.idx(thirds, si, sj)];
            let a_hi = self.a[self.idx(2 * thirds, si, sj)];
            let t = t.clamp(1.0 / 3.0, 2.0 / 3.0);
            let interp = (3.0 * t - 1.0) * a_hi + (2.0 - 3.0 * t) * a_lo;
            let b = self.b[self.idx(lo_i, si, sj)].max(self.b[self.idx(hi_i, si, sj)]);
            interp.max(b)
        }
    }
}

/// Monotonize `a` on a grid with `resolution` steps per axis over
/// `s, s' ∈ [0, s_max]`. Beyond `s_max` the result is `+inf`.
///
/// Off-grid `s` and `s'` round up. Off-grid `t` rounds up on the first third
/// and down on the last, so the value includes both neighboring grid
/// times; in the middle third both neighbors of `B` enter the maximum.
pub fn monotonize_modulus(a: &ConvexityModulus, resolution: usize, s_max: f64) -> Result<ConvexityModulus> {
    if resolution < 16 {
        return Err(Error::Domain(format!("grid resolution must be at least 16, got {resolution}")));
    }
    if !(s_max > 0.0) || !s_max.is_finite() {
        return Err(Error::Domain(format!("s_max must be positive and finite, got {s_max}")));
    }
    let thirds = resolution.div_ceil(3);
    let table = MonotoneTable::build(a, thirds, resolution, s_max);
    Ok(ConvexityModulus::new(format!("monotone({})", a.name()), MonotoneFlags::FULL, move |t, s, s2| {
        table.eval(t, s, s2)
    }))
}

/// Grid on which a monotonized modulus is exact; used to compare tables.
pub fn monotone_grid(resolution: usize, s_max: f64) -> (Vec<f64>, Vec<f64>) {
    let thirds = resolution.div_ceil(3);
    let nt = 3 * thirds;
    let ts = (0..=nt).map(|i| i as f64 / nt as f64).collect();
    let ss = (0..=resolution).map(|i| s_max * i as f64 / resolution as f64).collect();
    (ts, ss)
}

/// `sqrt(A1² + A2²)`, the modulus of the ℓ² product.
pub fn product_modulus(a1: &ConvexityModulus, a2: &ConvexityModulus) -> ConvexityModulus {
    let (p, q) = (a1.clone(), a2.clone());
    let flags = MonotoneFlags {
        increasing_in_distances: a1.flags.increasing_in_distances && a2.flags.increasing_in_distances,
        outer_thirds_shape: a1.flags.outer_thirds_shape && a2.flags.outer_thirds_shape,
    };
    ConvexityModulus::new(format!("l2({}, {})", a1.name(), a2.name()), flags, move |t, s, s2| {
        p.eval(t, s, s2).hypot(q.eval(t, s, s2))
    })
}
