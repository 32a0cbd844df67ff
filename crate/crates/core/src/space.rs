//! The bicombed-space interface.

use std::fmt::Debug;
use std::sync::Arc;

use serde::Serialize;

use crate::rng::SampleRng;

/// Which distance a check compares against.
///
/// Exact spaces compute `dist` in closed form. One-sided spaces only know
/// certified bounds: `dist` is an upper estimate and `dist_lower` a lower
/// one, so checks must say which side they rely on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    Exact,
    OneSided,
}

impl DistanceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DistanceMode::Exact => "exact",
            DistanceMode::OneSided => "one-sided",
        }
    }
}

pub type PointMap<P> = Arc<dyn Fn(&P) -> P + Send + Sync>;

/// A labeled map that the space claims is an isometry.
#[derive(Clone)]
pub struct Isometry<P> {
    pub label: String,
    pub map: PointMap<P>,
}

impl<P> Isometry<P> {
    pub fn new(label: impl Into<String>, map: impl Fn(&P) -> P + Send + Sync + 'static) -> Self {
        Isometry { label: label.into(), map: Arc::new(map) }
    }

    pub fn apply(&self, p: &P) -> P {
        (self.map)(p)
    }
}

impl<P> Debug for Isometry<P> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Isometry").field("label", &self.label).finish()
    }
}

/// A metric space with a chosen path `γ_{x,y}` between every ordered pair.
pub trait BicombingSpace: Send + Sync {
    type Point: Clone + Debug + PartialEq + Serialize + Send + Sync + 'static;

    fn name(&self) -> String;

    /// Distance, or a certified upper estimate in one-sided mode.
    fn dist(&self, x: &Self::Point, y: &Self::Point) -> f64;

    /// Certified lower estimate of the distance.
    fn dist_lower(&self, x: &Self::Point, y: &Self::Point) -> f64 {
        self.dist(x, y)
    }

    fn mode(&self) -> DistanceMode {
        DistanceMode::Exact
    }

    /// `γ_{x,y}(t)` for `t` in `[0, 1]`.
    fn bicombe(&self, x: &Self::Point, y: &Self::Point, t: f64) -> Self::Point;

    /// Length `l(γ_{x,y})` of the chosen path; equals `dist` for geodesic
    /// bicombings.
    fn path_length(&self, x: &Self::Point, y: &Self::Point) -> f64 {
        self.dist(x, y)
    }

    /// Random point at scale `scale` around the space's base point.
    fn sample(&self, rng: &mut SampleRng, scale: f64) -> Self::Point;

    fn base_point(&self) -> Self::Point;

    fn isometries(&self) -> Vec<Isometry<Self::Point>> {
        Vec::new()
    }
}

/// Far-away configurations that do not fit in ordinary coordinates.
///
/// A configuration is described from an apex `x`: `x1` lies at distance
/// `l1` from `x` along the direction `up`, and `x2` is reached from `x1`
/// by moving `rho` in the direction making angle `theta` with the
/// direction from `x1` back to `x`. Everything near `x` stays
/// representable even when `l1` is huge.
pub trait FarField: BicombingSpace {
    fn apex(&self) -> Self::Point;

    /// Point at distance `s` from `from` along the geodesic ray leaving it
    /// in direction `angle` (Euclidean angle of the tangent).
    fn ray(&self, from: &Self::Point, angle: f64, s: f64) -> Self::Point;

    /// Direction of `x1` as seen from the apex.
    fn up(&self) -> f64 {
        std::f64::consts::FRAC_PI_2
    }

    /// Distance `l2 = d(x, x2)` and the direction from the apex toward `x2`.
    fn far_triangle(&self, l1: f64, rho: f64, theta: f64) -> (f64, f64);
}
