//! ℓ² products of bicombed spaces.

use crate::error::{Error, Result};
use crate::modulus::{product_modulus, ConvexityModulus};
use crate::rng::SampleRng;
use crate::space::{BicombingSpace, DistanceMode, Isometry};

#[derive(Debug, Clone)]
pub struct ProductSpace<A, B> {
    pub first: A,
    pub second: B,
}

impl<A: BicombingSpace, B: BicombingSpace> BicombingSpace for ProductSpace<A, B> {
    type Point = (A::Point, B::Point);

    fn name(&self) -> String {
        format!("product-{}-{}", self.first.name(), self.second.name())
    }

    fn dist(&self, x: &Self::Point, y: &Self::Point) -> f64 {
        self.first.dist(&x.0, &y.0).hypot(self.second.dist(&x.1, &y.1))
    }

    fn dist_lower(&self, x: &Self::Point, y: &Self::Point) -> f64 {
        self.first.dist_lower(&x.0, &y.0).hypot(self.second.dist_lower(&x.1, &y.1))
    }

    fn mode(&self) -> DistanceMode {
        if self.first.mode() == DistanceMode::Exact && self.second.mode() == DistanceMode::Exact {
            DistanceMode::Exact
        } else {
            DistanceMode::OneSided
        }
    }

    fn bicombe(&self, x: &Self::Point, y: &Self::Point, t: f64) -> Self::Point {
        (self.first.bicombe(&x.0, &y.0, t), self.second.bicombe(&x.1, &y.1, t))
    }

    fn path_length(&self, x: &Self::Point, y: &Self::Point) -> f64 {
        self.first.path_length(&x.0, &y.0).hypot(self.second.path_length(&x.1, &y.1))
    }

    fn sample(&self, rng: &mut SampleRng, scale: f64) -> Self::Point {
        (self.first.sample(rng, scale), self.second.sample(rng, scale))
    }

    fn base_point(&self) -> Self::Point {
        (self.first.base_point(), self.second.base_point())
    }

    fn isometries(&self) -> Vec<Isometry<Self::Point>> {
        let mut out: Vec<Isometry<Self::Point>> = Vec::new();
        for g in self.first.isometries() {
            let label = format!("{}x1", g.label);
            out.push(Isometry::new(label, move |p: &Self::Point| (g.apply(&p.0), p.1.clone())));
        }
        for h in self.second.isometries() {
            let label = format!("1x{}", h.label);
            out.push(Isometry::new(label, move |p: &Self::Point| (p.0.clone(), h.apply(&p.1))));
        }
        out
    }
}

/// Product with the ℓ² metric, componentwise bicombing and modulus
/// `sqrt(A1² + A2²)`.
///
/// Both moduli must be increasing in the distances: the product bound
/// evaluates each factor's modulus at the product distances, which
/// dominate the factor distances.
pub fn product_space<A: BicombingSpace, B: BicombingSpace>(
    first: A,
    a1: &ConvexityModulus,
    second: B,
    a2: &ConvexityModulus,
) -> Result<(ProductSpace<A, B>, ConvexityModulus)> {
    for a in [a1, a2] {
        if !a.flags.increasing_in_distances {
            return Err(Error::Precondition(format!(
                "modulus {} is not flagged increasing in the distances; monotonize it first",
                a.name()
            )));
        }
    }
    Ok((ProductSpace { first, second }, product_modulus(a1, a2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclid::Euclidean;
    use crate::modulus::{linear_modulus, MonotoneFlags};

    #[test]
    fn non_monotone_modulus_is_rejected() {
        let bad = ConvexityModulus::new("bad", MonotoneFlags::default(), |t, s, _| t * s);
        let r = product_space(Euclidean::plane(), &bad, Euclidean::plane(), &linear_modulus());
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn constant_factor_reduces_to_other_factor() {
        let (p, _) =
            product_space(Euclidean::new(1), &linear_modulus(), Euclidean::plane(), &linear_modulus()).unwrap();
        let x = (vec![0.5], vec![0.0, 0.0]);
        let y = (vec![0.5], vec![2.0, -1.0]);
        let m = p.bicombe(&x, &y, 0.25);
        assert_eq!(m.0, vec![0.5]);
        assert_eq!(m.1, vec![0.5, -0.25]);
        assert_eq!(p.dist(&x, &y), 5f64.sqrt());
    }
}
