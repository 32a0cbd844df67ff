//! Euclidean space with straight-line bicombing.

use crate::rng::{self, SampleRng};
use crate::space::{BicombingSpace, FarField, Isometry};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Euclidean {
    pub dim: usize,
}

impl Euclidean {
    pub fn new(dim: usize) -> Self {
        Euclidean { dim: dim.max(1) }
    }

    pub fn plane() -> Self {
        Euclidean::new(2)
    }

    /// Translation by the integer unit vector `±e_axis`.
    pub fn unit_translation(&self, axis: usize, sign: f64) -> Isometry<Vec<f64>> {
        let label = format!("{}e{}", if sign < 0.0 { "-" } else { "+" }, axis + 1);
        Isometry::new(label, move |p: &Vec<f64>| {
            let mut q = p.clone();
            q[axis] += sign;
            q
        })
    }
}

pub fn euclid_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

pub fn lerp(x: &[f64], y: &[f64], t: f64) -> Vec<f64> {
    if t <= 0.0 {
        return x.to_vec();
    }
    if t >= 1.0 {
        return y.to_vec();
    }
    x.iter().zip(y).map(|(a, b)| a + t * (b - a)).collect()
}

impl BicombingSpace for Euclidean {
    type Point = Vec<f64>;

    fn name(&self) -> String {
        "euclidean".into()
    }

    fn dist(&self, x: &Vec<f64>, y: &Vec<f64>) -> f64 {
        euclid_dist(x, y)
    }

    fn bicombe(&self, x: &Vec<f64>, y: &Vec<f64>, t: f64) -> Vec<f64> {
        lerp(x, y, t)
    }

    fn sample(&self, rng: &mut SampleRng, scale: f64) -> Vec<f64> {
        (0..self.dim).map(|_| rng::uniform(rng, -scale, scale)).collect()
    }

    fn base_point(&self) -> Vec<f64> {
        vec![0.0; self.dim]
    }

    fn isometries(&self) -> Vec<Isometry<Vec<f64>>> {
        let mut out = Vec::new();
        for axis in 0..self.dim {
            out.push(self.unit_translation(axis, 1.0));
            out.push(self.unit_translation(axis, -1.0));
        }
        if self.dim >= 2 {
            out.push(Isometry::new("rot90", |p: &Vec<f64>| {
                let mut q = p.clone();
                q[0] = -p[1];
                q[1] = p[0];
                q
            }));
        }
        out
    }
}

impl FarField for Euclidean {
    fn apex(&self) -> Vec<f64> {
        vec![0.0; self.dim]
    }

    fn ray(&self, from: &Vec<f64>, angle: f64, s: f64) -> Vec<f64> {
        let mut q = from.clone();
        q[0] += s * angle.cos();
        if self.dim > 1 {
            q[1] += s * angle.sin();
        }
        q
    }

    fn far_triangle(&self, l1: f64, rho: f64, theta: f64) -> (f64, f64) {
        // x1 = (0, l1); direction back to the apex is -pi/2.
        let a = -std::f64::consts::FRAC_PI_2 + theta;
        let (x, y) = (rho * a.cos(), l1 + rho * a.sin());
        (x.hypot(y), y.atan2(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_triangle_matches_direct_coordinates() {
        let e = Euclidean::plane();
        let (l2, dir) = e.far_triangle(5.0, 1.0, 0.3);
        let x1 = e.ray(&e.apex(), e.up(), 5.0);
        let x2 = e.ray(&x1, -std::f64::consts::FRAC_PI_2 + 0.3, 1.0);
        assert!((euclid_dist(&e.apex(), &x2) - l2).abs() < 1e-12);
        let back = e.ray(&e.apex(), dir, l2);
        assert!(euclid_dist(&back, &x2) < 1e-12);
    }
}
