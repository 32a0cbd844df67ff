//! Deliberately broken spaces that the checkers must reject.

use crate::euclid::{euclid_dist, Euclidean};
use crate::rng::SampleRng;
use crate::space::{BicombingSpace, Isometry};

/// The plane with a "bicombing" that ignores `t` and stays at `x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BrokenSpace;

impl BicombingSpace for BrokenSpace {
    type Point = Vec<f64>;

    fn name(&self) -> String {
        "broken".into()
    }

    fn dist(&self, x: &Vec<f64>, y: &Vec<f64>) -> f64 {
        euclid_dist(x, y)
    }

    fn bicombe(&self, x: &Vec<f64>, _y: &Vec<f64>, _t: f64) -> Vec<f64> {
        x.clone()
    }

    fn sample(&self, rng: &mut SampleRng, scale: f64) -> Vec<f64> {
        Euclidean::plane().sample(rng, scale)
    }

    fn base_point(&self) -> Vec<f64> {
        vec![0.0, 0.0]
    }

    fn isometries(&self) -> Vec<Isometry<Vec<f64>>> {
        Euclidean::plane().isometries()
    }
}

/// The plane whose declared isometries include the dilation `p -> 2p`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NonIsometrySpace;

impl BicombingSpace for NonIsometrySpace {
    type Point = Vec<f64>;

    fn name(&self) -> String {
        "non-isometry".into()
    }

    fn dist(&self, x: &Vec<f64>, y: &Vec<f64>) -> f64 {
        euclid_dist(x, y)
    }

    fn bicombe(&self, x: &Vec<f64>, y: &Vec<f64>, t: f64) -> Vec<f64> {
        Euclidean::plane().bicombe(x, y, t)
    }

    fn sample(&self, rng: &mut SampleRng, scale: f64) -> Vec<f64> {
        Euclidean::plane().sample(rng, scale)
    }

    fn base_point(&self) -> Vec<f64> {
        vec![0.0, 0.0]
    }

    fn isometries(&self) -> Vec<Isometry<Vec<f64>>> {
        let mut out = Euclidean::plane().isometries();
        out.push(Isometry::new("dilate2", |p: &Vec<f64>| p.iter().map(|v| 2.0 * v).collect()));
        out
    }
}
