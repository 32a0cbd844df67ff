//! Bicombed metric spaces as computable objects.
//!
//! The crate provides the hyperbolic plane, a non-CAT(0) model built on
//! the unit tangent bundle of the hyperbolic plane, flow spaces of trails,
//! contraction and transfer constants, tight spans of finite metrics, and
//! sampled checkers that turn the defining inequalities into reports.

// `!(x >= 0.0)` style comparisons are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Checkers take the full set of sampling knobs explicitly.
#![allow(clippy::too_many_arguments)]

pub mod checks;
pub mod contraction;
pub mod controls;
pub mod error;
pub mod euclid;
pub mod flow;
pub mod h2;
pub mod modulus;
pub mod product;
pub mod quad;
pub mod report;
pub mod rng;
pub mod sl2;
pub mod space;
pub mod tight_span;
pub mod transfer;

pub use checks::CheckParams;
pub use contraction::{contraction_constants, ContractionConstants};
pub use error::{Error, Result};
pub use euclid::Euclidean;
pub use flow::{fs_distance, FlowDistance, Trail};
pub use h2::{H2Path, H2Point, H2Space, Mobius};
pub use modulus::{linear_modulus, ConvexityModulus, LengthModulus, MonotoneFlags};
pub use report::{PropertyReport, Series};
pub use sl2::{SL2Space, SLPoint};
pub use space::{BicombingSpace, DistanceMode, FarField, Isometry};
