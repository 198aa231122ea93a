//! Laplace-transform filtering of optimization solution spaces.
//!
//! An optimization problem `min O(x)` over a feasible region is summarized
//! by its filtered volume `Z(β) = ∫ e^{-βO} Ω_⊥(O) dO`, where `Ω_⊥(O)` is the
//! volume of the level set at objective value `O`. Linear and quadratic
//! programs get closed forms (mode sums); anything else is sampled.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod io;
pub mod model;
pub mod polytope;
pub mod quadrature;
pub mod sampler;
pub mod special;
pub mod transform;

pub use error::{Error, Result};
