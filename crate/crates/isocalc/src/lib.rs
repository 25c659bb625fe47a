//! Exact calculus for matrices over the endomorphism ring of an elliptic
//! curve acting on powers of the curve: determinants, duals with minimal
//! integer multiplier, minor saturation by bounded unimodular transforms,
//! kernel-row divisor classes with intersection degrees, brute-force torsion
//! oracles, and certified (outward-rounded) evaluation of the explicit
//! lower-bound constant chains.

pub mod bound_engine;
pub mod cli;
pub mod divisor_calculus;
pub mod error;
pub mod io;
pub mod minor_saturation;
pub mod morphism_matrix;
pub mod pipeline;
pub mod quad_order;
pub mod suite;
pub mod torsion_oracle;
pub mod util;

pub use error::{Error, Result};
pub use morphism_matrix::{dual_isogeny, Isogeny, MorphMatrix};
pub use quad_order::{OrderDesc, OrderElem};
