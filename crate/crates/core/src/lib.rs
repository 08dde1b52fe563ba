//! Numerical calculus of pseudo-difference operators on `Z^n x T^n`.
//!
//! Operators are realized on finite lattice windows: symbols are quantized into
//! dense matrices, composed, inverted up to smoothing remainders, and probed for
//! Sobolev boundedness, compactness and Fredholm index.

pub mod elliptic;
pub mod error;
pub mod fredholm;
pub mod lattice;
pub mod quantize;
pub mod scalar;
pub mod sobolev;
pub mod suite;
pub mod symbol;

pub use error::{Error, Result};
pub use scalar::{Real, Svd};

pub type LatticeSequence64 = lattice::LatticeSequence<f64>;
pub type TorusFunction64 = lattice::TorusFunction<f64>;
pub type Symbol64 = symbol::Symbol<f64>;
pub type GridSymbol64 = symbol::GridSymbol<f64>;
pub type OperatorMatrix64 = quantize::OperatorMatrix<f64>;
pub type Parametrix64 = elliptic::Parametrix<f64>;
