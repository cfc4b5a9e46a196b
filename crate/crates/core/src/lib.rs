//! Growth speed of interlacing particle systems and its lozenge tiling
//! counterpart.
//!
//! Numerical code is generic over [`scalar::Real`] (`f32`, `f64`); dimer
//! computations on finite graphs are generic over [`scalar::Weight`], which
//! also covers exact rationals. The aliases below fix the common choices.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod identity;
pub mod kasteleyn;
pub mod kernel;
pub mod lattice;
pub mod linalg;
pub mod quadrature;
pub mod scalar;
pub mod stationary;

pub use error::{Error, Result};
pub use lattice::{BlackVertex, GTPattern, LozengeType, WhiteVertex};
pub use scalar::{Field, Real, Weight};

pub type Slope64 = stationary::Slope<f64>;
pub type Slope32 = stationary::Slope<f32>;
pub type Weights64 = stationary::Weights<f64>;
pub type QuadConfig64 = kernel::QuadConfig<f64>;
pub type QuadConfig32 = kernel::QuadConfig<f32>;
pub type Graph = kasteleyn::HoneycombSubgraph<f64>;
pub type ExactGraph = kasteleyn::HoneycombSubgraph<num_rational::BigRational>;
pub type ComplexMatrix64 = linalg::ComplexMatrix<f64>;
