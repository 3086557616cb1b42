//! Partition function of the six-vertex model on an `N × N` lattice with
//! domain wall boundary conditions, computed through several independent
//! representations that can be cross-checked against each other:
//!
//! * exhaustive enumeration and a row-transfer dynamic program
//!   ([`enumeration`]),
//! * the Hankel determinant of cot-derivatives and its factorisation
//!   ([`hankel`]),
//! * the finite `N × N` determinant `det(I - ζW)` and its Gauss
//!   decomposition ([`finite`]),
//! * Fredholm determinants of integrable kernels built from
//!   Meixner-Pollaczek, Meixner and Laguerre polynomials ([`fredholm`]).
//!
//! Numerics are generic over [`Real`]; [`Mp`] supplies the extended
//! precision the Hankel route needs.

pub mod enumeration;
pub mod error;
pub mod finite;
pub mod fredholm;
pub mod hankel;
pub mod linalg;
pub mod logscaled;
pub mod mp;
pub mod orthopoly;
pub mod params;
pub mod quadrature;
pub mod scalar;

pub use error::{Diagnosed, Error, Result, Warning};
pub use logscaled::LogScaledValue;
pub use mp::{Mp, PrecisionContext};
pub use params::{ModelParams, VertexWeights};
pub use scalar::{ComplexFn, Real};

pub use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type C32 = Complex<f32>;
pub type CMp = Complex<Mp>;

pub type ModelParams64 = ModelParams<f64>;
pub type ModelParamsMp = ModelParams<Mp>;
pub type VertexWeights64 = VertexWeights<f64>;
pub type LogScaled64 = LogScaledValue<f64>;
pub type LogScaledMp = LogScaledValue<Mp>;
