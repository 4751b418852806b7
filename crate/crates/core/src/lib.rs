//! Geometrically nonlinear planar Cosserat (micropolar) elasticity with chiral
//! extensions.
//!
//! The crate provides small-tensor algebra, periodic finite-difference fields,
//! energy densities with their analytic first variations, equations of motion
//! with a symplectic integrator, plane-wave dispersion analysis of the
//! linearised chiral model, and pointwise checks of the planar reductions of
//! the three-dimensional theory.
//!
//! Pointwise kernels in [`algebra`] and the energy densities are generic over
//! [`Scalar`] (`f32` or `f64`); grid-based code runs in `f64`. The aliases at
//! the crate root fix the scalar to `f64`.

pub mod algebra;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod fields;
pub mod reduction3d;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod waves;

pub use error::{Error, Result};
pub use fields::{FieldState, Grid, Mat2Field, ScalarField, Vec2Field};
pub use report::{CheckStatus, VerificationReport};
pub use scalar::Scalar;

pub type Vec2 = algebra::Vec2<f64>;
pub type Mat2 = algebra::Mat2<f64>;
pub type Mat3 = algebra::Mat3<f64>;
pub type Tensor4 = algebra::Tensor4<f64>;
pub type MaterialParams = energy::MaterialParams<f64>;
