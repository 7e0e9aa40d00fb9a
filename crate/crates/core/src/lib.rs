//! Lyapunov feedback and geometric control for Bell-state generation between
//! two distant two-level atoms coupled through a shared cavity mode.
//!
//! The numerical modules are generic over the real scalar type ([`scalar::Real`],
//! implemented for `f32` and `f64`). The aliases below fix the common `f64` case.

// `!(x > 0)` is how NaN gets rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod dynamics;
pub mod experiments;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod state;

pub type Complex = scalar::C<f64>;
pub type CMatrix = linalg::CMat<f64>;
pub type CMatrix32 = linalg::CMat<f32>;
pub type StateVector = state::Ket<f64>;
pub type StateVector32 = state::Ket<f32>;
pub type DensityMatrix = state::Density<f64>;
pub type DensityMatrix32 = state::Density<f32>;
pub type ModelParams = model::ModelParams<f64>;
pub type HamiltonianPair = model::HamiltonianPair<f64>;
pub type ControlLaw = control::ControlLaw<f64>;
pub type IntegratorConfig = dynamics::IntegratorConfig<f64>;
pub type Trajectory = dynamics::Trajectory<f64>;
pub type Trajectory32 = dynamics::Trajectory<f32>;
