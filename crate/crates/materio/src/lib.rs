//! Desk-scale evolution-in-materio laboratory.
//!
//! Stimulates a simulated nonlinear electrode substrate through pins,
//! exhaustively sweeps stimulus configurations, mines the responses for the
//! 16 two-input Boolean gates, trains an MLP surrogate of the substrate, and
//! searches the surrogate by gradient descent for gate-implementing
//! configurations.
//!
//! The numeric core is generic over the scalar type via [`num::Real`];
//! the `f64`-concrete aliases below are what the CLI and the pipeline use.

pub mod dataset;
pub mod dft;
pub mod error;
pub mod gates;
pub mod hyper;
pub mod logio;
pub mod lzw;
pub mod miner;
pub mod mlp;
pub mod num;
pub mod search;
pub mod seeds;
pub mod signal;
mod solve;
pub mod substrate;
pub mod sweep;

pub use error::{Error, Result};
pub use gates::GateType;

/// Default substrate scalar for the pipeline.
pub type Substrate = substrate::SubstrateModel<f64>;
pub type SubstrateF32 = substrate::SubstrateModel<f32>;
/// Default surrogate scalar for the pipeline.
pub type Surrogate = mlp::Mlp<f64>;
pub type SurrogateF32 = mlp::Mlp<f32>;
