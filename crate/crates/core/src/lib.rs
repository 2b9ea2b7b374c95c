//! Numerics for the heterotic Ricci flow: exact jets, left-invariant geometry,
//! homothety reductions, flow integration and soliton residuals.

pub mod chart;
pub mod error;
pub mod flow;
pub mod homogeneous;
pub mod homothety;
pub mod identities;
pub mod jet;
pub mod kernels;
pub mod ode;
pub mod par;
pub mod sample;
pub mod scalar;
pub mod soliton;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
