//! Tropical linearly factorized programs: model, feasibility, local descent
//! and exhaustive oracles.

pub mod descent;
pub mod error;
pub mod feasibility;
pub mod flow;
pub mod generate;
pub mod instance;
pub mod io;
pub mod mincut;
pub mod oracle;
pub mod scalar;
pub mod solve;
pub mod tangent;
pub mod tree;
pub mod trop;

pub use error::{Error, Result};
pub use instance::{objective, is_feasible, Instance};
pub use scalar::{Float, NumMode, Scalar};
pub use trop::{ExtScalar, Extent, TropMatrix, TropVector};
