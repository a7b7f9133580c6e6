//! One-shot covert communication over state-dependent channels: bounds,
//! rate regions and exact protocol simulation at small dimensions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod classical_sim;
pub mod divergence;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod numerics;
pub mod pinching;
pub mod pmf;
pub mod protocol;
pub mod random;
pub mod regions;
pub mod serde_ext;
pub mod states;

pub use error::{Error, Result};
pub use numerics::Numerics;
