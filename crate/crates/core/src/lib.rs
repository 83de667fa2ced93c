//! Core numerics for the two-user MIMO interference channel with
//! rate-splitting: complex matrix kernel, channel sampling, SIC rate
//! calculus, benchmark precoders and capacity outer bounds.

pub mod bounds;
pub mod channel;
pub mod linalg;
pub mod precoding;
pub mod rates;
pub mod seeds;

pub use linalg::{CMatrix, LinalgError};

#[cfg(feature = "testkit")]
pub mod testkit;
