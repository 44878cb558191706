//! Simulation of an N-receiver broadcast channel whose state is the parity of the
//! receivers' side information, together with the conferencing protocols (classical
//! secure summation and verified phase-GHZ masks) that let the receivers decode it.

pub mod adversary;
pub mod bits;
pub mod channel;
pub mod coordinator;
pub mod error;
pub mod ghz;
pub mod harness;
pub mod ledger;
pub mod mpc;
pub mod rng;
pub mod transcript;

pub use error::{Error, Result};
