//! Numerical information theory for representation learning: entropy
//! rates, typical sets, channel capacity, rate-distortion, embedding-rate
//! accounting, random-coding simulations and neural-collapse diagnostics.

pub mod canonical;
pub mod channels;
pub mod cli;
pub mod codec;
pub mod collapse;
pub mod error;
pub mod formats;
pub mod prob;
pub mod rate_distortion;
pub mod rng;
pub mod sims;
pub mod sources;
pub mod typicality;

pub use error::{Error, Result};
