//! Hierarchical matrix completion with graph side information: generative
//! model, sample-complexity thresholds, a four-phase recovery pipeline, an
//! exhaustive likelihood oracle and a Monte Carlo harness.

pub mod cli;
pub mod error;
pub mod harness;
pub mod io;
pub mod model;
pub mod oracle;
pub mod recovery;
pub mod rng;
pub mod synth;
pub mod theory;

pub use error::{Error, Result};
