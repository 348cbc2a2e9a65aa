//! Experiment harness: seeded, parallel reproductions of the recovery
//! experiments, emitting CSV, JSON and SVG.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod plot;
pub mod pool;
pub mod seeds;

pub use error::{ExpError, Result};
