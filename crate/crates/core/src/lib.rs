//! Robust low-rank matrix recovery from outlier-corrupted linear
//! measurements by subgradient descent on a nonsmooth l1 loss over
//! factored iterates.

pub mod error;
pub mod init;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod objectives;
pub mod operators;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
