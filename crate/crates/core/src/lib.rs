//! Discrete Bayesian networks with hidden-variable cardinality selection by
//! agglomerative state merging.

pub mod agglomerate;
pub mod data;
pub mod discovery;
pub mod em;
pub mod error;
pub mod inference;
pub mod multi;
pub mod network;
pub mod scoring;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
