//! Vectorized persistence blocks: persistence diagrams turned into
//! fixed-length vectors by exact integration of square indicator surfaces
//! over a grid, together with the tooling to compute diagrams, compare
//! them, and run clustering, retrieval, classification and change-point
//! experiments on the resulting features.

pub mod assignment;
pub mod baseline;
pub mod block;
pub mod cpd;
pub mod datagen;
pub mod diagram;
pub mod error;
pub mod experiment;
pub mod homology;
pub mod learn;
pub mod metrics;
pub mod rng;
pub mod vectorize;

pub use error::{Error, Result};
