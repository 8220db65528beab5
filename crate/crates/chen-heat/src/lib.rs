//! Samplers and estimators on top of `chen-core`: Brownian paths and
//! bridges, the matrix-model heat semigroup and its truncated approximants,
//! and the Monte Carlo local index density.

pub mod index;
pub mod paths;
pub mod semigroup;
