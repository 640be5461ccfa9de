//! Spatial non-stationary blind source separation.
//!
//! The observed field is modeled as an affine mixture `x(s) = A·z(s) + b` of
//! latent components that are uncorrelated everywhere but have spatially
//! varying second-order structure. Estimators recover an unmixing matrix W
//! (up to permutation, sign, and scale of its rows) by exactly or
//! approximately diagonalizing local covariance matrices computed over a
//! spatial partition and a set of spatial kernels:
//!
//! - [`estimators::snss_sd`] — exact simultaneous diagonalization of the
//!   zero-lag covariances of two blocks;
//! - [`estimators::snss_jd`] — joint diagonalization of per-block
//!   covariances after whole-domain whitening;
//! - [`estimators::snss_sjd`] — joint diagonalization over the full
//!   block × kernel grid of local covariances;
//! - [`estimators::sbss`] — the stationary special case (one block,
//!   non-trivial kernels only);
//! - [`estimators::fobi`] — a classical fourth-order baseline.
//!
//! Supporting modules: [`geometry`] (coordinates, kernels, partitions),
//! [`loccov`] (local covariance and whitening), [`jointdiag`] (exact and
//! Givens-sweep diagonalizers), [`metrics`] (the minimum distance index),
//! [`fields`] (Matérn and non-stationary Matérn simulation),
//! [`coda`] (log-ratio transforms and moving-block variance maps),
//! [`sim`] (the Monte-Carlo study harness), and [`csvio`] (the fixed CSV
//! dialect shared by the tools).

pub mod coda;
pub mod csvio;
pub mod data;
pub mod error;
pub mod estimators;
pub mod fields;
pub mod geometry;
pub mod jointdiag;
pub mod loccov;
pub mod metrics;
pub mod sim;

pub use crate::data::SpatialData;
pub use crate::error::{Error, Result};
pub use crate::estimators::{fobi, latent_scores, sbss, snss_jd, snss_sd, snss_sjd, UnmixingModel};
pub use crate::geometry::{Coords, KernelSpec, Partition, PartitionSpec, Rect};
pub use crate::metrics::mdi;
