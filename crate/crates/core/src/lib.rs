//! Distributed multi-target tracking with δ-GLMB filters and
//! generalized covariance intersection (GCI) fusion of unlabeled
//! generalized multi-Bernoulli (GMB) densities.
//!
//! Each sensor node runs a local δ-GLMB filter ([`glmb`]). Before fusion
//! the labels are dropped ([`approx::strip_labels`]) and the posterior is
//! approximated either by its second-order form, which keeps both the PHD
//! and the cardinality distribution ([`approx::to_sogmb`]), or by a
//! PHD-matching multi-Bernoulli ([`approx::to_fogmb`]). Approximated
//! posteriors are fused pairwise with [`fusion::fuse_pair`] or along a
//! chain of nodes with [`fusion::fuse_sequential`].
//!
//! [`scenario`] simulates truth and cluttered scans, [`metrics`] scores
//! estimates with OSPA, and [`experiment`] wires everything into Monte
//! Carlo runs that write CSV files. [`oracle`] holds slow brute-force
//! references used by the tests.

pub mod approx;
pub mod assignment;
pub mod error;
pub mod experiment;
pub mod fusion;
pub mod gaussian;
pub mod glmb;
pub mod metrics;
pub mod oracle;
pub mod rfs;
pub mod scenario;

pub use error::{Error, Result};
