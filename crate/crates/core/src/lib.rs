//! Subset-selection machinery built around the better-solution principle:
//! when two candidate solutions of a statistical optimization problem are
//! compared, the one with the smaller objective value is at least as likely
//! to be a statistically good decision. The crate provides the ingredients
//! needed to exercise that principle end to end:
//!
//! - [`dist`]: location families (normal / Student-t / Cauchy), their
//!   densities and CDFs, and reproducible seeded sampling streams;
//! - [`location`]: median, trimmed mean, and the greater-likelihood selector;
//! - [`subsample`]: best-subsample objectives (profile negative
//!   log-likelihood and Kolmogorov distance), random and exhaustive subset
//!   search, KL risk, and contamination separation diagnostics;
//! - [`regress`]: least trimmed squares, BIC/GIC best-subset objectives,
//!   LAR/SIS screening with the better-fitting combiner;
//! - [`linalg`]: pivoted-QR least squares with minimum-norm solutions;
//! - [`scenario`]: deterministic generators for contaminated location and
//!   regression data;
//! - [`harness`]: a replication-parallel, bit-reproducible Monte Carlo
//!   engine with MSE / mean-objective-value / coverage summaries and the
//!   paired-budget audit of the principle itself.

pub mod dist;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod location;
pub mod onedim;
pub mod regress;
pub mod scenario;
pub mod subsample;

pub use error::{Error, Result};
