//! Bayesian denoising of noisy adjacency-matrix sequences under a
//! matrix-variate t error model.
//!
//! The crate is `no_std` with `alloc`. Everything here is pure computation:
//! matrix kernels, matrix-variate distributions, the data-augmented Gibbs
//! sampler, centrality measures, the synthetic-data generator, rolling
//! Granger statistics and autocorrelation diagnostics. File formats, the CLI
//! and parallel orchestration live in the `mtnet` crate.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
mod math;

pub mod diagnostics;
pub mod dists;
pub mod gibbs;
pub mod granger;
pub mod linalg;
pub mod network;
pub mod rng;
pub mod special;
pub mod synth;

pub use error::{Error, Result};
pub use linalg::{Matrix, SpdFactor};
