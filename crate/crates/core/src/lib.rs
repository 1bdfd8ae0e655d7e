//! Correlation-filter tracking with single and multiple Gaussian kernels.
//!
//! The crate covers the full pipeline: spectral circulant algebra ([`spectral`]),
//! feature extraction ([`features`]), kernel correlation ([`kernels`]), the KCF, MKCF
//! and MKCFup solvers ([`solvers`]), the tracking loop ([`tracker`]), numerical checks
//! of the upper-bound method ([`diagnostics`]) and the benchmark harness ([`bench`]).

pub mod bench;
pub mod diagnostics;
pub mod error;
pub mod features;
pub mod kernels;
pub mod solvers;
pub mod spectral;
pub mod tracker;

pub use error::{Error, Result};
