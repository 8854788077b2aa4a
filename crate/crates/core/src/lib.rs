//! Axion-wind modelling toolkit for spin-qubit magnetometers.
//!
//! The crate is split by stage of the pipeline:
//!
//! * [`halo`]: Standard Halo Model kinematics, line shape and the effective field.
//! * [`geometry`]: lab-frame wind direction, sensor projection and its
//!   sidereal/annual expansion.
//! * [`signal`]: FM sidebands, baseband stream synthesis with noise and
//!   binary readout, heterodyning.
//! * [`spectral`]: averaged periodograms, window response, the heterodyned
//!   triplet statistic and SNR bookkeeping.
//! * [`sensitivity`]: adaptive segmentation, look-elsewhere thresholds and
//!   minimum detectable coupling curves.
//!
//! Everything is SI at the boundary (Hz, s, T, km/s) with masses in µeV;
//! natural-unit conversions live in [`units`].

// `!(x > 0.0)` style guards are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod halo;
mod linalg;
pub mod rng;
pub mod sensitivity;
pub mod signal;
pub mod spectral;
pub mod units;

pub use error::{Error, Result};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
