//! Stepwise multiple-testing procedures under correlated Gaussian noise.
//!
//! The crate is organized around one pipeline:
//!
//! * [`distributions`] — standard normal CDF and quantile kernels, accurate in
//!   both tails, which everything else is built on;
//! * [`procedures`] — critical-value families and the step-down, step-up, and
//!   Hommel decision rules, plus validity checks on cutoff vectors;
//! * [`gaussian`] — the equicorrelated (and general nonnegative-correlation)
//!   Gaussian one-sided testing model and reproducible samplers for it;
//! * [`estimators`] — deterministic, parallel Monte Carlo estimation of
//!   family-wise error rate, false discovery rate, and power metrics, with
//!   grid sweeps;
//! * [`limits`] — analytic large-`n` limiting values of those error rates,
//!   including the step-up limiting value obtained by numerical minimization.
//!
//! Estimates are reproducible bit-for-bit for a given seed regardless of how
//! many threads are used: every replicate draws from its own counter-derived
//! random stream and results are reduced in a fixed order.

// Reference constants throughout are written out to full decimal precision so
// the intended f64 is unambiguous, even where fewer digits would round-trip.
#![allow(clippy::excessive_precision)]

pub mod distributions;
pub mod error;
pub mod estimators;
pub mod gaussian;
pub mod limits;
pub mod procedures;

pub use error::{Error, Result};
