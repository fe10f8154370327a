//! Numerical library for MIMO massive multiple access: Monte-Carlo sum
//! rates, Gallager error exponents, channel-hardening diagnostics, and
//! message-length region feasibility, with reproducible seeded experiments.
//!
//! Entry points by task:
//! - [`rates::expected_sum_rate`] / [`rates::asymptotic_sum_rate`] — sum rate
//!   per channel use, Monte-Carlo vs large-system limit.
//! - [`exponents::gallager_e0`] and friends — error-event exponents and the
//!   achievability-side bounds built from them.
//! - [`hardening`] — concentration of the received Gram matrix.
//! - [`region`] — feasibility of message-length allocations.
//! - [`experiments`] — the CSV-producing experiment runners behind the CLI.

pub mod channel;
pub mod error;
pub mod experiments;
pub mod exponents;
pub mod hardening;
pub mod montecarlo;
pub mod numerics;
pub mod rates;
pub mod region;
pub mod scenario;
pub mod seed;

pub use error::{Error, Result};
