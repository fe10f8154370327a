//! Message-length rates and the sum rate per channel use: the Monte-Carlo
//! expectation E{log det(I + Σ_t H_t Q_t H_t†)}, its large-population limit
//! N_R·log(1 + Σ_t β_t Tr(Q_t)), and the μ/c coefficient bookkeeping that
//! splits the sum rate across users.

use crate::channel::{effective_sum_power, UserProfile};
use crate::error::{Error, Result};
use crate::montecarlo::{estimate, McEstimate, McSettings};
use crate::numerics::logdet_eye_plus;

/// Per-user codelength shares c_k with Σ c_k = n.
#[derive(Clone, Debug, PartialEq)]
pub struct RateAllocation {
    c: Vec<f64>,
    n: usize,
}

impl RateAllocation {
    pub fn new(c: Vec<f64>, n: usize) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::Validation("allocation needs at least one user".into()));
        }
        if n == 0 {
            return Err(Error::Validation("codelength must be positive".into()));
        }
        if c.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(Error::Validation(
                "allocation coefficients must be positive and finite".into(),
            ));
        }
        let sum: f64 = c.iter().sum();
        if (sum - n as f64).abs() > 1e-9 * n as f64 {
            return Err(Error::Validation(format!(
                "allocation coefficients sum to {sum}, expected codelength {n}"
            )));
        }
        Ok(Self { c, n })
    }

    /// The symmetric split c_k = n/k_n used throughout the experiments.
    pub fn symmetric(n: usize, k_n: usize) -> Result<Self> {
        if k_n == 0 {
            return Err(Error::Validation("user count must be positive".into()));
        }
        Self::new(vec![n as f64 / k_n as f64; k_n], n)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn users(&self) -> usize {
        self.c.len()
    }
}

/// μ_k = log M_k / Σ_t log M_t. The μ sum to 1 by construction.
pub fn mu_coefficients(message_log_sizes: &[f64]) -> Result<Vec<f64>> {
    if message_log_sizes.is_empty() {
        return Err(Error::Validation(
            "mu coefficients need at least one message size".into(),
        ));
    }
    if message_log_sizes
        .iter()
        .any(|&v| !(v.is_finite() && v > 0.0))
    {
        return Err(Error::Validation(
            "message log-sizes must be positive and finite".into(),
        ));
    }
    let total: f64 = message_log_sizes.iter().sum();
    Ok(message_log_sizes.iter().map(|v| v / total).collect())
}

/// Monte-Carlo estimate of E_H{log det(I + Σ_t H_t Q_t H_t†)} in nats per
/// channel use, one independent channel use per trial.
pub fn expected_sum_rate(
    profiles: &[UserProfile],
    nr: usize,
    nt: usize,
    settings: McSettings,
) -> Result<McEstimate> {
    if profiles.is_empty() {
        // The empty sum has determinant 1 for every draw.
        return Ok(McEstimate::exact(0.0, settings));
    }
    if let Some(p) = profiles.iter().find(|p| p.nt() != nt) {
        return Err(Error::Config(format!(
            "user {} has a {}-antenna covariance, expected {nt}",
            p.index(),
            p.nt()
        )));
    }
    estimate(
        |draw| match draw.gram(profiles).and_then(|g| logdet_eye_plus(&g, 1.0)) {
            Ok(v) => v,
            // Surfaces as a non-finite trial with its index.
            Err(_) => f64::NAN,
        },
        profiles,
        nr,
        settings,
    )
}

/// The hardening limit N_R·log(1 + Σ_t β_t Tr(Q_t)) in nats per channel use.
pub fn asymptotic_sum_rate(profiles: &[UserProfile], nr: usize) -> f64 {
    nr as f64 * effective_sum_power(profiles).ln_1p()
}

/// Per-codeword message-length rates R_k = c_k·sum_rate.
pub fn message_length_rates(allocation: &RateAllocation, sum_rate: f64) -> Result<Vec<f64>> {
    if !(sum_rate.is_finite() && sum_rate >= 0.0) {
        return Err(Error::Validation(format!(
            "sum rate must be nonnegative, got {sum_rate}"
        )));
    }
    Ok(allocation.coefficients().iter().map(|c| c * sum_rate).collect())
}
