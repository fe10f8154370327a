//! Gallager error-exponent evaluation and the achievability-side bounds
//! built from it: the per-event exponent E^l(ρ), the per-channel-use
//! exponent after rate and union-bound penalties, the Case-I analytic lower
//! bound, and the event/total error bounds.

use crate::channel::{admission_window, effective_sum_power, UserProfile};
use crate::error::{Error, Result};
use crate::montecarlo::{estimate, McEstimate, McSettings};
use crate::numerics::logdet_eye_plus;

/// An error event: the subset A_l of users decoded in error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorEvent {
    users: Vec<usize>,
}

impl ErrorEvent {
    /// Event over explicit user indices (deduplicated, kept sorted).
    pub fn new(mut users: Vec<usize>) -> Result<Self> {
        if users.is_empty() {
            return Err(Error::Validation("an error event needs at least one user".into()));
        }
        users.sort_unstable();
        users.dedup();
        Ok(Self { users })
    }

    /// The canonical worst event of size k_e: the users with the largest
    /// effective powers β·Tr(Q), ties broken by index. Among all events of
    /// its size this one maximizes the union-bound load, so verifying it
    /// covers the binding case.
    pub fn canonical_worst(profiles: &[UserProfile], k_e: usize) -> Result<Self> {
        if k_e == 0 || k_e > profiles.len() {
            return Err(Error::Validation(format!(
                "event size {k_e} out of range for {} users",
                profiles.len()
            )));
        }
        let mut order: Vec<usize> = (0..profiles.len()).collect();
        order.sort_by(|&a, &b| {
            profiles[b]
                .weight()
                .partial_cmp(&profiles[a].weight())
                .expect("weights are finite")
                .then(a.cmp(&b))
        });
        order.truncate(k_e);
        order.sort_unstable();
        Ok(Self { users: order })
    }

    pub fn users(&self) -> &[usize] {
        &self.users
    }

    pub fn k_e(&self) -> usize {
        self.users.len()
    }

    fn check_against(&self, profiles: &[UserProfile]) -> Result<()> {
        match self.users.last() {
            Some(&last) if last >= profiles.len() => Err(Error::Validation(format!(
                "event user {last} out of range for {} profiles",
                profiles.len()
            ))),
            _ => Ok(()),
        }
    }
}

/// One evaluated grid point of the exponent sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentPoint {
    pub rho: f64,
    /// Per-use Gallager exponent E^l(ρ) for the event.
    pub e0: f64,
    /// Per-use exponent after rate and union-bound penalties.
    pub e_r: f64,
    /// Event-size fraction γ = k_e/k_n.
    pub gamma: f64,
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho.is_finite() && (0.0..=1.0).contains(&rho)) {
        return Err(Error::Validation(format!("rho must lie in [0,1], got {rho}")));
    }
    Ok(())
}

/// E^l(ρ) = −log E_H{ det(I + (1/(1+ρ))·G_{A_l})^(−ρ) }, estimated per
/// channel use. The determinant power is evaluated in the log domain as
/// exp(−ρ·logdet(I + G/(1+ρ))). Exactly 0 at ρ = 0.
///
/// The returned std_error maps the trial spread through the outer log
/// (delta method: se(−log m̂) = se(m̂)/m̂).
pub fn gallager_e0(
    rho: f64,
    event: &ErrorEvent,
    profiles: &[UserProfile],
    nr: usize,
    settings: McSettings,
) -> Result<McEstimate> {
    check_rho(rho)?;
    event.check_against(profiles)?;
    if rho == 0.0 {
        // det^0 = 1 for every draw; the estimate is exact.
        return Ok(McEstimate::exact(0.0, settings));
    }
    let scale = 1.0 / (1.0 + rho);
    let inner = estimate(
        |draw| {
            match draw
                .gram_subset(profiles, event.users())
                .and_then(|g| logdet_eye_plus(&g, scale))
            {
                Ok(ld) => (-rho * ld).exp(),
                Err(_) => f64::NAN,
            }
        },
        profiles,
        nr,
        settings,
    )?;
    if !(inner.mean > 0.0) {
        return Err(Error::Numerical(format!(
            "mean determinant power {} is not positive",
            inner.mean
        )));
    }
    Ok(McEstimate {
        mean: -inner.mean.ln(),
        std_error: inner.std_error / inner.mean,
        trials: inner.trials,
        master_seed: inner.master_seed,
    })
}

/// H₂(p) = −p·log p − (1−p)·log(1−p) in nats, with 0·log 0 = 0.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
        return Err(Error::Validation(format!(
            "entropy argument must lie in [0,1], got {p}"
        )));
    }
    let side = |x: f64| if x == 0.0 { 0.0 } else { -x * x.ln() };
    Ok(side(p) + side(1.0 - p))
}

/// log C(k_n, k_e) as a sum of logs — exact at the boundaries (empty product).
fn ln_binomial(k_n: usize, k_e: usize) -> f64 {
    // C(k_n, k_e) = Π_{i=1..k_e} (k_n − k_e + i)/i; symmetric form keeps the
    // product short.
    let k = k_e.min(k_n - k_e);
    (1..=k)
        .map(|i| (((k_n - k) + i) as f64 / i as f64).ln())
        .sum()
}

/// Did log C(k_n, k_e) ≤ k_n·H₂(k_e/k_n) hold, and by how much.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinomialEntropyBound {
    pub holds: bool,
    /// k_n·H₂(k_e/k_n) − log C(k_n, k_e), nonnegative when the bound holds.
    pub slack: f64,
}

/// Verify the union-bound counting inequality for one (k_n, k_e) pair.
pub fn binomial_entropy_bound_holds(k_n: usize, k_e: usize) -> Result<BinomialEntropyBound> {
    if k_n == 0 {
        return Err(Error::Validation("k_n must be at least 1".into()));
    }
    if k_e > k_n {
        return Err(Error::Validation(format!(
            "k_e = {k_e} exceeds k_n = {k_n}"
        )));
    }
    let entropy_side = k_n as f64 * binary_entropy(k_e as f64 / k_n as f64)?;
    let slack = entropy_side - ln_binomial(k_n, k_e);
    Ok(BinomialEntropyBound { holds: slack >= 0.0, slack })
}

/// Per-channel-use exponent
/// E_r(ρ) = E^l(ρ) − (ρ/n)·Σ_{k∈A_l} R_k − (k_n/n)·H₂(γ), γ = k_e/k_n.
///
/// `rates` holds the per-codeword R_k for the event's users, in event order.
pub fn per_use_exponent(
    rho: f64,
    event: &ErrorEvent,
    rates: &[f64],
    n: usize,
    k_n: usize,
    profiles: &[UserProfile],
    nr: usize,
    settings: McSettings,
) -> Result<McEstimate> {
    if rates.len() != event.k_e() {
        return Err(Error::Validation(format!(
            "{} rates supplied for an event of {} users",
            rates.len(),
            event.k_e()
        )));
    }
    if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::Validation("rates must be nonnegative and finite".into()));
    }
    if n == 0 {
        return Err(Error::Validation("codelength must be positive".into()));
    }
    if k_n == 0 || event.k_e() > k_n {
        return Err(Error::Validation(format!(
            "event of {} users does not fit k_n = {k_n}",
            event.k_e()
        )));
    }
    let gamma = event.k_e() as f64 / k_n as f64;
    let e0 = gallager_e0(rho, event, profiles, nr, settings)?;
    let rate_term = rho / n as f64 * rates.iter().sum::<f64>();
    let entropy_term = k_n as f64 / n as f64 * binary_entropy(gamma)?;
    Ok(McEstimate {
        mean: e0.mean - rate_term - entropy_term,
        std_error: e0.std_error,
        trials: e0.trials,
        master_seed: e0.master_seed,
    })
}

/// Case-I analytic lower bound on the per-use exponent at ρ = 1 with
/// explicit admission extremes:
/// ε·N_R·log(1 + Σβ_t Tr(Q_t)) − k_n/n
///   + N_R·log((1 + ½·γ·k_n·p_min_event) / (1 + k_n·p_max)).
pub fn lemma1_case1_lower_bound_with_extremes(
    epsilon: f64,
    gamma: f64,
    k_n: usize,
    n: usize,
    sum_power: f64,
    p_min_event: f64,
    p_max: f64,
    nr: usize,
) -> Result<f64> {
    if !(epsilon.is_finite() && 0.0 < epsilon && epsilon < 1.0) {
        return Err(Error::Validation(format!(
            "epsilon must lie in (0,1), got {epsilon}"
        )));
    }
    if !(gamma.is_finite() && 0.0 < gamma && gamma <= 1.0) {
        return Err(Error::Validation(format!(
            "gamma must lie in (0,1], got {gamma}"
        )));
    }
    if n == 0 || k_n == 0 {
        return Err(Error::Validation("n and k_n must be positive".into()));
    }
    if !(sum_power >= 0.0 && p_min_event >= 0.0 && p_max >= 0.0) {
        return Err(Error::Validation("powers must be nonnegative".into()));
    }
    let k_n = k_n as f64;
    let first = epsilon * nr as f64 * sum_power.ln_1p();
    let third = nr as f64
        * ((1.0 + 0.5 * gamma * k_n * p_min_event) / (1.0 + k_n * p_max)).ln();
    Ok(first - k_n / n as f64 + third)
}

/// Case-I lower bound with the extremes read off the population itself:
/// p_min over the worst event of size γ·k_n, p_max over all users.
pub fn lemma1_case1_lower_bound(
    epsilon: f64,
    gamma: f64,
    k_n: usize,
    n: usize,
    profiles: &[UserProfile],
    nr: usize,
) -> Result<f64> {
    if profiles.is_empty() {
        return Err(Error::Validation("the population is empty".into()));
    }
    if !(gamma.is_finite() && 0.0 < gamma && gamma <= 1.0) {
        return Err(Error::Validation(format!(
            "gamma must lie in (0,1], got {gamma}"
        )));
    }
    let k_e = ((gamma * k_n as f64).round() as usize).clamp(1, profiles.len());
    let event = ErrorEvent::canonical_worst(profiles, k_e)?;
    let p_min_event = event
        .users()
        .iter()
        .map(|&k| profiles[k].weight())
        .fold(f64::INFINITY, f64::min);
    let (_, p_max) = admission_window(profiles).expect("population is nonempty");
    lemma1_case1_lower_bound_with_extremes(
        epsilon,
        gamma,
        k_n,
        n,
        effective_sum_power(profiles),
        p_min_event,
        p_max,
        nr,
    )
}

/// exp{−[n·E^l(ρ) − ρ·Σ R_k]}: the decoding-error bound for one event.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventErrorBound {
    /// The bound clipped to [0,1] for reporting.
    pub probability: f64,
    /// The raw exponent n·E^l(ρ) − ρ·Σ R_k (compare bounds in this domain;
    /// the probability underflows long before the regime of interest).
    pub exponent: f64,
}

/// Upper bound on the probability of one error event at blocklength n.
pub fn event_error_bound(
    rho: f64,
    event: &ErrorEvent,
    rates: &[f64],
    n: usize,
    profiles: &[UserProfile],
    nr: usize,
    settings: McSettings,
) -> Result<EventErrorBound> {
    if rates.len() != event.k_e() {
        return Err(Error::Validation(format!(
            "{} rates supplied for an event of {} users",
            rates.len(),
            event.k_e()
        )));
    }
    if n == 0 {
        return Err(Error::Validation("codelength must be positive".into()));
    }
    let e0 = gallager_e0(rho, event, profiles, nr, settings)?;
    let exponent = n as f64 * e0.mean - rho * rates.iter().sum::<f64>();
    Ok(EventErrorBound {
        probability: (-exponent).exp().clamp(0.0, 1.0),
        exponent,
    })
}

/// Union bound over all events: k_n·exp(−n·c0) for an exponent floor c0 > 0.
pub fn total_error_bound(k_n: usize, n: usize, c0: f64) -> Result<f64> {
    if !(c0.is_finite() && c0 > 0.0) {
        return Err(Error::Validation(format!(
            "the exponent floor must be positive, got {c0}"
        )));
    }
    Ok(k_n as f64 * (-(n as f64) * c0).exp())
}
