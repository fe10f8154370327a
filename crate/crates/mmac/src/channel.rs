//! User population model: distance path loss, log-normal shadowing, uniform
//! transmit powers, isotropic input covariances, and the Rayleigh fast-fading
//! channel draws built on top.
//!
//! Large-scale quantities for user k come from the substream addressed
//! [`Domain::Profile`]/[k], so populations are prefix-stable: extending a
//! population never changes the users already drawn. Fast fading for trial t,
//! user k comes from [`Domain::Channel`]/[t, k] — one channel use per trial.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{gram_sum_pairs, ComplexMatrix, HermitianPsd};
use crate::seed::{substream, Domain};

/// Covariance traces may sit below the power budget by this relative slack:
/// Tr(Q_k) ∈ [P_k·(1 − TRACE_SLACK), P_k].
pub const TRACE_SLACK: f64 = 1e-6;

/// Large-scale fading model: β = z · (r/r₀)^(−η) with z log-normal in dB.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FadingParams {
    path_loss_exponent: f64,
    shadow_std_db: f64,
    r_min: f64,
    r_max: f64,
    reference_distance: f64,
}

impl FadingParams {
    /// Reference distance defaults to 1, i.e. β = z / r^η in raw units.
    pub fn new(
        path_loss_exponent: f64,
        shadow_std_db: f64,
        r_min: f64,
        r_max: f64,
    ) -> Result<Self> {
        Self::with_reference_distance(path_loss_exponent, shadow_std_db, r_min, r_max, 1.0)
    }

    /// Path loss referenced to distance `reference_distance` (same unit as
    /// r_min/r_max): β = z · (r/r₀)^(−η). Cell-scale scenarios set r₀ to the
    /// minimum cell radius so that typical received SNRs are O(1).
    pub fn with_reference_distance(
        path_loss_exponent: f64,
        shadow_std_db: f64,
        r_min: f64,
        r_max: f64,
        reference_distance: f64,
    ) -> Result<Self> {
        if !(path_loss_exponent.is_finite() && path_loss_exponent > 0.0) {
            return Err(Error::Config(format!(
                "path-loss exponent must be positive, got {path_loss_exponent}"
            )));
        }
        if !(shadow_std_db.is_finite() && shadow_std_db >= 0.0) {
            return Err(Error::Config(format!(
                "shadowing std must be nonnegative dB, got {shadow_std_db}"
            )));
        }
        // r_min = r_max is allowed: a degenerate point mass in distance.
        if !(r_min.is_finite() && r_max.is_finite() && 0.0 < r_min && r_min <= r_max) {
            return Err(Error::Config(format!(
                "distance range [{r_min}, {r_max}] is empty or not positive"
            )));
        }
        if !(reference_distance.is_finite() && reference_distance > 0.0) {
            return Err(Error::Config(format!(
                "reference distance must be positive, got {reference_distance}"
            )));
        }
        Ok(Self {
            path_loss_exponent,
            shadow_std_db,
            r_min,
            r_max,
            reference_distance,
        })
    }

    pub fn path_loss_exponent(&self) -> f64 {
        self.path_loss_exponent
    }

    pub fn shadow_std_db(&self) -> f64 {
        self.shadow_std_db
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn reference_distance(&self) -> f64 {
        self.reference_distance
    }

    fn beta(&self, distance: f64, shadow: f64) -> f64 {
        shadow * (distance / self.reference_distance).powf(-self.path_loss_exponent)
    }
}

/// One admitted user: large-scale state plus its input covariance.
#[derive(Clone, Debug)]
pub struct UserProfile {
    index: usize,
    distance: f64,
    shadow: f64,
    beta: f64,
    power: f64,
    covariance: HermitianPsd,
}

impl UserProfile {
    /// Direct construction from a large-scale gain, for fixtures and
    /// single-user oracles. Stored as distance 1, shadow β, so the
    /// β = z·(r/r₀)^(−η) bookkeeping holds exactly.
    pub fn from_large_scale(index: usize, beta: f64, power: f64, nt: usize) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::Validation(format!(
                "large-scale gain must be nonnegative, got {beta}"
            )));
        }
        if !(power.is_finite() && power > 0.0) {
            return Err(Error::Validation(format!(
                "transmit power must be positive, got {power}"
            )));
        }
        if nt == 0 {
            return Err(Error::Config("transmit antenna count must be at least 1".into()));
        }
        Ok(Self {
            index,
            distance: 1.0,
            shadow: beta,
            beta,
            power,
            covariance: HermitianPsd::scaled_identity(nt, power / nt as f64)?,
        })
    }

    /// Replace the isotropic default covariance. The trace must stay within
    /// the power budget: P·(1 − [`TRACE_SLACK`]) ≤ Tr(Q) ≤ P·(1 + 1e-12).
    pub fn with_covariance(mut self, covariance: HermitianPsd) -> Result<Self> {
        let tr = covariance.trace();
        let lo = self.power * (1.0 - TRACE_SLACK);
        let hi = self.power * (1.0 + 1e-12);
        if !(lo <= tr && tr <= hi) {
            return Err(Error::Validation(format!(
                "covariance trace {tr} violates the power budget {} for user {}",
                self.power, self.index
            )));
        }
        self.covariance = covariance;
        Ok(self)
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn shadow(&self) -> f64 {
        self.shadow
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn covariance(&self) -> &HermitianPsd {
        &self.covariance
    }

    pub fn nt(&self) -> usize {
        self.covariance.dim()
    }

    /// β·Tr(Q), the user's effective received power.
    pub fn weight(&self) -> f64 {
        self.beta * self.covariance.trace()
    }
}

/// Draw `count` user profiles: distance uniform on [r_min, r_max], shadowing
/// 10^(σ·g/10) with g standard normal, power uniform on `power_range`,
/// covariance (P/N_T)·I. User k is a pure function of (master_seed, k).
pub fn sample_user_profiles(
    count: usize,
    params: &FadingParams,
    power_range: (f64, f64),
    nt: usize,
    master_seed: u64,
) -> Result<Vec<UserProfile>> {
    let (p_lo, p_hi) = power_range;
    if !(p_lo.is_finite() && p_hi.is_finite() && 0.0 < p_lo && p_lo <= p_hi) {
        return Err(Error::Config(format!(
            "power range [{p_lo}, {p_hi}] is empty or not positive"
        )));
    }
    if nt == 0 {
        return Err(Error::Config("transmit antenna count must be at least 1".into()));
    }
    (0..count)
        .map(|k| {
            let mut rng = substream(master_seed, Domain::Profile, &[k as u64]);
            // Fixed draw order per user: distance, shadow, power.
            let distance =
                params.r_min + (params.r_max - params.r_min) * rng.random::<f64>();
            let g: f64 = rng.sample(StandardNormal);
            let shadow = 10f64.powf(params.shadow_std_db * g / 10.0);
            let power = p_lo + (p_hi - p_lo) * rng.random::<f64>();
            Ok(UserProfile {
                index: k,
                distance,
                shadow,
                beta: params.beta(distance, shadow),
                power,
                covariance: HermitianPsd::scaled_identity(nt, power / nt as f64)?,
            })
        })
        .collect()
}

/// Same population with a different antenna count: large-scale state is kept,
/// covariances are rebuilt isotropically so β·Tr(Q) is matched exactly.
pub fn profiles_with_antennas(profiles: &[UserProfile], nt: usize) -> Result<Vec<UserProfile>> {
    if nt == 0 {
        return Err(Error::Config("transmit antenna count must be at least 1".into()));
    }
    profiles
        .iter()
        .map(|p| {
            Ok(UserProfile {
                covariance: HermitianPsd::scaled_identity(nt, p.power / nt as f64)?,
                ..p.clone()
            })
        })
        .collect()
}

/// Σ_t β_t·Tr(Q_t) over the population — the argument of the asymptotic log.
pub fn effective_sum_power(profiles: &[UserProfile]) -> f64 {
    profiles.iter().map(UserProfile::weight).sum()
}

/// Post-hoc admission window: (min, max) of β_t·Tr(Q_t) over the population.
pub fn admission_window(profiles: &[UserProfile]) -> Option<(f64, f64)> {
    profiles.iter().map(UserProfile::weight).fold(None, |acc, w| match acc {
        None => Some((w, w)),
        Some((lo, hi)) => Some((lo.min(w), hi.max(w))),
    })
}

/// One channel use: per-user N_R×N_T matrices H_k with entries α·√β_k,
/// α ~ CN(0,1) i.i.d.
#[derive(Clone, Debug)]
pub struct ChannelDraw {
    nr: usize,
    matrices: Vec<ComplexMatrix>,
}

impl ChannelDraw {
    /// Assemble a draw from externally built matrices (deterministic fixtures).
    pub fn from_matrices(nr: usize, matrices: Vec<ComplexMatrix>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::Validation("channel draw needs at least one user".into()));
        }
        if let Some(h) = matrices.iter().find(|h| h.rows() != nr) {
            return Err(Error::Config(format!(
                "channel matrix is {}x{}, expected {nr} rows",
                h.rows(),
                h.cols()
            )));
        }
        Ok(Self { nr, matrices })
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn users(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrix(&self, k: usize) -> &ComplexMatrix {
        &self.matrices[k]
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    /// G = Σ_t H_t Q_t H_t† over all users.
    pub fn gram(&self, profiles: &[UserProfile]) -> Result<HermitianPsd> {
        self.check_profiles(profiles)?;
        gram_sum_pairs(
            self.matrices.iter().zip(profiles.iter().map(UserProfile::covariance)),
            self.nr,
        )
    }

    /// G over a subset of users given by sorted-or-not indices.
    pub fn gram_subset(&self, profiles: &[UserProfile], users: &[usize]) -> Result<HermitianPsd> {
        self.check_profiles(profiles)?;
        if let Some(&bad) = users.iter().find(|&&k| k >= self.matrices.len()) {
            return Err(Error::Validation(format!(
                "user index {bad} out of range for {} users",
                self.matrices.len()
            )));
        }
        gram_sum_pairs(
            users
                .iter()
                .map(|&k| (&self.matrices[k], profiles[k].covariance())),
            self.nr,
        )
    }

    fn check_profiles(&self, profiles: &[UserProfile]) -> Result<()> {
        if profiles.len() != self.matrices.len() {
            return Err(Error::Config(format!(
                "{} profiles for a draw with {} users",
                profiles.len(),
                self.matrices.len()
            )));
        }
        Ok(())
    }
}

fn fill_user_matrix(
    profile: &UserProfile,
    nr: usize,
    nt: usize,
    rng: &mut impl Rng,
) -> ComplexMatrix {
    let amp = profile.beta.sqrt() / std::f64::consts::SQRT_2;
    ComplexMatrix::from_fn(nr, nt, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * amp, im * amp)
    })
    .expect("gaussian entries are finite")
}

fn check_draw_inputs(profiles: &[UserProfile], nr: usize, nt: usize) -> Result<()> {
    if profiles.is_empty() {
        return Err(Error::Validation("channel draw needs at least one user".into()));
    }
    if nr == 0 {
        return Err(Error::Config("receive antenna count must be at least 1".into()));
    }
    if let Some(p) = profiles.iter().find(|p| p.nt() != nt) {
        return Err(Error::Config(format!(
            "user {} has a {}-antenna covariance, expected {nt}",
            p.index(),
            p.nt()
        )));
    }
    Ok(())
}

/// Draw one channel use for every user from a caller-supplied RNG
/// (sequential; draws are consumed user-by-user in index order).
pub fn draw_channel(
    profiles: &[UserProfile],
    nr: usize,
    nt: usize,
    rng: &mut impl Rng,
) -> Result<ChannelDraw> {
    check_draw_inputs(profiles, nr, nt)?;
    let matrices = profiles
        .iter()
        .map(|p| fill_user_matrix(p, nr, nt, rng))
        .collect();
    Ok(ChannelDraw { nr, matrices })
}

/// Draw one channel use addressed by (master_seed, trial): user k's fading
/// comes from the substream [trial, k], independent across trials and users
/// and independent of evaluation order.
pub fn draw_channel_for_trial(
    profiles: &[UserProfile],
    nr: usize,
    nt: usize,
    master_seed: u64,
    trial: u64,
) -> Result<ChannelDraw> {
    check_draw_inputs(profiles, nr, nt)?;
    let matrices = profiles
        .iter()
        .map(|p| {
            let mut rng = substream(master_seed, Domain::Channel, &[trial, p.index() as u64]);
            fill_user_matrix(p, nr, nt, &mut rng)
        })
        .collect();
    Ok(ChannelDraw { nr, matrices })
}
