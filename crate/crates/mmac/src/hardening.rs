//! Channel-hardening diagnostics: how fast the received Gram matrix
//! G = Σ_t H_t Q_t H_t† concentrates around (Σ_t β_t Tr(Q_t)/N_T·tr-shape)·I
//! as the population grows, measured through the normalized off-diagonal
//! ratio and the relative log-determinant gap against the hardening limit.

use crate::channel::{draw_channel, effective_sum_power, ChannelDraw, UserProfile};
use crate::error::{Error, Result};
use crate::numerics::{logdet_eye_plus, HermitianPsd};
use crate::seed::{substream, Domain};
use rand::Rng;

/// Concentration metrics for one population size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardeningReport {
    pub k_n: usize,
    /// max_{i≠j} |G_ij| / min_i G_ii — zero iff G is diagonal.
    pub offdiag_ratio: f64,
    /// |logdet(I+G) − N_R·log(1+Σβ·Tr(Q))| relative to the limit.
    pub det_gap: f64,
    /// Number of draws behind the numbers (1 for single-draw reports).
    pub samples: usize,
}

fn check_population(profiles: &[UserProfile]) -> Result<f64> {
    if profiles.is_empty() {
        return Err(Error::Validation("the population is empty".into()));
    }
    let sum_power = effective_sum_power(profiles);
    if sum_power <= 0.0 {
        return Err(Error::Validation(
            "hardening metrics are undefined for an all-zero population".into(),
        ));
    }
    Ok(sum_power)
}

fn offdiag_ratio_of(g: &HermitianPsd) -> f64 {
    let d = g.dim();
    let mut max_off = 0.0_f64;
    let mut min_diag = f64::INFINITY;
    for i in 0..d {
        min_diag = min_diag.min(g.get(i, i).re);
        for j in (i + 1)..d {
            max_off = max_off.max(g.get(i, j).norm());
        }
    }
    if d == 1 {
        return 0.0;
    }
    max_off / min_diag
}

fn det_gap_of(g: &HermitianPsd, scale: f64, sum_power: f64, nr: usize) -> Result<f64> {
    let limit = nr as f64 * (scale * sum_power).ln_1p();
    let logdet = logdet_eye_plus(g, scale)?;
    Ok((logdet - limit).abs() / limit)
}

/// Concentration metrics of an externally supplied draw (deterministic
/// fixtures and tests).
pub fn gram_concentration_of(
    draw: &ChannelDraw,
    profiles: &[UserProfile],
) -> Result<HardeningReport> {
    let sum_power = check_population(profiles)?;
    let g = draw.gram(profiles)?;
    Ok(HardeningReport {
        k_n: profiles.len(),
        offdiag_ratio: offdiag_ratio_of(&g),
        det_gap: det_gap_of(&g, 1.0, sum_power, draw.nr())?,
        samples: 1,
    })
}

/// Draw one channel and report its concentration metrics.
pub fn gram_concentration(
    profiles: &[UserProfile],
    nr: usize,
    nt: usize,
    rng: &mut impl Rng,
) -> Result<HardeningReport> {
    check_population(profiles)?;
    let draw = draw_channel(profiles, nr, nt, rng)?;
    gram_concentration_of(&draw, profiles)
}

/// Relative gap between logdet(I + scale·G) of one draw and the hardening
/// limit N_R·log(1 + scale·Σβ_t Tr(Q_t)).
pub fn determinant_limit_gap(
    profiles: &[UserProfile],
    nr: usize,
    nt: usize,
    scale: f64,
    rng: &mut impl Rng,
) -> Result<f64> {
    let sum_power = check_population(profiles)?;
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Validation(format!(
            "scale must be finite and positive, got {scale}"
        )));
    }
    let draw = draw_channel(profiles, nr, nt, rng)?;
    det_gap_of(&draw.gram(profiles)?, scale, sum_power, nr)
}

/// One point of a median sweep: medians over independent draws, with the
/// determinant gap evaluated at scales 1 and 1/2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub k_n: usize,
    pub draws: usize,
    pub median_offdiag_ratio: f64,
    pub median_det_gap: f64,
    pub median_det_gap_half: f64,
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("metrics are finite"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Median concentration metrics over `draws` independent draws.
///
/// `population` supplies the profiles for each draw index, so callers choose
/// between resampling the population every draw (heavy-tailed cell-scale
/// populations, where a single fixed draw of the large-scale gains would
/// dominate the medians) and a fixed population (controlled fixtures).
/// Fading for draw j of point k_n comes from the substream [k_n, j].
pub fn median_sweep_point<F>(
    k_n: usize,
    draws: usize,
    nr: usize,
    nt: usize,
    master_seed: u64,
    mut population: F,
) -> Result<SweepPoint>
where
    F: FnMut(usize) -> Result<Vec<UserProfile>>,
{
    if draws == 0 {
        return Err(Error::Validation("at least one draw is required".into()));
    }
    let mut offdiag = Vec::with_capacity(draws);
    let mut gap = Vec::with_capacity(draws);
    let mut gap_half = Vec::with_capacity(draws);
    for j in 0..draws {
        let profiles = population(j)?;
        if profiles.len() != k_n {
            return Err(Error::Config(format!(
                "population supplied {} users for a k_n = {k_n} sweep point",
                profiles.len()
            )));
        }
        let sum_power = check_population(&profiles)?;
        let mut rng = substream(master_seed, Domain::Diagnostic, &[k_n as u64, j as u64]);
        let draw = draw_channel(&profiles, nr, nt, &mut rng)?;
        let g = draw.gram(&profiles)?;
        offdiag.push(offdiag_ratio_of(&g));
        gap.push(det_gap_of(&g, 1.0, sum_power, nr)?);
        gap_half.push(det_gap_of(&g, 0.5, sum_power, nr)?);
    }
    Ok(SweepPoint {
        k_n,
        draws,
        median_offdiag_ratio: median(offdiag),
        median_det_gap: median(gap),
        median_det_gap_half: median(gap_half),
    })
}
