//! Deterministic parallel Monte-Carlo estimation.
//!
//! Each trial draws its channel from a substream addressed by (master seed,
//! trial, user), so the estimate is a pure function of (evaluator, profiles,
//! trials, master_seed): thread counts, scheduling, and evaluation order
//! cannot change a single bit of the result. Reduction is sequential
//! compensated (Kahan) summation over the ordered trial values.

use rayon::prelude::*;

use crate::channel::{draw_channel_for_trial, ChannelDraw, UserProfile};
use crate::error::{Error, Result};

/// Trial count and master seed for one estimation run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McSettings {
    trials: usize,
    master_seed: u64,
}

/// Default trial count for sum-rate estimates.
pub const DEFAULT_RATE_TRIALS: usize = 2000;
/// Default trial count for exponent estimates (they sit inside a log).
pub const DEFAULT_EXPONENT_TRIALS: usize = 10_000;

impl McSettings {
    /// At least two trials: one trial has no sample standard deviation.
    pub fn new(trials: usize, master_seed: u64) -> Result<Self> {
        if trials < 2 {
            return Err(Error::Config(format!(
                "at least 2 trials are required, got {trials}"
            )));
        }
        Ok(Self { trials, master_seed })
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn with_master_seed(self, master_seed: u64) -> Self {
        Self { master_seed, ..self }
    }
}

/// A Monte-Carlo estimate together with its reproducibility record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// sample_std / √trials
    pub std_error: f64,
    pub trials: usize,
    pub master_seed: u64,
}

impl McEstimate {
    /// An exactly-known value reported in estimate form (mean v, error 0).
    pub(crate) fn exact(v: f64, settings: McSettings) -> Self {
        Self {
            mean: v,
            std_error: 0.0,
            trials: settings.trials,
            master_seed: settings.master_seed,
        }
    }
}

/// Compensated sequential sum.
fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Estimate E[f(H)] over channel draws for the given population.
///
/// The evaluator must be a pure function of the draw; a non-finite value
/// fails the whole estimate with the offending trial index.
pub fn estimate<F>(
    evaluator: F,
    profiles: &[UserProfile],
    nr: usize,
    settings: McSettings,
) -> Result<McEstimate>
where
    F: Fn(&ChannelDraw) -> f64 + Sync,
{
    if profiles.is_empty() {
        return Err(Error::Validation(
            "estimation needs at least one user profile".into(),
        ));
    }
    let nt = profiles[0].nt();
    let values: Vec<f64> = (0..settings.trials as u64)
        .into_par_iter()
        .map(|trial| {
            match draw_channel_for_trial(profiles, nr, nt, settings.master_seed, trial) {
                Ok(draw) => Ok(evaluator(&draw)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    // Ordered scan so the reported trial index is the first offender.
    if let Some(trial) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteTrial { trial: trial as u64 });
    }
    let n = settings.trials as f64;
    let mean = kahan_sum(values.iter().copied()) / n;
    let var = kahan_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    // Rounding can push the variance of a constant stream slightly negative.
    let std_error = (var.max(0.0) / n).sqrt();
    Ok(McEstimate {
        mean,
        std_error,
        trials: settings.trials,
        master_seed: settings.master_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::UserProfile;

    fn one_user() -> Vec<UserProfile> {
        vec![UserProfile::from_large_scale(0, 1.0, 10.0, 1).unwrap()]
    }

    #[test]
    fn settings_require_two_trials() {
        assert!(matches!(McSettings::new(1, 0), Err(Error::Config(_))));
        assert!(McSettings::new(2, 0).is_ok());
    }

    #[test]
    fn constant_evaluator_has_zero_std_error() {
        let est = estimate(|_| 3.5, &one_user(), 1, McSettings::new(100, 1).unwrap()).unwrap();
        assert_eq!(est.mean, 3.5);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.trials, 100);
        assert_eq!(est.master_seed, 1);
    }

    #[test]
    fn squared_magnitude_mean_is_near_one() {
        // f = |h|² of a β=1 1×1 channel: E f = 1.
        let est = estimate(
            |draw| draw.matrix(0).get(0, 0).norm_sqr(),
            &one_user(),
            1,
            McSettings::new(100_000, 2).unwrap(),
        )
        .unwrap();
        assert!(
            (est.mean - 1.0).abs() <= 3.0 * est.std_error,
            "mean {} se {}",
            est.mean,
            est.std_error
        );
    }

    #[test]
    fn non_finite_trials_surface_their_index() {
        let err = estimate(
            |draw| {
                let v = draw.matrix(0).get(0, 0).norm_sqr();
                // Poison one specific region of the value space.
                if v > 2.0 {
                    f64::NAN
                } else {
                    v
                }
            },
            &one_user(),
            1,
            McSettings::new(2000, 3).unwrap(),
        )
        .unwrap_err();
        match err {
            Error::NonFiniteTrial { trial } => {
                // Replay: the reported trial must actually be the first offender.
                let profiles = one_user();
                for t in 0..=trial {
                    let draw = crate::channel::draw_channel_for_trial(&profiles, 1, 1, 3, t).unwrap();
                    let v = draw.matrix(0).get(0, 0).norm_sqr();
                    if t < trial {
                        assert!(v <= 2.0);
                    } else {
                        assert!(v > 2.0);
                    }
                }
            }
            other => panic!("expected NonFiniteTrial, got {other:?}"),
        }
    }

    #[test]
    fn estimates_do_not_depend_on_worker_count() {
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                estimate(
                    |draw| draw.matrix(0).get(0, 0).norm_sqr(),
                    &one_user(),
                    1,
                    McSettings::new(10_000, 9).unwrap(),
                )
                .unwrap()
            })
        };
        let a = run(1);
        let b = run(4);
        let c = run(8);
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.mean.to_bits(), c.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        assert_eq!(a.std_error.to_bits(), c.std_error.to_bits());
    }

    #[test]
    fn std_error_scales_like_inverse_root_trials() {
        // Quadrupling trials twice should halve the error twice, within 20%.
        let se = |trials: usize| {
            estimate(
                |draw| draw.matrix(0).get(0, 0).norm_sqr(),
                &one_user(),
                1,
                McSettings::new(trials, 4).unwrap(),
            )
            .unwrap()
            .std_error
        };
        let s1 = se(1000);
        let s4 = se(4000);
        let s16 = se(16_000);
        for (coarse, fine) in [(s1, s4), (s4, s16)] {
            let ratio = coarse / fine;
            assert!(
                (1.6..=2.4).contains(&ratio),
                "se ratio {ratio} outside 2 ± 20%"
            );
        }
    }
}
