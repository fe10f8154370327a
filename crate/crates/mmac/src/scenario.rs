//! Scenario files: the versioned JSON schema that pins every knob of an
//! experiment run. Unknown keys are errors, defaults are the cell-scale
//! reference setup (η = 3.8, 8 dB shadowing, 100–1000 m uniform distances
//! referenced to 100 m, powers U[5,15], k_n = n/2), and every field
//! round-trips losslessly so the scenario hash identifies the run.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{sample_user_profiles, FadingParams, UserProfile};
use crate::error::{Error, Result};
use crate::montecarlo::{DEFAULT_EXPONENT_TRIALS, DEFAULT_RATE_TRIALS};

/// The one schema version this build reads.
pub const SCENARIO_VERSION: u32 = 1;

fn default_seed() -> u64 {
    1_835_946_339
}
fn default_n_values() -> Vec<usize> {
    vec![64, 128, 256, 512, 1024, 2048]
}
fn default_user_rule() -> UserRule {
    UserRule::Linear { ratio: 0.5 }
}
fn default_nt() -> usize {
    2
}
fn default_nr() -> usize {
    2
}
fn default_antenna_configs() -> Vec<[usize; 2]> {
    vec![[2, 2], [4, 4], [8, 8]]
}
fn default_nr_sweep() -> Vec<usize> {
    vec![2, 4, 8, 16]
}
fn default_power_range() -> [f64; 2] {
    [5.0, 15.0]
}
fn default_epsilon_values() -> Vec<f64> {
    vec![0.1]
}
fn default_rho_values() -> Vec<f64> {
    vec![1.0]
}
fn default_event_rules() -> Vec<EventRule> {
    vec![
        EventRule::Gamma { gamma: 0.5 },
        EventRule::Named(NamedEventRule::NOverLogN),
        EventRule::Named(NamedEventRule::SqrtN),
    ]
}

/// How the user count scales with the codelength.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum UserRule {
    /// k_n = round(ratio·n), at least 1.
    Linear { ratio: f64 },
    /// The same fixed k_n for every n.
    Explicit { count: usize },
}

impl UserRule {
    pub fn k_n(&self, n: usize) -> usize {
        match self {
            UserRule::Linear { ratio } => ((ratio * n as f64).round() as usize).max(1),
            UserRule::Explicit { count } => *count,
        }
    }
}

/// Error-event size rule for the exponent sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EventRule {
    /// Fixed fraction of the population: k_e = round(γ·k_n).
    Gamma { gamma: f64 },
    Named(NamedEventRule),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedEventRule {
    /// k_e = ⌈n / log n⌉.
    NOverLogN,
    /// k_e = ⌈√n⌉.
    SqrtN,
}

impl EventRule {
    /// Event size for a grid point, clamped into [1, k_n].
    pub fn k_e(&self, n: usize, k_n: usize) -> usize {
        let raw = match self {
            EventRule::Gamma { gamma } => (gamma * k_n as f64).round() as usize,
            EventRule::Named(NamedEventRule::NOverLogN) => {
                (n as f64 / (n as f64).ln()).ceil() as usize
            }
            EventRule::Named(NamedEventRule::SqrtN) => (n as f64).sqrt().ceil() as usize,
        };
        raw.clamp(1, k_n)
    }

    pub fn label(&self) -> &'static str {
        match self {
            EventRule::Gamma { .. } => "gamma",
            EventRule::Named(NamedEventRule::NOverLogN) => "n_over_log_n",
            EventRule::Named(NamedEventRule::SqrtN) => "sqrt_n",
        }
    }
}

/// Distance distribution. Recorded explicitly so output metadata names the
/// modeling choice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceModel {
    #[default]
    Uniform,
}

/// Shadowing distribution (log-normal specified in dB).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShadowModel {
    #[default]
    LogNormalDb,
}

fn default_path_loss_exponent() -> f64 {
    3.8
}
fn default_shadow_std_db() -> f64 {
    8.0
}
fn default_r_min() -> f64 {
    100.0
}
fn default_r_max() -> f64 {
    1000.0
}
fn default_reference_distance() -> f64 {
    100.0
}

/// Large-scale fading block of a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingConfig {
    #[serde(default = "default_path_loss_exponent")]
    pub path_loss_exponent: f64,
    #[serde(default = "default_shadow_std_db")]
    pub shadow_std_db: f64,
    #[serde(default = "default_r_min")]
    pub r_min: f64,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    /// Path loss is β = z·(r/r₀)^(−η); the default references the 100 m cell
    /// edge so typical received SNRs are O(1).
    #[serde(default = "default_reference_distance")]
    pub reference_distance: f64,
    #[serde(default)]
    pub distance_model: DistanceModel,
    #[serde(default)]
    pub shadow_model: ShadowModel,
}

impl Default for FadingConfig {
    fn default() -> Self {
        Self {
            path_loss_exponent: default_path_loss_exponent(),
            shadow_std_db: default_shadow_std_db(),
            r_min: default_r_min(),
            r_max: default_r_max(),
            reference_distance: default_reference_distance(),
            distance_model: DistanceModel::default(),
            shadow_model: ShadowModel::default(),
        }
    }
}

fn default_rate_trials() -> usize {
    DEFAULT_RATE_TRIALS
}
fn default_exponent_trials() -> usize {
    DEFAULT_EXPONENT_TRIALS
}

/// Monte-Carlo trial counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "default_rate_trials")]
    pub rate_trials: usize,
    #[serde(default = "default_exponent_trials")]
    pub exponent_trials: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            rate_trials: default_rate_trials(),
            exponent_trials: default_exponent_trials(),
        }
    }
}

fn default_hardening_k_values() -> Vec<usize> {
    vec![64, 128, 256, 512, 1024, 2048, 4096, 8192]
}
fn default_hardening_draws() -> usize {
    33
}

/// Hardening sweep grid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardeningConfig {
    #[serde(default = "default_hardening_k_values")]
    pub k_values: Vec<usize>,
    /// Independent draws per point; medians are reported.
    #[serde(default = "default_hardening_draws")]
    pub draws: usize,
}

impl Default for HardeningConfig {
    fn default() -> Self {
        Self {
            k_values: default_hardening_k_values(),
            draws: default_hardening_draws(),
        }
    }
}

/// A full experiment description. `Scenario::default()` is the cell-scale
/// reference setup used by all figure reproductions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Schema version; this build reads version 1 only.
    pub version: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_n_values")]
    pub n_values: Vec<usize>,
    #[serde(default = "default_user_rule")]
    pub user_rule: UserRule,
    #[serde(default = "default_nt")]
    pub nt: usize,
    #[serde(default = "default_nr")]
    pub nr: usize,
    /// (N_T, N_R) pairs for the antenna-configuration sweep.
    #[serde(default = "default_antenna_configs")]
    pub antenna_configs: Vec<[usize; 2]>,
    /// N_R grid for the receive-antenna sweep.
    #[serde(default = "default_nr_sweep")]
    pub nr_sweep: Vec<usize>,
    #[serde(default)]
    pub fading: FadingConfig,
    #[serde(default = "default_power_range")]
    pub power_range: [f64; 2],
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default = "default_epsilon_values")]
    pub epsilon_values: Vec<f64>,
    #[serde(default = "default_rho_values")]
    pub rho_values: Vec<f64>,
    #[serde(default = "default_event_rules")]
    pub event_rules: Vec<EventRule>,
    #[serde(default)]
    pub hardening: HardeningConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            version: SCENARIO_VERSION,
            seed: default_seed(),
            n_values: default_n_values(),
            user_rule: default_user_rule(),
            nt: default_nt(),
            nr: default_nr(),
            antenna_configs: default_antenna_configs(),
            nr_sweep: default_nr_sweep(),
            fading: FadingConfig::default(),
            power_range: default_power_range(),
            mc: McConfig::default(),
            epsilon_values: default_epsilon_values(),
            rho_values: default_rho_values(),
            event_rules: default_event_rules(),
            hardening: HardeningConfig::default(),
        }
    }
}

impl Scenario {
    /// Parse and validate a scenario from JSON text. `origin` names the
    /// source in parse errors.
    pub fn from_json_str(text: &str, origin: &Path) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SCENARIO_VERSION {
            return Err(Error::Config(format!(
                "scenario version {} is not supported; this build reads version {SCENARIO_VERSION}",
                self.version
            )));
        }
        if self.n_values.is_empty() {
            return Err(Error::Config("n_values must not be empty".into()));
        }
        if self.n_values.iter().any(|&n| n == 0) {
            return Err(Error::Config("codelengths must be positive".into()));
        }
        match &self.user_rule {
            UserRule::Linear { ratio } => {
                if !(ratio.is_finite() && 0.0 < *ratio && *ratio <= 1.0) {
                    return Err(Error::Config(format!(
                        "user ratio must lie in (0,1], got {ratio}"
                    )));
                }
            }
            UserRule::Explicit { count } => {
                if *count == 0 {
                    return Err(Error::Config("explicit user count must be positive".into()));
                }
            }
        }
        if self.nt == 0 || self.nr == 0 {
            return Err(Error::Config("antenna counts must be positive".into()));
        }
        if self.antenna_configs.is_empty() {
            return Err(Error::Config("antenna_configs must not be empty".into()));
        }
        if self.antenna_configs.iter().any(|c| c[0] == 0 || c[1] == 0) {
            return Err(Error::Config("antenna configs must be positive".into()));
        }
        if self.nr_sweep.is_empty() {
            return Err(Error::Config("nr_sweep must not be empty".into()));
        }
        if self.nr_sweep.iter().any(|&v| v == 0) {
            return Err(Error::Config("nr_sweep values must be positive".into()));
        }
        self.fading_params()?;
        let [p_lo, p_hi] = self.power_range;
        if !(p_lo.is_finite() && p_hi.is_finite() && 0.0 < p_lo && p_lo <= p_hi) {
            return Err(Error::Config(format!(
                "power range [{p_lo}, {p_hi}] is empty or not positive"
            )));
        }
        if self.mc.rate_trials < 2 || self.mc.exponent_trials < 2 {
            return Err(Error::Config("trial counts must be at least 2".into()));
        }
        if self.epsilon_values.is_empty() || self.rho_values.is_empty() {
            return Err(Error::Config("epsilon and rho grids must not be empty".into()));
        }
        if self
            .epsilon_values
            .iter()
            .any(|&e| !(e.is_finite() && 0.0 < e && e < 1.0))
        {
            return Err(Error::Config("epsilon values must lie in (0,1)".into()));
        }
        if self
            .rho_values
            .iter()
            .any(|&r| !(r.is_finite() && (0.0..=1.0).contains(&r)))
        {
            return Err(Error::Config("rho values must lie in [0,1]".into()));
        }
        if self.event_rules.is_empty() {
            return Err(Error::Config("event_rules must not be empty".into()));
        }
        for rule in &self.event_rules {
            if let EventRule::Gamma { gamma } = rule {
                if !(gamma.is_finite() && 0.0 < *gamma && *gamma <= 1.0) {
                    return Err(Error::Config(format!(
                        "gamma must lie in (0,1], got {gamma}"
                    )));
                }
            }
        }
        if self.hardening.k_values.is_empty() {
            return Err(Error::Config("hardening k_values must not be empty".into()));
        }
        if self.hardening.k_values.iter().any(|&k| k == 0) {
            return Err(Error::Config("hardening k_values must be positive".into()));
        }
        if self.hardening.draws == 0 {
            return Err(Error::Config("hardening draws must be positive".into()));
        }
        Ok(())
    }

    pub fn fading_params(&self) -> Result<FadingParams> {
        FadingParams::with_reference_distance(
            self.fading.path_loss_exponent,
            self.fading.shadow_std_db,
            self.fading.r_min,
            self.fading.r_max,
            self.fading.reference_distance,
        )
    }

    pub fn k_n_for(&self, n: usize) -> usize {
        self.user_rule.k_n(n)
    }

    /// The population for codelength n with `nt` transmit antennas. Master
    /// seed fixed by the scenario, so populations are nested across n.
    pub fn profiles_for(&self, n: usize, nt: usize) -> Result<Vec<UserProfile>> {
        self.profiles_of_size(self.k_n_for(n), nt)
    }

    /// A population of explicit size (hardening sweeps pick sizes directly).
    pub fn profiles_of_size(&self, k_n: usize, nt: usize) -> Result<Vec<UserProfile>> {
        sample_user_profiles(
            k_n,
            &self.fading_params()?,
            (self.power_range[0], self.power_range[1]),
            nt,
            self.seed,
        )
    }

    /// Canonical single-line JSON; the basis of the scenario hash.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("scenario serialization cannot fail")
    }

    /// SHA-256 of the canonical JSON, hex-encoded.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Apply CLI overrides: `seed` replaces the master seed, `trials`
    /// replaces both trial counts.
    pub fn with_overrides(mut self, seed: Option<u64>, trials: Option<usize>) -> Result<Self> {
        if let Some(seed) = seed {
            self.seed = seed;
        }
        if let Some(trials) = trials {
            if trials < 2 {
                return Err(Error::Config(format!(
                    "at least 2 trials are required, got {trials}"
                )));
            }
            self.mc.rate_trials = trials;
            self.mc.exponent_trials = trials;
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn origin() -> PathBuf {
        PathBuf::from("test.json")
    }

    #[test]
    fn minimal_file_yields_the_reference_scenario() {
        let s = Scenario::from_json_str(r#"{"version": 1}"#, &origin()).unwrap();
        assert_eq!(s, Scenario::default());
        assert_eq!(s.seed, 1_835_946_339);
        assert_eq!(s.k_n_for(2048), 1024);
        assert_eq!(s.mc.rate_trials, 2000);
        assert_eq!(s.mc.exponent_trials, 10_000);
    }

    #[test]
    fn scenarios_round_trip_losslessly() {
        let s = Scenario::default();
        let json = s.canonical_json();
        let back = Scenario::from_json_str(&json, &origin()).unwrap();
        assert_eq!(s, back);
        assert_eq!(s.content_hash(), back.content_hash());
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        let err = Scenario::from_json_str(r#"{"version": 1, "n_valuess": [64]}"#, &origin())
            .unwrap_err();
        match err {
            Error::Parse { message, .. } => {
                assert!(message.contains("n_valuess"), "message: {message}")
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_version_is_a_parse_error() {
        assert!(matches!(
            Scenario::from_json_str(r#"{"seed": 3}"#, &origin()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn wrong_version_is_rejected() {
        assert!(matches!(
            Scenario::from_json_str(r#"{"version": 2}"#, &origin()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn parse_errors_carry_line_and_column() {
        let err =
            Scenario::from_json_str("{\n  \"version\": 1,\n  \"seed\": oops\n}", &origin())
                .unwrap_err();
        match err {
            Error::Parse { message, .. } => {
                assert!(message.contains("line 3"), "message: {message}")
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn event_rules_parse_both_forms() {
        let s = Scenario::from_json_str(
            r#"{"version": 1, "event_rules": [{"gamma": 0.25}, "sqrt_n", "n_over_log_n"]}"#,
            &origin(),
        )
        .unwrap();
        assert_eq!(s.event_rules.len(), 3);
        assert_eq!(s.event_rules[0], EventRule::Gamma { gamma: 0.25 });
        assert_eq!(s.event_rules[1], EventRule::Named(NamedEventRule::SqrtN));
        assert_eq!(s.event_rules[0].label(), "gamma");
        assert_eq!(s.event_rules[2].label(), "n_over_log_n");
    }

    #[test]
    fn event_sizes_follow_their_rules() {
        let gamma = EventRule::Gamma { gamma: 0.5 };
        assert_eq!(gamma.k_e(1024, 512), 256);
        let over_log = EventRule::Named(NamedEventRule::NOverLogN);
        // 1024/ln(1024) = 147.7… → 148
        assert_eq!(over_log.k_e(1024, 512), 148);
        let sqrt = EventRule::Named(NamedEventRule::SqrtN);
        assert_eq!(sqrt.k_e(1024, 512), 32);
        // Clamped into [1, k_n].
        assert_eq!(sqrt.k_e(1024, 16), 16);
        assert_eq!(EventRule::Gamma { gamma: 0.01 }.k_e(64, 32), 1);
    }

    #[test]
    fn user_rules_compute_population_sizes() {
        assert_eq!(UserRule::Linear { ratio: 0.5 }.k_n(64), 32);
        assert_eq!(UserRule::Linear { ratio: 0.3 }.k_n(10), 3);
        assert_eq!(UserRule::Explicit { count: 7 }.k_n(4096), 7);
    }

    #[test]
    fn invalid_grids_fail_validation() {
        for bad in [
            r#"{"version": 1, "n_values": []}"#,
            r#"{"version": 1, "user_rule": {"linear": {"ratio": 0.0}}}"#,
            r#"{"version": 1, "power_range": [15.0, 5.0]}"#,
            r#"{"version": 1, "epsilon_values": [1.0]}"#,
            r#"{"version": 1, "rho_values": [1.5]}"#,
            r#"{"version": 1, "event_rules": []}"#,
            r#"{"version": 1, "mc": {"rate_trials": 1}}"#,
            r#"{"version": 1, "hardening": {"draws": 0}}"#,
            r#"{"version": 1, "fading": {"r_min": -5.0}}"#,
        ] {
            assert!(
                matches!(
                    Scenario::from_json_str(bad, &origin()),
                    Err(Error::Config(_))
                ),
                "accepted: {bad}"
            );
        }
    }

    #[test]
    fn overrides_replace_seed_and_trials() {
        let s = Scenario::default()
            .with_overrides(Some(42), Some(500))
            .unwrap();
        assert_eq!(s.seed, 42);
        assert_eq!(s.mc.rate_trials, 500);
        assert_eq!(s.mc.exponent_trials, 500);
        assert!(Scenario::default().with_overrides(None, Some(1)).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = Scenario::default();
        let mut b = Scenario::default();
        assert_eq!(a.content_hash(), b.content_hash());
        b.seed = 7;
        assert_ne!(a.content_hash(), b.content_hash());
    }

    #[test]
    fn populations_are_nested_across_codelengths() {
        let s = Scenario::default();
        let small = s.profiles_for(64, 2).unwrap();
        let large = s.profiles_for(128, 2).unwrap();
        assert_eq!(small.len(), 32);
        assert_eq!(large.len(), 64);
        for (a, b) in small.iter().zip(&large) {
            assert_eq!(a.beta(), b.beta());
        }
    }
}
