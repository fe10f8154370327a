//! Experiment runners. Each CLI subcommand maps to a function here that walks
//! a scenario grid sequentially and renders a CSV report. Reports carry a `#`
//! metadata block (tool version, scenario hash, seed, units, model tags) so a
//! CSV file identifies the run that produced it; reals are printed with 17
//! significant digits so values round-trip exactly. Row order is fixed by the
//! grid, and all parallelism lives inside the estimators, so reports are
//! byte-identical across reruns and worker counts.

use std::f64::consts::LN_2;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::sample_user_profiles;
use crate::error::{Error, Result};
use crate::exponents::{
    event_error_bound, gallager_e0, lemma1_case1_lower_bound, per_use_exponent, total_error_bound,
    ErrorEvent,
};
use crate::hardening::median_sweep_point;
use crate::montecarlo::McSettings;
use crate::numerics::linear_fit;
use crate::rates::{asymptotic_sum_rate, expected_sum_rate};
use crate::region::{max_sustainable_users, region_feasible, RegionQuery};
use crate::scenario::Scenario;
use crate::seed::{derive_seed, Domain};

const TOOL: &str = concat!("mmac v", env!("CARGO_PKG_VERSION"));

/// Display units for logarithmic columns. Internally everything is in nats;
/// conversion happens at render time only.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    pub fn label(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }

    /// Convert a nat-denominated value (a rate or an exponent) for display.
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / LN_2,
        }
    }
}

/// 17 significant digits: enough for f64 values to round-trip exactly.
fn real(x: f64) -> String {
    format!("{x:.16e}")
}

struct Report {
    lines: Vec<String>,
}

impl Report {
    fn new(subcommand: &str) -> Self {
        Self {
            lines: vec![format!("# tool: {TOOL}"), format!("# subcommand: {subcommand}")],
        }
    }

    fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push(format!("# {key}: {value}"));
    }

    fn scenario_meta(&mut self, scenario: &Scenario, units: Units) {
        self.meta("scenario_hash", format!("sha256:{}", scenario.content_hash()));
        self.meta("master_seed", scenario.seed);
        self.meta("units", units.label());
        self.meta(
            "distance_model",
            serde_name(&scenario.fading.distance_model),
        );
        self.meta("shadow_model", serde_name(&scenario.fading.shadow_model));
    }

    fn header(&mut self, columns: &[&str]) {
        self.lines.push(columns.join(","));
    }

    fn row(&mut self, fields: &[String]) {
        self.lines.push(fields.join(","));
    }

    fn comment(&mut self, text: impl std::fmt::Display) {
        self.lines.push(format!("# {text}"));
    }

    fn finish(self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}

/// The serde snake_case name of a unit enum variant, without JSON quotes.
fn serde_name<T: Serialize>(value: &T) -> String {
    let quoted = serde_json::to_string(value).expect("tag serialization cannot fail");
    quoted.trim_matches('"').to_string()
}

/// Sum-rate table at the scenario's (N_T, N_R): Monte-Carlo estimate against
/// the deterministic large-system value, one row per codelength.
pub fn run_rate(scenario: &Scenario, units: Units) -> Result<String> {
    let mut report = Report::new("rate");
    report.scenario_meta(scenario, units);
    report.header(&[
        "n",
        "k_n",
        "n_t",
        "n_r",
        "mc_sum_rate",
        "mc_std_error",
        "asymptotic_sum_rate",
        "relative_gap",
        "seed",
    ]);
    rate_rows(
        scenario,
        units,
        &[[scenario.nt, scenario.nr]],
        &mut report,
    )?;
    Ok(report.finish())
}

/// Sum-rate sweep over the scenario's antenna configurations: one row per
/// (codelength, configuration) cell. Populations share large-scale draws
/// across configurations, so this is a matched comparison.
pub fn run_fig2(scenario: &Scenario, units: Units) -> Result<String> {
    let mut report = Report::new("fig2");
    report.scenario_meta(scenario, units);
    report.header(&[
        "n",
        "k_n",
        "n_t",
        "n_r",
        "mc_sum_rate",
        "mc_std_error",
        "asymptotic_sum_rate",
        "relative_gap",
        "seed",
    ]);
    rate_rows(scenario, units, &scenario.antenna_configs, &mut report)?;
    Ok(report.finish())
}

fn rate_rows(
    scenario: &Scenario,
    units: Units,
    configs: &[[usize; 2]],
    report: &mut Report,
) -> Result<()> {
    let settings = McSettings::new(scenario.mc.rate_trials, scenario.seed)?;
    for &n in &scenario.n_values {
        let k_n = scenario.k_n_for(n);
        for &[nt, nr] in configs {
            let profiles = scenario.profiles_for(n, nt)?;
            let estimate = expected_sum_rate(&profiles, nr, nt, settings)?;
            let asymptotic = asymptotic_sum_rate(&profiles, nr);
            let relative_gap = (estimate.mean - asymptotic).abs() / asymptotic;
            report.row(&[
                n.to_string(),
                k_n.to_string(),
                nt.to_string(),
                nr.to_string(),
                real(units.convert(estimate.mean)),
                real(units.convert(estimate.std_error)),
                real(units.convert(asymptotic)),
                real(relative_gap),
                scenario.seed.to_string(),
            ]);
        }
    }
    Ok(())
}

/// Receive-antenna sweep at the scenario's N_T: one row per (codelength, N_R),
/// with a per-codelength log–log fit in the footer. A slope near 1 means the
/// sum rate scales linearly with the number of receive antennas.
pub fn run_fig3(scenario: &Scenario, units: Units) -> Result<String> {
    let mut report = Report::new("fig3");
    report.scenario_meta(scenario, units);
    report.header(&["n", "k_n", "n_t", "n_r", "mc_sum_rate", "mc_std_error", "seed"]);
    let settings = McSettings::new(scenario.mc.rate_trials, scenario.seed)?;
    let nt = scenario.nt;
    let mut fits: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    for &n in &scenario.n_values {
        let k_n = scenario.k_n_for(n);
        let profiles = scenario.profiles_for(n, nt)?;
        let mut points = Vec::with_capacity(scenario.nr_sweep.len());
        for &nr in &scenario.nr_sweep {
            let estimate = expected_sum_rate(&profiles, nr, nt, settings)?;
            if estimate.mean > 0.0 {
                points.push(((nr as f64).ln(), estimate.mean.ln()));
            }
            report.row(&[
                n.to_string(),
                k_n.to_string(),
                nt.to_string(),
                nr.to_string(),
                real(units.convert(estimate.mean)),
                real(units.convert(estimate.std_error)),
                scenario.seed.to_string(),
            ]);
        }
        fits.push((n, points));
    }
    for (n, points) in fits {
        if points.len() >= 2 {
            let fit = linear_fit(&points)?;
            report.comment(format!(
                "fit: n={n} log_mc_sum_rate ~ log_n_r slope={} intercept={} r_squared={}",
                real(fit.slope),
                real(fit.intercept),
                real(fit.r_squared)
            ));
        }
    }
    Ok(report.finish())
}

struct ExponentRow {
    n: usize,
    k_n: usize,
    rule: &'static str,
    k_e: usize,
    gamma: f64,
    rho: f64,
    epsilon: f64,
    sum_rate: f64,
    e0_mean: f64,
    e0_std_error: f64,
    per_use_mean: f64,
    per_use_std_error: f64,
    lemma1: f64,
    event_exponent: f64,
    event_probability: f64,
}

/// Error-exponent sweep over (n, event rule, ρ, ε). Rates are the symmetric
/// allocation backed off by ε from the estimated sum rate. The footer reports
/// c0, the floor of (per-use exponent − 3·std error) over the ρ = 1 rows, and
/// the total_bound column carries k_n·exp(−n·c0) when that floor is positive.
pub fn run_exponent_sweep(scenario: &Scenario, units: Units) -> Result<String> {
    let mut report = Report::new("exponent");
    report.scenario_meta(scenario, units);
    report.header(&[
        "n",
        "k_n",
        "rule",
        "k_e",
        "gamma",
        "rho",
        "epsilon",
        "sum_rate_estimate",
        "e0_mean",
        "e0_std_error",
        "per_use_mean",
        "per_use_std_error",
        "lemma1_lower_bound",
        "event_exponent",
        "event_probability",
        "total_bound",
        "seed",
    ]);
    let rate_settings = McSettings::new(scenario.mc.rate_trials, scenario.seed)?;
    let exponent_settings = McSettings::new(scenario.mc.exponent_trials, scenario.seed)?;
    let (nt, nr) = (scenario.nt, scenario.nr);
    let mut rows: Vec<ExponentRow> = Vec::new();
    for &n in &scenario.n_values {
        let k_n = scenario.k_n_for(n);
        let profiles = scenario.profiles_for(n, nt)?;
        let sum_rate = expected_sum_rate(&profiles, nr, nt, rate_settings)?;
        for rule in &scenario.event_rules {
            let k_e = rule.k_e(n, k_n);
            let gamma = k_e as f64 / k_n as f64;
            let event = ErrorEvent::canonical_worst(&profiles, k_e)?;
            for &rho in &scenario.rho_values {
                for &epsilon in &scenario.epsilon_values {
                    // Symmetric allocation with an ε back-off: each user
                    // carries (1−ε)·(n/k_n)·Ŝ nats per codeword.
                    let per_user = (1.0 - epsilon) * (n as f64 / k_n as f64) * sum_rate.mean;
                    let rates = vec![per_user; k_e];
                    let e0 = gallager_e0(rho, &event, &profiles, nr, exponent_settings)?;
                    let per_use = per_use_exponent(
                        rho,
                        &event,
                        &rates,
                        n,
                        k_n,
                        &profiles,
                        nr,
                        exponent_settings,
                    )?;
                    let lemma1 =
                        lemma1_case1_lower_bound(epsilon, gamma, k_n, n, &profiles, nr)?;
                    let bound = event_error_bound(
                        rho,
                        &event,
                        &rates,
                        n,
                        &profiles,
                        nr,
                        exponent_settings,
                    )?;
                    rows.push(ExponentRow {
                        n,
                        k_n,
                        rule: rule.label(),
                        k_e,
                        gamma,
                        rho,
                        epsilon,
                        sum_rate: sum_rate.mean,
                        e0_mean: e0.mean,
                        e0_std_error: e0.std_error,
                        per_use_mean: per_use.mean,
                        per_use_std_error: per_use.std_error,
                        lemma1,
                        event_exponent: bound.exponent,
                        event_probability: bound.probability,
                    });
                }
            }
        }
    }
    // Second pass: the total bound needs the exponent floor over the whole
    // ρ = 1 slice, so it cannot be emitted row by row.
    let c0 = rows
        .iter()
        .filter(|r| r.rho == 1.0)
        .map(|r| r.per_use_mean - 3.0 * r.per_use_std_error)
        .fold(f64::INFINITY, f64::min);
    let have_c0 = c0.is_finite() && c0 > 0.0;
    for r in &rows {
        let total = if have_c0 {
            real(total_error_bound(r.k_n, r.n, c0)?)
        } else {
            String::new()
        };
        report.row(&[
            r.n.to_string(),
            r.k_n.to_string(),
            r.rule.to_string(),
            r.k_e.to_string(),
            real(r.gamma),
            real(r.rho),
            real(r.epsilon),
            real(units.convert(r.sum_rate)),
            real(units.convert(r.e0_mean)),
            real(units.convert(r.e0_std_error)),
            real(units.convert(r.per_use_mean)),
            real(units.convert(r.per_use_std_error)),
            real(units.convert(r.lemma1)),
            real(units.convert(r.event_exponent)),
            real(r.event_probability),
            total,
            scenario.seed.to_string(),
        ]);
    }
    if have_c0 {
        report.comment(format!(
            "c0: {} (min of per_use_mean - 3*per_use_std_error over rho=1 rows, in {})",
            real(units.convert(c0)),
            units.label()
        ));
        report.comment("total_bound: k_n * exp(-n * c0)");
    } else if c0.is_finite() {
        report.comment(format!(
            "total_bound omitted: exponent floor over rho=1 rows is not positive (c0 = {})",
            real(units.convert(c0))
        ));
    } else {
        report.comment("total_bound omitted: no rho=1 rows on this grid");
    }
    Ok(report.finish())
}

/// Channel-hardening sweep: median concentration metrics over independent
/// draws, one row per population size, with log–log decay fits in the footer.
/// The population is resampled for every draw so medians reflect the
/// population distribution rather than one fixed draw of it.
pub fn run_hardening(scenario: &Scenario, units: Units) -> Result<String> {
    let mut report = Report::new("hardening");
    report.scenario_meta(scenario, units);
    report.header(&[
        "k_n",
        "draws",
        "median_offdiag_ratio",
        "median_det_gap",
        "median_det_gap_half",
        "seed",
    ]);
    let (nt, nr) = (scenario.nt, scenario.nr);
    let fading = scenario.fading_params()?;
    let powers = (scenario.power_range[0], scenario.power_range[1]);
    let mut points = Vec::with_capacity(scenario.hardening.k_values.len());
    for &k_n in &scenario.hardening.k_values {
        let point = median_sweep_point(
            k_n,
            scenario.hardening.draws,
            nr,
            nt,
            scenario.seed,
            |draw| {
                // Fresh population per draw; trailing 1 keeps the population
                // address off the fading address [k_n, draw].
                let seed =
                    derive_seed(scenario.seed, Domain::Diagnostic, &[k_n as u64, draw as u64, 1]);
                sample_user_profiles(k_n, &fading, powers, nt, seed)
            },
        )?;
        report.row(&[
            point.k_n.to_string(),
            point.draws.to_string(),
            real(point.median_offdiag_ratio),
            real(point.median_det_gap),
            real(point.median_det_gap_half),
            scenario.seed.to_string(),
        ]);
        points.push(point);
    }
    for (name, values) in [
        (
            "offdiag_ratio",
            points
                .iter()
                .map(|p| (p.k_n, p.median_offdiag_ratio))
                .collect::<Vec<_>>(),
        ),
        (
            "det_gap",
            points.iter().map(|p| (p.k_n, p.median_det_gap)).collect(),
        ),
        (
            "det_gap_half",
            points
                .iter()
                .map(|p| (p.k_n, p.median_det_gap_half))
                .collect(),
        ),
    ] {
        let log_points: Vec<(f64, f64)> = values
            .iter()
            .filter(|(_, v)| *v > 0.0)
            .map(|(k, v)| ((*k as f64).ln(), v.ln()))
            .collect();
        if log_points.len() >= 2 {
            let fit = linear_fit(&log_points)?;
            report.comment(format!(
                "fit {name}: log_median ~ log_k_n slope={} intercept={} r_squared={}",
                real(fit.slope),
                real(fit.intercept),
                real(fit.r_squared)
            ));
        }
    }
    Ok(report.finish())
}

/// A feasibility query file: groups of users with a common per-codeword
/// message length, checked against a sum rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionFile {
    pub version: u32,
    pub queries: Vec<RegionQuerySpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionQuerySpec {
    /// Codelength the demand is measured against.
    pub n: usize,
    /// Sum rate in nats per channel use.
    pub sum_rate_per_use: f64,
    /// May be empty: a demand of zero is feasible with the whole budget slack.
    #[serde(default)]
    pub groups: Vec<GroupSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub users: u64,
    pub message_length_nats: f64,
}

impl RegionFile {
    pub fn from_json_str(text: &str, origin: &Path) -> Result<Self> {
        let file: RegionFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        if file.version != 1 {
            return Err(Error::Config(format!(
                "query file version {} is not supported; this build reads version 1",
                file.version
            )));
        }
        Ok(file)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text, path)
    }

    pub fn content_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("query serialization cannot fail");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Feasibility report: one row per (query, group) with the query verdict
/// repeated on each row, plus per-group maximum sustainable user counts. A
/// query with no groups gets a single verdict row with empty group fields.
/// When a scenario is bound, each query's total user count must equal the
/// scenario's k_n at that codelength.
pub fn query_region(
    file: &RegionFile,
    scenario: Option<&Scenario>,
    units: Units,
) -> Result<String> {
    let mut report = Report::new("region");
    report.meta("query_hash", format!("sha256:{}", file.content_hash()));
    if let Some(s) = scenario {
        report.meta("scenario_hash", format!("sha256:{}", s.content_hash()));
    }
    report.meta("units", units.label());
    report.header(&[
        "query_index",
        "group_index",
        "users",
        "message_length",
        "max_sustainable_users",
        "feasible",
        "slack",
    ]);
    for (qi, query) in file.queries.iter().enumerate() {
        if !(query.sum_rate_per_use.is_finite() && query.sum_rate_per_use >= 0.0) {
            return Err(Error::Validation(format!(
                "query {qi}: sum rate must be nonnegative, got {}",
                query.sum_rate_per_use
            )));
        }
        if query.n == 0 {
            return Err(Error::Validation(format!(
                "query {qi}: codelength must be positive"
            )));
        }
        let total_users: u64 = query.groups.iter().map(|g| g.users).sum();
        if let Some(s) = scenario {
            let k_n = s.k_n_for(query.n) as u64;
            if total_users != k_n {
                return Err(Error::Validation(format!(
                    "query {qi} declares {total_users} users but the scenario has k_n = {k_n} at n = {}",
                    query.n
                )));
            }
        }
        if query.groups.is_empty() {
            let budget = query.n as f64 * query.sum_rate_per_use;
            report.row(&[
                qi.to_string(),
                String::new(),
                "0".to_string(),
                String::new(),
                String::new(),
                "true".to_string(),
                real(units.convert(budget)),
            ]);
            continue;
        }
        let groups: Vec<(u64, f64)> = query
            .groups
            .iter()
            .map(|g| (g.users, g.message_length_nats))
            .collect();
        let region_query = RegionQuery::new(groups, query.n)?;
        let (feasible, slack) = region_feasible(&region_query, query.sum_rate_per_use)?;
        for (gi, group) in query.groups.iter().enumerate() {
            let max_users =
                max_sustainable_users(group.message_length_nats, query.n, query.sum_rate_per_use)?;
            report.row(&[
                qi.to_string(),
                gi.to_string(),
                group.users.to_string(),
                real(units.convert(group.message_length_nats)),
                max_users.to_string(),
                feasible.to_string(),
                real(units.convert(slack)),
            ]);
        }
    }
    Ok(report.finish())
}

/// Python companion script for a CSV report; `None` for verdict-style
/// subcommands that have nothing to plot. The script is self-contained and
/// only needs matplotlib.
pub fn plot_stub(subcommand: &str, csv_filename: &str) -> Option<String> {
    let body = match subcommand {
        "rate" | "fig2" => {
            r#"series = {}
for r in data:
    key = (r[col["n_t"]], r[col["n_r"]])
    series.setdefault(key, []).append(r)
fig, ax = plt.subplots()
for (nt, nr), rows_ in series.items():
    xs = [int(r[col["n"]]) for r in rows_]
    ys = [float(r[col["mc_sum_rate"]]) for r in rows_]
    asym = [float(r[col["asymptotic_sum_rate"]]) for r in rows_]
    ax.plot(xs, ys, marker="o", label=f"{nt}x{nr} MC")
    ax.plot(xs, asym, linestyle="--", label=f"{nt}x{nr} asymptotic")
ax.set_xscale("log", base=2)
ax.set_xlabel("codelength n")
ax.set_ylabel("sum rate per use")
ax.legend()
"#
        }
        "fig3" => {
            r#"series = {}
for r in data:
    series.setdefault(int(r[col["n"]]), []).append(r)
fig, ax = plt.subplots()
for n, rows_ in sorted(series.items()):
    xs = [int(r[col["n_r"]]) for r in rows_]
    ys = [float(r[col["mc_sum_rate"]]) for r in rows_]
    ax.plot(xs, ys, marker="o", label=f"n={n}")
ax.set_xlabel("receive antennas")
ax.set_ylabel("sum rate per use")
ax.legend()
"#
        }
        "exponent" => {
            r#"series = {}
for r in data:
    key = (r[col["rule"]], r[col["rho"]], r[col["epsilon"]])
    series.setdefault(key, []).append(r)
fig, ax = plt.subplots()
for (rule, rho, eps), rows_ in sorted(series.items()):
    xs = [int(r[col["n"]]) for r in rows_]
    ys = [float(r[col["per_use_mean"]]) for r in rows_]
    es = [3 * float(r[col["per_use_std_error"]]) for r in rows_]
    ax.errorbar(xs, ys, yerr=es, marker="o", label=f"{rule} rho={float(rho):g} eps={float(eps):g}")
ax.set_xscale("log", base=2)
ax.axhline(0.0, color="gray", linewidth=0.5)
ax.set_xlabel("codelength n")
ax.set_ylabel("per-use exponent")
ax.legend()
"#
        }
        "hardening" => {
            r#"xs = [int(r[col["k_n"]]) for r in data]
fig, ax = plt.subplots()
for name in ("median_offdiag_ratio", "median_det_gap", "median_det_gap_half"):
    ax.loglog(xs, [float(r[col[name]]) for r in data], marker="o", label=name)
ax.set_xlabel("users k_n")
ax.set_ylabel("median metric")
ax.legend()
"#
        }
        _ => return None,
    };
    let stem = csv_filename.strip_suffix(".csv").unwrap_or(csv_filename);
    Some(format!(
        r##"#!/usr/bin/env python3
"""Plot {csv} (written by `mmac {sub}`). Requires matplotlib."""
import matplotlib.pyplot as plt

rows = []
with open({csv:?}) as f:
    for line in f:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rows.append(line.split(","))
header, data = rows[0], rows[1:]
col = {{name: i for i, name in enumerate(header)}}

{body}
fig.tight_layout()
fig.savefig({png:?}, dpi=150)
print("wrote", {png:?})
"##,
        csv = csv_filename,
        sub = subcommand,
        body = body,
        png = format!("{stem}.png"),
    ))
}
