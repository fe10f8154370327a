//! Monte-Carlo sum rate against the deterministic large-population limit on
//! the reference scenario. The gap closes as the population grows — that is
//! the hardening effect the limit formula relies on.

use mmac::montecarlo::McSettings;
use mmac::rates::{asymptotic_sum_rate, expected_sum_rate};
use mmac::scenario::Scenario;

fn main() -> mmac::Result<()> {
    let scenario = Scenario::default();
    let settings = McSettings::new(2000, scenario.seed)?;

    println!("sum rate, nats per channel use (N_T = N_R = 2)");
    println!(
        "{:>6} {:>6} {:>12} {:>10} {:>12} {:>8}",
        "n", "k_n", "mc_mean", "std_err", "limit", "gap"
    );
    for n in [64usize, 256, 1024] {
        let profiles = scenario.profiles_for(n, 2)?;
        let mc = expected_sum_rate(&profiles, 2, 2, settings)?;
        let limit = asymptotic_sum_rate(&profiles, 2);
        println!(
            "{n:>6} {:>6} {:>12.4} {:>10.4} {:>12.4} {:>7.2}%",
            profiles.len(),
            mc.mean,
            mc.std_error,
            limit,
            100.0 * (mc.mean - limit).abs() / limit
        );
    }
    Ok(())
}
