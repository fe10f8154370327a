//! Gallager-style exponent pieces for the worst error event at n = 256:
//! E₀ over the ρ grid, the per-use exponent at a symmetric payload carved
//! from the estimated sum rate, and the closed-form lower bound under it.

use mmac::exponents::{gallager_e0, lemma1_case1_lower_bound, per_use_exponent, ErrorEvent};
use mmac::montecarlo::McSettings;
use mmac::rates::expected_sum_rate;
use mmac::scenario::Scenario;

fn main() -> mmac::Result<()> {
    let scenario = Scenario::default();
    let (n, epsilon) = (256usize, 0.1);
    let k_n = scenario.k_n_for(n);
    let k_e = k_n / 2;
    let profiles = scenario.profiles_for(n, 2)?;
    let event = ErrorEvent::canonical_worst(&profiles, k_e)?;

    // Symmetric payload: every user claims an equal share of (1−ε)·n·Ŝ.
    let rate = expected_sum_rate(&profiles, 2, 2, McSettings::new(2000, scenario.seed)?)?;
    let per_user = (1.0 - epsilon) * (n as f64 / k_n as f64) * rate.mean;
    let rates = vec![per_user; k_e];
    println!(
        "n = {n}, k_n = {k_n}, worst event of {k_e} users, \
         payload {per_user:.2} nats per codeword"
    );

    println!("{:>6} {:>12} {:>12} {:>12}", "rho", "e0", "per_use", "3*se");
    let settings = McSettings::new(10_000, scenario.seed)?;
    for rho in [0.25, 0.5, 0.75, 1.0] {
        let e0 = gallager_e0(rho, &event, &profiles, 2, settings)?;
        let pu = per_use_exponent(rho, &event, &rates, n, k_n, &profiles, 2, settings)?;
        println!(
            "{rho:>6.2} {:>12.5} {:>12.5} {:>12.5}",
            e0.mean,
            pu.mean,
            3.0 * pu.std_error
        );
    }

    let lower = lemma1_case1_lower_bound(epsilon, 0.5, k_n, n, &profiles, 2)?;
    println!("closed-form lower bound at gamma = 1/2: {lower:.5} nats per use");
    Ok(())
}
