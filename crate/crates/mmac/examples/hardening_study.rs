//! Channel hardening as the population grows: median off-diagonal ratio and
//! determinant gap of the Gram matrix, and the log–log decay slope of the
//! off-diagonal ratio (the CLT rate is −1/2).

use mmac::channel::sample_user_profiles;
use mmac::hardening::median_sweep_point;
use mmac::numerics::linear_fit;
use mmac::scenario::Scenario;
use mmac::seed::{derive_seed, Domain};

fn main() -> mmac::Result<()> {
    let scenario = Scenario::default();
    let fading = scenario.fading_params()?;
    let powers = (scenario.power_range[0], scenario.power_range[1]);

    println!(
        "{:>6} {:>16} {:>12}",
        "k_n", "offdiag_ratio", "det_gap"
    );
    let mut points = Vec::new();
    for k in [64usize, 256, 1024, 4096] {
        // Fresh population per draw so the medians describe the ensemble,
        // not one lucky set of users.
        let point = median_sweep_point(k, 33, 2, 2, scenario.seed, |draw| {
            let seed = derive_seed(scenario.seed, Domain::Diagnostic, &[k as u64, draw as u64]);
            sample_user_profiles(k, &fading, powers, 2, seed)
        })?;
        println!(
            "{k:>6} {:>16.6} {:>12.6}",
            point.median_offdiag_ratio, point.median_det_gap
        );
        points.push(((k as f64).ln(), point.median_offdiag_ratio.ln()));
    }

    let fit = linear_fit(&points)?;
    println!("off-diagonal decay slope on log-log axes: {:.3}", fit.slope);
    Ok(())
}
