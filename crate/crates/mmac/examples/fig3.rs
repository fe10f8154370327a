//! Sum rate versus the number of receive antennas at fixed n; prints the
//! report CSV, whose footer carries the log–log fit showing the near-linear
//! growth in N_R. A trimmed grid keeps the example quick.

use mmac::experiments::{run_fig3, Units};
use mmac::scenario::Scenario;
use std::path::Path;

fn main() -> mmac::Result<()> {
    let scenario = Scenario::from_json_str(
        r#"{"version": 1,
            "n_values": [256, 1024],
            "mc": {"rate_trials": 500, "exponent_trials": 500}}"#,
        Path::new("inline"),
    )?;
    print!("{}", run_fig3(&scenario, Units::Nats)?);
    Ok(())
}
