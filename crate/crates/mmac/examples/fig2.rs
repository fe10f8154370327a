//! Sum rate versus population size for the 2×2, 4×4 and 8×8 antenna
//! configurations; prints the report CSV on stdout. A trimmed grid keeps the
//! example quick — the CLI `fig2` subcommand runs the full one.

use mmac::experiments::{run_fig2, Units};
use mmac::scenario::Scenario;
use std::path::Path;

fn main() -> mmac::Result<()> {
    let scenario = Scenario::from_json_str(
        r#"{"version": 1,
            "n_values": [64, 128, 256],
            "mc": {"rate_trials": 500, "exponent_trials": 500}}"#,
        Path::new("inline"),
    )?;
    print!("{}", run_fig2(&scenario, Units::Nats)?);
    Ok(())
}
