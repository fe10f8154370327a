//! Message-length region checks: a demand of K_j users wanting V_j nats each
//! fits iff Σ K_j·V_j ≤ n·sum_rate. Shows the verdict, the slack left, and
//! the largest group each per-user demand could sustain on its own.

use mmac::region::{max_sustainable_users, region_feasible, RegionQuery};

fn main() -> mmac::Result<()> {
    let sum_rate = 9.5; // nats per channel use
    let n = 1024usize;
    let budget = n as f64 * sum_rate;
    println!("codelength n = {n}, sum rate {sum_rate} nats/use, budget {budget:.0} nats");

    let cases: [(&str, Vec<(u64, f64)>); 3] = [
        ("light load", vec![(200, 12.0), (100, 20.0)]),
        ("boundary", vec![(512, budget / 512.0)]),
        ("overload", vec![(400, 30.0), (300, 25.0)]),
    ];
    for (label, groups) in cases {
        let query = RegionQuery::new(groups.clone(), n)?;
        let (feasible, slack) = region_feasible(&query, sum_rate)?;
        println!(
            "{label}: demand {:.0} nats, feasible = {feasible}, slack = {slack:.1}",
            query.demand()
        );
        for (users, v) in groups {
            println!(
                "    {users} users at {v:.1} nats each; the budget alone sustains {}",
                max_sustainable_users(v, n, sum_rate)?
            );
        }
    }
    Ok(())
}
