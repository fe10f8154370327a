//! Finite-dimension message-length region: a group-wise feasibility test
//! against the single sum constraint Σ_j K_j·V_j ≤ n·sum_rate, and the
//! sustainable-user count it implies.

use crate::error::{Error, Result};

/// A feasibility query: J groups of K_j users, each wanting V_j nats per
/// codeword, at codelength n.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionQuery {
    groups: Vec<(u64, f64)>,
    n: usize,
}

impl RegionQuery {
    /// Groups are (user count, message length in nats per codeword); at
    /// least one group, all message lengths positive.
    pub fn new(groups: Vec<(u64, f64)>, n: usize) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::Validation("a region query needs at least one group".into()));
        }
        if n == 0 {
            return Err(Error::Validation("codelength must be positive".into()));
        }
        if let Some((_, v)) = groups.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Validation(format!(
                "message lengths must be positive and finite, got {v}"
            )));
        }
        Ok(Self { groups, n })
    }

    pub fn groups(&self) -> &[(u64, f64)] {
        &self.groups
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total demand Σ_j K_j·V_j in nats per codeword.
    pub fn demand(&self) -> f64 {
        self.groups.iter().map(|(k, v)| *k as f64 * v).sum()
    }
}

/// Feasibility of a query against a sum rate (nats per channel use):
/// feasible iff Σ K_j·V_j ≤ n·sum_rate (the region is closed, so the
/// boundary is feasible); slack is the remaining budget.
pub fn region_feasible(query: &RegionQuery, sum_rate_per_use: f64) -> Result<(bool, f64)> {
    if !(sum_rate_per_use.is_finite() && sum_rate_per_use >= 0.0) {
        return Err(Error::Validation(format!(
            "sum rate must be nonnegative, got {sum_rate_per_use}"
        )));
    }
    let budget = query.n as f64 * sum_rate_per_use;
    let demand = query.demand();
    Ok((demand <= budget, budget - demand))
}

/// Largest K with K·V ≤ n·sum_rate: floor(n·sum_rate / V), with the floor
/// nudged so the boundary case lands exactly.
pub fn max_sustainable_users(v: f64, n: usize, sum_rate_per_use: f64) -> Result<u64> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Validation(format!(
            "message length must be positive, got {v}"
        )));
    }
    if !(sum_rate_per_use.is_finite() && sum_rate_per_use >= 0.0) {
        return Err(Error::Validation(format!(
            "sum rate must be nonnegative, got {sum_rate_per_use}"
        )));
    }
    let budget = n as f64 * sum_rate_per_use;
    let mut k = (budget / v).floor().max(0.0) as u64;
    // Float division can land one off in either direction at the boundary;
    // settle against the exact predicate K·V ≤ budget.
    while (k + 1) as f64 * v <= budget {
        k += 1;
    }
    while k > 0 && k as f64 * v > budget {
        k -= 1;
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::{message_length_rates, RateAllocation};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_demand_is_feasible_with_full_slack() {
        let q = RegionQuery::new(vec![(0, 1.0), (0, 5.0)], 64).unwrap();
        let (feasible, slack) = region_feasible(&q, 2.0).unwrap();
        assert!(feasible);
        assert_eq!(slack, 128.0);
    }

    #[test]
    fn boundary_queries_are_feasible_with_zero_slack() {
        let q = RegionQuery::new(vec![(10, 12.8)], 64).unwrap();
        let (feasible, slack) = region_feasible(&q, 2.0).unwrap();
        assert!(feasible);
        assert_eq!(slack, 0.0);
    }

    #[test]
    fn invalid_queries_are_rejected() {
        assert!(matches!(RegionQuery::new(vec![], 64), Err(Error::Validation(_))));
        assert!(matches!(
            RegionQuery::new(vec![(1, 0.0)], 64),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            RegionQuery::new(vec![(1, 1.0)], 0),
            Err(Error::Validation(_))
        ));
        let q = RegionQuery::new(vec![(1, 1.0)], 64).unwrap();
        assert!(matches!(
            region_feasible(&q, -1.0),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn sustainable_users_handles_the_exact_divisor_case() {
        // V = n·sum_rate/10 exactly → 10 users fit.
        let n = 128usize;
        let sum_rate = 1.7;
        let v = n as f64 * sum_rate / 10.0;
        assert_eq!(max_sustainable_users(v, n, sum_rate).unwrap(), 10);
        // V above the whole budget → 0.
        assert_eq!(
            max_sustainable_users(n as f64 * sum_rate * 1.01, n, sum_rate).unwrap(),
            0
        );
    }

    #[test]
    fn symmetric_allocations_land_on_the_boundary() {
        let (n, k_n) = (256usize, 128usize);
        let sum_rate = 3.321;
        let alloc = RateAllocation::symmetric(n, k_n).unwrap();
        let rates = message_length_rates(&alloc, sum_rate).unwrap();
        let q = RegionQuery::new(vec![(k_n as u64, rates[0])], n).unwrap();
        let (feasible, slack) = region_feasible(&q, sum_rate).unwrap();
        assert!(feasible);
        let budget = n as f64 * sum_rate;
        assert!(slack.abs() <= 1e-9 * budget, "slack {slack}");
    }

    /// Direct scalar accumulation, no shared code with region_feasible.
    fn oracle_feasible(groups: &[(u64, f64)], n: usize, sum_rate: f64) -> bool {
        let mut lhs = 0.0_f64;
        for (k, v) in groups {
            lhs += *k as f64 * *v;
        }
        lhs <= n as f64 * sum_rate
    }

    #[test]
    fn verdicts_match_the_scalar_oracle_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(314);
        for _ in 0..10_000 {
            let j = rng.random_range(1..6usize);
            let groups: Vec<(u64, f64)> = (0..j)
                .map(|_| {
                    (
                        rng.random_range(0..2000u64),
                        rng.random::<f64>() * 10.0 + 1e-3,
                    )
                })
                .collect();
            let n = rng.random_range(1..4096usize);
            let sum_rate = rng.random::<f64>() * 8.0;
            let q = RegionQuery::new(groups.clone(), n).unwrap();
            let (feasible, _) = region_feasible(&q, sum_rate).unwrap();
            assert_eq!(feasible, oracle_feasible(&groups, n, sum_rate));
        }
    }

    #[test]
    fn sustainable_users_agrees_with_bisection() {
        // Bisection over the region_feasible predicate is the oracle.
        let bisect = |v: f64, n: usize, sum_rate: f64| -> u64 {
            let mut lo = 0u64; // feasible
            let mut hi = 1u64;
            let feasible = |k: u64| {
                if k == 0 {
                    return true;
                }
                let q = RegionQuery::new(vec![(k, v)], n).unwrap();
                region_feasible(&q, sum_rate).unwrap().0
            };
            while feasible(hi) {
                lo = hi;
                hi *= 2;
                if hi > 1 << 40 {
                    break;
                }
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if feasible(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2718);
        for _ in 0..1000 {
            let v = rng.random::<f64>() * 20.0 + 1e-6;
            let n = rng.random_range(1..2048usize);
            let sum_rate = rng.random::<f64>() * 5.0;
            assert_eq!(
                max_sustainable_users(v, n, sum_rate).unwrap(),
                bisect(v, n, sum_rate),
                "v={v} n={n} rate={sum_rate}"
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn permuting_groups_preserves_the_verdict(
            groups in proptest::collection::vec((0u64..1000, 0.001f64..10.0), 1..6),
            n in 1usize..2048,
            sum_rate in 0.0f64..10.0,
            swap_a in 0usize..6,
            swap_b in 0usize..6,
        ) {
            let q = RegionQuery::new(groups.clone(), n).unwrap();
            let mut permuted = groups.clone();
            let (a, b) = (swap_a % groups.len(), swap_b % groups.len());
            permuted.swap(a, b);
            let qp = RegionQuery::new(permuted, n).unwrap();
            let lhs = region_feasible(&q, sum_rate).unwrap();
            let rhs = region_feasible(&qp, sum_rate).unwrap();
            prop_assert_eq!(lhs.0, rhs.0);
            prop_assert!((lhs.1 - rhs.1).abs() <= 1e-9 * lhs.1.abs().max(1.0));
        }

        #[test]
        fn growing_a_group_never_restores_feasibility(
            groups in proptest::collection::vec((0u64..1000, 0.001f64..10.0), 1..6),
            n in 1usize..2048,
            sum_rate in 0.0f64..10.0,
            grow in 0usize..6,
            extra in 1u64..50,
        ) {
            let q = RegionQuery::new(groups.clone(), n).unwrap();
            let before = region_feasible(&q, sum_rate).unwrap().0;
            let mut grown = groups.clone();
            let g = grow % groups.len();
            grown[g].0 += extra;
            let qg = RegionQuery::new(grown, n).unwrap();
            let after = region_feasible(&qg, sum_rate).unwrap().0;
            // infeasible stays infeasible under growth
            prop_assert!(before || !after);
        }
    }
}
