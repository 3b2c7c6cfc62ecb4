//! Transport feasibility against a brute-force Hall-condition check.

use chansim_core::transport::{conditional_columns, feasible_transport, TransportInstance, TransportOutcome};
use proptest::prelude::*;

fn normalize(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

/// Smallest Hall slack `supply(N(R)) - demand(R)` over right subsets `R`.
fn hall_slack(inst: &TransportInstance) -> f64 {
    let r = inst.right_demand.len();
    (1u32..1 << r)
        .map(|mask| {
            let demand: f64 = (0..r).filter(|i| mask >> i & 1 == 1).map(|i| inst.right_demand[i]).sum();
            let mut nbr = vec![false; inst.left_supply.len()];
            for &(l, rt) in &inst.edges {
                if mask >> rt & 1 == 1 {
                    nbr[l] = true;
                }
            }
            let supply: f64 = inst.left_supply.iter().zip(&nbr).filter(|(_, &b)| b).map(|(s, _)| s).sum();
            supply - demand
        })
        .fold(f64::INFINITY, f64::min)
}

fn instance() -> impl Strategy<Value = TransportInstance> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(l, r)| {
        (
            prop::collection::vec(0.01f64..1.0, l),
            prop::collection::vec(0.01f64..1.0, r),
            prop::collection::vec(any::<bool>(), l * r),
        )
            .prop_map(move |(s, d, mask)| {
                let edges = (0..l * r).filter(|&e| mask[e]).map(|e| (e / r, e % r)).collect();
                TransportInstance::new(normalize(s), normalize(d), edges).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn feasibility_matches_hall(inst in instance()) {
        let slack = hall_slack(&inst);
        prop_assume!(slack.abs() > 1e-6);
        match feasible_transport(&inst).unwrap() {
            TransportOutcome::Feasible(plan) => {
                prop_assert!(slack > 0.0);
                for (&(l, r), &f) in &plan.flow {
                    prop_assert!(f > 0.0);
                    prop_assert!(inst.edges.contains(&(l, r)));
                }
                for (a, b) in plan.left_marginals().iter().zip(&inst.left_supply) {
                    prop_assert!((a - b).abs() < 1e-9);
                }
                for (a, b) in plan.right_marginals().iter().zip(&inst.right_demand) {
                    prop_assert!((a - b).abs() < 1e-9);
                }
                let cond = conditional_columns(&plan, &inst.left_supply).unwrap();
                for col in cond.values() {
                    prop_assert!((col.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
            TransportOutcome::Infeasible(v) => {
                prop_assert!(slack < 0.0);
                prop_assert!(v.demand > v.neighbourhood_supply);
                let demand: f64 = v.right_nodes.iter().map(|&i| inst.right_demand[i]).sum();
                prop_assert!((demand - v.demand).abs() < 1e-12);
                let nbr_supply: f64 = (0..inst.left_supply.len())
                    .filter(|&l| inst.edges.iter().any(|&(a, b)| a == l && v.right_nodes.contains(&b)))
                    .map(|l| inst.left_supply[l])
                    .sum();
                prop_assert!((nbr_supply - v.neighbourhood_supply).abs() < 1e-9);
            }
        }
    }
}
