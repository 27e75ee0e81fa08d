//! Systematic axiom checks: expected-utility agents over exhaustively
//! enumerated rational-probability lotteries never violate the axioms, and
//! every reported violation witness reproduces in isolation.

use preflab::agent::{Agent, PreferenceRelation};
use preflab::lottery::{mix, Lottery, OutcomeId};
use preflab::rationality::{
    check_completeness, check_independence, check_transitivity, independence_grid,
    independence_violation_scenario, solve_continuity, Axiom,
};
use preflab::utility::UtilityFunction;

fn ids() -> Vec<OutcomeId> {
    (0..4).map(|i| OutcomeId::new(format!("o{i}"))).collect()
}

/// All lotteries over 4 outcomes with probabilities in k/4 steps.
fn rational_lotteries() -> Vec<Lottery> {
    let denominator = 4u32;
    let mut lotteries = Vec::new();
    for a in 0..=denominator {
        for b in 0..=denominator - a {
            for c in 0..=denominator - a - b {
                let d = denominator - a - b - c;
                let support: Vec<(OutcomeId, f64)> = ids()
                    .into_iter()
                    .zip([a, b, c, d])
                    .filter(|(_, n)| *n > 0)
                    .map(|(id, n)| (id, n as f64 / denominator as f64))
                    .collect();
                lotteries.push(Lottery::new(support).unwrap());
            }
        }
    }
    lotteries
}

fn exact_agent() -> Agent {
    let utility =
        UtilityFunction::from_pairs([("o0", 0.25), ("o1", 1.0), ("o2", 2.5), ("o3", 4.0)]).unwrap();
    Agent::expected_utility_maximizer("exact", utility)
        .unwrap()
        .with_epsilon(0.0)
        .unwrap()
}

#[test]
fn exhaustive_completeness_and_transitivity() {
    let agent = exact_agent();
    let lotteries = rational_lotteries();
    assert_eq!(lotteries.len(), 35);
    for x in &lotteries {
        for y in &lotteries {
            assert!(check_completeness(&agent, x, y).unwrap().holds);
        }
    }
    for x in &lotteries {
        for y in &lotteries {
            for z in &lotteries {
                let report = check_transitivity(&agent, x, y, z).unwrap();
                assert!(report.holds, "witness: {:?}", report.witness);
            }
        }
    }
}

#[test]
fn exhaustive_independence_on_sampled_triples() {
    let agent = exact_agent();
    let lotteries = rational_lotteries();
    let grid = independence_grid(19);
    // Every 3rd lottery in each role keeps the triple count manageable while
    // still covering boundary-supported lotteries.
    for (i, x) in lotteries.iter().enumerate().step_by(3) {
        for (j, y) in lotteries.iter().enumerate().step_by(3) {
            for (k, z) in lotteries.iter().enumerate().step_by(3) {
                let _ = (i, j, k);
                let report = check_independence(&agent, x, y, z, &grid).unwrap();
                assert!(report.holds, "witness: {:?}", report.witness);
            }
        }
    }
}

#[test]
fn continuity_solution_verifies_to_indifference() {
    let agent = exact_agent();
    let lotteries = rational_lotteries();
    let mut checked = 0;
    for x in lotteries.iter().step_by(2) {
        for y in lotteries.iter().step_by(2) {
            for z in lotteries.iter().step_by(2) {
                let eu_x = agent.expected_utility_of(x).unwrap();
                let eu_y = agent.expected_utility_of(y).unwrap();
                let eu_z = agent.expected_utility_of(z).unwrap();
                if !(eu_x >= eu_y && eu_y >= eu_z && eu_x > eu_z) {
                    continue;
                }
                let p = solve_continuity(&agent, x, y, z).unwrap();
                let mixed = mix(x, z, p).unwrap();
                let residual = (agent.expected_utility_of(&mixed).unwrap() - eu_y).abs();
                assert!(residual <= 1e-9, "residual {residual}");
                checked += 1;
            }
        }
    }
    assert!(checked > 100, "only {checked} ordered triples checked");
}

#[test]
fn violation_witnesses_reproduce_in_isolation() {
    // Independence: the bundled threshold-agent scenario.
    let (agent, x, y, z) = independence_violation_scenario();
    let report = check_independence(&agent, &x, &y, &z, &independence_grid(99)).unwrap();
    assert!(!report.holds);
    let witness = report.witness.expect("violation carries a witness");
    assert_eq!(witness.lotteries.len(), 3);
    let p = witness
        .mix_weight
        .expect("independence witness has a mix weight");
    let recheck = check_independence(
        &agent,
        &witness.lotteries[0],
        &witness.lotteries[1],
        &witness.lotteries[2],
        &[p],
    )
    .unwrap();
    assert!(!recheck.holds);
    assert_eq!(recheck.axiom, Axiom::Independence);

    // Transitivity: a wide-epsilon agent with an indifference chain.
    let utility = UtilityFunction::from_pairs([("o0", 1.0), ("o1", 1.4), ("o2", 1.8)]).unwrap();
    let sloppy = Agent::expected_utility_maximizer("sloppy", utility)
        .unwrap()
        .with_epsilon(0.5)
        .unwrap();
    let triple = [
        Lottery::point_mass("o0"),
        Lottery::point_mass("o1"),
        Lottery::point_mass("o2"),
    ];
    let report = check_transitivity(&sloppy, &triple[0], &triple[1], &triple[2]).unwrap();
    assert!(!report.holds);
    let witness = report.witness.unwrap();
    let recheck = check_transitivity(
        &sloppy,
        &witness.lotteries[0],
        &witness.lotteries[1],
        &witness.lotteries[2],
    )
    .unwrap();
    assert!(!recheck.holds);
}

#[test]
fn threshold_scenario_base_preference_is_strict() {
    let (agent, x, y, _) = independence_violation_scenario();
    assert_eq!(
        agent.prefer(&x, &y).unwrap(),
        PreferenceRelation::XPreferred
    );
}
