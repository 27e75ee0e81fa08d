//! Checkers for the four von Neumann-Morgenstern rationality axioms over
//! finite lotteries, plus a continuity solver and a constructed independence
//! violation built from a threshold agent.
//!
//! The independence axiom quantifies over all mixing probabilities, which is
//! not enumerable; it is checked on a finite grid instead. For both agent
//! families in this crate, violation sets are unions of intervals, so a fine
//! grid suffices. Grid density is configurable via [`independence_grid`].

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::agent::{Agent, PreferenceOracle, PreferenceRelation};
use crate::lottery::{mix, Lottery, OutcomeId};
use crate::utility::UtilityFunction;
use crate::{Error, Result};

/// Which axiom a report is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Completeness,
    Transitivity,
    Continuity,
    Independence,
}

/// A re-checkable counterexample: the lotteries involved and, for
/// independence, the mixing probability that exposed the violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub lotteries: Vec<Lottery>,
    pub mix_weight: Option<f64>,
    pub detail: String,
}

/// Result of checking one axiom on concrete inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl AxiomReport {
    fn holds(axiom: Axiom) -> Self {
        AxiomReport {
            axiom,
            holds: true,
            witness: None,
        }
    }

    fn violated(axiom: Axiom, witness: Witness) -> Self {
        AxiomReport {
            axiom,
            holds: false,
            witness: Some(witness),
        }
    }
}

/// Completeness: the oracle must commit to exactly one relation for any
/// pair. Our agents always do; the check exists so user-supplied preference
/// oracles can be audited too.
pub fn check_completeness<O: PreferenceOracle>(
    oracle: &O,
    x: &Lottery,
    y: &Lottery,
) -> Result<AxiomReport> {
    match oracle.compare(x, y)? {
        Some(_) => Ok(AxiomReport::holds(Axiom::Completeness)),
        None => Ok(AxiomReport::violated(
            Axiom::Completeness,
            Witness {
                lotteries: vec![x.clone(), y.clone()],
                mix_weight: None,
                detail: "oracle returned no relation for the pair".into(),
            },
        )),
    }
}

/// Transitivity of strict preference and of indifference over one triple.
pub fn check_transitivity<O: PreferenceOracle>(
    oracle: &O,
    x: &Lottery,
    y: &Lottery,
    z: &Lottery,
) -> Result<AxiomReport> {
    use PreferenceRelation::*;
    let xy = oracle.compare(x, y)?;
    let yz = oracle.compare(y, z)?;
    let xz = oracle.compare(x, z)?;
    let (xy, yz, xz) = match (xy, yz, xz) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        // Incomplete answers are the completeness checker's concern.
        _ => return Ok(AxiomReport::holds(Axiom::Transitivity)),
    };

    let witness = |detail: String| Witness {
        lotteries: vec![x.clone(), y.clone(), z.clone()],
        mix_weight: None,
        detail,
    };

    if xy == XPreferred && yz == XPreferred && xz != XPreferred {
        return Ok(AxiomReport::violated(
            Axiom::Transitivity,
            witness(format!(
                "strict chain broken: x > y and y > z but x vs z gave {xz:?}"
            )),
        ));
    }
    if xy == YPreferred && yz == YPreferred && xz != YPreferred {
        return Ok(AxiomReport::violated(
            Axiom::Transitivity,
            witness(format!(
                "strict chain broken: y > x and z > y but x vs z gave {xz:?}"
            )),
        ));
    }
    if xy == Indifferent && yz == Indifferent && xz != Indifferent {
        return Ok(AxiomReport::violated(
            Axiom::Transitivity,
            witness(format!(
                "indifference chain broken: x ~ y and y ~ z but x vs z gave {xz:?}"
            )),
        ));
    }
    Ok(AxiomReport::holds(Axiom::Transitivity))
}

/// Continuity: for an expected-utility agent with `X >= Y >= Z`, returns the
/// mixing probability `p` with `p·X + (1-p)·Z ~ Y`, namely
/// `(EU(Y) - EU(Z)) / (EU(X) - EU(Z))`.
///
/// When all three expected utilities coincide any `p` works; 0.5 is returned
/// by convention. `EU(X) = EU(Z)` with `Y` strictly between is impossible
/// under the precondition and reported as a precondition error.
pub fn solve_continuity(agent: &Agent, x: &Lottery, y: &Lottery, z: &Lottery) -> Result<f64> {
    if !agent.is_expected_utility() {
        return Err(Error::Precondition(
            "continuity solver requires an expected-utility agent".into(),
        ));
    }
    let eu_x = agent.expected_utility_of(x)?;
    let eu_y = agent.expected_utility_of(y)?;
    let eu_z = agent.expected_utility_of(z)?;
    if agent.prefer(y, x)? == PreferenceRelation::XPreferred
        || agent.prefer(z, y)? == PreferenceRelation::XPreferred
    {
        return Err(Error::Precondition(format!(
            "lotteries are not ordered x >= y >= z (expected utilities {eu_x}, {eu_y}, {eu_z})"
        )));
    }
    let span = eu_x - eu_z;
    if agent.prefer(x, z)? == PreferenceRelation::Indifferent {
        if agent.prefer(x, y)? == PreferenceRelation::Indifferent {
            return Ok(0.5);
        }
        return Err(Error::Precondition(
            "EU(X) = EU(Z) but Y is not indifferent to them".into(),
        ));
    }
    Ok(((eu_y - eu_z) / span).clamp(0.0, 1.0))
}

/// Independence over a grid of mixing probabilities: whenever the base
/// relation between `x` and `y` is strict, mixing any `z` at any `p` in `ps`
/// must leave that strict relation unchanged.
pub fn check_independence<O: PreferenceOracle>(
    oracle: &O,
    x: &Lottery,
    y: &Lottery,
    z: &Lottery,
    ps: &[f64],
) -> Result<AxiomReport> {
    for &p in ps {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::OutOfRange {
                what: "independence mix probability",
                value: p,
                lo: 0.0,
                hi: 1.0,
            });
        }
    }
    let base = match oracle.compare(x, y)? {
        Some(rel) if rel.is_strict() => rel,
        // No strict base preference: vacuously holds.
        _ => return Ok(AxiomReport::holds(Axiom::Independence)),
    };
    for &p in ps {
        let x_mixed = mix(x, z, p)?;
        let y_mixed = mix(y, z, p)?;
        let mixed = oracle.compare(&x_mixed, &y_mixed)?;
        if mixed != Some(base) {
            return Ok(AxiomReport::violated(
                Axiom::Independence,
                Witness {
                    lotteries: vec![x.clone(), y.clone(), z.clone()],
                    mix_weight: Some(p),
                    detail: format!(
                        "base relation {base:?} became {mixed:?} after mixing z at p={p}"
                    ),
                },
            ));
        }
    }
    Ok(AxiomReport::holds(Axiom::Independence))
}

/// Evenly spaced interior mixing probabilities `k/(density+1)` plus `p = 1`.
/// The default density used by the verification suite is 99.
pub fn independence_grid(density: usize) -> Vec<f64> {
    let mut ps: Vec<f64> = (1..=density)
        .map(|k| k as f64 / (density + 1) as f64)
        .collect();
    ps.push(1.0);
    ps
}

/// Default grid density for independence checks.
pub const DEFAULT_INDEPENDENCE_GRID: usize = 99;

/// A bundled scenario in which a threshold agent violates independence.
///
/// The agent tolerates no offensive mass at all. `x` and `y` are clean and
/// `x` is strictly preferred, but mixing the offensive lottery `z` into both
/// sides at any interior probability makes both unusable, collapsing the
/// strict preference to indifference.
pub fn independence_violation_scenario() -> (Agent, Lottery, Lottery, Lottery) {
    let utility = UtilityFunction::from_pairs([("ok_x", 2.0), ("ok_y", 1.0), ("slur", 0.0)])
        .expect("static utility");
    let agent = Agent::threshold(
        "threshold-annotator",
        utility,
        BTreeSet::from([OutcomeId::from("slur")]),
        0.0,
    )
    .expect("static agent");
    (
        agent,
        Lottery::point_mass("ok_x"),
        Lottery::point_mass("ok_y"),
        Lottery::point_mass("slur"),
    )
}
