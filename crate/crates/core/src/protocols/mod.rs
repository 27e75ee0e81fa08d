//! The three evaluation protocols.
//!
//! * OAA (outcome-level absolute assessment): agents rate sampled outputs on
//!   a scale; ratings are averaged per system.
//! * ORA (outcome-level relative assessment): agents pick the preferred
//!   output in random pairs; a Bradley-Terry fit turns counts into strengths
//!   (see [`ora`]).
//! * SPA (system-level probabilistic assessment): agents state the
//!   probability that one system beats another after fixed exposure; the
//!   stated probabilities are averaged (see [`spa`]).
//!
//! This module also houses extremum normalization and the expected expected
//! utility (EEU) aggregate, plus a bundled two-agent scenario demonstrating
//! why averaging raw scores across annotators with different scoring
//! magnitudes misorders systems unless utilities are extremum-normalized.

pub mod ora;
pub mod spa;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::agent::{Agent, AgentId, AgentPopulation};
use crate::lottery::{Lottery, OutcomeId, OutcomeUniverse};
use crate::scales::{rate, RatingScale};
use crate::seed::{derive_seed, hash_label};
use crate::utility::UtilityFunction;
use crate::{Error, Result};

pub use ora::{
    bradley_terry_fit, forced_choice, ora_collect, BradleyTerryFit, ComparisonCounts,
    PairwiseComparisons,
};
pub use spa::{spa_aggregate, spa_elicit, ElicitationModel, SpaEstimate};

/// Shared reference outcomes and the utilities all agents assign them.
/// Extremum-normalizing every agent against the same spec makes their
/// utilities comparable, which is what validates EEU aggregation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremumSpec {
    pub best: OutcomeId,
    pub worst: OutcomeId,
    pub c_max: f64,
    pub c_min: f64,
}

impl ExtremumSpec {
    pub fn new(
        best: impl Into<OutcomeId>,
        worst: impl Into<OutcomeId>,
        c_max: f64,
        c_min: f64,
    ) -> Result<Self> {
        if !c_max.is_finite() || c_max <= c_min || c_min < 0.0 {
            return Err(Error::Validation(format!(
                "extremum values must satisfy c_max > c_min >= 0, got c_max={c_max}, c_min={c_min}"
            )));
        }
        Ok(ExtremumSpec {
            best: best.into(),
            worst: worst.into(),
            c_max,
            c_min,
        })
    }
}

/// Rescales a utility function so the designated best and worst outcomes hit
/// `c_max` and `c_min` exactly. Errors when the agent does not rank the
/// reference outcomes in the expected order, i.e. the agents-agree condition
/// of extremum equivalence fails.
pub fn extremum_normalize(u: &UtilityFunction, spec: &ExtremumSpec) -> Result<UtilityFunction> {
    let u_best = u.value(&spec.best)?;
    let u_worst = u.value(&spec.worst)?;
    if u_best <= u_worst {
        return Err(Error::Precondition(format!(
            "agent disagrees with extremum outcomes: u(best)={u_best} <= u(worst)={u_worst}"
        )));
    }
    let scale = (spec.c_max - spec.c_min) / (u_best - u_worst);
    let values = u
        .values()
        .iter()
        .map(|(id, &v)| {
            // Pin the anchors exactly; the affine map is used in between.
            let normalized = if v == u_best {
                spec.c_max
            } else if v == u_worst {
                spec.c_min
            } else {
                spec.c_min + (v - u_worst) * scale
            };
            (id.clone(), normalized)
        })
        .collect();
    UtilityFunction::with_bounds(values, spec.c_min, spec.c_max)
}

/// Expected expected utility: the population-weighted mean of per-agent
/// expected utilities, `Σ_i w_i · EU(L, u_i)`.
pub fn eeu(population: &AgentPopulation, lottery: &Lottery) -> Result<f64> {
    let mut total = 0.0;
    for (agent, weight) in population.iter() {
        total += weight * agent.expected_utility_of(lottery)?;
    }
    Ok(total)
}

/// Ranks systems by EEU, best first; ties broken by input position.
pub fn eeu_ranking(population: &AgentPopulation, systems: &[Lottery]) -> Result<Vec<usize>> {
    let scores: Vec<f64> = systems
        .iter()
        .map(|l| eeu(population, l))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..systems.len()).collect();
    order.sort_by(|&i, &j| scores[j].partial_cmp(&scores[i]).expect("finite EEU"));
    Ok(order)
}

/// Per-agent rating lists produced by an OAA run, one map per system in
/// input order.
pub type OaaRatings = Vec<BTreeMap<AgentId, Vec<f64>>>;

/// Runs outcome-level absolute assessment: every agent rates `n_items`
/// sampled outputs from every system on the given scale.
///
/// Agents' utilities must already lie within the scale's value range; each
/// (system, agent) stream derives its seed from the master seed, the system
/// index, and the agent id, so results do not depend on evaluation order.
pub fn oaa_run(
    population: &AgentPopulation,
    systems: &[Lottery],
    scale: &RatingScale,
    n_items: usize,
    seed: u64,
) -> Result<OaaRatings> {
    if population.is_empty() {
        return Err(Error::Validation("empty population".into()));
    }
    if n_items == 0 {
        return Err(Error::Precondition("n_items must be >= 1".into()));
    }
    let mut tables = Vec::with_capacity(systems.len());
    for (sys_idx, system) in systems.iter().enumerate() {
        let mut per_agent = BTreeMap::new();
        for (agent, _) in population.iter() {
            let stream = derive_seed(seed, &[sys_idx as u64, hash_label(agent.id().as_str())]);
            let outcomes = system.sample(n_items, stream);
            let mut ratings = Vec::with_capacity(n_items);
            for outcome in &outcomes {
                ratings.push(rate(agent.utility().value(outcome)?, scale)?);
            }
            per_agent.insert(agent.id().clone(), ratings);
        }
        tables.push(per_agent);
    }
    Ok(tables)
}

/// Z-scores one rating list: `(x - mean) / sd` with the sample standard
/// deviation. The output has mean 0 and sd 1.
pub fn zscore(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::DegenerateSample(format!(
            "z-scoring needs at least 2 ratings, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if variance <= 0.0 {
        return Err(Error::DegenerateSample("zero rating variance".into()));
    }
    let sd = variance.sqrt();
    Ok(values.iter().map(|v| (v - mean) / sd).collect())
}

/// Z-scores each agent's rating list independently. Errors name the agent
/// whose ratings are degenerate.
pub fn zscore_per_annotator(
    ratings: &BTreeMap<AgentId, Vec<f64>>,
) -> Result<BTreeMap<AgentId, Vec<f64>>> {
    let mut normalized = BTreeMap::new();
    for (agent, values) in ratings {
        let z = zscore(values).map_err(|e| match e {
            Error::DegenerateSample(msg) => {
                Error::DegenerateSample(format!("agent `{agent}`: {msg}"))
            }
            other => other,
        })?;
        normalized.insert(agent.clone(), z);
    }
    Ok(normalized)
}

/// A bundled two-agent, two-system scenario demonstrating scoring-magnitude
/// bias.
///
/// Both agents prefer system X's outcome, but one expresses utilities in the
/// 0-to-10 band of the scale while the other stays inside 90-to-100. When
/// the two systems are scored by differently weighted rater pools, the raw
/// EEU order flips with the weights; after extremum normalization against
/// the shared references the order is stable for every weighting.
#[derive(Debug, Clone)]
pub struct MagnitudeBiasScenario {
    pub universe: OutcomeUniverse,
    pub agents: Vec<Agent>,
    pub systems: Vec<(String, Lottery)>,
    pub extremum: ExtremumSpec,
}

impl MagnitudeBiasScenario {
    /// EEU gap `EEU[X] - EEU[Y]` when X and Y are scored by pools weighting
    /// the two agents as `weights_x` and `weights_y` respectively.
    pub fn raw_eeu_gap(&self, weights_x: [f64; 2], weights_y: [f64; 2]) -> Result<f64> {
        let pop = AgentPopulation::uniform(self.agents.clone())?;
        let x = eeu(&pop.reweighted(weights_x.to_vec())?, &self.systems[0].1)?;
        let y = eeu(&pop.reweighted(weights_y.to_vec())?, &self.systems[1].1)?;
        Ok(x - y)
    }

    /// Same gap after extremum-normalizing every agent.
    pub fn normalized_eeu_gap(&self, weights_x: [f64; 2], weights_y: [f64; 2]) -> Result<f64> {
        let agents: Vec<Agent> = self
            .agents
            .iter()
            .map(|a| Ok(a.with_utility(extremum_normalize(a.utility(), &self.extremum)?)))
            .collect::<Result<_>>()?;
        let pop = AgentPopulation::uniform(agents)?;
        let x = eeu(&pop.reweighted(weights_x.to_vec())?, &self.systems[0].1)?;
        let y = eeu(&pop.reweighted(weights_y.to_vec())?, &self.systems[1].1)?;
        Ok(x - y)
    }
}

/// Builds the bundled magnitude-bias scenario.
pub fn magnitude_bias_scenario() -> MagnitudeBiasScenario {
    let universe =
        OutcomeUniverse::from_ids(["best", "out_x", "out_y", "worst"]).expect("static universe");
    // Low-magnitude scorer: full range 0-to-10, prefers out_x.
    let low = UtilityFunction::from_pairs([
        ("best", 10.0),
        ("out_x", 9.0),
        ("out_y", 7.0),
        ("worst", 0.0),
    ])
    .expect("static utility");
    // High-magnitude scorer: range 90-to-100, also prefers out_x.
    let high = UtilityFunction::from_pairs([
        ("best", 100.0),
        ("out_x", 98.0),
        ("out_y", 96.0),
        ("worst", 90.0),
    ])
    .expect("static utility");
    let agents = vec![
        Agent::expected_utility_maximizer("low-band", low).expect("static agent"),
        Agent::expected_utility_maximizer("high-band", high).expect("static agent"),
    ];
    MagnitudeBiasScenario {
        universe,
        agents,
        systems: vec![
            ("sys_x".into(), Lottery::point_mass("out_x")),
            ("sys_y".into(), Lottery::point_mass("out_y")),
        ],
        extremum: ExtremumSpec::new("best", "worst", 1.0, 0.0).expect("static spec"),
    }
}
