//! Agents, behavior models, preference relations, and agent populations.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lottery::{Lottery, OutcomeId, PROBABILITY_TOLERANCE};
use crate::utility::{expected_utility, UtilityFunction};
use crate::{Error, Result};

/// Default indifference epsilon. Exact equality of expected utilities is
/// numerically fragile, so strictness requires a gap larger than this.
pub const DEFAULT_INDIFFERENCE_EPSILON: f64 = 1e-9;

/// Identifier for an agent (annotator).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(id: impl Into<String>) -> Self {
        AgentId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        AgentId(s.to_owned())
    }
}

impl From<String> for AgentId {
    fn from(s: String) -> Self {
        AgentId(s)
    }
}

/// The outcome of comparing two lotteries, relative to argument order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PreferenceRelation {
    /// The first lottery is strictly preferred.
    XPreferred,
    /// The second lottery is strictly preferred.
    YPreferred,
    Indifferent,
}

impl PreferenceRelation {
    /// The relation seen from the other side: swap the argument roles.
    pub fn flipped(self) -> Self {
        match self {
            PreferenceRelation::XPreferred => PreferenceRelation::YPreferred,
            PreferenceRelation::YPreferred => PreferenceRelation::XPreferred,
            PreferenceRelation::Indifferent => PreferenceRelation::Indifferent,
        }
    }

    pub fn is_strict(self) -> bool {
        self != PreferenceRelation::Indifferent
    }
}

/// How an agent turns utilities into choices over lotteries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Behavior {
    /// Compare lotteries by expected utility.
    ExpectedUtility,
    /// Declare a lottery unusable when its mass on the unusable outcome set
    /// exceeds the tolerance; fall back to expected utility otherwise.
    Threshold {
        unusable: BTreeSet<OutcomeId>,
        tolerance: f64,
    },
}

/// An annotator: a utility function plus a behavior model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    id: AgentId,
    utility: UtilityFunction,
    behavior: Behavior,
    indifference_epsilon: f64,
}

impl Agent {
    pub fn new(
        id: impl Into<AgentId>,
        utility: UtilityFunction,
        behavior: Behavior,
        indifference_epsilon: f64,
    ) -> Result<Self> {
        if !indifference_epsilon.is_finite() || indifference_epsilon < 0.0 {
            return Err(Error::Validation(format!(
                "indifference epsilon must be finite and >= 0, got {indifference_epsilon}"
            )));
        }
        if let Behavior::Threshold { tolerance, .. } = &behavior {
            if !(0.0..=1.0).contains(tolerance) {
                return Err(Error::OutOfRange {
                    what: "threshold tolerance",
                    value: *tolerance,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        Ok(Agent {
            id: id.into(),
            utility,
            behavior,
            indifference_epsilon,
        })
    }

    /// An expected-utility maximizer with the default epsilon.
    pub fn expected_utility_maximizer(
        id: impl Into<AgentId>,
        utility: UtilityFunction,
    ) -> Result<Self> {
        Self::new(
            id,
            utility,
            Behavior::ExpectedUtility,
            DEFAULT_INDIFFERENCE_EPSILON,
        )
    }

    /// A threshold agent that finds lotteries unusable when their mass on
    /// `unusable` exceeds `tolerance`.
    pub fn threshold(
        id: impl Into<AgentId>,
        utility: UtilityFunction,
        unusable: BTreeSet<OutcomeId>,
        tolerance: f64,
    ) -> Result<Self> {
        Self::new(
            id,
            utility,
            Behavior::Threshold {
                unusable,
                tolerance,
            },
            DEFAULT_INDIFFERENCE_EPSILON,
        )
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::Validation(format!(
                "indifference epsilon must be finite and >= 0, got {epsilon}"
            )));
        }
        self.indifference_epsilon = epsilon;
        Ok(self)
    }

    pub fn id(&self) -> &AgentId {
        &self.id
    }

    pub fn utility(&self) -> &UtilityFunction {
        &self.utility
    }

    /// Replaces the utility function, keeping id, behavior and epsilon.
    pub fn with_utility(&self, utility: UtilityFunction) -> Self {
        Agent {
            id: self.id.clone(),
            utility,
            behavior: self.behavior.clone(),
            indifference_epsilon: self.indifference_epsilon,
        }
    }

    pub fn behavior(&self) -> &Behavior {
        &self.behavior
    }

    pub fn indifference_epsilon(&self) -> f64 {
        self.indifference_epsilon
    }

    pub fn is_expected_utility(&self) -> bool {
        matches!(self.behavior, Behavior::ExpectedUtility)
    }

    /// Threshold rule: unusable iff mass on the unusable set exceeds the
    /// tolerance. Expected-utility agents never find a lottery unusable.
    pub fn finds_unusable(&self, lottery: &Lottery) -> bool {
        match &self.behavior {
            Behavior::ExpectedUtility => false,
            Behavior::Threshold {
                unusable,
                tolerance,
            } => lottery.mass_on(unusable) > *tolerance,
        }
    }

    pub fn expected_utility_of(&self, lottery: &Lottery) -> Result<f64> {
        expected_utility(lottery, &self.utility)
    }

    /// Compares two lotteries.
    ///
    /// Expected-utility agents prefer strictly when the expected-utility gap
    /// exceeds their indifference epsilon. Threshold agents first apply the
    /// usability rule: both unusable means indifferent, exactly one unusable
    /// means the other is preferred, otherwise the expected-utility rule.
    pub fn prefer(&self, x: &Lottery, y: &Lottery) -> Result<PreferenceRelation> {
        if let Behavior::Threshold { .. } = self.behavior {
            let x_unusable = self.finds_unusable(x);
            let y_unusable = self.finds_unusable(y);
            match (x_unusable, y_unusable) {
                (true, true) => return Ok(PreferenceRelation::Indifferent),
                (true, false) => return Ok(PreferenceRelation::YPreferred),
                (false, true) => return Ok(PreferenceRelation::XPreferred),
                (false, false) => {}
            }
        }
        let gap = self.expected_utility_of(x)? - self.expected_utility_of(y)?;
        Ok(if gap.abs() <= self.indifference_epsilon {
            PreferenceRelation::Indifferent
        } else if gap > 0.0 {
            PreferenceRelation::XPreferred
        } else {
            PreferenceRelation::YPreferred
        })
    }
}

/// Anything that can be asked which of two lotteries it prefers.
///
/// `Ok(None)` means the oracle declined to answer, which the completeness
/// checker reports as an axiom violation. [`Agent`]s always answer.
pub trait PreferenceOracle {
    fn compare(&self, x: &Lottery, y: &Lottery) -> Result<Option<PreferenceRelation>>;
}

impl PreferenceOracle for Agent {
    fn compare(&self, x: &Lottery, y: &Lottery) -> Result<Option<PreferenceRelation>> {
        self.prefer(x, y).map(Some)
    }
}

/// A weighted set of agents; the discrete form of a density over utility
/// functions or preferences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentPopulation {
    agents: Vec<Agent>,
    weights: Vec<f64>,
}

impl AgentPopulation {
    pub fn new(agents: Vec<Agent>, weights: Vec<f64>) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::Validation("population has no agents".into()));
        }
        if agents.len() != weights.len() {
            return Err(Error::Validation(format!(
                "{} agents but {} weights",
                agents.len(),
                weights.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for agent in &agents {
            if !seen.insert(agent.id().clone()) {
                return Err(Error::Validation(format!(
                    "duplicate agent id `{}` in population",
                    agent.id()
                )));
            }
        }
        let mut total = 0.0;
        for w in &weights {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "agent weight {w} is negative or non-finite"
                )));
            }
            total += *w;
        }
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "agent weights sum to {total}, expected 1 within {PROBABILITY_TOLERANCE}"
            )));
        }
        Ok(AgentPopulation { agents, weights })
    }

    /// Population with uniform weights.
    pub fn uniform(agents: Vec<Agent>) -> Result<Self> {
        let n = agents.len();
        if n == 0 {
            return Err(Error::Validation("population has no agents".into()));
        }
        let w = 1.0 / n as f64;
        Self::new(agents, vec![w; n])
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Agent, f64)> {
        self.agents.iter().zip(self.weights.iter().copied())
    }

    /// Same agents, different weights.
    pub fn reweighted(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.agents.clone(), weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lottery::mix;

    fn utility(vals: &[(&str, f64)]) -> UtilityFunction {
        UtilityFunction::from_pairs(vals.iter().map(|(id, v)| (*id, *v))).unwrap()
    }

    fn eu_agent(vals: &[(&str, f64)]) -> Agent {
        Agent::expected_utility_maximizer("a1", utility(vals)).unwrap()
    }

    #[test]
    fn eu_agent_prefers_higher_expectation() {
        let agent = eu_agent(&[("x", 1.9), ("y", 1.7)]);
        let x = Lottery::point_mass("x");
        let y = Lottery::point_mass("y");
        assert_eq!(
            agent.prefer(&x, &y).unwrap(),
            PreferenceRelation::XPreferred
        );
        assert_eq!(
            agent.prefer(&y, &x).unwrap(),
            PreferenceRelation::YPreferred
        );
    }

    #[test]
    fn identical_lotteries_are_indifferent() {
        let agent = eu_agent(&[("x", 1.9)]);
        let x = Lottery::point_mass("x");
        assert_eq!(
            agent.prefer(&x, &x).unwrap(),
            PreferenceRelation::Indifferent
        );
    }

    #[test]
    fn threshold_agent_goes_indifferent_when_both_unusable() {
        // Mixing an offensive-content lottery into both sides turns a strict
        // preference into indifference.
        let u = utility(&[("ok_x", 2.0), ("ok_y", 1.0), ("slur", 0.0)]);
        let agent =
            Agent::threshold("t1", u, BTreeSet::from([OutcomeId::from("slur")]), 0.0).unwrap();
        let x = Lottery::point_mass("ok_x");
        let y = Lottery::point_mass("ok_y");
        let z = Lottery::point_mass("slur");
        assert_eq!(
            agent.prefer(&x, &y).unwrap(),
            PreferenceRelation::XPreferred
        );
        let x_mixed = mix(&x, &z, 0.5).unwrap();
        let y_mixed = mix(&y, &z, 0.5).unwrap();
        assert_eq!(
            agent.prefer(&x_mixed, &y_mixed).unwrap(),
            PreferenceRelation::Indifferent
        );
    }

    #[test]
    fn threshold_agent_prefers_the_usable_side() {
        let u = utility(&[("ok", 1.0), ("bad", 5.0)]);
        let agent =
            Agent::threshold("t1", u, BTreeSet::from([OutcomeId::from("bad")]), 0.1).unwrap();
        let clean = Lottery::point_mass("ok");
        let risky = Lottery::new(vec![("ok".into(), 0.8), ("bad".into(), 0.2)]).unwrap();
        // Despite the higher expected utility, the risky lottery is unusable.
        assert!(agent.expected_utility_of(&risky).unwrap() > 1.0);
        assert_eq!(
            agent.prefer(&clean, &risky).unwrap(),
            PreferenceRelation::XPreferred
        );
    }

    #[test]
    fn threshold_tolerance_is_strict() {
        let u = utility(&[("ok", 1.0), ("bad", 0.0)]);
        let agent =
            Agent::threshold("t1", u, BTreeSet::from([OutcomeId::from("bad")]), 0.2).unwrap();
        let at_tolerance = Lottery::new(vec![("ok".into(), 0.8), ("bad".into(), 0.2)]).unwrap();
        // Mass equal to the tolerance does not exceed it.
        assert!(!agent.finds_unusable(&at_tolerance));
    }

    #[test]
    fn epsilon_widens_indifference() {
        let agent = eu_agent(&[("x", 1.0), ("y", 1.4)])
            .with_epsilon(0.5)
            .unwrap();
        let x = Lottery::point_mass("x");
        let y = Lottery::point_mass("y");
        assert_eq!(
            agent.prefer(&x, &y).unwrap(),
            PreferenceRelation::Indifferent
        );
    }

    #[test]
    fn population_validates_weights_and_ids() {
        let a = eu_agent(&[("x", 1.0)]);
        let b = Agent::expected_utility_maximizer("a2", utility(&[("x", 2.0)])).unwrap();
        assert!(AgentPopulation::new(vec![a.clone(), b.clone()], vec![0.4, 0.6]).is_ok());
        assert!(AgentPopulation::new(vec![a.clone(), b.clone()], vec![0.5, 0.6]).is_err());
        assert!(AgentPopulation::new(vec![a.clone(), a.clone()], vec![0.5, 0.5]).is_err());
        assert!(AgentPopulation::new(vec![a, b], vec![-0.5, 1.5]).is_err());
    }
}
