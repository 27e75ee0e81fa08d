//! System-level probabilistic assessment.
//!
//! An annotator observes a fixed number of outputs from each of two systems
//! and states the probability that the first is preferred to the second.
//! Estimates are directed: the reverse question is a separate record and is
//! never auto-complemented, since an annotator's stated `P[X over Y]` need
//! not equal `1 - P[Y over X]`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{Agent, AgentId};
use crate::lottery::Lottery;
use crate::stats::t_cdf;
use crate::{Error, Result};

/// How a simulated annotator turns observed outputs into a stated
/// probability.
///
/// The elicitation model is a modeling choice: the protocol defines what
/// annotators report, not how they form the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElicitationModel {
    /// Laplace-smoothed win rate over the paired utility comparisons:
    /// `(wins + 1) / (m + 2)`, ties counting half. Never reaches 0 or 1 at
    /// finite exposure.
    LaplaceWinrate,
    /// Posterior probability that the mean utility difference is positive
    /// under a conjugate normal model with a Jeffreys prior (Student-t
    /// posterior tail on the observed differences).
    NormalPosterior,
}

/// One elicited judgment: a directed probability estimate from one
/// annotator for one ordered pair of systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaEstimate {
    pub annotator: AgentId,
    pub system_x: String,
    pub system_y: String,
    /// Stated probability that `system_x` is preferred to `system_y`.
    pub p_hat: f64,
    /// Number of outputs observed from each system.
    pub m_seen: u32,
}

/// Elicits one SPA estimate: the agent observes `m` sampled outputs from
/// each system (paired by position) and reports per the model.
/// Deterministic given the seed.
pub fn spa_elicit(
    agent: &Agent,
    x: (&str, &Lottery),
    y: (&str, &Lottery),
    m: u32,
    seed: u64,
    model: ElicitationModel,
) -> Result<SpaEstimate> {
    if m == 0 {
        return Err(Error::Precondition("exposure m must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (x_id, x_lottery) = x;
    let (y_id, y_lottery) = y;
    let mut diffs = Vec::with_capacity(m as usize);
    for _ in 0..m {
        let out_x = x_lottery.draw(&mut rng).clone();
        let out_y = y_lottery.draw(&mut rng).clone();
        diffs.push(agent.utility().value(&out_x)? - agent.utility().value(&out_y)?);
    }
    let p_hat = match model {
        ElicitationModel::LaplaceWinrate => {
            let wins: f64 = diffs
                .iter()
                .map(|d| {
                    if *d > 0.0 {
                        1.0
                    } else if *d < 0.0 {
                        0.0
                    } else {
                        0.5
                    }
                })
                .sum();
            (wins + 1.0) / (m as f64 + 2.0)
        }
        ElicitationModel::NormalPosterior => posterior_probability(&diffs)?,
    };
    Ok(SpaEstimate {
        annotator: agent.id().clone(),
        system_x: x_id.to_string(),
        system_y: y_id.to_string(),
        p_hat,
        m_seen: m,
    })
}

/// `P(mean difference > 0)` under the Student-t posterior; degenerates to a
/// sign indicator when the differences carry no spread (m = 1 or all equal).
fn posterior_probability(diffs: &[f64]) -> Result<f64> {
    let m = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / m;
    if diffs.len() < 2 {
        return Ok(step(mean));
    }
    let variance = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (m - 1.0);
    if variance <= 0.0 {
        return Ok(step(mean));
    }
    let statistic = mean / (variance / m).sqrt();
    t_cdf(statistic, diffs.len() as u64 - 1)
}

fn step(mean: f64) -> f64 {
    if mean > 0.0 {
        1.0
    } else if mean < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// Averages directed estimates for one ordered pair of systems, with
/// uniform annotator weights. All records must share the same pair.
pub fn spa_aggregate(estimates: &[SpaEstimate]) -> Result<f64> {
    let first = estimates
        .first()
        .ok_or_else(|| Error::Validation("no estimates to aggregate".into()))?;
    for estimate in estimates {
        if estimate.system_x != first.system_x || estimate.system_y != first.system_y {
            return Err(Error::Validation(format!(
                "mixed pairs in aggregation: ({}, {}) vs ({}, {})",
                first.system_x, first.system_y, estimate.system_x, estimate.system_y
            )));
        }
    }
    Ok(estimates.iter().map(|e| e.p_hat).sum::<f64>() / estimates.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::utility::UtilityFunction;

    fn agent(vals: &[(&str, f64)]) -> Agent {
        let u = UtilityFunction::from_pairs(vals.iter().map(|(id, v)| (*id, *v))).unwrap();
        Agent::expected_utility_maximizer("a1", u).unwrap()
    }

    fn estimate(x: &str, y: &str, p: f64) -> SpaEstimate {
        SpaEstimate {
            annotator: "a1".into(),
            system_x: x.into(),
            system_y: y.into(),
            p_hat: p,
            m_seen: 5,
        }
    }

    #[test]
    fn dominance_gives_laplace_ceiling() {
        let a = agent(&[("good", 2.0), ("bad", 1.0)]);
        let x = Lottery::point_mass("good");
        let y = Lottery::point_mass("bad");
        let est = spa_elicit(
            &a,
            ("x", &x),
            ("y", &y),
            5,
            0,
            ElicitationModel::LaplaceWinrate,
        )
        .unwrap();
        assert!((est.p_hat - 6.0 / 7.0).abs() < 1e-12);
        assert_eq!(est.m_seen, 5);
    }

    #[test]
    fn single_tie_gives_half() {
        let a = agent(&[("s", 1.0)]);
        let l = Lottery::point_mass("s");
        let est = spa_elicit(
            &a,
            ("x", &l),
            ("y", &l),
            1,
            0,
            ElicitationModel::LaplaceWinrate,
        )
        .unwrap();
        assert!((est.p_hat - 0.5).abs() < 1e-12);
    }

    #[test]
    fn m_zero_is_rejected() {
        let a = agent(&[("s", 1.0)]);
        let l = Lottery::point_mass("s");
        assert!(spa_elicit(
            &a,
            ("x", &l),
            ("y", &l),
            0,
            0,
            ElicitationModel::LaplaceWinrate
        )
        .is_err());
    }

    #[test]
    fn identical_systems_center_on_half() {
        let a = agent(&[("s", 2.0), ("t", 1.0)]);
        let l = Lottery::new(vec![("s".into(), 0.5), ("t".into(), 0.5)]).unwrap();
        let mut total = 0.0;
        let runs = 200;
        for seed in 0..runs {
            let est = spa_elicit(
                &a,
                ("x", &l),
                ("y", &l),
                50,
                seed,
                ElicitationModel::LaplaceWinrate,
            )
            .unwrap();
            total += est.p_hat;
        }
        let mean = total / runs as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn laplace_never_certain() {
        let a = agent(&[("good", 2.0), ("bad", 1.0)]);
        let x = Lottery::point_mass("good");
        let y = Lottery::point_mass("bad");
        for m in [1, 2, 10, 100] {
            let est = spa_elicit(
                &a,
                ("x", &x),
                ("y", &y),
                m,
                1,
                ElicitationModel::LaplaceWinrate,
            )
            .unwrap();
            assert!(est.p_hat > 0.0 && est.p_hat < 1.0);
        }
    }

    #[test]
    fn normal_posterior_tracks_direction() {
        let a = agent(&[("s", 2.0), ("t", 1.0)]);
        let x = Lottery::new(vec![("s".into(), 0.9), ("t".into(), 0.1)]).unwrap();
        let y = Lottery::new(vec![("s".into(), 0.1), ("t".into(), 0.9)]).unwrap();
        let est = spa_elicit(
            &a,
            ("x", &x),
            ("y", &y),
            20,
            3,
            ElicitationModel::NormalPosterior,
        )
        .unwrap();
        assert!(est.p_hat > 0.5, "p_hat {}", est.p_hat);
        let reversed = spa_elicit(
            &a,
            ("y", &y),
            ("x", &x),
            20,
            3,
            ElicitationModel::NormalPosterior,
        )
        .unwrap();
        assert!(reversed.p_hat < 0.5);
    }

    #[test]
    fn normal_posterior_degenerate_differences() {
        let a = agent(&[("good", 2.0), ("bad", 1.0)]);
        let x = Lottery::point_mass("good");
        let y = Lottery::point_mass("bad");
        let est = spa_elicit(
            &a,
            ("x", &x),
            ("y", &y),
            5,
            0,
            ElicitationModel::NormalPosterior,
        )
        .unwrap();
        assert_eq!(est.p_hat, 1.0);
    }

    #[test]
    fn elicitation_is_deterministic() {
        let a = agent(&[("s", 2.0), ("t", 1.0)]);
        let x = Lottery::new(vec![("s".into(), 0.6), ("t".into(), 0.4)]).unwrap();
        let y = Lottery::new(vec![("s".into(), 0.4), ("t".into(), 0.6)]).unwrap();
        let e1 = spa_elicit(
            &a,
            ("x", &x),
            ("y", &y),
            9,
            42,
            ElicitationModel::LaplaceWinrate,
        )
        .unwrap();
        let e2 = spa_elicit(
            &a,
            ("x", &x),
            ("y", &y),
            9,
            42,
            ElicitationModel::LaplaceWinrate,
        )
        .unwrap();
        assert_eq!(e1, e2);
    }

    #[test]
    fn aggregate_means() {
        let estimates = [
            estimate("x", "y", 0.6),
            estimate("x", "y", 0.7),
            estimate("x", "y", 0.8),
            estimate("x", "y", 0.5),
        ];
        assert!((spa_aggregate(&estimates).unwrap() - 0.65).abs() < 1e-12);
    }

    #[test]
    fn aggregate_single_is_identity() {
        let estimates = [estimate("x", "y", 0.42)];
        assert_eq!(spa_aggregate(&estimates).unwrap(), 0.42);
    }

    #[test]
    fn aggregate_mean_is_fixed_point() {
        let mut estimates = vec![estimate("x", "y", 0.6), estimate("x", "y", 0.8)];
        let mean = spa_aggregate(&estimates).unwrap();
        estimates.push(estimate("x", "y", mean));
        assert!((spa_aggregate(&estimates).unwrap() - mean).abs() < 1e-12);
    }

    #[test]
    fn aggregate_rejects_mixed_pairs() {
        let estimates = [estimate("x", "y", 0.6), estimate("y", "x", 0.5)];
        assert!(matches!(
            spa_aggregate(&estimates),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn aggregate_rejects_empty_input() {
        assert!(matches!(spa_aggregate(&[]), Err(Error::Validation(_))));
    }
}
