//! The built-in demonstration and verification suite.
//!
//! Runs the bundled Likert reversal instance, residual-identity and
//! bias-direction sweeps, the VNM axiom checks (including the threshold
//! agent's independence violation), the EEU extremum-equivalence and
//! magnitude-bias demonstrations, and the statistics anchors. Prints one
//! pass/fail line per item and exits nonzero if anything fails.

use clap::{Args, ValueEnum};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use preflab::agent::{Agent, AgentId, AgentPopulation};
use preflab::lottery::{mix, Lottery};
use preflab::protocols::{
    bradley_terry_fit, eeu_ranking, extremum_normalize, magnitude_bias_scenario, oaa_run,
    zscore_per_annotator, ComparisonCounts, ExtremumSpec, PairwiseComparisons,
};
use preflab::rationality::{
    check_completeness, check_independence, check_transitivity, independence_grid,
    independence_violation_scenario, solve_continuity, DEFAULT_INDEPENDENCE_GRID,
};
use preflab::scales::{
    analyze_pair, analyze_pair_with_mode, bundled_reversal_instance, construct_reversal, residual,
    tier, RatingScale, RoundingMode,
};
use preflab::seed::derive_seed;
use preflab::stats::{holm_bonferroni, one_sample_t, t_cdf};
use preflab::utility::UtilityFunction;

use crate::{CliError, Context, OutputFormat, GLOBAL_KEYS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RoundingArg {
    Ceiling,
    HalfUp,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Tiering mode for the reversal demonstration.
    #[arg(long, value_enum)]
    rounding: Option<RoundingArg>,

    /// Independence grid density (interior points; p = 1 is always added).
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    passed: bool,
    detail: String,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    checks: Vec<Check>,
    passed: bool,
}

pub fn run(context: &Context, args: &VerifyArgs) -> Result<bool, CliError> {
    let mut known = GLOBAL_KEYS.to_vec();
    known.extend(["rounding", "grid"]);
    context.file.ensure_known_keys(&known)?;

    let rounding = match (args.rounding, context.file.get("rounding")) {
        (Some(RoundingArg::Ceiling), _) => RoundingMode::Ceiling,
        (Some(RoundingArg::HalfUp), _) => RoundingMode::HalfUp,
        (None, Some("ceiling")) | (None, None) => RoundingMode::Ceiling,
        (None, Some("half-up")) => RoundingMode::HalfUp,
        (None, Some(other)) => {
            return Err(CliError::usage(format!(
                "config key `rounding`: `{other}` is not ceiling|half-up"
            )))
        }
    };
    let grid_density = crate::config::resolve(
        args.grid,
        context.file.parse_value("grid")?,
        DEFAULT_INDEPENDENCE_GRID,
    );
    if grid_density == 0 {
        return Err(CliError::usage("grid density must be >= 1"));
    }

    let seed = context.seed;
    let checks = vec![
        reversal_demo(rounding),
        reversal_search(seed),
        residual_identity_sweep(seed),
        bias_sign_sweep(seed),
        axiom_sweep(seed, grid_density),
        continuity_sweep(seed),
        independence_violation(grid_density),
        eeu_invariance(seed),
        magnitude_demo(),
        zscore_demo(seed),
        bradley_terry_checks(seed),
        t_distribution_anchors(),
        holm_worked_family(),
    ];
    let passed = checks.iter().all(|c| c.passed);
    let report = VerifyReport { checks, passed };

    match context.format {
        OutputFormat::Text => {
            for check in &report.checks {
                let status = if check.passed { "PASS" } else { "FAIL" };
                println!("{status} {}: {}", check.name, check.detail);
            }
            let total = report.checks.len();
            let ok = report.checks.iter().filter(|c| c.passed).count();
            println!("verification: {ok}/{total} checks passed");
        }
        OutputFormat::Structured => {
            println!(
                "{}",
                serde_json::to_string_pretty(&report).map_err(|e| CliError::data(e.to_string()))?
            );
        }
    }
    Ok(passed)
}

fn check(name: &str, body: impl FnOnce() -> Result<String, String>) -> Check {
    match body() {
        Ok(detail) => Check {
            name: name.to_string(),
            passed: true,
            detail,
        },
        Err(detail) => Check {
            name: name.to_string(),
            passed: false,
            detail,
        },
    }
}

fn fail(message: impl Into<String>) -> String {
    message.into()
}

/// The bundled instance: expected utilities order one way, mean Likert
/// tiers the other. Under half-up tiering the instance stops reversing,
/// which is reported as the alternative-mode behavior.
fn reversal_demo(rounding: RoundingMode) -> Check {
    check("reversal-instance", || {
        let (x, y, utility) = bundled_reversal_instance();
        let summary =
            analyze_pair_with_mode(&x, &y, &utility, 5, rounding).map_err(|e| e.to_string())?;
        if (summary.eu_x - 1.9).abs() > 1e-12 || (summary.eu_y - 1.7).abs() > 1e-12 {
            return Err(fail(format!(
                "expected utilities off: {} vs {}",
                summary.eu_x, summary.eu_y
            )));
        }
        match rounding {
            RoundingMode::Ceiling => {
                if summary.mean_tier_x != 2.0 || summary.mean_tier_y != 2.5 {
                    return Err(fail(format!(
                        "mean tiers off: {} vs {}",
                        summary.mean_tier_x, summary.mean_tier_y
                    )));
                }
                if !summary.reversal {
                    return Err(fail("instance no longer reverses"));
                }
                Ok(format!(
                    "EU {:.1} > {:.1} but mean tiers {:.1} < {:.1} (ceiling tiering)",
                    summary.eu_x, summary.eu_y, summary.mean_tier_x, summary.mean_tier_y
                ))
            }
            RoundingMode::HalfUp => {
                if summary.reversal {
                    return Err(fail(
                        "half-up tiering unexpectedly still reverses the bundled instance",
                    ));
                }
                Ok(format!(
                    "alternative tiering (half-up): mean tiers {:.1} vs {:.1}, no reversal",
                    summary.mean_tier_x, summary.mean_tier_y
                ))
            }
        }
    })
}

fn reversal_search(seed: u64) -> Check {
    check("reversal-search", || {
        for k in [2u32, 5, 7] {
            let (x, y, utility) =
                construct_reversal(k, derive_seed(seed, &[k as u64])).map_err(|e| e.to_string())?;
            let summary = analyze_pair(&x, &y, &utility, k).map_err(|e| e.to_string())?;
            if !summary.reversal {
                return Err(fail(format!("search returned a non-reversal for k={k}")));
            }
        }
        Ok("verified reversal instances found for k = 2, 5, 7".into())
    })
}

fn random_lottery(rng: &mut ChaCha8Rng, ids: &[String]) -> Lottery {
    let count = rng.random_range(1..=ids.len());
    let mut weights: Vec<f64> = (0..count).map(|_| rng.random::<f64>() + 0.01).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Lottery::new(
        ids[..count]
            .iter()
            .map(|id| id.as_str().into())
            .zip(weights)
            .collect(),
    )
    .expect("normalized support")
}

/// Utilities on a 0.1 grid in (0, 5].
fn random_scaled_utility(rng: &mut ChaCha8Rng, ids: &[String]) -> UtilityFunction {
    UtilityFunction::from_pairs(
        ids.iter()
            .map(|id| (id.clone(), rng.random_range(1..=50) as f64 * 0.1)),
    )
    .expect("grid utilities")
}

fn pool() -> Vec<String> {
    (0..6).map(|i| format!("o{i}")).collect()
}

fn residual_identity_sweep(seed: u64) -> Check {
    check("residual-identity", || {
        let ids = pool();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[10]));
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let lottery = random_lottery(&mut rng, &ids);
            let utility = random_scaled_utility(&mut rng, &ids);
            let mut tier_mean = 0.0;
            let mut value_mean = 0.0;
            let mut residual_mean = 0.0;
            for (id, p) in lottery.support() {
                let u = utility.value(id).map_err(|e| e.to_string())?;
                tier_mean += p * tier(u, 5).map_err(|e| e.to_string())? as f64;
                value_mean += p * u;
                residual_mean += p * residual(u).map_err(|e| e.to_string())?;
            }
            worst = worst.max((tier_mean - value_mean - residual_mean).abs());
        }
        if worst > 1e-9 {
            return Err(fail(format!("identity residual {worst} exceeds 1e-9")));
        }
        Ok(format!(
            "E[tier] = E[u] + E[r] within {worst:.2e} over 10,000 random lotteries"
        ))
    })
}

fn bias_sign_sweep(seed: u64) -> Check {
    check("bias-direction", || {
        let ids = pool();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[11]));
        for round in 0..10_000 {
            let x = random_lottery(&mut rng, &ids);
            let y = random_lottery(&mut rng, &ids);
            let utility = random_scaled_utility(&mut rng, &ids);
            let summary = analyze_pair(&x, &y, &utility, 5).map_err(|e| e.to_string())?;
            let residual_gap = summary.expected_residual_x - summary.expected_residual_y;
            let distortion =
                (summary.mean_tier_x - summary.mean_tier_y) - (summary.eu_x - summary.eu_y);
            let agree = (residual_gap.abs() <= 1e-9 && distortion.abs() <= 1e-9)
                || (residual_gap > 0.0) == (distortion > 0.0);
            if !agree {
                return Err(fail(format!(
                    "round {round}: residual gap {residual_gap} vs rating distortion {distortion}"
                )));
            }
        }
        Ok("rating bias always points along the expected residual gap (10,000 pairs)".into())
    })
}

fn random_eu_agent(rng: &mut ChaCha8Rng, ids: &[String]) -> Agent {
    let utility =
        UtilityFunction::from_pairs(ids.iter().map(|id| (id.clone(), rng.random::<f64>() * 5.0)))
            .expect("finite utilities");
    Agent::expected_utility_maximizer("probe", utility).expect("agent")
}

fn axiom_sweep(seed: u64, grid_density: usize) -> Check {
    check("axiom-suite", || {
        let ids = pool();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[12]));
        let grid = independence_grid(grid_density);
        for round in 0..1000 {
            let agent = random_eu_agent(&mut rng, &ids);
            let x = random_lottery(&mut rng, &ids);
            let y = random_lottery(&mut rng, &ids);
            let z = random_lottery(&mut rng, &ids);
            if !check_completeness(&agent, &x, &y)
                .map_err(|e| e.to_string())?
                .holds
            {
                return Err(fail(format!("round {round}: completeness violated")));
            }
            if !check_transitivity(&agent, &x, &y, &z)
                .map_err(|e| e.to_string())?
                .holds
            {
                return Err(fail(format!("round {round}: transitivity violated")));
            }
            if !check_independence(&agent, &x, &y, &z, &grid)
                .map_err(|e| e.to_string())?
                .holds
            {
                return Err(fail(format!("round {round}: independence violated")));
            }
        }
        Ok(format!(
            "no violations over 1000 random triples (grid density {grid_density})"
        ))
    })
}

fn continuity_sweep(seed: u64) -> Check {
    check("continuity-solver", || {
        let ids = pool();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[13]));
        let mut worst: f64 = 0.0;
        let mut solved = 0;
        while solved < 1000 {
            let agent = random_eu_agent(&mut rng, &ids);
            let mut triple = [
                random_lottery(&mut rng, &ids),
                random_lottery(&mut rng, &ids),
                random_lottery(&mut rng, &ids),
            ];
            triple.sort_by(|a, b| {
                agent
                    .expected_utility_of(b)
                    .unwrap()
                    .partial_cmp(&agent.expected_utility_of(a).unwrap())
                    .unwrap()
            });
            let [x, y, z] = triple;
            let span =
                agent.expected_utility_of(&x).unwrap() - agent.expected_utility_of(&z).unwrap();
            if span <= 1e-6 {
                continue;
            }
            let p = solve_continuity(&agent, &x, &y, &z).map_err(|e| e.to_string())?;
            let mixed = mix(&x, &z, p).map_err(|e| e.to_string())?;
            let residual = (agent.expected_utility_of(&mixed).unwrap()
                - agent.expected_utility_of(&y).unwrap())
            .abs();
            worst = worst.max(residual);
            solved += 1;
        }
        if worst > 1e-9 {
            return Err(fail(format!("continuity residual {worst} exceeds 1e-9")));
        }
        Ok(format!(
            "mixture solutions verify to indifference within {worst:.2e} (1000 triples)"
        ))
    })
}

fn independence_violation(grid_density: usize) -> Check {
    check("independence-violation", || {
        let (agent, x, y, z) = independence_violation_scenario();
        let base = agent.prefer(&x, &y).map_err(|e| e.to_string())?;
        if !base.is_strict() {
            return Err(fail("threshold agent lost its strict base preference"));
        }
        let grid = independence_grid(grid_density);
        let report = check_independence(&agent, &x, &y, &z, &grid).map_err(|e| e.to_string())?;
        if report.holds {
            return Err(fail(format!(
                "no violation detected at grid density {grid_density}"
            )));
        }
        let witness = report.witness.ok_or("violation carried no witness")?;
        let p = witness.mix_weight.ok_or("witness carried no mix weight")?;
        let recheck = check_independence(&agent, &x, &y, &z, &[p]).map_err(|e| e.to_string())?;
        if recheck.holds {
            return Err(fail(format!(
                "witness p={p} did not reproduce the violation"
            )));
        }
        Ok(format!(
            "threshold agent violates independence (witness p = {p}); witness re-checks"
        ))
    })
}

fn eeu_invariance(seed: u64) -> Check {
    check("eeu-extremum-invariance", || {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[14]));
        let ids: Vec<String> = ["best", "worst", "s0", "s1", "s2", "s3"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let spec = ExtremumSpec::new("best", "worst", 1.0, 0.0).map_err(|e| e.to_string())?;
        let agents: Vec<Agent> = (0..5)
            .map(|i| {
                let utility = UtilityFunction::from_pairs(ids.iter().map(|id| {
                    let v = match id.as_str() {
                        "best" => 9.0 + rng.random::<f64>(),
                        "worst" => -1.0 - rng.random::<f64>(),
                        _ => rng.random::<f64>() * 8.0,
                    };
                    (id.clone(), v)
                }))
                .unwrap();
                Agent::expected_utility_maximizer(format!("agent{i}"), utility).unwrap()
            })
            .collect();
        let inner_ids = &ids[2..];
        let systems: Vec<Lottery> = (0..4)
            .map(|_| {
                let weights: Vec<f64> = inner_ids
                    .iter()
                    .map(|_| rng.random::<f64>() + 0.05)
                    .collect();
                let total: f64 = weights.iter().sum();
                Lottery::new(
                    inner_ids
                        .iter()
                        .zip(weights)
                        .map(|(id, w)| (id.as_str().into(), w / total))
                        .collect(),
                )
                .unwrap()
            })
            .collect();
        let normalize = |agents: &[Agent]| -> Result<AgentPopulation, String> {
            AgentPopulation::uniform(
                agents
                    .iter()
                    .map(|a| extremum_normalize(a.utility(), &spec).map(|u| a.with_utility(u)))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| e.to_string())?,
            )
            .map_err(|e| e.to_string())
        };
        let baseline = eeu_ranking(&normalize(&agents)?, &systems).map_err(|e| e.to_string())?;
        for round in 0..100 {
            let transformed: Vec<Agent> = agents
                .iter()
                .map(|a| {
                    let scale = rng.random::<f64>() * 9.9 + 0.1;
                    let shift = rng.random::<f64>() * 20.0 - 10.0;
                    a.with_utility(a.utility().affine(scale, shift).unwrap())
                })
                .collect();
            let ranking =
                eeu_ranking(&normalize(&transformed)?, &systems).map_err(|e| e.to_string())?;
            if ranking != baseline {
                return Err(fail(format!(
                    "round {round}: ranking {ranking:?} differs from {baseline:?}"
                )));
            }
        }
        Ok("system ranking invariant under 100 per-agent affine reshapings".into())
    })
}

fn magnitude_demo() -> Check {
    check("magnitude-bias-demo", || {
        let scenario = magnitude_bias_scenario();
        let even = [0.5, 0.5];
        let raw_even = scenario
            .raw_eeu_gap(even, even)
            .map_err(|e| e.to_string())?;
        let raw_skew = scenario
            .raw_eeu_gap([0.9, 0.1], [0.1, 0.9])
            .map_err(|e| e.to_string())?;
        if !(raw_even > 0.0 && raw_skew < 0.0) {
            return Err(fail(format!(
                "raw EEU gaps did not flip: {raw_even} and {raw_skew}"
            )));
        }
        let weightings = [[1.0, 0.0], [0.9, 0.1], [0.5, 0.5], [0.1, 0.9], [0.0, 1.0]];
        for wx in weightings {
            for wy in weightings {
                let gap = scenario
                    .normalized_eeu_gap(wx, wy)
                    .map_err(|e| e.to_string())?;
                if gap <= 0.0 {
                    return Err(fail(format!("normalized order flipped at {wx:?}/{wy:?}")));
                }
            }
        }
        Ok("raw scores flip with rater-pool weights; extremum-normalized never do".into())
    })
}

fn zscore_demo(seed: u64) -> Check {
    check("zscore-reversal-demo", || {
        let (x, y, utility) = bundled_reversal_instance();
        let agent =
            Agent::expected_utility_maximizer("rater", utility).map_err(|e| e.to_string())?;
        let population = AgentPopulation::uniform(vec![agent]).map_err(|e| e.to_string())?;
        let scale = RatingScale::likert(5).map_err(|e| e.to_string())?;
        let tables = oaa_run(&population, &[x, y], &scale, 2000, derive_seed(seed, &[15]))
            .map_err(|e| e.to_string())?;
        let rater = AgentId::from("rater");
        let ratings_x = tables[0].get(&rater).unwrap().clone();
        let ratings_y = tables[1].get(&rater).unwrap().clone();
        let pooled: Vec<f64> = ratings_x.iter().chain(&ratings_y).copied().collect();
        let mut per_agent = std::collections::BTreeMap::new();
        per_agent.insert(rater.clone(), pooled);
        let normalized = zscore_per_annotator(&per_agent).map_err(|e| e.to_string())?;
        let z = normalized.get(&rater).unwrap();
        let (zx, zy) = z.split_at(ratings_x.len());
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        if mean(zx) >= mean(zy) {
            return Err(fail("z-scoring unexpectedly repaired the rating order"));
        }
        Ok("per-annotator z-scoring keeps the reversed rating order".into())
    })
}

fn bradley_terry_checks(seed: u64) -> Check {
    check("bradley-terry", || {
        let mut comparisons = PairwiseComparisons::new();
        comparisons.add(
            "x",
            "y",
            ComparisonCounts {
                wins_x: 7,
                wins_y: 3,
                ties: 0,
            },
        );
        let fit = bradley_terry_fit(&comparisons).map_err(|e| e.to_string())?;
        let sx = fit.strength_of("x").unwrap();
        let sy = fit.strength_of("y").unwrap();
        if (sx - 0.7).abs() > 1e-8 || (sy - 0.3).abs() > 1e-8 {
            return Err(fail(format!("7-3 strengths off: {sx}, {sy}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[16]));
        for instance in 0..20 {
            let n = rng.random_range(2..=5usize);
            let mut comparisons = PairwiseComparisons::new();
            for i in 1..n {
                comparisons.add(
                    format!("s{}", i - 1),
                    format!("s{i}"),
                    ComparisonCounts {
                        wins_x: rng.random_range(1..=20),
                        wins_y: rng.random_range(1..=20),
                        ties: 0,
                    },
                );
            }
            let fit = bradley_terry_fit(&comparisons).map_err(|e| e.to_string())?;
            for pair in fit.log_likelihood.windows(2) {
                if pair[1] < pair[0] - 1e-12 {
                    return Err(fail(format!(
                        "instance {instance}: log-likelihood decreased"
                    )));
                }
            }
        }
        Ok("7-3 closed form matches; log-likelihood monotone on random instances".into())
    })
}

fn t_distribution_anchors() -> Check {
    check("t-distribution", || {
        let cauchy = t_cdf(1.0, 1).map_err(|e| e.to_string())?;
        if (cauchy - 0.75).abs() > 1e-10 {
            return Err(fail(format!("t_cdf(1, 1) = {cauchy}, expected 0.75")));
        }
        let table = t_cdf(2.353, 3).map_err(|e| e.to_string())?;
        if (table - 0.95).abs() > 5e-4 {
            return Err(fail(format!("t_cdf(2.353, 3) = {table}, expected 0.95")));
        }
        let test = one_sample_t(&[0.6, 0.7, 0.8, 0.5], 0.5).map_err(|e| e.to_string())?;
        if (test.statistic - 2.324).abs() > 1e-3 || (test.p_value - 0.103).abs() > 1e-3 {
            return Err(fail(format!(
                "worked example off: t = {}, p = {}",
                test.statistic, test.p_value
            )));
        }
        Ok(format!(
            "anchors hold: Cauchy quartile, published quantile, worked example (t = {:.3}, p = {:.3})",
            test.statistic, test.p_value
        ))
    })
}

fn holm_worked_family() -> Check {
    check("holm-correction", || {
        let family =
            holm_bonferroni(&[0.01, 0.04, 0.03, 0.005], 0.05).map_err(|e| e.to_string())?;
        if family.reject != vec![true, false, false, true] {
            return Err(fail(format!("rejections {:?}", family.reject)));
        }
        Ok("step-down rejects exactly the two smallest p-values of the worked family".into())
    })
}
