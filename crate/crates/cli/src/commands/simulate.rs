//! Synthetic dataset generation in the annotation CSV schemas.
//!
//! Two generators are available. `lottery` mode runs the full in-silico
//! pipeline: a synthesized agent population observes sampled outputs from
//! lottery-backed systems, states preference probabilities, and rates one
//! output per system on the Likert scale. `effect` mode generates stated
//! probabilities directly from per-pair true means under the truncated
//! normal annotator noise model, with optional insincere annotators and
//! metadata-rule violators for exercising the filters.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use preflab::experiments::io::{
    annotator_meta_to_csv, canonical_probability, likert_records_to_csv, spa_records_to_csv,
};
use preflab::experiments::power::truncated_normal;
use preflab::experiments::{synth_population, AnnotatorMeta, LikertRecord};
use preflab::io::load_lottery;
use preflab::lottery::{Lottery, OutcomeUniverse};
use preflab::protocols::{oaa_run, spa_elicit, ElicitationModel, SpaEstimate};
use preflab::scales::RatingScale;
use preflab::seed::derive_seed;

use crate::config::{parse_comparisons, parse_named_paths, parse_ranges, resolve};
use crate::{CliError, Context, GLOBAL_KEYS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimulateMode {
    Lottery,
    Effect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    LaplaceWinrate,
    NormalPosterior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    Spa,
    Likert,
    Both,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Output directory for the generated CSV files.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Generator: full lottery pipeline or direct effect model.
    #[arg(long, value_enum)]
    mode: Option<SimulateMode>,

    /// Which record types to emit.
    #[arg(long, value_enum)]
    protocol: Option<ProtocolArg>,

    /// Outputs observed from each system per annotator.
    #[arg(long)]
    m: Option<u32>,

    /// Number of annotators.
    #[arg(long)]
    annotators: Option<u32>,

    /// Likert points.
    #[arg(long)]
    likert_k: Option<u32>,

    /// Elicitation model for lottery mode.
    #[arg(long, value_enum)]
    model: Option<ModelArg>,

    /// Directed comparisons, e.g. `a:b,b:c`.
    #[arg(long)]
    comparisons: Option<String>,

    /// Lottery mode: systems as `name=path` pairs.
    #[arg(long)]
    systems: Option<String>,

    /// Lottery mode: per-agent utility ranges, e.g. `0:5` or `0:10;90:100`.
    #[arg(long)]
    utility_ranges: Option<String>,

    /// Effect mode: true mean stated probability per comparison.
    #[arg(long)]
    effect_means: Option<String>,

    /// Effect mode: annotator noise standard deviation.
    #[arg(long)]
    effect_sd: Option<f64>,

    /// Effect mode: trailing annotators who ignore the systems and answer
    /// around chance.
    #[arg(long)]
    noise_annotators: Option<u32>,

    /// Effect mode: noise annotators' standard deviation around chance.
    #[arg(long)]
    noise_sd: Option<f64>,

    /// Effect mode: leading annotators whose metadata violates the
    /// exclusion rules.
    #[arg(long)]
    excluded_annotators: Option<u32>,

    /// Effect mode: base Likert rating per system, e.g. `2,3,4,5,5`.
    #[arg(long)]
    base_ratings: Option<String>,
}

const SIMULATE_KEYS: [&str; 14] = [
    "out",
    "mode",
    "protocol",
    "m",
    "annotators",
    "likert_k",
    "model",
    "comparisons",
    "systems",
    "utility_ranges",
    "effect_means",
    "effect_sd",
    "noise_annotators",
    "noise_sd",
];

pub fn run(context: &Context, args: &SimulateArgs) -> Result<(), CliError> {
    let mut known = GLOBAL_KEYS.to_vec();
    known.extend(SIMULATE_KEYS);
    known.extend(["excluded_annotators", "base_ratings"]);
    context.file.ensure_known_keys(&known)?;
    let file = &context.file;

    let out = args
        .out
        .clone()
        .or_else(|| file.get("out").map(PathBuf::from))
        .ok_or_else(|| CliError::usage("simulate requires --out <dir>"))?;
    let mode = match (args.mode, file.get("mode")) {
        (Some(mode), _) => mode,
        (None, Some("lottery")) => SimulateMode::Lottery,
        (None, Some("effect")) => SimulateMode::Effect,
        (None, Some(other)) => {
            return Err(CliError::usage(format!(
                "config key `mode`: `{other}` is not lottery|effect"
            )))
        }
        (None, None) => return Err(CliError::usage("simulate requires --mode lottery|effect")),
    };
    let protocol = match (args.protocol, file.get("protocol")) {
        (Some(p), _) => p,
        (None, Some("spa")) => ProtocolArg::Spa,
        (None, Some("likert")) => ProtocolArg::Likert,
        (None, Some("both")) => ProtocolArg::Both,
        (None, Some(other)) => {
            return Err(CliError::usage(format!(
                "config key `protocol`: `{other}` is not spa|likert|both"
            )))
        }
        (None, None) => ProtocolArg::Both,
    };
    let m = resolve(args.m, file.parse_value("m")?, 5);
    if m < 1 {
        return Err(CliError::usage("m must be >= 1"));
    }
    let n_a = resolve(args.annotators, file.parse_value("annotators")?, 100);
    if n_a < 2 {
        return Err(CliError::usage("annotators must be >= 2"));
    }
    let k = resolve(args.likert_k, file.parse_value("likert_k")?, 5);
    let excluded = resolve(
        args.excluded_annotators,
        file.parse_value("excluded_annotators")?,
        0,
    );
    if excluded > n_a {
        return Err(CliError::usage("excluded_annotators exceeds annotators"));
    }

    fs::create_dir_all(&out)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", out.display())))?;

    let dataset = match mode {
        SimulateMode::Effect => effect_mode(context, args, protocol, m, n_a, k, excluded)?,
        SimulateMode::Lottery => lottery_mode(context, args, protocol, m, n_a, k, excluded)?,
    };

    let write = |name: &str, text: String, rows: usize| -> Result<(), CliError> {
        let path = out.join(name);
        fs::write(&path, text)
            .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {} ({rows} rows)", path.display());
        Ok(())
    };
    if matches!(protocol, ProtocolArg::Spa | ProtocolArg::Both) {
        write(
            "spa.csv",
            spa_records_to_csv(&dataset.spa),
            dataset.spa.len(),
        )?;
    }
    if matches!(protocol, ProtocolArg::Likert | ProtocolArg::Both) {
        write(
            "likert.csv",
            likert_records_to_csv(&dataset.likert),
            dataset.likert.len(),
        )?;
    }
    write(
        "meta.csv",
        annotator_meta_to_csv(&dataset.meta),
        dataset.meta.len(),
    )?;
    Ok(())
}

struct Dataset {
    spa: Vec<SpaEstimate>,
    likert: Vec<LikertRecord>,
    meta: Vec<AnnotatorMeta>,
}

fn annotator_ids(n_a: u32) -> Vec<String> {
    let width = n_a.saturating_sub(1).to_string().len().max(2);
    (0..n_a).map(|i| format!("a{i:0width$}")).collect()
}

/// Metadata with the first `excluded` annotators violating the rules; the
/// very first violator breaks both rules at once.
fn build_meta(ids: &[String], excluded: u32) -> Vec<AnnotatorMeta> {
    ids.iter()
        .enumerate()
        .map(|(i, id)| {
            let violating = (i as u32) < excluded;
            let both = violating && i == 0;
            AnnotatorMeta {
                annotator: id.as_str().into(),
                native_speaker: !(violating && (both || i % 2 == 0)),
                submission_count: if violating && (both || i % 2 == 1) {
                    2
                } else {
                    1
                },
                tags: BTreeMap::new(),
            }
        })
        .collect()
}

fn effect_mode(
    context: &Context,
    args: &SimulateArgs,
    protocol: ProtocolArg,
    m: u32,
    n_a: u32,
    k: u32,
    excluded: u32,
) -> Result<Dataset, CliError> {
    let file = &context.file;
    let comparisons_raw = args
        .comparisons
        .clone()
        .or_else(|| file.get("comparisons").map(str::to_string))
        .ok_or_else(|| CliError::usage("effect mode requires --comparisons"))?;
    let comparisons = parse_comparisons(&comparisons_raw)?;
    let means_raw = args
        .effect_means
        .clone()
        .or_else(|| file.get("effect_means").map(str::to_string))
        .ok_or_else(|| CliError::usage("effect mode requires --effect-means"))?;
    let means = crate::config::parse_float_list(&means_raw, "effect_means")?;
    if means.len() != comparisons.len() {
        return Err(CliError::usage(format!(
            "{} effect means for {} comparisons",
            means.len(),
            comparisons.len()
        )));
    }
    for mean in &means {
        if !(0.0..=1.0).contains(mean) {
            return Err(CliError::usage(format!(
                "effect mean {mean} outside [0, 1]"
            )));
        }
    }
    let sd = resolve(args.effect_sd, file.parse_value("effect_sd")?, 0.15);
    let noise = resolve(
        args.noise_annotators,
        file.parse_value("noise_annotators")?,
        0,
    );
    if noise > n_a {
        return Err(CliError::usage("noise_annotators exceeds annotators"));
    }
    let noise_sd = resolve(args.noise_sd, file.parse_value("noise_sd")?, 0.15);
    if sd.is_nan() || sd <= 0.0 || noise_sd.is_nan() || noise_sd <= 0.0 {
        return Err(CliError::usage("standard deviations must be positive"));
    }

    let systems = system_order(&comparisons);
    let base_ratings: Vec<u32> = match args
        .base_ratings
        .clone()
        .or_else(|| file.get("base_ratings").map(str::to_string))
    {
        Some(raw) => raw
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<u32>()
                    .map_err(|_| CliError::usage(format!("base rating `{v}` is not an integer")))
            })
            .collect::<Result<_, _>>()?,
        None => {
            // Evenly spread defaults across the scale, best last.
            let n = systems.len() as u32;
            (0..n)
                .map(|i| 1 + (i * (k - 1)) / (n.max(2) - 1).max(1))
                .collect()
        }
    };
    if base_ratings.len() != systems.len() {
        return Err(CliError::usage(format!(
            "{} base ratings for {} systems",
            base_ratings.len(),
            systems.len()
        )));
    }
    for rating in &base_ratings {
        if *rating < 1 || *rating > k {
            return Err(CliError::usage(format!(
                "base rating {rating} outside [1, {k}]"
            )));
        }
    }

    let ids = annotator_ids(n_a);
    let is_noise = |i: u32| i >= n_a - noise;

    let mut spa = Vec::new();
    for (pair_idx, ((x, y), mean)) in comparisons.iter().zip(&means).enumerate() {
        for (i, id) in ids.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                context.seed,
                &[0, pair_idx as u64, i as u64],
            ));
            let (target, spread) = if is_noise(i as u32) {
                (0.5, noise_sd)
            } else {
                (*mean, sd)
            };
            let p = truncated_normal(&mut rng, target, spread, 0.0, 1.0);
            spa.push(SpaEstimate {
                annotator: id.as_str().into(),
                system_x: x.clone(),
                system_y: y.clone(),
                p_hat: canonical_probability(p),
                m_seen: m,
            });
        }
    }

    let mut likert = Vec::new();
    if matches!(protocol, ProtocolArg::Likert | ProtocolArg::Both) {
        for (i, id) in ids.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(context.seed, &[1, i as u64]));
            if is_noise(i as u32) {
                for system in &systems {
                    let rating = rng.random_range(1..=k);
                    likert.push(
                        LikertRecord::new(id.as_str(), system.clone(), "i0", rating, k)
                            .map_err(|e| CliError::data(e.to_string()))?,
                    );
                }
            } else {
                // A per-annotator severity shift preserves the quality order
                // up to clamping at the scale ends.
                let shift = rng.random_range(0..3u32) as i64 - 1;
                for (system, base) in systems.iter().zip(&base_ratings) {
                    let rating = (*base as i64 + shift).clamp(1, k as i64) as u32;
                    likert.push(
                        LikertRecord::new(id.as_str(), system.clone(), "i0", rating, k)
                            .map_err(|e| CliError::data(e.to_string()))?,
                    );
                }
            }
        }
    }

    Ok(Dataset {
        spa,
        likert,
        meta: build_meta(&ids, excluded),
    })
}

fn lottery_mode(
    context: &Context,
    args: &SimulateArgs,
    protocol: ProtocolArg,
    m: u32,
    n_a: u32,
    k: u32,
    excluded: u32,
) -> Result<Dataset, CliError> {
    let file = &context.file;
    if args.noise_annotators.is_some() || file.get("noise_annotators").is_some() {
        return Err(CliError::usage(
            "noise_annotators applies to effect mode only",
        ));
    }
    let systems_raw = args
        .systems
        .clone()
        .or_else(|| file.get("systems").map(str::to_string))
        .ok_or_else(|| CliError::usage("lottery mode requires --systems name=path,..."))?;
    let named_paths = parse_named_paths(&systems_raw)?;
    if named_paths.len() < 2 {
        return Err(CliError::usage("lottery mode needs at least 2 systems"));
    }
    let mut systems: Vec<(String, Lottery)> = Vec::with_capacity(named_paths.len());
    for (name, path) in &named_paths {
        let lottery = load_lottery(Path::new(path)).map_err(|e| CliError::data(e.to_string()))?;
        systems.push((name.clone(), lottery));
    }

    let ranges_raw = args
        .utility_ranges
        .clone()
        .or_else(|| file.get("utility_ranges").map(str::to_string))
        .unwrap_or_else(|| format!("0:{k}"));
    let ranges = parse_ranges(&ranges_raw)?;
    if matches!(protocol, ProtocolArg::Likert | ProtocolArg::Both) {
        for (lo, hi) in &ranges {
            if *lo < 0.0 || *hi > k as f64 {
                return Err(CliError::usage(format!(
                    "utility range [{lo}, {hi}] must lie within the likert scale [0, {k}]"
                )));
            }
        }
    }

    let comparisons = match args
        .comparisons
        .clone()
        .or_else(|| file.get("comparisons").map(str::to_string))
    {
        Some(raw) => parse_comparisons(&raw)?,
        None => systems
            .windows(2)
            .map(|pair| (pair[0].0.clone(), pair[1].0.clone()))
            .collect(),
    };
    for (x, y) in &comparisons {
        for name in [x, y] {
            if !systems.iter().any(|(n, _)| n == name) {
                return Err(CliError::usage(format!(
                    "comparison references unknown system `{name}`"
                )));
            }
        }
    }

    let model = match (args.model, file.get("model")) {
        (Some(ModelArg::LaplaceWinrate), _) => ElicitationModel::LaplaceWinrate,
        (Some(ModelArg::NormalPosterior), _) => ElicitationModel::NormalPosterior,
        (None, Some("laplace-winrate")) | (None, None) => ElicitationModel::LaplaceWinrate,
        (None, Some("normal-posterior")) => ElicitationModel::NormalPosterior,
        (None, Some(other)) => {
            return Err(CliError::usage(format!(
                "config key `model`: `{other}` is not laplace-winrate|normal-posterior"
            )))
        }
    };

    // Shared outcome universe across all systems.
    let mut outcome_ids: Vec<String> = Vec::new();
    for (_, lottery) in &systems {
        for id in lottery.outcome_ids() {
            if !outcome_ids.contains(&id.to_string()) {
                outcome_ids.push(id.to_string());
            }
        }
    }
    let universe =
        OutcomeUniverse::from_ids(outcome_ids).map_err(|e| CliError::data(e.to_string()))?;
    let population = synth_population(
        &universe,
        &ranges,
        n_a as usize,
        derive_seed(context.seed, &[2]),
    )
    .map_err(|e| CliError::data(e.to_string()))?;

    let mut spa = Vec::new();
    if matches!(protocol, ProtocolArg::Spa | ProtocolArg::Both) {
        for (pair_idx, (x_name, y_name)) in comparisons.iter().enumerate() {
            let x = &systems.iter().find(|(n, _)| n == x_name).unwrap().1;
            let y = &systems.iter().find(|(n, _)| n == y_name).unwrap().1;
            for (i, agent) in population.agents().iter().enumerate() {
                let mut estimate = spa_elicit(
                    agent,
                    (x_name, x),
                    (y_name, y),
                    m,
                    derive_seed(context.seed, &[0, pair_idx as u64, i as u64]),
                    model,
                )
                .map_err(|e| CliError::data(e.to_string()))?;
                estimate.p_hat = canonical_probability(estimate.p_hat);
                spa.push(estimate);
            }
        }
    }

    let mut likert = Vec::new();
    if matches!(protocol, ProtocolArg::Likert | ProtocolArg::Both) {
        // One rating of one sampled output per system, per annotator.
        let scale = RatingScale::likert(k).map_err(|e| CliError::data(e.to_string()))?;
        let lotteries: Vec<_> = systems.iter().map(|(_, l)| l.clone()).collect();
        let tables = oaa_run(
            &population,
            &lotteries,
            &scale,
            1,
            derive_seed(context.seed, &[1]),
        )
        .map_err(|e| CliError::data(e.to_string()))?;
        for ((name, _), table) in systems.iter().zip(&tables) {
            for (annotator, ratings) in table {
                likert.push(
                    LikertRecord::new(annotator.as_str(), name.clone(), "i0", ratings[0] as u32, k)
                        .map_err(|e| CliError::data(e.to_string()))?,
                );
            }
        }
    }

    let ids: Vec<String> = population
        .agents()
        .iter()
        .map(|a| a.id().to_string())
        .collect();
    Ok(Dataset {
        spa,
        likert,
        meta: build_meta(&ids, excluded),
    })
}

fn system_order(comparisons: &[(String, String)]) -> Vec<String> {
    let mut systems = Vec::new();
    for (x, y) in comparisons {
        if !systems.contains(x) {
            systems.push(x.clone());
        }
        if !systems.contains(y) {
            systems.push(y.clone());
        }
    }
    systems
}
