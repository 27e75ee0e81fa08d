//! Monte Carlo power sweeps over (m, n_A) design grids.

use clap::Args;
use serde::Serialize;

use preflab::experiments::{power_analysis, Effect, ExperimentDesign, PowerEstimate};

use crate::config::{parse_float_list, parse_power_grid, resolve};
use crate::{CliError, Context, OutputFormat, GLOBAL_KEYS};

#[derive(Args)]
pub struct PowerArgs {
    /// Grid of design points, e.g. `m=1,5;na=30,90` (cartesian product).
    #[arg(long)]
    grid: Option<String>,

    /// True mean stated probability under the alternative.
    #[arg(long)]
    effect_mean: Option<f64>,

    /// Annotator noise standard deviation.
    #[arg(long)]
    effect_sd: Option<f64>,

    /// Monte Carlo replications per grid point (at least 100).
    #[arg(long)]
    replications: Option<u32>,

    /// Significance levels to evaluate.
    #[arg(long)]
    alphas: Option<String>,
}

const POWER_KEYS: [&str; 5] = ["grid", "effect_mean", "effect_sd", "replications", "alphas"];

#[derive(Serialize)]
struct PowerOutput<'a> {
    effect: Effect,
    replications: u32,
    estimates: &'a [PowerEstimate],
}

pub fn run(context: &Context, args: &PowerArgs) -> Result<(), CliError> {
    let mut known = GLOBAL_KEYS.to_vec();
    known.extend(POWER_KEYS);
    context.file.ensure_known_keys(&known)?;
    let file = &context.file;

    let grid_raw = args
        .grid
        .clone()
        .or_else(|| file.get("grid").map(str::to_string))
        .unwrap_or_else(|| "m=5;na=100".to_string());
    let grid = parse_power_grid(&grid_raw)?;
    let effect = Effect {
        mean: resolve(args.effect_mean, file.parse_value("effect_mean")?, 0.575),
        sd: resolve(args.effect_sd, file.parse_value("effect_sd")?, 0.15),
    };
    let replications = resolve(args.replications, file.parse_value("replications")?, 1000);
    let alphas = match args
        .alphas
        .clone()
        .or_else(|| file.get("alphas").map(str::to_string))
    {
        Some(raw) => parse_float_list(&raw, "alphas")?,
        None => vec![0.10, 0.05, 0.01],
    };

    let (m0, na0) = grid.first().copied().unwrap_or((5, 100));
    let design = ExperimentDesign::new(m0.max(1), na0.max(2), 5, vec![("x".into(), "y".into())])
        .and_then(|d| d.with_alphas(alphas))
        .map_err(|e| CliError::usage(e.to_string()))?;

    let estimates = power_analysis(&design, &grid, effect, replications, context.seed)
        .map_err(|e| CliError::usage(e.to_string()))?;

    match context.format {
        OutputFormat::Text => {
            println!(
                "{:>6} {:>6} {:>7} {:>8} {:>10} {:>13}",
                "m", "n_a", "alpha", "power", "std_error", "replications"
            );
            for e in &estimates {
                println!(
                    "{:>6} {:>6} {:>7.3} {:>8.4} {:>10.4} {:>13}",
                    e.m, e.n_a, e.alpha, e.power, e.std_error, e.replications
                );
            }
        }
        OutputFormat::Structured => {
            let output = PowerOutput {
                effect,
                replications,
                estimates: &estimates,
            };
            println!(
                "{}",
                serde_json::to_string_pretty(&output).map_err(|e| CliError::data(e.to_string()))?
            );
        }
    }
    Ok(())
}
