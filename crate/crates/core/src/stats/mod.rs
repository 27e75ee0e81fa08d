//! Student's t machinery, one-sample and paired t-tests, and the
//! Holm-Bonferroni step-down correction.
//!
//! Tests are two-sided throughout: the pipelines compare stated preference
//! probabilities against chance and rating deltas against zero, and effects
//! in either direction are of interest.

mod special;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};
use special::regularized_incomplete_beta;

/// Degrees of freedom above this are clamped; the t distribution is
/// indistinguishable from normal long before.
const MAX_DF: u64 = 1_000_000_000;

/// Star levels used in report annotations, most stringent first.
pub const STAR_LEVELS: [(f64, &str); 3] = [(0.01, "***"), (0.05, "**"), (0.10, "*")];

/// Cumulative distribution function of Student's t with `df` degrees of
/// freedom, via the regularized incomplete beta function. Absolute accuracy
/// is better than 1e-8 over the tested range.
pub fn t_cdf(t: f64, df: u64) -> Result<f64> {
    if df == 0 {
        return Err(Error::Precondition(
            "t distribution requires df >= 1".into(),
        ));
    }
    let df = df.min(MAX_DF) as f64;
    if t == 0.0 {
        return Ok(0.5);
    }
    let x = df / (df + t * t);
    let tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x);
    Ok(if t > 0.0 { 1.0 - tail } else { tail })
}

/// A one-sample (or reduced paired) t-test result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub degrees_of_freedom: u64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub mean: f64,
    pub null_value: f64,
    pub n: usize,
}

/// Two-sided one-sample t-test of `values` against `null_value`.
pub fn one_sample_t(values: &[f64], null_value: f64) -> Result<TestResult> {
    let n = values.len();
    if n < 2 {
        return Err(Error::DegenerateSample(format!(
            "need at least 2 observations, got {n}"
        )));
    }
    if values.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::DegenerateSample("sample variance is zero".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    let variance = ss / (n as f64 - 1.0);
    if variance <= 0.0 {
        return Err(Error::DegenerateSample("sample variance is zero".into()));
    }
    let se = (variance / n as f64).sqrt();
    let statistic = (mean - null_value) / se;
    let df = (n - 1) as u64;
    let p_value = 2.0 * (1.0 - t_cdf(statistic.abs(), df)?);
    Ok(TestResult {
        statistic,
        degrees_of_freedom: df,
        p_value: p_value.clamp(0.0, 1.0),
        mean,
        null_value,
        n,
    })
}

/// Paired t-test: a one-sample test of the elementwise differences against
/// zero.
pub fn paired_t(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::Validation(format!(
            "paired samples differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    one_sample_t(&diffs, 0.0)
}

/// A family of p-values after Holm-Bonferroni correction.
///
/// `adjusted` dominates `raw` elementwise and preserves its order; `reject`
/// holds the step-down decisions at `alpha`, mapped back to input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectedFamily {
    pub raw: Vec<f64>,
    pub adjusted: Vec<f64>,
    pub reject: Vec<bool>,
    pub alpha: f64,
}

/// Holm-Bonferroni step-down correction.
///
/// Sorted ascending (ties kept in input order), `p_(k)` is compared against
/// `alpha / (m - k + 1)` until the first failure; adjusted p-values are the
/// running maximum of `(m - k + 1) · p_(k)` capped at one.
pub fn holm_bonferroni(raw: &[f64], alpha: f64) -> Result<CorrectedFamily> {
    if raw.is_empty() {
        return Err(Error::Validation("empty p-value family".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::OutOfRange {
            what: "alpha",
            value: alpha,
            lo: 0.0,
            hi: 1.0,
        });
    }
    for &p in raw {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::OutOfRange {
                what: "p-value",
                value: p,
                lo: 0.0,
                hi: 1.0,
            });
        }
    }
    let m = raw.len();
    let mut order: Vec<usize> = (0..m).collect();
    // Stable sort keeps tied p-values in input order.
    order.sort_by(|&i, &j| raw[i].partial_cmp(&raw[j]).expect("finite p-values"));

    let mut adjusted = vec![0.0; m];
    let mut reject = vec![false; m];
    let mut running_max: f64 = 0.0;
    let mut still_rejecting = true;
    for (k, &idx) in order.iter().enumerate() {
        let factor = (m - k) as f64;
        running_max = running_max.max((factor * raw[idx]).min(1.0));
        adjusted[idx] = running_max;
        if still_rejecting && raw[idx] < alpha / factor {
            reject[idx] = true;
        } else {
            still_rejecting = false;
        }
    }
    Ok(CorrectedFamily {
        raw: raw.to_vec(),
        adjusted,
        reject,
        alpha,
    })
}

/// Significance stars for each member of a corrected family, judged on
/// adjusted p-values: `***` below 0.01, `**` below 0.05, `*` below 0.10.
pub fn star_annotation(family: &CorrectedFamily) -> Vec<String> {
    family
        .adjusted
        .iter()
        .map(|&p| stars_for_adjusted(p).to_string())
        .collect()
}

/// Star string for one adjusted p-value.
pub fn stars_for_adjusted(adjusted_p: f64) -> &'static str {
    for (level, stars) in STAR_LEVELS {
        if adjusted_p < level {
            return stars;
        }
    }
    ""
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn t_cdf_symmetry_at_zero() {
        for df in [1, 2, 5, 30, 1000] {
            assert_eq!(t_cdf(0.0, df).unwrap(), 0.5);
        }
    }

    #[test]
    fn t_cdf_cauchy_case() {
        // df = 1 is Cauchy: F(1) = 1/2 + atan(1)/π = 0.75.
        assert_abs_diff_eq!(t_cdf(1.0, 1).unwrap(), 0.75, epsilon = 1e-10);
        assert_abs_diff_eq!(t_cdf(-1.0, 1).unwrap(), 0.25, epsilon = 1e-10);
    }

    #[test]
    fn t_cdf_table_quantiles() {
        // Published t-table quantiles.
        assert_abs_diff_eq!(t_cdf(2.353, 3).unwrap(), 0.95, epsilon = 5e-4);
        assert_abs_diff_eq!(t_cdf(1.812, 10).unwrap(), 0.95, epsilon = 5e-4);
        assert_abs_diff_eq!(t_cdf(2.776, 4).unwrap(), 0.975, epsilon = 5e-4);
        assert_abs_diff_eq!(t_cdf(2.576, 1_000_000).unwrap(), 0.995, epsilon = 5e-4);
    }

    #[test]
    fn t_cdf_rejects_zero_df() {
        assert!(t_cdf(1.0, 0).is_err());
    }

    #[test]
    fn t_cdf_against_published_table() {
        // (df, quantile, cumulative probability) rows from the standard
        // t-table; quantiles are quoted to 3-4 significant digits, so the
        // check runs at 5e-4 absolute on the probability.
        let table = [
            (1u64, 1.000, 0.75),
            (1, 3.078, 0.90),
            (1, 6.314, 0.95),
            (1, 12.71, 0.975),
            (2, 0.816, 0.75),
            (2, 1.886, 0.90),
            (2, 2.920, 0.95),
            (3, 1.638, 0.90),
            (3, 2.353, 0.95),
            (3, 3.182, 0.975),
            (4, 2.132, 0.95),
            (5, 2.015, 0.95),
            (5, 3.365, 0.99),
            (10, 1.372, 0.90),
            (10, 1.812, 0.95),
            (10, 2.228, 0.975),
            (20, 1.725, 0.95),
            (20, 2.528, 0.99),
            (30, 1.697, 0.95),
            (30, 2.750, 0.995),
            (60, 2.000, 0.975),
            (120, 1.980, 0.975),
            (120, 2.617, 0.995),
        ];
        for (df, quantile, probability) in table {
            let got = t_cdf(quantile, df).unwrap();
            assert_abs_diff_eq!(got, probability, epsilon = 5e-4);
        }
    }

    #[test]
    fn t_cdf_tail_identity() {
        for df in [1u64, 3, 7, 50] {
            for t in [0.3, 1.0, 2.5, 10.0] {
                let total = t_cdf(t, df).unwrap() + t_cdf(-t, df).unwrap();
                assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn one_sample_worked_example() {
        let result = one_sample_t(&[0.6, 0.7, 0.8, 0.5], 0.5).unwrap();
        assert_abs_diff_eq!(result.statistic, 2.324, epsilon = 1e-3);
        assert_eq!(result.degrees_of_freedom, 3);
        assert_abs_diff_eq!(result.p_value, 0.103, epsilon = 1e-3);
        assert_abs_diff_eq!(result.mean, 0.65, epsilon = 1e-12);
    }

    #[test]
    fn one_sample_symmetric_values() {
        let result = one_sample_t(&[0.4, 0.6], 0.5).unwrap();
        assert_eq!(result.statistic, 0.0);
        assert_eq!(result.p_value, 1.0);
    }

    #[test]
    fn one_sample_degenerate_cases() {
        assert!(one_sample_t(&[0.5], 0.5).is_err());
        assert!(one_sample_t(&[0.7, 0.7, 0.7], 0.5).is_err());
    }

    #[test]
    fn paired_reduces_to_differences() {
        let x = [1.1, 1.2, 1.3, 1.0];
        let y = [1.0, 1.0, 1.0, 1.0];
        let paired = paired_t(&x, &y).unwrap();
        let direct = one_sample_t(&[0.1, 0.2, 0.3, 0.0], 0.0).unwrap();
        assert_abs_diff_eq!(paired.statistic, direct.statistic, epsilon = 1e-12);
        assert_abs_diff_eq!(paired.p_value, direct.p_value, epsilon = 1e-12);
    }

    #[test]
    fn paired_degenerate_cases() {
        let x = [1.0, 2.0, 3.0];
        assert!(paired_t(&x, &x).is_err());
        let shifted = [1.5, 2.5, 3.5];
        assert!(paired_t(&shifted, &x).is_err());
        assert!(paired_t(&x, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn t_statistic_invariances() {
        let values = [0.52, 0.61, 0.58, 0.47, 0.55];
        let base = one_sample_t(&values, 0.5).unwrap();
        // Shift both values and null.
        let shifted: Vec<f64> = values.iter().map(|v| v + 3.0).collect();
        let shifted_result = one_sample_t(&shifted, 3.5).unwrap();
        assert_abs_diff_eq!(base.statistic, shifted_result.statistic, epsilon = 1e-9);
        assert_abs_diff_eq!(base.p_value, shifted_result.p_value, epsilon = 1e-9);
        // Scale deviations from the null.
        let scaled: Vec<f64> = values.iter().map(|v| 0.5 + (v - 0.5) * 4.0).collect();
        let scaled_result = one_sample_t(&scaled, 0.5).unwrap();
        assert_abs_diff_eq!(base.statistic, scaled_result.statistic, epsilon = 1e-9);
    }

    #[test]
    fn holm_worked_family() {
        let family = holm_bonferroni(&[0.01, 0.04, 0.03, 0.005], 0.05).unwrap();
        assert_eq!(family.reject, vec![true, false, false, true]);
        let expected_adjusted = [0.03, 0.06, 0.06, 0.02];
        for (got, want) in family.adjusted.iter().zip(expected_adjusted) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn holm_single_p_is_plain_test() {
        let family = holm_bonferroni(&[0.04], 0.05).unwrap();
        assert_eq!(family.reject, vec![true]);
        assert_eq!(family.adjusted, vec![0.04]);
        let family = holm_bonferroni(&[0.06], 0.05).unwrap();
        assert_eq!(family.reject, vec![false]);
    }

    #[test]
    fn holm_all_ones() {
        let family = holm_bonferroni(&[1.0, 1.0, 1.0], 0.05).unwrap();
        assert!(family.reject.iter().all(|r| !r));
        assert!(family.adjusted.iter().all(|&p| p == 1.0));
    }

    #[test]
    fn holm_adjusted_dominates_raw() {
        let raw = [0.001, 0.2, 0.04, 0.8, 0.04];
        let family = holm_bonferroni(&raw, 0.05).unwrap();
        for (a, r) in family.adjusted.iter().zip(raw) {
            assert!(a >= &r);
        }
    }

    #[test]
    fn star_thresholds() {
        assert_eq!(stars_for_adjusted(0.005), "***");
        assert_eq!(stars_for_adjusted(0.03), "**");
        assert_eq!(stars_for_adjusted(0.07), "*");
        assert_eq!(stars_for_adjusted(0.5), "");
    }

    #[test]
    fn star_annotation_maps_family() {
        let family = holm_bonferroni(&[0.001, 0.5], 0.05).unwrap();
        assert_eq!(
            star_annotation(&family),
            vec!["***".to_string(), String::new()]
        );
    }
}
