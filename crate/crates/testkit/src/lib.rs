//! Independent numerical oracles for the preflab test suites.
//!
//! Everything here is implemented from scratch: the oracles must not
//! share a code path with the implementations they check. The noncentral
//! t distribution goes through chi-square quadrature rather than incomplete
//! beta series, the normal CDF through its own erfc, and the step-down
//! correction through the literal textbook procedure.

/// Complementary error function, accurate to ~1e-13 (series for small
/// arguments, Lentz continued fraction for the tail).
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.0 {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

fn erf_series(x: f64) -> f64 {
    // erf(x) = 2/sqrt(pi) * sum_{n>=0} (-1)^n x^(2n+1) / (n! (2n+1))
    let mut term = x;
    let mut sum = x;
    let x2 = x * x;
    for n in 1..200 {
        term *= -x2 / n as f64;
        let contribution = term / (2 * n + 1) as f64;
        sum += contribution;
        if contribution.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum * 2.0 / std::f64::consts::PI.sqrt()
}

fn erfc_continued_fraction(x: f64) -> f64 {
    // sqrt(pi) exp(x^2) erfc(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    // evaluated by modified Lentz; numerators are n/2, denominators all x.
    const TINY: f64 = 1e-300;
    let mut f = TINY;
    let mut c = f;
    let mut d = 0.0;
    for n in 0..400 {
        let a = if n == 0 { 1.0 } else { n as f64 / 2.0 };
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / std::f64::consts::PI.sqrt() * f
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Log-gamma by Stirling's series with argument shifting.
pub fn ln_gamma(mut x: f64) -> f64 {
    assert!(x > 0.0);
    let mut shift = 0.0;
    while x < 12.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv / 12.0 - inv * inv2 / 360.0 + inv * inv2 * inv2 / 1260.0
        - inv * inv2 * inv2 * inv2 / 1680.0;
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// Chi-square density with `df` degrees of freedom.
fn chi_square_pdf(w: f64, df: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let half = df / 2.0;
    ((half - 1.0) * w.ln() - w / 2.0 - half * 2f64.ln() - ln_gamma(half)).exp()
}

/// CDF of the noncentral t distribution with `df` degrees of freedom and
/// noncentrality `delta`, by quadrature over the chi-square mixing variable:
/// `P(T' <= t) = E_W[ Phi(t sqrt(W/df) - delta) ]`, `W ~ chi2(df)`.
pub fn noncentral_t_cdf(t: f64, df: u64, delta: f64) -> f64 {
    let df = df as f64;
    let sd = (2.0 * df).sqrt();
    let lo = (df - 14.0 * sd).max(0.0);
    let hi = (df + 16.0 * sd).max(40.0);
    // Substituting w = s^2 removes the density's singularity at zero for
    // small degrees of freedom.
    let integrand = |s: f64| {
        let w = s * s;
        2.0 * s * chi_square_pdf(w, df) * normal_cdf(t * (w / df).sqrt() - delta)
    };
    simpson(integrand, lo.sqrt(), hi.sqrt(), 16_384)
}

/// Two-sided rejection power of a t-test at level `alpha`: the probability
/// that |T'| exceeds the central-t critical value, under noncentrality
/// `delta`.
pub fn noncentral_t_power(alpha: f64, df: u64, delta: f64) -> f64 {
    let crit = central_t_quantile(1.0 - alpha / 2.0, df);
    1.0 - noncentral_t_cdf(crit, df, delta) + noncentral_t_cdf(-crit, df, delta)
}

/// Central t CDF (noncentral with delta = 0).
pub fn central_t_cdf(t: f64, df: u64) -> f64 {
    noncentral_t_cdf(t, df, 0.0)
}

/// Central t quantile by bisection on the quadrature CDF.
pub fn central_t_quantile(p: f64, df: u64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    let mut lo = -1000.0;
    let mut hi = 1000.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if central_t_cdf(mid, df) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Composite Simpson's rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2) && n >= 2);
    let h = (hi - lo) / n as f64;
    let mut sum = f(lo) + f(hi);
    for i in 1..n {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += weight * f(lo + i as f64 * h);
    }
    sum * h / 3.0
}

/// Exact pairwise win/tie/loss probabilities for two finite lotteries given
/// per-outcome utilities, by full enumeration. Entries are
/// `(probability, utility)`.
pub fn enumerate_pair_outcome(x: &[(f64, f64)], y: &[(f64, f64)]) -> (f64, f64, f64) {
    let mut win = 0.0;
    let mut tie = 0.0;
    let mut loss = 0.0;
    for (px, ux) in x {
        for (py, uy) in y {
            let mass = px * py;
            if ux > uy {
                win += mass;
            } else if ux < uy {
                loss += mass;
            } else {
                tie += mass;
            }
        }
    }
    (win, tie, loss)
}

/// Literal textbook Holm step-down rejection decisions at level `alpha`.
pub fn reference_holm_rejections(raw: &[f64], alpha: f64) -> Vec<bool> {
    let m = raw.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| raw[i].partial_cmp(&raw[j]).unwrap());
    let mut reject = vec![false; m];
    for (k, &idx) in order.iter().enumerate() {
        if raw[idx] < alpha / (m - k) as f64 {
            reject[idx] = true;
        } else {
            break;
        }
    }
    reject
}

/// Plain Bonferroni rejections at level `alpha`.
pub fn bonferroni_rejections(raw: &[f64], alpha: f64) -> Vec<bool> {
    let m = raw.len() as f64;
    raw.iter().map(|&p| p < alpha / m).collect()
}

/// Sample mean.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_sd(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() as f64 - 1.0)).sqrt()
}
