//! Small statistics helpers shared by diagnostics, experiments and the
//! validation suite.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

pub fn mean(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty(), "mean of an empty slice");
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Linear-interpolation quantile of a sorted slice, `q` in `[0, 1]`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty slice");
    assert!((0.0..=1.0).contains(&q), "quantile level {q} outside [0, 1]");
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

pub fn median(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    quantile_sorted(&sorted, 0.5)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(p)
}

/// Upper critical value of the chi-squared distribution with `df` degrees
/// of freedom at significance `alpha`.
pub fn chi_square_critical(df: usize, alpha: f64) -> f64 {
    ChiSquared::new(df as f64).unwrap().inverse_cdf(1.0 - alpha)
}

/// Result of a chi-squared goodness-of-fit test.
#[derive(Clone, Debug)]
pub struct GofResult {
    pub statistic: f64,
    pub critical: f64,
    pub df: usize,
    pub pass: bool,
}

/// Chi-squared goodness of fit of observed counts against cell
/// probabilities. Cells are fixed in advance; `expected` must sum to one.
pub fn chi_square_gof(observed: &[u64], expected: &[f64], alpha: f64) -> GofResult {
    assert_eq!(observed.len(), expected.len(), "cell count mismatch");
    assert!(observed.len() >= 2, "need at least two cells");
    let total: u64 = observed.iter().sum();
    assert!(total > 0, "no observations");
    let prob_sum: f64 = expected.iter().sum();
    assert!((prob_sum - 1.0).abs() < 1e-9, "probabilities sum to {prob_sum}");
    let statistic: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&obs, &p)| {
            assert!(p > 0.0, "expected probabilities must be positive");
            let exp = p * total as f64;
            (obs as f64 - exp).powi(2) / exp
        })
        .sum();
    let df = observed.len() - 1;
    let critical = chi_square_critical(df, alpha);
    GofResult {
        statistic,
        critical,
        df,
        pass: statistic <= critical,
    }
}
