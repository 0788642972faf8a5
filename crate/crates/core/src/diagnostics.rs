//! Ground-truth observers. Everything here reads true (noiseless) objective
//! values, which the algorithms themselves never see; the observer boundary
//! is the module boundary.

use serde::Serialize;

use crate::algorithms::{CachedPopulation, Population, Variant};
use crate::stats;

/// Which membership test defines "extremes found".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtremesMode {
    /// Both 0 and `n` occur among the stored noisy first components.
    /// Only meaningful for the cached variant.
    NoisyCached,
    /// Both the all-zeros and all-ones true values are present.
    TrueValues,
}

/// True iff the true objective values of the population cover `0..=n`.
pub fn pareto_covered(pop: &Population) -> bool {
    let n = pop.n();
    if pop.len() < n + 1 {
        return false;
    }
    let mut seen = vec![false; n + 1];
    let mut distinct = 0;
    for f in pop.true_values() {
        if !seen[f as usize] {
            seen[f as usize] = true;
            distinct += 1;
        }
    }
    distinct == n + 1
}

/// Whether both extreme values are present, under the chosen mode.
pub fn extremes_found(pop: &Population, mode: ExtremesMode) -> bool {
    let n = pop.n() as u64;
    match mode {
        ExtremesMode::NoisyCached => {
            let cached = pop
                .as_cached()
                .expect("NoisyCached mode is only valid for cached populations");
            let (mut low, mut high) = (false, false);
            for first in cached.stored_firsts() {
                low |= first == 0;
                high |= first == n;
            }
            low && high
        }
        ExtremesMode::TrueValues => {
            let values = pop.true_values();
            values.contains(&0) && values.contains(&n)
        }
    }
}

/// Distance-to-lowest potential of a cached population.
///
/// Let `j` be the minimum stored first component. The potential is `j + 1`,
/// minus one if the (unique) member holding `j` also has true count `j`.
/// It hits 0 exactly when the value 0 is stored by a correctly evaluated
/// all-zeros genome.
pub fn potential_ell(pop: &CachedPopulation) -> u64 {
    let holder = pop
        .members()
        .iter()
        .min_by_key(|m| m.value().first())
        .expect("population is nonempty");
    let j = holder.value().first();
    j + 1 - u64::from(holder.genome().count_ones() == j)
}

/// When to record trace samples. Stopping times are detected every
/// iteration regardless of the stride.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceMode {
    Off,
    Full,
    Stride(u64),
}

impl TraceMode {
    pub fn due(&self, t: u64) -> bool {
        match *self {
            TraceMode::Off => false,
            TraceMode::Full => true,
            TraceMode::Stride(s) => t.is_multiple_of(s.max(1)),
        }
    }
}

/// One observed state snapshot.
///
/// `l` counts distinct true values, `d = n + min f - max f`, and for cached
/// populations `j` is the minimum stored first component with `ell` the
/// potential of [`potential_ell`]. The cached-only fields are `None` for
/// reevaluating runs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceSample {
    pub t: u64,
    pub l: u64,
    pub d: u64,
    pub ell: Option<u64>,
    pub j: Option<u64>,
    pub covered: bool,
    pub extremes_noisy: Option<bool>,
    pub extremes_true: bool,
}

/// Snapshot of a population at iteration `t`.
pub fn sample(pop: &Population, t: u64) -> TraceSample {
    let n = pop.n() as u64;
    let values = pop.true_values();
    let mut seen = vec![false; n as usize + 1];
    let mut distinct = 0u64;
    let mut min = u64::MAX;
    let mut max = 0u64;
    for &f in &values {
        if !seen[f as usize] {
            seen[f as usize] = true;
            distinct += 1;
        }
        min = min.min(f);
        max = max.max(f);
    }
    let covered = distinct == n + 1;
    let (ell, j, extremes_noisy) = match pop {
        Population::Cached(c) => {
            let j = c.stored_firsts().min().expect("population is nonempty");
            (
                Some(potential_ell(c)),
                Some(j),
                Some(extremes_found(pop, ExtremesMode::NoisyCached)),
            )
        }
        Population::Reeval(_) => (None, None, None),
    };
    let sample = TraceSample {
        t,
        l: distinct,
        d: n + min - max,
        ell,
        j,
        covered,
        extremes_noisy,
        extremes_true: seen[0] && seen[n as usize],
    };
    debug_assert!(!sample.covered || sample.l == n + 1);
    debug_assert!(sample.d <= n);
    sample
}

/// Outcome of one trial.
///
/// `t_total` is the first iteration whose true values covered `0..=n`,
/// `t_ex` the first iteration with both extremes present (stored values for
/// the cached variant, true values otherwise). A censored trial ran out of
/// budget before covering; its budget is a lower bound on the real time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub variant: Variant,
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub trial: u64,
    pub budget: u64,
    pub t_total: Option<u64>,
    pub t_ex: Option<u64>,
    pub censored: bool,
    pub evaluations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceSample>>,
}

/// Which trace field a drift estimate tracks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DriftField {
    /// Distinct true values, `l`.
    L,
    /// Span complement, `d`.
    D,
    /// Cached potential, `ell`.
    Ell,
}

impl DriftField {
    fn extract(&self, sample: &TraceSample) -> Option<i64> {
        match self {
            DriftField::L => Some(sample.l as i64),
            DriftField::D => Some(sample.d as i64),
            DriftField::Ell => sample.ell.map(|e| e as i64),
        }
    }
}

/// Empirical mean one-step change of a field, conditioned on its current
/// value, with a normal-approximation confidence interval.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftEstimate {
    /// The conditioned-on current value (or threshold, for pooled
    /// estimates).
    pub value: i64,
    pub samples: usize,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, Default)]
pub struct DriftReport {
    /// Per-value estimates, ascending in value.
    pub estimates: Vec<DriftEstimate>,
    /// Values matching the condition but seen fewer than two times; no
    /// interval can be formed for them.
    pub omitted: Vec<i64>,
}

/// Estimates the one-step drift of `field` from trace sequences, separately
/// for each current value satisfying `condition`. Only transitions between
/// consecutive iterations contribute, so traces recorded with a stride
/// larger than one yield nothing.
pub fn estimate_drift<F>(
    traces: &[Vec<TraceSample>],
    field: DriftField,
    confidence: f64,
    condition: F,
) -> DriftReport
where
    F: Fn(i64) -> bool,
{
    assert!(!traces.is_empty(), "drift estimation needs at least one trace");
    let mut by_value: std::collections::BTreeMap<i64, Vec<f64>> = std::collections::BTreeMap::new();
    for (value, change) in transitions(traces, field) {
        if condition(value) {
            by_value.entry(value).or_default().push(change);
        }
    }
    let z = stats::normal_quantile(0.5 + confidence / 2.0);
    let mut report = DriftReport::default();
    for (value, changes) in by_value {
        if changes.len() < 2 {
            report.omitted.push(value);
            continue;
        }
        report.estimates.push(interval(value, &changes, z));
    }
    report
}

/// Pooled drift of `field` over all transitions whose current value is at
/// least `threshold`. `None` when fewer than two such transitions exist.
pub fn pooled_drift(
    traces: &[Vec<TraceSample>],
    field: DriftField,
    confidence: f64,
    threshold: i64,
) -> Option<DriftEstimate> {
    let changes: Vec<f64> = transitions(traces, field)
        .filter(|&(value, _)| value >= threshold)
        .map(|(_, change)| change)
        .collect();
    if changes.len() < 2 {
        return None;
    }
    let z = stats::normal_quantile(0.5 + confidence / 2.0);
    Some(interval(threshold, &changes, z))
}

fn transitions<'a>(
    traces: &'a [Vec<TraceSample>],
    field: DriftField,
) -> impl Iterator<Item = (i64, f64)> + 'a {
    traces.iter().flat_map(move |trace| {
        trace.windows(2).filter_map(move |w| {
            if w[1].t != w[0].t + 1 {
                return None;
            }
            let now = field.extract(&w[0])?;
            let next = field.extract(&w[1])?;
            Some((now, (next - now) as f64))
        })
    })
}

fn interval(value: i64, changes: &[f64], z: f64) -> DriftEstimate {
    let m = changes.len() as f64;
    let mean = changes.iter().sum::<f64>() / m;
    let var = changes.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let half = z * (var / m).sqrt();
    DriftEstimate {
        value,
        samples: changes.len(),
        mean,
        ci_low: mean - half,
        ci_high: mean + half,
    }
}
