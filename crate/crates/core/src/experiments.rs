//! Seeded trial batteries, parameter sweeps, summary statistics and
//! scaling-law fits.
//!
//! Everything here is a pure function of the grid and the master seed:
//! trials derive independent random streams from the master seed, run in
//! parallel, and are collected in trial order, so output files are
//! byte-identical for any worker count.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::algorithms::{run_until, AlgorithmConfig, Simulation, Variant};
use crate::diagnostics::{pareto_covered, RunRecord, TraceMode};
use crate::noise::NoiseSpec;
use crate::rng::derive_seed;
use crate::stats;

/// Version tag written into every output file.
pub const SCHEMA_VERSION: u32 = 1;

/// A noise rate as a function of the problem size.
///
/// Rule strings: a bare number is an absolute rate; `c/n` and `c/n2` scale
/// with `n^-1` and `n^-2`; `clogn/n2` is `c * ln(n) / n^2` (natural log).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseRule {
    Constant(f64),
    OverN(f64),
    OverN2(f64),
    LogOverN2(f64),
}

impl NoiseRule {
    /// The rate this rule produces at problem size `n`.
    pub fn rate(&self, n: usize) -> f64 {
        let n = n as f64;
        match *self {
            NoiseRule::Constant(c) => c,
            NoiseRule::OverN(c) => c / n,
            NoiseRule::OverN2(c) => c / (n * n),
            NoiseRule::LogOverN2(c) => c * n.ln() / (n * n),
        }
    }
}

impl fmt::Display for NoiseRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NoiseRule::Constant(c) => write!(f, "{c}"),
            NoiseRule::OverN(c) => write!(f, "{c}/n"),
            NoiseRule::OverN2(c) => write!(f, "{c}/n2"),
            NoiseRule::LogOverN2(c) => write!(f, "{c}logn/n2"),
        }
    }
}

/// Parse failure for a noise-rate rule, with the byte position of the
/// offending part.
#[derive(Clone, Debug, PartialEq)]
pub struct ParseRuleError {
    pub pos: usize,
    pub message: String,
}

impl fmt::Display for ParseRuleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid noise rule at position {}: {}", self.pos, self.message)
    }
}

impl std::error::Error for ParseRuleError {}

impl FromStr for NoiseRule {
    type Err = ParseRuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRuleError {
                pos: 0,
                message: "empty rule".to_string(),
            });
        }
        let (coeff_part, log, denom) = match s.find('/') {
            None => (s, false, None),
            Some(slash) => {
                let head = &s[..slash];
                let denom = &s[slash + 1..];
                match head.strip_suffix("logn") {
                    Some(coeff) => (coeff, true, Some((denom, slash + 1))),
                    None => (head, false, Some((denom, slash + 1))),
                }
            }
        };
        if coeff_part.is_empty() {
            return Err(ParseRuleError {
                pos: 0,
                message: "missing coefficient".to_string(),
            });
        }
        let coeff: f64 = coeff_part.parse().map_err(|_| ParseRuleError {
            pos: 0,
            message: format!("coefficient {coeff_part:?} is not a number"),
        })?;
        if !coeff.is_finite() || coeff < 0.0 {
            return Err(ParseRuleError {
                pos: 0,
                message: format!("coefficient {coeff} must be finite and non-negative"),
            });
        }
        match (log, denom) {
            (false, None) => Ok(NoiseRule::Constant(coeff)),
            (false, Some(("n", _))) => Ok(NoiseRule::OverN(coeff)),
            (false, Some(("n2", _))) => Ok(NoiseRule::OverN2(coeff)),
            (true, Some(("n2", _))) => Ok(NoiseRule::LogOverN2(coeff)),
            (true, Some(("n", pos))) => Err(ParseRuleError {
                pos,
                message: "logarithmic rules use denominator n2".to_string(),
            }),
            (_, Some((other, pos))) => Err(ParseRuleError {
                pos,
                message: format!("unknown denominator {other:?}, expected n or n2"),
            }),
            (true, None) => unreachable!("log suffix only parses next to a denominator"),
        }
    }
}

/// Iteration budget as a function of the problem size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BudgetRule {
    /// `ceil(c * n^2 * ln n)` iterations, floored at `ceil(c)` so tiny
    /// sizes keep a usable budget.
    MultipleOfN2LogN(f64),
    Fixed(u64),
}

impl BudgetRule {
    pub fn budget(&self, n: usize) -> u64 {
        match *self {
            BudgetRule::MultipleOfN2LogN(c) => {
                let n = n as f64;
                let scaled = (c * n * n * n.ln()).ceil() as u64;
                scaled.max(c.ceil() as u64).max(1)
            }
            BudgetRule::Fixed(b) => b,
        }
    }
}

/// A full sweep specification.
#[derive(Clone, Debug)]
pub struct SweepGrid {
    pub n_values: Vec<usize>,
    pub p_rules: Vec<NoiseRule>,
    pub variants: Vec<Variant>,
    pub trials_per_cell: u64,
    pub budget: BudgetRule,
    pub master_seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GridError {
    EmptyDimension(&'static str),
    NoTrials,
    RateOutOfRange { rule: String, n: usize, p: f64 },
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::EmptyDimension(which) => write!(f, "sweep grid has no {which}"),
            GridError::NoTrials => write!(f, "trials per cell must be at least 1"),
            GridError::RateOutOfRange { rule, n, p } => {
                write!(f, "rule {rule} produces rate {p} outside [0, 1] at n = {n}")
            }
        }
    }
}

impl std::error::Error for GridError {}

/// One (rule, variant, size) cell of a grid, with its resolved rate,
/// budget, and derived seed.
#[derive(Clone, Debug)]
pub struct Cell {
    pub index: u64,
    pub rule: NoiseRule,
    pub variant: Variant,
    pub n: usize,
    pub p: f64,
    pub budget: u64,
    pub seed: u64,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<(), GridError> {
        if self.n_values.is_empty() {
            return Err(GridError::EmptyDimension("problem sizes"));
        }
        if self.p_rules.is_empty() {
            return Err(GridError::EmptyDimension("noise rules"));
        }
        if self.variants.is_empty() {
            return Err(GridError::EmptyDimension("variants"));
        }
        if self.trials_per_cell == 0 {
            return Err(GridError::NoTrials);
        }
        for rule in &self.p_rules {
            for &n in &self.n_values {
                let p = rule.rate(n);
                if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                    return Err(GridError::RateOutOfRange {
                        rule: rule.to_string(),
                        n,
                        p,
                    });
                }
            }
        }
        Ok(())
    }

    /// Cells in deterministic order: rules outermost, then variants, then
    /// sizes. Each cell's seed is derived from the master seed and the cell
    /// index.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        let mut index = 0u64;
        for rule in &self.p_rules {
            for variant in &self.variants {
                for &n in &self.n_values {
                    cells.push(Cell {
                        index,
                        rule: *rule,
                        variant: *variant,
                        n,
                        p: rule.rate(n),
                        budget: self.budget.budget(n),
                        seed: derive_seed(self.master_seed, index),
                    });
                    index += 1;
                }
            }
        }
        cells
    }
}

/// Runs `trials` independent seeded trials of one cell, in parallel, each
/// until the true values cover `0..=n` or the budget runs out. Trial `i`
/// uses the stream derived from `seed` and `i`; results come back in trial
/// order, so the output is independent of the worker count.
pub fn run_cell(
    n: usize,
    noise: NoiseSpec,
    variant: Variant,
    trials: u64,
    budget: u64,
    seed: u64,
    trace: TraceMode,
) -> Vec<RunRecord> {
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let config = AlgorithmConfig { n, noise, variant };
            let mut sim = Simulation::new(config, derive_seed(seed, trial));
            let mut record = run_until(&mut sim, pareto_covered, budget, trace);
            record.trial = trial;
            record
        })
        .collect()
}

/// Five-number-plus-mean summary of one statistic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatSummary {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    pub mean: f64,
}

impl StatSummary {
    fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Some(StatSummary {
            min: sorted[0],
            q25: stats::quantile_sorted(&sorted, 0.25),
            median: stats::quantile_sorted(&sorted, 0.5),
            q75: stats::quantile_sorted(&sorted, 0.75),
            max: *sorted.last().unwrap(),
            mean: stats::mean(&sorted),
        })
    }
}

/// Aggregate view of one cell's records. Time summaries cover uncensored
/// trials only; censored trials are counted, never averaged in. The mean
/// evaluation count covers all trials, since censored runs cost evaluations
/// too.
#[derive(Clone, Debug, Serialize)]
pub struct CellSummary {
    pub variant: Variant,
    pub k: String,
    pub n: usize,
    pub p_rule: String,
    pub p: f64,
    pub budget: u64,
    pub trials: u64,
    pub uncensored: u64,
    pub censored_fraction: f64,
    pub t_total: Option<StatSummary>,
    pub t_ex: Option<StatSummary>,
    pub mean_evaluations: f64,
}

pub fn summarize_cell(cell: &Cell, records: &[RunRecord]) -> CellSummary {
    let totals: Vec<f64> = records.iter().filter_map(|r| r.t_total.map(|t| t as f64)).collect();
    let extremes: Vec<f64> = records
        .iter()
        .filter(|r| !r.censored)
        .filter_map(|r| r.t_ex.map(|t| t as f64))
        .collect();
    let evaluations: Vec<f64> = records.iter().map(|r| r.evaluations as f64).collect();
    let censored = records.iter().filter(|r| r.censored).count() as u64;
    CellSummary {
        variant: cell.variant,
        k: cell.variant.limit_column(),
        n: cell.n,
        p_rule: cell.rule.to_string(),
        p: cell.p,
        budget: cell.budget,
        trials: records.len() as u64,
        uncensored: records.len() as u64 - censored,
        censored_fraction: censored as f64 / records.len() as f64,
        t_total: StatSummary::from_values(&totals),
        t_ex: StatSummary::from_values(&extremes),
        mean_evaluations: stats::mean(&evaluations),
    }
}

/// One cell's records plus its summary.
#[derive(Clone, Debug)]
pub struct CellResult {
    pub cell: Cell,
    pub records: Vec<RunRecord>,
    pub summary: CellSummary,
}

/// Runs every cell of the grid. `threads` pins the worker-pool size (0 or
/// `None` = default pool); the output is identical either way.
pub fn run_sweep(grid: &SweepGrid, trace: TraceMode, threads: Option<usize>) -> Result<Vec<CellResult>, GridError> {
    grid.validate()?;
    let execute = || {
        grid.cells()
            .into_iter()
            .map(|cell| {
                let noise = NoiseSpec::new(cell.p).expect("validated rate");
                let records = run_cell(cell.n, noise, cell.variant, grid.trials_per_cell, cell.budget, cell.seed, trace);
                let summary = summarize_cell(&cell, &records);
                CellResult {
                    cell,
                    records,
                    summary,
                }
            })
            .collect::<Vec<_>>()
    };
    match threads {
        Some(t) if t > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .expect("thread pool construction");
            Ok(pool.install(execute))
        }
        _ => Ok(execute()),
    }
}

/// Least-squares power-law fit in log space.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    /// Slope of `ln(statistic)` against `ln(regressor)`.
    pub exponent: f64,
    /// `exp(intercept)`: the multiplicative prefactor.
    pub constant: f64,
    /// Residual sum of squares in log space.
    pub residual: f64,
}

/// What to regress the statistic against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regressor {
    /// `ln n`: the fitted exponent is the power of `n`.
    LogN,
    /// `ln(n^2 ln n)`: a fit near exponent 1 means the statistic scales as
    /// `n^2 ln n` and the constant is its prefactor.
    N2LogN,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FitError {
    TooFewPoints(usize),
    NonPositive { index: usize },
}

impl fmt::Display for FitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitError::TooFewPoints(count) => write!(f, "need at least 3 points, got {count}"),
            FitError::NonPositive { index } => {
                write!(f, "point {index} is not positive; log-log fits need positive data")
            }
        }
    }
}

impl std::error::Error for FitError {}

/// Fits `statistic ~ constant * g(n)^exponent` by ordinary least squares on
/// logs, where `g` is the chosen regressor.
pub fn fit_scaling(points: &[(f64, f64)], regressor: Regressor) -> Result<ScalingFit, FitError> {
    if points.len() < 3 {
        return Err(FitError::TooFewPoints(points.len()));
    }
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for (index, &(n, stat)) in points.iter().enumerate() {
        if !(n > 0.0 && stat > 0.0) {
            return Err(FitError::NonPositive { index });
        }
        let g = match regressor {
            Regressor::LogN => n.ln(),
            Regressor::N2LogN => (n * n * n.ln()).ln(),
        };
        xs.push(g);
        ys.push(stat.ln());
    }
    let mx = stats::mean(&xs);
    let my = stats::mean(&ys);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    Ok(ScalingFit {
        exponent: slope,
        constant: intercept.exp(),
        residual,
    })
}

/// Side-by-side comparison of the cached and reevaluating variants at one
/// matched `(n, p)` cell.
#[derive(Clone, Debug, Serialize)]
pub struct SeparationRow {
    pub n: usize,
    pub p: f64,
    pub p_rule: String,
    pub cached_median: Option<f64>,
    pub reeval_median: Option<f64>,
    /// reeval median / cached median, when both exist.
    pub median_ratio: Option<f64>,
    pub cached_censored: f64,
    pub reeval_censored: f64,
    /// Set when the reevaluating censored fraction exceeds the threshold
    /// while the cached one stays at or below it.
    pub flagged: bool,
}

/// Contrasts cached against reevaluating cells that share `(n, p)`.
pub fn separation_report(summaries: &[CellSummary], censored_threshold: f64) -> Vec<SeparationRow> {
    let mut rows = Vec::new();
    for cached in summaries.iter().filter(|s| s.variant == Variant::Cached) {
        for reeval in summaries
            .iter()
            .filter(|s| s.variant == Variant::Reeval && s.n == cached.n && s.p == cached.p)
        {
            let cached_median = cached.t_total.as_ref().map(|s| s.median);
            let reeval_median = reeval.t_total.as_ref().map(|s| s.median);
            rows.push(SeparationRow {
                n: cached.n,
                p: cached.p,
                p_rule: cached.p_rule.clone(),
                cached_median,
                reeval_median,
                median_ratio: cached_median
                    .zip(reeval_median)
                    .map(|(c, r)| r / c),
                cached_censored: cached.censored_fraction,
                reeval_censored: reeval.censored_fraction,
                flagged: reeval.censored_fraction > censored_threshold
                    && cached.censored_fraction <= censored_threshold,
            });
        }
    }
    rows
}

/// Fixed record-file column order.
pub const RECORD_COLUMNS: [&str; 11] = [
    "variant", "k", "n", "p_rule", "p", "trial", "seed", "budget", "t_total", "t_ex", "evaluations",
];

/// Fixed trace-file column order.
pub const TRACE_COLUMNS: [&str; 8] = ["t", "l", "d", "ell", "j", "covered", "extremes_noisy", "extremes_true"];

fn opt_u64(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes one record row per trial. The first line is a `#` comment echoing
/// the resolved configuration (including the master seed), then the header
/// row, then the data. Censored trials leave `t_total` empty; their budget
/// column is the lower bound on the stopping time.
pub fn write_records_csv<W: Write>(
    mut out: W,
    config_echo: &serde_json::Value,
    cells: &[CellResult],
) -> std::io::Result<()> {
    writeln!(out, "# {config_echo}")?;
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(RECORD_COLUMNS)?;
    for cell in cells {
        for record in &cell.records {
            writer.write_record([
                record.variant.label().to_string(),
                record.variant.limit_column(),
                record.n.to_string(),
                cell.cell.rule.to_string(),
                record.p.to_string(),
                record.trial.to_string(),
                record.seed.to_string(),
                record.budget.to_string(),
                opt_u64(record.t_total),
                opt_u64(record.t_ex),
                record.evaluations.to_string(),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Writes the trace rows of a set of records (those that carry traces).
pub fn write_traces_csv<W: Write>(
    mut out: W,
    config_echo: &serde_json::Value,
    records: &[RunRecord],
) -> std::io::Result<()> {
    writeln!(out, "# {config_echo}")?;
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec!["trial".to_string(), "seed".to_string()];
    header.extend(TRACE_COLUMNS.iter().map(|c| c.to_string()));
    writer.write_record(&header)?;
    for record in records {
        let Some(trace) = &record.trace else { continue };
        for s in trace {
            writer.write_record([
                record.trial.to_string(),
                record.seed.to_string(),
                s.t.to_string(),
                s.l.to_string(),
                s.d.to_string(),
                opt_u64(s.ell),
                opt_u64(s.j),
                s.covered.to_string(),
                s.extremes_noisy.map(|b| b.to_string()).unwrap_or_default(),
                s.extremes_true.to_string(),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// The JSON summary document: configuration echo, per-cell summaries and
/// the cached-versus-reevaluating separation table.
pub fn summary_document(
    config_echo: &serde_json::Value,
    cells: &[CellResult],
    censored_threshold: f64,
) -> serde_json::Value {
    let summaries: Vec<&CellSummary> = cells.iter().map(|c| &c.summary).collect();
    let owned: Vec<CellSummary> = summaries.iter().map(|s| (*s).clone()).collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "config": config_echo,
        "cells": owned,
        "separation": separation_report(&owned, censored_threshold),
    })
}
