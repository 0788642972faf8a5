//! The search algorithm variants as stepwise state machines, plus the
//! driver that runs any of them to a stopping condition or budget.

pub mod cached;
pub mod elim;
pub mod reeval;

use std::fmt;
use std::str::FromStr;

use serde::ser::Serializer;
use serde::Serialize;

use crate::diagnostics::{self, RunRecord, TraceMode, TraceSample};
use crate::noise::{NoiseSpec, NoisyEvaluator};
use crate::rng::RngHandle;

pub use cached::{CachedIndividual, CachedPopulation, CachedStep};
pub use elim::{elim_with, ElimOutcome};
pub use reeval::{ReevalPopulation, ReevalStep};

/// Which update rule a simulation uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Evaluate each individual once, on entry, and keep the stored value.
    Cached,
    /// Reevaluate the whole population in every iteration.
    Reeval,
    /// Reevaluating rule that re-appends lost extreme genomes while fewer
    /// than `limit` iterations have run (`None` = forever).
    ExtremeKeeping { limit: Option<u64> },
}

impl Variant {
    pub fn label(&self) -> &'static str {
        match self {
            Variant::Cached => "cached",
            Variant::Reeval => "reeval",
            Variant::ExtremeKeeping { .. } => "keep",
        }
    }

    /// Rendering of the keeping limit for tabular output: empty for the
    /// plain variants, the limit or `inf` for the keeping variant.
    pub fn limit_column(&self) -> String {
        match self {
            Variant::ExtremeKeeping { limit: Some(k) } => k.to_string(),
            Variant::ExtremeKeeping { limit: None } => "inf".to_string(),
            _ => String::new(),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::ExtremeKeeping { limit: Some(k) } => write!(f, "keep:{k}"),
            Variant::ExtremeKeeping { limit: None } => write!(f, "keep:inf"),
            other => f.write_str(other.label()),
        }
    }
}

impl Serialize for Variant {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseVariantError(pub String);

impl fmt::Display for ParseVariantError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown variant {:?}, expected cached, reeval or keep[:K]", self.0)
    }
}

impl std::error::Error for ParseVariantError {}

impl FromStr for Variant {
    type Err = ParseVariantError;

    /// Accepts `cached`, `reeval`, `keep`, `keep:inf` or `keep:<K>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cached" => Ok(Variant::Cached),
            "reeval" => Ok(Variant::Reeval),
            "keep" | "keep:inf" => Ok(Variant::ExtremeKeeping { limit: None }),
            other => match other.strip_prefix("keep:").and_then(|k| k.parse::<u64>().ok()) {
                Some(k) => Ok(Variant::ExtremeKeeping { limit: Some(k) }),
                None => Err(ParseVariantError(other.to_string())),
            },
        }
    }
}

/// Everything needed to start one simulation.
#[derive(Clone, Copy, Debug)]
pub struct AlgorithmConfig {
    pub n: usize,
    pub noise: NoiseSpec,
    pub variant: Variant,
}

/// The population of a running simulation, whichever variant drives it.
#[derive(Clone, Debug)]
pub enum Population {
    Cached(CachedPopulation),
    Reeval(ReevalPopulation),
}

impl Population {
    pub fn len(&self) -> usize {
        match self {
            Population::Cached(p) => p.len(),
            Population::Reeval(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n(&self) -> usize {
        match self {
            Population::Cached(p) => p.n(),
            Population::Reeval(p) => p.n(),
        }
    }

    pub fn iteration(&self) -> u64 {
        match self {
            Population::Cached(p) => p.iteration(),
            Population::Reeval(p) => p.iteration(),
        }
    }

    /// True (noiseless) objective first components of all members, in
    /// member order. Observers use this; the algorithms never do.
    pub fn true_values(&self) -> Vec<u64> {
        match self {
            Population::Cached(p) => p.members().iter().map(|m| m.genome().count_ones()).collect(),
            Population::Reeval(p) => p.members().iter().map(|m| m.count_ones()).collect(),
        }
    }

    pub fn as_cached(&self) -> Option<&CachedPopulation> {
        match self {
            Population::Cached(p) => Some(p),
            Population::Reeval(_) => None,
        }
    }
}

/// Per-iteration transcript of whichever variant stepped.
#[derive(Clone, Debug)]
pub enum StepReport {
    Cached(CachedStep),
    Reeval(ReevalStep),
}

/// One seeded run: configuration, its private random stream, the evaluation
/// counter and the current population.
#[derive(Clone, Debug)]
pub struct Simulation {
    config: AlgorithmConfig,
    evaluator: NoisyEvaluator,
    rng: RngHandle,
    population: Population,
}

impl Simulation {
    pub fn new(config: AlgorithmConfig, seed: u64) -> Self {
        let mut rng = RngHandle::new(seed);
        let mut evaluator = NoisyEvaluator::new(config.noise);
        let population = match config.variant {
            Variant::Cached => {
                Population::Cached(CachedPopulation::init(config.n, &mut evaluator, &mut rng))
            }
            Variant::Reeval | Variant::ExtremeKeeping { .. } => {
                Population::Reeval(ReevalPopulation::init(config.n, &mut rng))
            }
        };
        Simulation {
            config,
            evaluator,
            rng,
            population,
        }
    }

    pub fn config(&self) -> &AlgorithmConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.rng.seed()
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn iteration(&self) -> u64 {
        self.population.iteration()
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluator.evaluations()
    }

    pub fn step(&mut self) -> StepReport {
        match (&mut self.population, self.config.variant) {
            (Population::Cached(p), Variant::Cached) => {
                StepReport::Cached(p.step(&mut self.evaluator, &mut self.rng))
            }
            (Population::Reeval(p), Variant::Reeval) => {
                StepReport::Reeval(p.step(&mut self.evaluator, &mut self.rng))
            }
            (Population::Reeval(p), Variant::ExtremeKeeping { limit }) => {
                StepReport::Reeval(p.step_keeping_extremes(&mut self.evaluator, limit, &mut self.rng))
            }
            _ => unreachable!("population kind always matches the variant"),
        }
    }
}

/// Drives a simulation until `stop` holds or `budget` iterations have been
/// executed, whichever comes first.
///
/// The time-to-extremes is detected every iteration regardless of trace
/// stride: for the cached variant it is the first iteration whose stored
/// values contain both 0 and `n`, for the reevaluating variants the first
/// iteration whose true values do. A run that exhausts the budget is
/// censored; its budget is a lower bound on the undetected stopping time.
pub fn run_until<F>(sim: &mut Simulation, stop: F, budget: u64, trace: TraceMode) -> RunRecord
where
    F: Fn(&Population) -> bool,
{
    let n = sim.config.n;
    let mut samples: Option<Vec<TraceSample>> = match trace {
        TraceMode::Off => None,
        _ => Some(Vec::new()),
    };
    let (mut extreme_low, mut extreme_high) = scan_extremes(&sim.population, n);
    let mut t_ex: Option<u64> = None;
    let mut t_total: Option<u64> = None;

    loop {
        let t = sim.iteration();
        if t_ex.is_none() && extreme_low && extreme_high {
            t_ex = Some(t);
        }
        if let Some(samples) = samples.as_mut() {
            if trace.due(t) {
                samples.push(diagnostics::sample(&sim.population, t));
            }
        }
        if stop(&sim.population) {
            t_total = Some(t);
            break;
        }
        if t >= budget {
            break;
        }
        match sim.step() {
            StepReport::Cached(step) => {
                // stored-value sets only grow, so the flags are monotone
                extreme_low |= step.value.first() == 0;
                extreme_high |= step.value.first() == n as u64;
            }
            StepReport::Reeval(_) => {
                (extreme_low, extreme_high) = scan_extremes(&sim.population, n);
            }
        }
    }

    RunRecord {
        variant: sim.config.variant,
        n,
        p: sim.config.noise.rate(),
        seed: sim.seed(),
        trial: 0,
        budget,
        t_total,
        t_ex,
        censored: t_total.is_none(),
        evaluations: sim.evaluations(),
        trace: samples,
    }
}

fn scan_extremes(pop: &Population, n: usize) -> (bool, bool) {
    let mut low = false;
    let mut high = false;
    match pop {
        Population::Cached(p) => {
            for first in p.stored_firsts() {
                low |= first == 0;
                high |= first == n as u64;
            }
        }
        Population::Reeval(p) => {
            for m in p.members() {
                low |= m.count_ones() == 0;
                high |= m.count_ones() == n as u64;
            }
        }
    }
    (low, high)
}
