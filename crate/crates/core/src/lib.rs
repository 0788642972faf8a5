//! Simulation library for archive-based Pareto search on the one-min-max
//! bitstring benchmark under one-bit prior evaluation noise.
//!
//! Two update rules for the same archive search are provided: a cached
//! variant that evaluates each individual once on entry and keeps the
//! stored value, and a reevaluating variant that re-scores the whole
//! population every iteration through an elimination pass (plus a proof-
//! gadget flavor of the latter that patches lost extreme genomes back in).
//! Diagnostics read true objective values that the algorithms never see,
//! and the experiment layer runs seeded, reproducible trial batteries with
//! scaling fits over the results.

pub mod algorithms;
pub mod bitstring;
pub mod diagnostics;
pub mod experiments;
pub mod noise;
pub mod objective;
pub mod reference;
pub mod rng;
pub mod stats;
pub mod validation;

pub use algorithms::{
    AlgorithmConfig, CachedIndividual, CachedPopulation, Population, ReevalPopulation, Simulation,
    Variant,
};
pub use bitstring::{mutate_one_bit, Bitstring};
pub use diagnostics::{
    extremes_found, pareto_covered, potential_ell, ExtremesMode, RunRecord, TraceMode, TraceSample,
};
pub use experiments::{BudgetRule, NoiseRule, SweepGrid};
pub use noise::{noisy_variant, NoiseSpec, NoisyEvaluator};
pub use objective::{one_min_max, ObjectiveVector};
pub use rng::RngHandle;
