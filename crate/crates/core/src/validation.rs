//! Runtime validation suite: structural invariants checked over real runs,
//! the elimination pass against its brute-force reference, and
//! goodness-of-fit tests for the stochastic primitives. The `validate`
//! command runs these and fails on any violation; the acceptance tests
//! reuse them.

use rand::Rng;

use crate::algorithms::{CachedPopulation, ReevalPopulation};
use crate::bitstring::{mutate_one_bit, Bitstring};
use crate::noise::{noisy_variant, NoiseSpec, NoisyEvaluator};
use crate::objective::ObjectiveVector;
use crate::reference;
use crate::rng::RngHandle;
use crate::stats;

/// Outcome of one validation check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Sizing of the validation suite.
#[derive(Clone, Copy, Debug)]
pub struct ValidationProfile {
    pub steps_per_variant: u64,
    pub lemma_seeds: u64,
    pub elim_cases: usize,
    pub distribution_samples: u64,
}

impl ValidationProfile {
    pub fn quick() -> Self {
        ValidationProfile {
            steps_per_variant: 10_000,
            lemma_seeds: 1,
            elim_cases: 200,
            distribution_samples: 100_000,
        }
    }

    pub fn full() -> Self {
        ValidationProfile {
            steps_per_variant: 25_000,
            lemma_seeds: 4,
            elim_cases: 1_000,
            distribution_samples: 100_000,
        }
    }
}

/// Runs the whole suite at n=50, p=0.5/n. Deterministic given the seed.
pub fn run_suite(profile: ValidationProfile, seed: u64) -> Vec<CheckResult> {
    let n = 50;
    let noise = NoiseSpec::new(0.5 / n as f64).unwrap();
    vec![
        cached_invariant_check(n, noise, profile.steps_per_variant, profile.lemma_seeds, seed),
        reeval_invariant_check(n, noise, profile.steps_per_variant, seed),
        noiseless_no_loss_check(n, profile.steps_per_variant.min(20_000), seed),
        elim_reference_check(profile.elim_cases, seed),
        noise_distribution_check(4, 0.5, profile.distribution_samples, 0.01, seed),
        mutation_uniformity_check(16, profile.distribution_samples, 0.01, seed),
        parent_selection_check(5, profile.distribution_samples, 0.01, seed),
    ]
}

/// Steps cached populations and checks, every iteration: stored first
/// components pairwise distinct, the stored-value set only growing, at most
/// three members per true count, stored firsts within one of the true
/// count, and population size at most `n + 1`.
pub fn cached_invariant_check(
    n: usize,
    noise: NoiseSpec,
    steps_per_seed: u64,
    seeds: u64,
    master_seed: u64,
) -> CheckResult {
    let mut violations = Vec::new();
    let mut total_steps = 0u64;
    for trial in 0..seeds {
        let mut rng = RngHandle::for_trial(master_seed, trial);
        let mut evaluator = NoisyEvaluator::new(noise);
        let mut pop = CachedPopulation::init(n, &mut evaluator, &mut rng);
        let mut previous: Vec<u64> = pop.stored_firsts().collect();
        previous.sort_unstable();
        for _ in 0..steps_per_seed {
            pop.step(&mut evaluator, &mut rng);
            total_steps += 1;
            violations.extend(pop.invariant_violations());
            let mut current: Vec<u64> = pop.stored_firsts().collect();
            current.sort_unstable();
            for f in &previous {
                if current.binary_search(f).is_err() {
                    violations.push(format!("stored first component {f} was lost"));
                }
            }
            previous = current;
            if violations.len() > 20 {
                break;
            }
        }
    }
    CheckResult::new(
        "cached-invariants",
        violations.is_empty(),
        if violations.is_empty() {
            format!("{total_steps} steps, no violations")
        } else {
            format!("{} violations, first: {}", violations.len(), violations[0])
        },
    )
}

/// Steps a reevaluating population and checks, every iteration: survivor
/// values have pairwise distinct first components and the population stays
/// within `n + 1` members.
pub fn reeval_invariant_check(n: usize, noise: NoiseSpec, steps: u64, seed: u64) -> CheckResult {
    let mut rng = RngHandle::new(seed);
    let mut evaluator = NoisyEvaluator::new(noise);
    let mut pop = ReevalPopulation::init(n, &mut rng);
    let mut violations = Vec::new();
    for _ in 0..steps {
        let report = pop.step(&mut evaluator, &mut rng);
        let mut firsts: Vec<u64> = report.elim.kept.iter().map(|&i| report.elim.values[i].first()).collect();
        firsts.sort_unstable();
        let len_before = firsts.len();
        firsts.dedup();
        if firsts.len() != len_before {
            violations.push("survivor first components collided".to_string());
        }
        if pop.len() > n + 1 {
            violations.push(format!("population size {} exceeds {}", pop.len(), n + 1));
        }
        if violations.len() > 20 {
            break;
        }
    }
    CheckResult::new(
        "reeval-invariants",
        violations.is_empty(),
        if violations.is_empty() {
            format!("{steps} steps, no violations")
        } else {
            format!("{} violations, first: {}", violations.len(), violations[0])
        },
    )
}

/// At p = 0 neither variant may ever lose a distinct true value.
pub fn noiseless_no_loss_check(n: usize, steps: u64, seed: u64) -> CheckResult {
    let noise = NoiseSpec::noiseless();
    let mut rng = RngHandle::new(seed);
    let mut evaluator = NoisyEvaluator::new(noise);
    let mut cached = CachedPopulation::init(n, &mut evaluator, &mut rng);
    let mut seen: Vec<bool> = vec![false; n + 1];
    let mut losses = 0u64;
    let mark = |values: &mut Vec<bool>, current: &[u64], losses: &mut u64| {
        let mut now = vec![false; values.len()];
        for &f in current {
            now[f as usize] = true;
        }
        for k in 0..values.len() {
            if values[k] && !now[k] {
                *losses += 1;
            }
            values[k] |= now[k];
        }
    };
    let current: Vec<u64> = cached.members().iter().map(|m| m.genome().count_ones()).collect();
    mark(&mut seen, &current, &mut losses);
    for _ in 0..steps {
        cached.step(&mut evaluator, &mut rng);
        let current: Vec<u64> = cached.members().iter().map(|m| m.genome().count_ones()).collect();
        mark(&mut seen, &current, &mut losses);
    }

    let mut reeval = ReevalPopulation::init(n, &mut rng);
    let mut seen: Vec<bool> = vec![false; n + 1];
    let current: Vec<u64> = reeval.members().iter().map(|m| m.count_ones()).collect();
    mark(&mut seen, &current, &mut losses);
    for _ in 0..steps {
        reeval.step(&mut evaluator, &mut rng);
        let current: Vec<u64> = reeval.members().iter().map(|m| m.count_ones()).collect();
        mark(&mut seen, &current, &mut losses);
    }
    CheckResult::new(
        "noiseless-no-loss",
        losses == 0,
        format!("{losses} true-value losses over {} steps", 2 * steps),
    )
}

/// Random small multisets with injected deterministic values: the
/// elimination pass must return one of the brute-force-enumerated minimal
/// dominant sub-multisets, and its survivors must dominate all inputs while
/// staying pairwise incomparable.
pub fn elim_reference_check(cases: usize, seed: u64) -> CheckResult {
    let mut rng = RngHandle::new(seed);
    let mut failures = 0usize;
    let mut first_failure = String::new();
    for case in 0..cases {
        let len = rng.random_range(1..=6);
        let values: Vec<ObjectiveVector> = (0..len)
            .map(|_| ObjectiveVector::pair(rng.random_range(0..6), rng.random_range(0..6)))
            .collect();
        let injected = values.clone();
        let outcome = crate::algorithms::elim_with(len, &mut rng, move |i, _| injected[i].clone());
        let valid = reference::minimal_dominant_submultisets(&values);
        let ok = valid.contains(&outcome.kept)
            && reference::dominates_all(&outcome.kept, &outcome.values)
            && reference::pairwise_incomparable(&outcome.kept, &outcome.values);
        if !ok {
            failures += 1;
            if first_failure.is_empty() {
                first_failure = format!("case {case}: kept {:?} of {values:?}", outcome.kept);
            }
        }
    }
    CheckResult::new(
        "elim-reference",
        failures == 0,
        if failures == 0 {
            format!("{cases} cases matched the brute-force reference")
        } else {
            format!("{failures} mismatches, first: {first_failure}")
        },
    )
}

/// Chi-squared goodness of fit of the one-bit noise output distribution on
/// the all-zeros string: identity with probability `1 - p`, each single-one
/// string with probability `p / n`.
pub fn noise_distribution_check(n: usize, p: f64, samples: u64, alpha: f64, seed: u64) -> CheckResult {
    let noise = NoiseSpec::new(p).unwrap();
    let x = Bitstring::all_zeros(n);
    let mut rng = RngHandle::new(seed);
    // cell 0: unchanged; cell 1 + i: bit i flipped
    let mut counts = vec![0u64; n + 1];
    for _ in 0..samples {
        let y = noisy_variant(&x, noise, &mut rng);
        if y.count_ones() == 0 {
            counts[0] += 1;
        } else {
            let i = (0..n).find(|&i| y.get(i)).unwrap();
            counts[1 + i] += 1;
        }
    }
    let mut expected = vec![p / n as f64; n + 1];
    expected[0] = 1.0 - p;
    let gof = stats::chi_square_gof(&counts, &expected, alpha);
    CheckResult::new(
        "noise-distribution",
        gof.pass,
        format!(
            "chi2 = {:.3} vs critical {:.3} (df {}, alpha {alpha})",
            gof.statistic, gof.critical, gof.df
        ),
    )
}

/// Chi-squared test that the mutated position is uniform.
pub fn mutation_uniformity_check(n: usize, samples: u64, alpha: f64, seed: u64) -> CheckResult {
    let mut rng = RngHandle::new(seed);
    let x = Bitstring::all_zeros(n);
    let mut counts = vec![0u64; n];
    for _ in 0..samples {
        let y = mutate_one_bit(&x, &mut rng);
        let i = (0..n).find(|&i| y.get(i)).unwrap();
        counts[i] += 1;
    }
    let expected = vec![1.0 / n as f64; n];
    let gof = stats::chi_square_gof(&counts, &expected, alpha);
    CheckResult::new(
        "mutation-uniformity",
        gof.pass,
        format!(
            "chi2 = {:.3} vs critical {:.3} (df {}, alpha {alpha})",
            gof.statistic, gof.critical, gof.df
        ),
    )
}

/// Chi-squared test that parents are drawn uniformly from the population
/// multiset, via the step transcript of a fixed cached population.
pub fn parent_selection_check(size: usize, samples: u64, alpha: f64, seed: u64) -> CheckResult {
    use crate::algorithms::CachedIndividual;
    let n = size;
    let members: Vec<CachedIndividual> = (0..size)
        .map(|k| {
            let mut genome = Bitstring::all_zeros(n);
            for i in 0..k {
                genome = genome.flipped(i);
            }
            let value = crate::objective::one_min_max(&genome);
            CachedIndividual::new(genome, value)
        })
        .collect();
    let base = CachedPopulation::from_members(members, 0);
    let mut rng = RngHandle::new(seed);
    let mut counts = vec![0u64; size];
    for _ in 0..samples {
        let mut pop = base.clone();
        let mut evaluator = NoisyEvaluator::new(NoiseSpec::noiseless());
        let report = pop.step(&mut evaluator, &mut rng);
        counts[report.parent] += 1;
    }
    let expected = vec![1.0 / size as f64; size];
    let gof = stats::chi_square_gof(&counts, &expected, alpha);
    CheckResult::new(
        "parent-selection-uniformity",
        gof.pass,
        format!(
            "chi2 = {:.3} vs critical {:.3} (df {}, alpha {alpha})",
            gof.statistic, gof.critical, gof.df
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let results = run_suite(ValidationProfile::quick(), 0);
        for r in &results {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
        assert_eq!(results.len(), 7);
    }
}
