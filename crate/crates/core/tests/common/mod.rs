//! Shared helpers for the integration suites: exhaustive one-step
//! transition distributions, written against the update-rule definitions
//! with their own tiny genome/dominance machinery so they stay independent
//! of the library implementation.

use std::collections::HashMap;

use semo_core::algorithms::{CachedIndividual, CachedPopulation, ReevalPopulation};
use semo_core::{Bitstring, NoiseSpec, NoisyEvaluator, ObjectiveVector, RngHandle};

/// Genomes as plain bitmasks over `n <= 16` bits; bit `i` of the mask is
/// position `i` of the string.
pub type Mask = u16;

pub fn mask_to_string(mask: Mask, n: usize) -> String {
    (0..n).map(|i| if mask >> i & 1 == 1 { '1' } else { '0' }).collect()
}

fn ones(mask: Mask) -> u64 {
    mask.count_ones() as u64
}

fn value(mask: Mask, n: usize) -> (u64, u64) {
    (ones(mask), n as u64 - ones(mask))
}

fn weakly_dominates(a: (u64, u64), b: (u64, u64)) -> bool {
    a.0 >= b.0 && a.1 >= b.1
}

/// A distribution over canonicalized next populations.
pub type Distribution = HashMap<String, f64>;

/// Adds probability mass to a canonical outcome.
fn add(dist: &mut Distribution, key: String, prob: f64) {
    *dist.entry(key).or_insert(0.0) += prob;
}

/// Canonical form of a cached population: sorted `genome:value` entries.
pub fn canonical_cached(entries: &mut [(String, (u64, u64))]) -> String {
    entries.sort();
    entries
        .iter()
        .map(|(g, (a, b))| format!("{g}:{a},{b}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// Canonical form of a reevaluating population: sorted genome strings.
pub fn canonical_reeval(genomes: &mut [String]) -> String {
    genomes.sort();
    genomes.join(";")
}

/// Exact one-step distribution of the cached rule from a fixed population:
/// enumerate parent choice, flipped bit and noise outcome; the offspring
/// always enters and displaces the member sharing its first component.
pub fn cached_step_distribution(members: &[(Mask, (u64, u64))], n: usize, p: f64) -> Distribution {
    let mut dist = Distribution::new();
    let m = members.len() as f64;
    for &(parent, _) in members {
        for bit in 0..n {
            let offspring = parent ^ (1 << bit);
            // noise outcome: unchanged with 1-p, or one flipped position
            let mut outcomes: Vec<(Mask, f64)> = vec![(offspring, 1.0 - p)];
            for noise_bit in 0..n {
                outcomes.push((offspring ^ (1 << noise_bit), p / n as f64));
            }
            for (evaluated, noise_prob) in outcomes {
                let w = value(evaluated, n);
                let mut next: Vec<(String, (u64, u64))> = members
                    .iter()
                    .filter(|(_, v)| v.0 != w.0)
                    .map(|&(g, v)| (mask_to_string(g, n), v))
                    .collect();
                next.push((mask_to_string(offspring, n), w));
                let prob = (1.0 / m) * (1.0 / n as f64) * noise_prob;
                add(&mut dist, canonical_cached(&mut next), prob);
            }
        }
    }
    dist
}

const ORDERS3: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// The elimination bookkeeping, restated from its definition: skip an
/// element iff a previously recorded value strictly dominates its value,
/// otherwise displace every survivor it weakly dominates.
fn oracle_elim(order: &[usize], values: &[(u64, u64)]) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    let mut recorded: Vec<(u64, u64)> = Vec::new();
    for &i in order {
        let v = values[i];
        if recorded.iter().any(|&r| weakly_dominates(r, v) && r != v) {
            continue;
        }
        kept.retain(|&g| !weakly_dominates(v, values[g]));
        kept.push(i);
        recorded.push(v);
    }
    kept
}

/// Exact one-step distribution of the reevaluating rule from a fixed
/// two-member population: enumerate parent, flipped bit, visit order of the
/// three extended members and the independent noise outcome of each
/// evaluation.
pub fn reeval_step_distribution(members: [Mask; 2], n: usize, p: f64) -> Distribution {
    let mut dist = Distribution::new();
    // per-element noise outcomes: unchanged or one flipped position
    let noise_outcomes = |mask: Mask| -> Vec<(Mask, f64)> {
        let mut outcomes = vec![(mask, 1.0 - p)];
        for bit in 0..n {
            outcomes.push((mask ^ (1 << bit), p / n as f64));
        }
        outcomes
    };
    for parent in 0..2usize {
        for bit in 0..n {
            let offspring = members[parent] ^ (1 << bit);
            let extended = [members[0], members[1], offspring];
            for order in &ORDERS3 {
                for (e0, p0) in noise_outcomes(extended[0]) {
                    for (e1, p1) in noise_outcomes(extended[1]) {
                        for (e2, p2) in noise_outcomes(extended[2]) {
                            let values = [value(e0, n), value(e1, n), value(e2, n)];
                            let kept = oracle_elim(order, &values);
                            let mut genomes: Vec<String> =
                                kept.iter().map(|&i| mask_to_string(extended[i], n)).collect();
                            let prob =
                                0.5 * (1.0 / n as f64) * (1.0 / 6.0) * p0 * p1 * p2;
                            add(&mut dist, canonical_reeval(&mut genomes), prob);
                        }
                    }
                }
            }
        }
    }
    dist
}

/// Total variation distance between an expected distribution and observed
/// counts.
pub fn total_variation(expected: &Distribution, observed: &HashMap<String, u64>, samples: u64) -> f64 {
    let mut keys: Vec<&String> = expected.keys().collect();
    for k in observed.keys() {
        if !expected.contains_key(k) {
            keys.push(k);
        }
    }
    let mut tv = 0.0;
    for key in keys {
        let e = expected.get(key).copied().unwrap_or(0.0);
        let o = observed.get(key).copied().unwrap_or(0) as f64 / samples as f64;
        tv += (e - o).abs();
    }
    tv / 2.0
}

/// Samples the library's cached step from a fixed population.
pub fn sample_cached_steps(
    members: &[(Mask, (u64, u64))],
    n: usize,
    p: f64,
    samples: u64,
    seed: u64,
) -> HashMap<String, u64> {
    let base: Vec<CachedIndividual> = members
        .iter()
        .map(|&(mask, (a, b))| {
            let genome: Bitstring = mask_to_string(mask, n).parse().unwrap();
            CachedIndividual::new(genome, ObjectiveVector::pair(a, b))
        })
        .collect();
    let base = CachedPopulation::from_members(base, 0);
    let noise = NoiseSpec::new(p).unwrap();
    let mut rng = RngHandle::new(seed);
    let mut counts: HashMap<String, u64> = HashMap::new();
    for _ in 0..samples {
        let mut pop = base.clone();
        let mut evaluator = NoisyEvaluator::new(noise);
        pop.step(&mut evaluator, &mut rng);
        let mut entries: Vec<(String, (u64, u64))> = pop
            .members()
            .iter()
            .map(|m| {
                (
                    m.genome().to_string(),
                    (m.value().values()[0], m.value().values()[1]),
                )
            })
            .collect();
        *counts.entry(canonical_cached(&mut entries)).or_insert(0) += 1;
    }
    counts
}

/// Samples the library's reevaluating step from a fixed population.
pub fn sample_reeval_steps(
    members: [Mask; 2],
    n: usize,
    p: f64,
    samples: u64,
    seed: u64,
) -> HashMap<String, u64> {
    let base: Vec<Bitstring> = members
        .iter()
        .map(|&mask| mask_to_string(mask, n).parse().unwrap())
        .collect();
    let base = ReevalPopulation::from_members(base, 0);
    let noise = NoiseSpec::new(p).unwrap();
    let mut rng = RngHandle::new(seed);
    let mut counts: HashMap<String, u64> = HashMap::new();
    for _ in 0..samples {
        let mut pop = base.clone();
        let mut evaluator = NoisyEvaluator::new(noise);
        pop.step(&mut evaluator, &mut rng);
        let mut genomes: Vec<String> = pop.members().iter().map(|m| m.to_string()).collect();
        *counts.entry(canonical_reeval(&mut genomes)).or_insert(0) += 1;
    }
    counts
}
