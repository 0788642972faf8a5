//! Archive search without reevaluation: each individual is evaluated once,
//! on entry, and keeps that stored (possibly noisy) value while it survives.

use rand::Rng;

use crate::bitstring::{mutate_one_bit, Bitstring};
use crate::noise::NoisyEvaluator;
use crate::objective::ObjectiveVector;
use crate::rng::RngHandle;

/// A population member together with the noisy value recorded when it
/// entered the population.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CachedIndividual {
    genome: Bitstring,
    value: ObjectiveVector,
}

impl CachedIndividual {
    /// Under one-bit noise a stored value is always one-min-max shaped and
    /// its first component is within one of the genome's true count.
    pub fn new(genome: Bitstring, value: ObjectiveVector) -> Self {
        assert_eq!(value.dim(), 2, "stored values are bi-objective");
        assert_eq!(
            value.values()[0] + value.values()[1],
            genome.len() as u64,
            "stored value components must sum to the genome length"
        );
        assert!(
            value.first().abs_diff(genome.count_ones()) <= 1,
            "stored first component {} too far from true count {}",
            value.first(),
            genome.count_ones()
        );
        CachedIndividual { genome, value }
    }

    pub fn genome(&self) -> &Bitstring {
        &self.genome
    }

    pub fn value(&self) -> &ObjectiveVector {
        &self.value
    }
}

/// What one step did: which parent was drawn, the offspring, and the noisy
/// value it entered with.
#[derive(Clone, Debug)]
pub struct CachedStep {
    pub parent: usize,
    pub offspring: Bitstring,
    pub value: ObjectiveVector,
}

/// Population of the non-reevaluating variant: a multiset of individuals
/// with stored values, advanced one mutation at a time.
///
/// Stored first components stay pairwise distinct (a new value displaces at
/// most the one member sharing it), so the population never exceeds `n + 1`
/// members and the set of stored first components only ever grows.
#[derive(Clone, Debug)]
pub struct CachedPopulation {
    members: Vec<CachedIndividual>,
    iteration: u64,
}

impl CachedPopulation {
    /// Fresh population: one uniformly random genome, evaluated once.
    pub fn init(n: usize, evaluator: &mut NoisyEvaluator, rng: &mut RngHandle) -> Self {
        let genome = Bitstring::random(n, rng);
        let value = evaluator.evaluate(&genome, rng);
        CachedPopulation {
            members: vec![CachedIndividual::new(genome, value)],
            iteration: 0,
        }
    }

    /// Builds a population from explicit members (diagnostics and tests).
    /// Stored first components must be pairwise distinct.
    pub fn from_members(members: Vec<CachedIndividual>, iteration: u64) -> Self {
        assert!(!members.is_empty(), "population must be nonempty");
        let mut firsts: Vec<u64> = members.iter().map(|m| m.value.first()).collect();
        firsts.sort_unstable();
        firsts.dedup();
        assert_eq!(firsts.len(), members.len(), "stored first components must be distinct");
        CachedPopulation { members, iteration }
    }

    pub fn members(&self) -> &[CachedIndividual] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn n(&self) -> usize {
        self.members[0].genome.len()
    }

    /// The stored first components, in member order.
    pub fn stored_firsts(&self) -> impl Iterator<Item = u64> + '_ {
        self.members.iter().map(|m| m.value.first())
    }

    /// One iteration: draw a uniform parent, flip one bit, evaluate the
    /// offspring once, and integrate it.
    ///
    /// The general rule rejects the offspring if some stored value strictly
    /// dominates its value and otherwise removes every member whose stored
    /// value it weakly dominates. Stored values here are one-min-max shaped,
    /// where strict dominance is impossible and weak dominance is equality
    /// of the first component, so the offspring always enters and displaces
    /// at most the one member with the same stored first component. Test and
    /// `strict` builds recheck the step against the general rule.
    pub fn step(&mut self, evaluator: &mut NoisyEvaluator, rng: &mut RngHandle) -> CachedStep {
        let parent = rng.random_range(0..self.members.len());
        let offspring = mutate_one_bit(&self.members[parent].genome, rng);
        let value = evaluator.evaluate(&offspring, rng);

        #[cfg(any(test, feature = "strict"))]
        let before: Vec<u64> = {
            self.check_against_general_rule(&value);
            self.stored_firsts().collect()
        };

        let first = value.first();
        if let Some(i) = self.members.iter().position(|m| m.value.first() == first) {
            self.members.swap_remove(i);
        }
        self.members.push(CachedIndividual::new(offspring.clone(), value.clone()));
        self.iteration += 1;

        #[cfg(any(test, feature = "strict"))]
        self.check_step_postconditions(&before, first);

        CachedStep {
            parent,
            offspring,
            value,
        }
    }

    /// Per-state invariant check. Returns a description of every violation
    /// (empty when the state is sound): distinct stored first components,
    /// population size at most `n + 1`, stored first within one of the true
    /// count, and at most three members per true count.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut violations = Vec::new();
        let n = self.n();
        if self.members.len() > n + 1 {
            violations.push(format!("population size {} exceeds n+1 = {}", self.members.len(), n + 1));
        }
        let mut seen = vec![false; n + 1];
        let mut per_true_count = vec![0u32; n + 1];
        for m in &self.members {
            let first = m.value.first();
            if first > n as u64 {
                violations.push(format!("stored first component {first} outside 0..={n}"));
                continue;
            }
            if seen[first as usize] {
                violations.push(format!("stored first component {first} occurs twice"));
            }
            seen[first as usize] = true;
            let true_count = m.genome.count_ones();
            if first.abs_diff(true_count) > 1 {
                violations.push(format!(
                    "stored first {first} differs from true count {true_count} by more than 1"
                ));
            }
            if m.value.values()[0] + m.value.values()[1] != n as u64 {
                violations.push(format!("stored value {} does not sum to {n}", m.value));
            }
            per_true_count[true_count as usize] += 1;
        }
        for (k, &count) in per_true_count.iter().enumerate() {
            if count > 3 {
                violations.push(format!("{count} members share true count {k}, limit is 3"));
            }
        }
        violations
    }

    #[cfg(any(test, feature = "strict"))]
    fn check_against_general_rule(&self, incoming: &ObjectiveVector) {
        assert!(
            !self.members.iter().any(|m| m.value.strictly_dominates(incoming)),
            "one-min-max offspring can never be strictly dominated"
        );
        for m in &self.members {
            assert_eq!(
                incoming.weakly_dominates(&m.value),
                m.value.first() == incoming.first(),
                "fast-path displacement disagrees with weak dominance for {}",
                m.value
            );
        }
    }

    #[cfg(any(test, feature = "strict"))]
    fn check_step_postconditions(&self, firsts_before: &[u64], inserted: u64) {
        // The stored-first set only ever grows.
        for &f in firsts_before {
            assert!(
                f == inserted || self.stored_firsts().any(|g| g == f),
                "stored first component {f} was lost"
            );
        }
        let violations = self.invariant_violations();
        assert!(violations.is_empty(), "step broke invariants: {violations:?}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseSpec;
    use std::collections::BTreeSet;

    fn bs(s: &str) -> Bitstring {
        s.parse().unwrap()
    }

    #[test]
    fn init_has_one_member_and_one_evaluation() {
        let mut rng = RngHandle::new(1);
        let mut eval = NoisyEvaluator::new(NoiseSpec::noiseless());
        let pop = CachedPopulation::init(6, &mut eval, &mut rng);
        assert_eq!(pop.len(), 1);
        assert_eq!(pop.iteration(), 0);
        assert_eq!(eval.evaluations(), 1);
        let m = &pop.members()[0];
        assert_eq!(m.value().first(), m.genome().count_ones());
    }

    #[test]
    fn init_genome_is_uniform_on_one_bit() {
        let mut ones = 0u32;
        let trials = 2000;
        for seed in 0..trials {
            let mut rng = RngHandle::new(seed);
            let mut eval = NoisyEvaluator::new(NoiseSpec::noiseless());
            let pop = CachedPopulation::init(1, &mut eval, &mut rng);
            let m = &pop.members()[0];
            assert_eq!(m.value().first(), m.genome().count_ones());
            ones += m.genome().count_ones() as u32;
        }
        let freq = ones as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.05, "initial one-bit genome frequency {freq}");
    }

    #[test]
    fn init_under_forced_noise_stores_the_flipped_count() {
        // find a seed whose initial genome is 000; under p=1 its stored
        // first component must be 1
        let noise = NoiseSpec::new(1.0).unwrap();
        let mut found = false;
        for seed in 0..200 {
            let mut rng = RngHandle::new(seed);
            let mut eval = NoisyEvaluator::new(noise);
            let pop = CachedPopulation::init(3, &mut eval, &mut rng);
            if pop.members()[0].genome() == &bs("000") {
                assert_eq!(pop.members()[0].value().first(), 1);
                found = true;
            }
        }
        assert!(found, "no seed produced the all-zeros initial genome");
    }

    #[test]
    fn incomparable_offspring_is_inserted_without_removal() {
        // pop {(01,(1,1))} with offspring 11 at p=0: values (1,1) and (2,0)
        // are incomparable, so the population grows
        let noise = NoiseSpec::noiseless();
        for seed in 0..100 {
            let mut rng = RngHandle::new(seed);
            let mut eval = NoisyEvaluator::new(noise);
            let mut pop = CachedPopulation::from_members(
                vec![CachedIndividual::new(bs("01"), ObjectiveVector::pair(1, 1))],
                0,
            );
            let report = pop.step(&mut eval, &mut rng);
            if report.offspring == bs("11") {
                assert_eq!(pop.len(), 2);
                let firsts: BTreeSet<u64> = pop.stored_firsts().collect();
                assert_eq!(firsts, BTreeSet::from([1, 2]));
                return;
            }
        }
        panic!("no seed produced offspring 11");
    }

    #[test]
    fn equal_value_replaces_the_old_member() {
        let noise = NoiseSpec::noiseless();
        for seed in 0..100 {
            let mut rng = RngHandle::new(seed);
            let mut eval = NoisyEvaluator::new(noise);
            let mut pop = CachedPopulation::from_members(
                vec![
                    CachedIndividual::new(bs("010"), ObjectiveVector::pair(1, 2)),
                    CachedIndividual::new(bs("011"), ObjectiveVector::pair(2, 1)),
                ],
                0,
            );
            let report = pop.step(&mut eval, &mut rng);
            if report.value.first() == 1 {
                assert_eq!(pop.len(), 2, "size unchanged on replacement");
                assert!(
                    pop.members().iter().any(|m| m.genome() == &report.offspring),
                    "offspring must be present"
                );
                return;
            }
        }
        panic!("no seed produced a replacing offspring");
    }

    #[test]
    fn each_step_consumes_exactly_one_evaluation() {
        let mut rng = RngHandle::new(3);
        let mut eval = NoisyEvaluator::new(NoiseSpec::new(0.2).unwrap());
        let mut pop = CachedPopulation::init(10, &mut eval, &mut rng);
        for i in 0..500u64 {
            pop.step(&mut eval, &mut rng);
            assert_eq!(eval.evaluations(), i + 2);
            assert_eq!(pop.iteration(), i + 1);
        }
    }

    #[test]
    fn long_noisy_run_keeps_all_invariants() {
        let mut rng = RngHandle::new(4);
        let mut eval = NoisyEvaluator::new(NoiseSpec::new(0.1).unwrap());
        let mut pop = CachedPopulation::init(20, &mut eval, &mut rng);
        let mut previous: BTreeSet<u64> = pop.stored_firsts().collect();
        for _ in 0..5000 {
            pop.step(&mut eval, &mut rng);
            let current: BTreeSet<u64> = pop.stored_firsts().collect();
            assert!(previous.is_subset(&current), "stored value set shrank");
            assert!(pop.invariant_violations().is_empty());
            previous = current;
        }
        assert!(pop.len() <= 21);
    }

    #[test]
    fn noiseless_run_never_loses_true_values() {
        let mut rng = RngHandle::new(5);
        let mut eval = NoisyEvaluator::new(NoiseSpec::noiseless());
        let mut pop = CachedPopulation::init(16, &mut eval, &mut rng);
        let mut seen: BTreeSet<u64> = pop.members().iter().map(|m| m.genome().count_ones()).collect();
        for _ in 0..3000 {
            pop.step(&mut eval, &mut rng);
            let now: BTreeSet<u64> = pop.members().iter().map(|m| m.genome().count_ones()).collect();
            assert!(seen.is_subset(&now), "a true objective value was lost at p=0");
            seen = now;
        }
    }

    #[test]
    fn parent_selection_is_uniform() {
        // chi-square over parent indices at significance 0.01
        let noise = NoiseSpec::noiseless();
        let members: Vec<CachedIndividual> = ["00000", "00001", "00011", "00111", "01111"]
            .iter()
            .map(|s| {
                let g = bs(s);
                let v = crate::objective::one_min_max(&g);
                CachedIndividual::new(g, v)
            })
            .collect();
        let base = CachedPopulation::from_members(members, 0);
        let mut rng = RngHandle::new(6);
        let samples = 100_000u64;
        let mut counts = vec![0u64; base.len()];
        for _ in 0..samples {
            let mut pop = base.clone();
            let mut eval = NoisyEvaluator::new(noise);
            let report = pop.step(&mut eval, &mut rng);
            counts[report.parent] += 1;
        }
        let expected = vec![1.0 / base.len() as f64; base.len()];
        let gof = crate::stats::chi_square_gof(&counts, &expected, 0.01);
        assert!(gof.pass, "parent selection chi-square {} > {}", gof.statistic, gof.critical);
    }

    #[test]
    #[should_panic]
    fn duplicate_stored_firsts_are_rejected() {
        CachedPopulation::from_members(
            vec![
                CachedIndividual::new(bs("01"), ObjectiveVector::pair(1, 1)),
                CachedIndividual::new(bs("10"), ObjectiveVector::pair(1, 1)),
            ],
            0,
        );
    }
}
