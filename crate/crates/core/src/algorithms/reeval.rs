//! Archive search with reevaluation: every member is evaluated afresh in
//! every iteration, inside the elimination pass that forms the next
//! population.

use rand::Rng;

use crate::algorithms::elim::{elim_one_min_max, ElimOutcome};
use crate::bitstring::{mutate_one_bit, Bitstring};
use crate::noise::NoisyEvaluator;
use crate::rng::RngHandle;

/// What one reevaluating step did. `elim.values` are indexed by the
/// extended population (current members in order, then the offspring last).
#[derive(Clone, Debug)]
pub struct ReevalStep {
    pub parent: usize,
    pub elim: ElimOutcome,
}

/// Population of the reevaluating variant: a plain multiset of genomes.
/// No values are stored between iterations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReevalPopulation {
    members: Vec<Bitstring>,
    iteration: u64,
}

impl ReevalPopulation {
    /// Fresh population: one uniformly random genome, not yet evaluated.
    pub fn init(n: usize, rng: &mut RngHandle) -> Self {
        ReevalPopulation {
            members: vec![Bitstring::random(n, rng)],
            iteration: 0,
        }
    }

    pub fn from_members(members: Vec<Bitstring>, iteration: u64) -> Self {
        assert!(!members.is_empty(), "population must be nonempty");
        let n = members[0].len();
        assert!(members.iter().all(|m| m.len() == n), "members must share one length");
        ReevalPopulation { members, iteration }
    }

    pub fn members(&self) -> &[Bitstring] {
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
        self.members[0].len()
    }

    /// One iteration: draw a uniform parent, flip one bit, then reduce the
    /// extended multiset with one fresh evaluation per element. Consumes
    /// exactly `len() + 1` evaluations.
    pub fn step(&mut self, evaluator: &mut NoisyEvaluator, rng: &mut RngHandle) -> ReevalStep {
        let n = self.n();
        let parent = rng.random_range(0..self.members.len());
        let offspring = mutate_one_bit(&self.members[parent], rng);

        let mut extended = std::mem::take(&mut self.members);
        extended.push(offspring);
        let elim = elim_one_min_max(n, extended.len(), rng, |i, rng| {
            evaluator.evaluate(&extended[i], rng)
        });

        let mut keep = vec![false; extended.len()];
        for &i in &elim.kept {
            keep[i] = true;
        }
        self.members = extended
            .into_iter()
            .zip(keep)
            .filter_map(|(genome, kept)| kept.then_some(genome))
            .collect();
        self.iteration += 1;
        ReevalStep { parent, elim }
    }

    /// Like [`ReevalPopulation::step`], but while fewer than `limit`
    /// iterations have been executed (`None` = no limit) any missing extreme
    /// true value is patched back in afterwards: the all-zeros genome for 0
    /// and the all-ones genome for `n`. The appended genomes carry no value;
    /// the next iteration reevaluates everything anyway.
    pub fn step_keeping_extremes(
        &mut self,
        evaluator: &mut NoisyEvaluator,
        limit: Option<u64>,
        rng: &mut RngHandle,
    ) -> ReevalStep {
        let report = self.step(evaluator, rng);
        if limit.is_none_or(|k| self.iteration < k) {
            let n = self.n();
            let mut have_zero = false;
            let mut have_full = false;
            for m in &self.members {
                have_zero |= m.count_ones() == 0;
                have_full |= m.count_ones() == n as u64;
            }
            if !have_zero {
                self.members.push(Bitstring::all_zeros(n));
            }
            if !have_full {
                self.members.push(Bitstring::all_ones(n));
            }
        }
        report
    }
}
