//! Elimination pass: reduce a multiset to a minimal sub-multiset whose
//! recorded values dominate every input element.
//!
//! Elements are visited in a uniformly random order and each one is
//! evaluated exactly once, on its visit. A visited element is skipped iff
//! some previously recorded value strictly dominates its value; otherwise it
//! displaces every current survivor it weakly dominates. Recorded values are
//! append-only and are kept even after their element is displaced, so later
//! visitors are still filtered against them.

use rand::seq::SliceRandom;

use crate::objective::ObjectiveVector;
use crate::rng::RngHandle;

/// Result of one elimination pass over a multiset of `count` elements,
/// identified by their input index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElimOutcome {
    /// Indices of surviving elements, ascending.
    pub kept: Vec<usize>,
    /// The value recorded for each input element (`values[i]` belongs to
    /// element `i`), regardless of whether it survived.
    pub values: Vec<ObjectiveVector>,
}

/// Runs the elimination pass with an arbitrary (possibly random) evaluation
/// function. `evaluate` is called exactly once per element, in visit order,
/// and receives the pass's random stream for its own draws.
pub fn elim_with<F>(count: usize, rng: &mut RngHandle, mut evaluate: F) -> ElimOutcome
where
    F: FnMut(usize, &mut RngHandle) -> ObjectiveVector,
{
    let (order, values) = visit_and_evaluate(count, rng, &mut evaluate);
    let kept = survivors_general(&order, &values);
    ElimOutcome { kept, values }
}

/// Elimination pass specialized to one-min-max-shaped values (bi-objective,
/// components summing to a common total). For such values no recorded value
/// ever strictly dominates another, and weak dominance degenerates to
/// equality of the first component, so the last visitor per first component
/// survives. Produces exactly the same outcome as [`elim_with`].
pub(crate) fn elim_one_min_max<F>(n: usize, count: usize, rng: &mut RngHandle, mut evaluate: F) -> ElimOutcome
where
    F: FnMut(usize, &mut RngHandle) -> ObjectiveVector,
{
    let (order, values) = visit_and_evaluate(count, rng, &mut evaluate);
    let kept = survivors_one_min_max(n, &order, &values);
    #[cfg(any(test, feature = "strict"))]
    assert_eq!(
        kept,
        survivors_general(&order, &values),
        "one-min-max fast path diverged from the general bookkeeping"
    );
    ElimOutcome { kept, values }
}

// Draws the visit order, then evaluates each element on its visit. The
// bookkeeping below consumes no randomness, so evaluating up front leaves
// the draw sequence identical to an interleaved implementation.
fn visit_and_evaluate<F>(
    count: usize,
    rng: &mut RngHandle,
    evaluate: &mut F,
) -> (Vec<usize>, Vec<ObjectiveVector>)
where
    F: FnMut(usize, &mut RngHandle) -> ObjectiveVector,
{
    assert!(count > 0, "elimination needs a nonempty multiset");
    let mut order: Vec<usize> = (0..count).collect();
    order.shuffle(rng);
    let mut values: Vec<Option<ObjectiveVector>> = vec![None; count];
    for &i in &order {
        values[i] = Some(evaluate(i, rng));
    }
    (order, values.into_iter().map(Option::unwrap).collect())
}

fn survivors_general(order: &[usize], values: &[ObjectiveVector]) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    // Recorded values, including those of displaced elements.
    let mut recorded: Vec<usize> = Vec::new();
    for &i in order {
        let v = &values[i];
        if recorded.iter().any(|&r| values[r].strictly_dominates(v)) {
            continue;
        }
        kept.retain(|&g| !v.weakly_dominates(&values[g]));
        kept.push(i);
        recorded.push(i);
    }
    kept.sort_unstable();
    kept
}

fn survivors_one_min_max(n: usize, order: &[usize], values: &[ObjectiveVector]) -> Vec<usize> {
    let mut slot: Vec<Option<usize>> = vec![None; n + 1];
    for &i in order {
        let first = values[i].first() as usize;
        assert!(first <= n, "value {} outside objective range 0..={n}", values[i]);
        slot[first] = Some(i);
    }
    let mut kept: Vec<usize> = slot.into_iter().flatten().collect();
    kept.sort_unstable();
    kept
}
