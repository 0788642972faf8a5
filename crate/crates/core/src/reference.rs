//! Brute-force reference implementations, used by the validation command
//! and the test suite to cross-check the fast paths. Deliberately written
//! against the definitions, not against the production code.

use crate::objective::ObjectiveVector;

/// True iff every input value is weakly dominated by the value of some
/// element of `subset` (indices into `values`).
pub fn dominates_all(subset: &[usize], values: &[ObjectiveVector]) -> bool {
    values
        .iter()
        .all(|v| subset.iter().any(|&g| values[g].weakly_dominates(v)))
}

/// True iff the values of `subset` are pairwise incomparable.
pub fn pairwise_incomparable(subset: &[usize], values: &[ObjectiveVector]) -> bool {
    for (i, &a) in subset.iter().enumerate() {
        for &b in &subset[i + 1..] {
            if values[a].weakly_dominates(&values[b]) || values[b].weakly_dominates(&values[a]) {
                return false;
            }
        }
    }
    true
}

/// Enumerates every sub-multiset (by index, ascending) that dominates the
/// whole input and is pairwise incomparable. Exponential; inputs are capped
/// at 20 elements.
pub fn minimal_dominant_submultisets(values: &[ObjectiveVector]) -> Vec<Vec<usize>> {
    assert!(values.len() <= 20, "brute force is limited to 20 elements");
    let mut result = Vec::new();
    for mask in 0u32..(1 << values.len()) {
        let subset: Vec<usize> = (0..values.len()).filter(|&i| mask >> i & 1 == 1).collect();
        if subset.is_empty() {
            continue;
        }
        if dominates_all(&subset, values) && pairwise_incomparable(&subset, values) {
            result.push(subset);
        }
    }
    result
}
