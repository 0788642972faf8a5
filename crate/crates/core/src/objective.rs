//! Integer objective vectors and the componentwise dominance partial order.

use std::fmt;

use serde::Serialize;

use crate::bitstring::Bitstring;

/// A point in the partially ordered objective space.
///
/// Components are non-negative integers; larger is better in every
/// component. The one-min-max benchmark uses dimension 2, but dominance is
/// defined for any dimension.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct ObjectiveVector {
    values: Vec<u64>,
}

impl ObjectiveVector {
    pub fn new(values: Vec<u64>) -> Self {
        assert!(!values.is_empty(), "objective vector needs at least one component");
        ObjectiveVector { values }
    }

    /// Bi-objective convenience constructor.
    pub fn pair(a: u64, b: u64) -> Self {
        ObjectiveVector { values: vec![a, b] }
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// First component; for one-min-max values this is the number of ones.
    pub fn first(&self) -> u64 {
        self.values[0]
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// True iff every component of `self` is >= the matching component of
    /// `other`.
    pub fn weakly_dominates(&self, other: &Self) -> bool {
        assert_eq!(
            self.dim(),
            other.dim(),
            "dominance requires equal dimensions"
        );
        self.values.iter().zip(&other.values).all(|(a, b)| a >= b)
    }

    /// Weak dominance plus inequality.
    pub fn strictly_dominates(&self, other: &Self) -> bool {
        self.weakly_dominates(other) && self != other
    }
}

impl fmt::Display for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// The one-min-max objective `(ones, zeros)` of a bitstring. Every value of
/// this function is Pareto optimal and any two values with distinct first
/// components are incomparable.
pub fn one_min_max(x: &Bitstring) -> ObjectiveVector {
    let ones = x.count_ones();
    ObjectiveVector::pair(ones, x.len() as u64 - ones)
}
