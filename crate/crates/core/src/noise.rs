//! One-bit prior noise: with probability `p` the evaluated point has one
//! uniformly chosen bit flipped before the objective is computed. Each
//! evaluation draws fresh, independent noise.

use std::fmt;

use rand::Rng;

use crate::bitstring::Bitstring;
use crate::objective::{one_min_max, ObjectiveVector};

/// The noise rate `p` in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    p: f64,
}

impl NoiseSpec {
    pub fn new(p: f64) -> Result<Self, NoiseRateError> {
        if p.is_finite() && (0.0..=1.0).contains(&p) {
            Ok(NoiseSpec { p })
        } else {
            Err(NoiseRateError(p))
        }
    }

    pub fn noiseless() -> Self {
        NoiseSpec { p: 0.0 }
    }

    pub fn rate(&self) -> f64 {
        self.p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseRateError(pub f64);

impl fmt::Display for NoiseRateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "noise rate {} is not in [0, 1]", self.0)
    }
}

impl std::error::Error for NoiseRateError {}

/// The perturbed copy of `x` seen by one noisy evaluation: `x` itself with
/// probability `1 - p`, otherwise `x` with one uniformly chosen bit flipped.
///
/// One Bernoulli draw is always consumed; the position draw only happens on
/// a flip. This keeps the draw count per evaluation deterministic given the
/// flip outcome, so seeded runs replay exactly.
pub fn noisy_variant<R: Rng + ?Sized>(x: &Bitstring, noise: NoiseSpec, rng: &mut R) -> Bitstring {
    if rng.random_bool(noise.p) {
        let i = rng.random_range(0..x.len());
        x.flipped(i)
    } else {
        x.clone()
    }
}

/// Noisy objective oracle. Owns the evaluation counter: every call to
/// [`NoisyEvaluator::evaluate`] is one fitness evaluation, including initial
/// evaluations and every per-element call inside elimination passes.
#[derive(Clone, Debug)]
pub struct NoisyEvaluator {
    noise: NoiseSpec,
    evaluations: u64,
}

impl NoisyEvaluator {
    pub fn new(noise: NoiseSpec) -> Self {
        NoisyEvaluator {
            noise,
            evaluations: 0,
        }
    }

    pub fn noise(&self) -> NoiseSpec {
        self.noise
    }

    /// Total evaluations consumed so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// One noisy fitness evaluation: the one-min-max value of a fresh noisy
    /// variant of `x`.
    pub fn evaluate<R: Rng + ?Sized>(&mut self, x: &Bitstring, rng: &mut R) -> ObjectiveVector {
        self.evaluations += 1;
        one_min_max(&noisy_variant(x, self.noise, rng))
    }
}
