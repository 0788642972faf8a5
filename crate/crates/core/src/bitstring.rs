//! Fixed-length packed bitstrings, the search-space elements.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

/// A fixed-length bit vector over `{0,1}^n`.
///
/// Bits are packed into 64-bit words and the number of ones is cached, so
/// objective evaluation is O(1) and single-bit edits are O(n/64). The length
/// is fixed at construction; all mutation operators return fresh copies.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bitstring {
    words: Vec<u64>,
    len: usize,
    ones: u64,
}

impl Bitstring {
    /// The all-zeros string of length `n`.
    pub fn all_zeros(n: usize) -> Self {
        assert!(n >= 1, "bitstring length must be at least 1");
        Bitstring {
            words: vec![0; n.div_ceil(64)],
            len: n,
            ones: 0,
        }
    }

    /// The all-ones string of length `n`.
    pub fn all_ones(n: usize) -> Self {
        let mut s = Self::all_zeros(n);
        for w in &mut s.words {
            *w = u64::MAX;
        }
        s.mask_tail();
        s.ones = n as u64;
        s
    }

    /// A uniformly random string of length `n`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut s = Self::all_zeros(n);
        for w in &mut s.words {
            *w = rng.random();
        }
        s.mask_tail();
        s.ones = s.words.iter().map(|w| u64::from(w.count_ones())).sum();
        s
    }

    /// Number of bit positions.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at position `i` (0-based).
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// A copy of this string with bit `i` toggled.
    pub fn flipped(&self, i: usize) -> Self {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mut s = self.clone();
        s.words[i / 64] ^= 1 << (i % 64);
        if s.words[i / 64] >> (i % 64) & 1 == 1 {
            s.ones += 1;
        } else {
            s.ones -= 1;
        }
        s
    }

    /// Number of one-bits (the first one-min-max objective).
    pub fn count_ones(&self) -> u64 {
        self.ones
    }

    // Clears the unused bits of the last word so that equality, hashing and
    // popcounts can work word-wise.
    fn mask_tail(&mut self) {
        let used = self.len % 64;
        if used != 0 {
            *self.words.last_mut().unwrap() &= (1 << used) - 1;
        }
    }
}

/// A copy of `x` with exactly one uniformly chosen bit flipped.
pub fn mutate_one_bit<R: Rng + ?Sized>(x: &Bitstring, rng: &mut R) -> Bitstring {
    let i = rng.random_range(0..x.len());
    x.flipped(i)
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bitstring({self})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseBitstringError {
    Empty,
    InvalidChar { pos: usize, ch: char },
}

impl fmt::Display for ParseBitstringError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseBitstringError::Empty => write!(f, "bitstring must not be empty"),
            ParseBitstringError::InvalidChar { pos, ch } => {
                write!(f, "invalid character {ch:?} at position {pos}, expected '0' or '1'")
            }
        }
    }
}

impl std::error::Error for ParseBitstringError {}

impl FromStr for Bitstring {
    type Err = ParseBitstringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(ParseBitstringError::Empty);
        }
        let mut out = Bitstring::all_zeros(s.len());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => {
                    out.words[i / 64] |= 1 << (i % 64);
                    out.ones += 1;
                }
                _ => return Err(ParseBitstringError::InvalidChar { pos: i, ch }),
            }
        }
        Ok(out)
    }
}
