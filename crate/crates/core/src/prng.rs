//! 32-bit LFSR streams and master-seed expansion.
//!
//! Every random draw in the architecture comes from a bank of independent
//! 32-bit LFSRs over the feedback polynomial `r^32 + r^22 + r^2 + 1`. Each unit
//! steps once per generation and the full 32-bit state is its output word.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// Exponents with a nonzero coefficient in the feedback polynomial, excluding
/// the constant term.
pub const FEEDBACK_EXPONENTS: [u32; 3] = [2, 22, 32];

/// Galois feedback mask: bit `i - 1` is set for each exponent `i`.
pub const FEEDBACK_MASK: u32 = feedback_mask(&FEEDBACK_EXPONENTS);

/// Builds a right-shift Galois feedback mask from polynomial exponents.
pub const fn feedback_mask(exponents: &[u32]) -> u32 {
    let mut mask = 0u32;
    let mut i = 0;
    while i < exponents.len() {
        mask |= 1 << (exponents[i] - 1);
        i += 1;
    }
    mask
}

/// Nonzero 32-bit shift-register state.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lfsr32State(u32);

impl Lfsr32State {
    pub fn new(state: u32) -> Result<Self> {
        if state == 0 {
            return Err(Error::ZeroLfsrState);
        }
        Ok(Lfsr32State(state))
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.0
    }

    /// One Galois right-shift step. The result is never zero because the
    /// mask has its top bit set, so the step is a bijection on nonzero words.
    #[inline]
    #[must_use]
    pub fn step(self) -> Self {
        let out = self.0 & 1;
        let mut next = self.0 >> 1;
        if out == 1 {
            next ^= FEEDBACK_MASK;
        }
        Lfsr32State(next)
    }
}

impl fmt::Debug for Lfsr32State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lfsr32State({:#010x})", self.0)
    }
}

/// Steps a raw state word. Rejects zero.
pub fn lfsr_step(state: u32) -> Result<u32> {
    Ok(Lfsr32State::new(state)?.step().value())
}

/// The `bits` most significant bits of `v`, as an integer in `[0, 2^bits)`.
pub fn top_bits(v: u32, bits: u32) -> Result<u32> {
    if !(1..=32).contains(&bits) {
        return Err(Error::Argument(format!(
            "top_bits width {bits} outside 1..=32"
        )));
    }
    Ok(top_bits_unchecked(v, bits))
}

#[inline]
pub(crate) fn top_bits_unchecked(v: u32, bits: u32) -> u32 {
    debug_assert!((1..=32).contains(&bits));
    ((v as u64) >> (32 - bits)) as u32
}

/// `ceil(log2(n))` for `n >= 1`.
pub fn ceil_log2(n: u64) -> u32 {
    debug_assert!(n >= 1);
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeds derived from one master seed, each tagged with the unit it feeds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedPlan {
    pub master_seed: u64,
    pub assignments: Vec<(String, u32)>,
}

impl SeedPlan {
    pub fn seeds(&self) -> impl Iterator<Item = u32> + '_ {
        self.assignments.iter().map(|(_, s)| *s)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Replaces the placeholder labels, in order. Panics if the label count
    /// differs from the seed count.
    pub fn relabel<I, S>(mut self, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut n = 0;
        for (slot, label) in self.assignments.iter_mut().zip(labels) {
            slot.0 = label.into();
            n += 1;
        }
        assert_eq!(n, self.assignments.len(), "label count mismatch");
        self
    }
}

/// Derives `count` nonzero, pairwise-distinct 32-bit seeds from `master`.
///
/// The generator is the split-mix sequence: add the golden-ratio constant,
/// then apply the xor-shift-multiply finalizer; the low 32 bits are kept and
/// zeros and repeats are skipped.
pub fn expand_seeds(master: u64, count: usize) -> SeedPlan {
    let mut counter = master;
    let mut seen = HashSet::with_capacity(count);
    let mut assignments = Vec::with_capacity(count);
    while assignments.len() < count {
        counter = counter.wrapping_add(GOLDEN_GAMMA);
        let seed = mix64(counter) as u32;
        if seed != 0 && seen.insert(seed) {
            assignments.push((format!("seed{}", assignments.len()), seed));
        }
    }
    SeedPlan {
        master_seed: master,
        assignments,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_from_exponents() {
        assert_eq!(FEEDBACK_MASK, 0x8020_0002);
    }

    #[test]
    fn step_examples() {
        assert_eq!(lfsr_step(0x0000_0001).unwrap(), 0x8020_0002);
        assert_eq!(lfsr_step(0x0000_0002).unwrap(), 0x0000_0001);
        assert!(matches!(lfsr_step(0), Err(Error::ZeroLfsrState)));
        assert!(Lfsr32State::new(0).is_err());
    }

    #[test]
    fn walk_stays_nonzero() {
        let mut s = Lfsr32State::new(0x0000_ABCD).unwrap();
        for _ in 0..(1 << 16) {
            s = s.step();
            assert_ne!(s.value(), 0);
        }
    }

    // Cycle length measured by brute force with a hash map walk. The printed
    // polynomial factors as (x+1)^4 (x^3+x^2+1)^2 (x^5+x^3+1)^2
    // (x^6+x^5+x^4+x+1)^2, so no cycle is longer than 7812.
    #[test]
    fn cycle_length_from_abcd() {
        let start = Lfsr32State::new(0x0000_ABCD).unwrap();
        let mut s = start.step();
        let mut n = 1u32;
        while s != start {
            s = s.step();
            n += 1;
        }
        assert_eq!(n, 3906);
    }

    #[test]
    fn step_is_injective_on_sample() {
        let mut images = HashSet::new();
        for x in 1u32..=(1 << 16) {
            assert!(images.insert(lfsr_step(x).unwrap()));
        }
        // A second, scattered sample.
        let mut images = HashSet::new();
        let mut inputs = HashSet::new();
        for x in 1u32..=(1 << 16) {
            let v = x.wrapping_mul(0x9E37_79B9);
            if v != 0 && inputs.insert(v) {
                assert!(images.insert(lfsr_step(v).unwrap()));
            }
        }
    }

    #[test]
    fn top_bits_examples() {
        assert_eq!(top_bits(0xF000_0000, 4).unwrap(), 15);
        assert_eq!(top_bits(0x8000_0000, 1).unwrap(), 1);
        assert_eq!(top_bits(0x1234_5678, 8).unwrap(), 0x12);
        assert_eq!(top_bits(0xDEAD_BEEF, 32).unwrap(), 0xDEAD_BEEF);
        assert!(top_bits(1, 0).is_err());
        assert!(top_bits(1, 33).is_err());
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(11), 4);
        assert_eq!(ceil_log2(32), 5);
        assert_eq!(ceil_log2(33), 6);
    }

    #[test]
    fn expand_seeds_examples() {
        // First split-mix output for state 0 is 0xE220A8397B1DCDAF.
        let plan = expand_seeds(0, 1);
        assert_eq!(plan.assignments, vec![("seed0".to_string(), 0x7B1D_CDAF)]);

        for master in [0u64, 1, 42, u64::MAX] {
            let plan = expand_seeds(master, 200);
            assert_eq!(plan.len(), 200);
            let distinct: HashSet<u32> = plan.seeds().collect();
            assert_eq!(distinct.len(), 200);
            assert!(plan.seeds().all(|s| s != 0));
            assert_eq!(plan, expand_seeds(master, 200));
        }
    }

    #[test]
    fn relabel_keeps_seeds() {
        let plan = expand_seeds(9, 3);
        let seeds: Vec<u32> = plan.seeds().collect();
        let plan = plan.relabel(["a", "b", "c"]);
        assert_eq!(plan.assignments[1].0, "b");
        assert_eq!(plan.seeds().collect::<Vec<_>>(), seeds);
    }
}
