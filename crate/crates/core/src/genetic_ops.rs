//! Selection, crossover and mutation units.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prng::{ceil_log2, top_bits_unchecked};
use crate::word::{ChromosomeWord, WordLayout};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    #[default]
    Minimize,
    Maximize,
}

impl SelectionMode {
    /// True when `a` strictly beats `b`.
    #[inline]
    pub fn beats(self, a: i64, b: i64) -> bool {
        match self {
            SelectionMode::Minimize => a < b,
            SelectionMode::Maximize => a > b,
        }
    }
}

impl fmt::Display for SelectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionMode::Minimize => "min",
            SelectionMode::Maximize => "max",
        })
    }
}

impl FromStr for SelectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "min" | "minimize" => Ok(SelectionMode::Minimize),
            "max" | "maximize" => Ok(SelectionMode::Maximize),
            _ => Err(Error::config("mode", format!("`{s}` is not min or max"))),
        }
    }
}

/// Index into a population of `n` (a power of two) from a 32-bit draw.
#[inline]
pub fn selection_index(r: u32, n: usize) -> usize {
    debug_assert!(n >= 2 && n.is_power_of_two());
    top_bits_unchecked(r, ceil_log2(n as u64)) as usize
}

/// Index of the winner of a two-way tournament. Ties go to the first draw.
#[inline]
pub fn tournament_index(fit: &[i64], r1: u32, r2: u32, mode: SelectionMode) -> usize {
    let i1 = selection_index(r1, fit.len());
    let i2 = selection_index(r2, fit.len());
    if mode.beats(fit[i2], fit[i1]) {
        i2
    } else {
        i1
    }
}

/// Two-way tournament over signed raw fitness values.
pub fn tournament(
    pop: &[ChromosomeWord],
    fit: &[i64],
    r1: u32,
    r2: u32,
    mode: SelectionMode,
) -> ChromosomeWord {
    assert_eq!(pop.len(), fit.len());
    pop[tournament_index(fit, r1, r2, mode)]
}

/// Single-point crossover mask: `s` keeps the tail (low bits), `!s` the head.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct CutMask {
    s: u32,
    shift: u32,
    half_bits: u32,
}

impl CutMask {
    pub fn with_shift(half_bits: u32, shift: u32) -> Self {
        debug_assert!(shift < half_bits.max(1));
        let ones = (1u32 << half_bits).wrapping_sub(1);
        CutMask {
            s: ones >> shift,
            shift,
            half_bits,
        }
    }

    #[inline]
    pub fn s(self) -> u32 {
        self.s
    }

    #[inline]
    pub fn not_s(self) -> u32 {
        !self.s & (1u32 << self.half_bits).wrapping_sub(1)
    }

    #[inline]
    pub fn shift(self) -> u32 {
        self.shift
    }
}

impl fmt::Debug for CutMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CutMask {{ s: {:0w$b}, shift: {} }}",
            self.s,
            self.shift,
            w = self.half_bits as usize
        )
    }
}

/// Width of the raw cut-point selector for `half_bits`-bit halves.
pub fn cut_selector_bits(half_bits: u32) -> u32 {
    ceil_log2(half_bits as u64 + 1)
}

/// Cut mask from a 32-bit draw. The selector can address more values than
/// there are cut points, so it is reduced modulo `half_bits`.
pub fn cut_mask(r: u32, half_bits: u32) -> CutMask {
    assert!((1..=16).contains(&half_bits));
    let sel = top_bits_unchecked(r, cut_selector_bits(half_bits));
    CutMask::with_shift(half_bits, sel % half_bits)
}

/// Head of `a` with tail of `b`, and head of `b` with tail of `a`.
#[inline]
pub fn cross_half(a: u32, b: u32, mask: CutMask) -> (u32, u32) {
    let (s, ns) = (mask.s(), mask.not_s());
    let (ha, hb) = (ns & a, ns & b);
    let (ta, tb) = (s & a, s & b);
    (ha | tb, hb | ta)
}

/// One crossover module: independent cuts for the `p` and `q` halves.
pub fn crossover_pair(
    layout: WordLayout,
    w1: ChromosomeWord,
    w2: ChromosomeWord,
    rp: u32,
    rq: u32,
) -> (ChromosomeWord, ChromosomeWord) {
    let h = layout.half_bits();
    let (p1, q1) = layout.split(w1);
    let (p2, q2) = layout.split(w2);
    let (pz1, pz2) = cross_half(p1, p2, cut_mask(rp, h));
    let (qz1, qz2) = cross_half(q1, q2, cut_mask(rq, h));
    (
        layout.concat_unchecked(pz1, qz1),
        layout.concat_unchecked(pz2, qz2),
    )
}

/// Mutation word: the top m bits of the unit's 32-bit draw.
#[inline]
pub fn mutation_word(layout: WordLayout, r: u32) -> ChromosomeWord {
    layout.truncate(top_bits_unchecked(r, layout.bits()))
}

/// `z XOR rand`; both operands fit m bits so the result does too.
#[inline]
pub fn mutate(z: ChromosomeWord, rand: ChromosomeWord) -> ChromosomeWord {
    ChromosomeWord::from_bits(z.bits() ^ rand.bits())
}

/// `P = ceil(N * MR)`: how many offspring go through a mutation unit.
pub fn mutated_count(n: usize, rate: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::config("mr", format!("mutation rate {rate} outside [0, 1]")));
    }
    let x = n as f64 * rate;
    // N * MR values like 100 * 0.07 land a hair above the integer
    let nearest = x.round();
    let p = if (x - nearest).abs() < 1e-9 { nearest } else { x.ceil() };
    Ok(p as usize)
}
