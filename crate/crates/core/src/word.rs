//! Chromosome words, the `px ∥ qx` encoding and the two's-complement
//! fixed-point codec shared by every ROM value.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An m-bit chromosome. Only meaningful together with its [`WordLayout`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ChromosomeWord(u32);

impl ChromosomeWord {
    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub(crate) fn from_bits(bits: u32) -> Self {
        ChromosomeWord(bits)
    }
}

impl fmt::Debug for ChromosomeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChromosomeWord({:#x})", self.0)
    }
}

/// Width of a chromosome word: `m` bits, split into two `m/2`-bit halves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WordLayout {
    m: u32,
}

impl WordLayout {
    pub const MIN_BITS: u32 = 4;
    pub const MAX_BITS: u32 = 32;

    pub fn new(m: u32) -> Result<Self> {
        if !m.is_multiple_of(2) || !(Self::MIN_BITS..=Self::MAX_BITS).contains(&m) {
            return Err(Error::config(
                "m",
                format!("chromosome width {m} must be even and within 4..=32"),
            ));
        }
        Ok(WordLayout { m })
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.m
    }

    #[inline]
    pub fn half_bits(self) -> u32 {
        self.m / 2
    }

    #[inline]
    pub fn word_mask(self) -> u32 {
        low_mask32(self.m)
    }

    #[inline]
    pub fn half_mask(self) -> u32 {
        low_mask32(self.m / 2)
    }

    pub fn word(self, bits: u32) -> Result<ChromosomeWord> {
        if bits & !self.word_mask() != 0 {
            return Err(Error::Argument(format!(
                "word {bits:#x} does not fit in {} bits",
                self.m
            )));
        }
        Ok(ChromosomeWord(bits))
    }

    /// Keeps the low m bits.
    #[inline]
    pub fn truncate(self, bits: u32) -> ChromosomeWord {
        ChromosomeWord(bits & self.word_mask())
    }

    /// `(px, qx)`: the most and least significant halves.
    #[inline]
    pub fn split(self, x: ChromosomeWord) -> (u32, u32) {
        let h = self.half_bits();
        ((x.0 >> h) & self.half_mask(), x.0 & self.half_mask())
    }

    pub fn concat(self, p: u32, q: u32) -> Result<ChromosomeWord> {
        let mask = self.half_mask();
        if p & !mask != 0 || q & !mask != 0 {
            return Err(Error::Argument(format!(
                "halves ({p:#x}, {q:#x}) overflow {} bits",
                self.half_bits()
            )));
        }
        Ok(self.concat_unchecked(p, q))
    }

    #[inline]
    pub(crate) fn concat_unchecked(self, p: u32, q: u32) -> ChromosomeWord {
        ChromosomeWord((p << self.half_bits()) | q)
    }

    /// Two's-complement value of a half word.
    #[inline]
    pub fn half_as_signed(self, h: u32) -> i64 {
        sign_extend(h as u64 & self.half_mask() as u64, self.half_bits())
    }

    /// Number of hex digits needed to print a full word.
    pub fn hex_digits(self) -> usize {
        self.m.div_ceil(4) as usize
    }
}

#[inline]
fn low_mask32(bits: u32) -> u32 {
    if bits >= 32 {
        u32::MAX
    } else {
        (1u32 << bits) - 1
    }
}

#[inline]
fn low_mask64(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Sign-extends the low `bits` bits of `w`.
#[inline]
pub fn sign_extend(w: u64, bits: u32) -> i64 {
    debug_assert!((1..=64).contains(&bits));
    let shift = 64 - bits;
    ((w << shift) as i64) >> shift
}

/// How a half-word address maps to a real variable value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainMap {
    /// The half word read as a two's-complement integer.
    #[default]
    TwosComplement,
    /// `lo + index * step` over the unsigned address.
    Affine { lo: f64, step: f64 },
}

impl DomainMap {
    pub fn apply(self, h: u32, half_bits: u32) -> f64 {
        match self {
            DomainMap::TwosComplement => sign_extend(h as u64, half_bits) as f64,
            DomainMap::Affine { lo, step } => lo + h as f64 * step,
        }
    }
}

/// Signed two's-complement fixed-point format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedFormat {
    total_bits: u32,
    frac_bits: u32,
}

/// Result of quantizing a real value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Encoded {
    pub word: u64,
    pub saturated: bool,
}

impl FixedFormat {
    pub fn new(total_bits: u32, frac_bits: u32) -> Result<Self> {
        if !(1..=64).contains(&total_bits) || frac_bits >= total_bits {
            return Err(Error::Argument(format!(
                "fixed format ({total_bits}, {frac_bits}) needs 1 <= total <= 64 and frac < total"
            )));
        }
        Ok(FixedFormat {
            total_bits,
            frac_bits,
        })
    }

    #[inline]
    pub fn total_bits(self) -> u32 {
        self.total_bits
    }

    #[inline]
    pub fn frac_bits(self) -> u32 {
        self.frac_bits
    }

    #[inline]
    pub fn mask(self) -> u64 {
        low_mask64(self.total_bits)
    }

    #[inline]
    pub fn min_raw(self) -> i64 {
        sign_extend(1u64 << (self.total_bits - 1), self.total_bits)
    }

    #[inline]
    pub fn max_raw(self) -> i64 {
        (low_mask64(self.total_bits) >> 1) as i64
    }

    #[inline]
    pub fn fits(self, w: u64) -> bool {
        w & !self.mask() == 0
    }

    /// Quantization step, `2^-frac_bits`.
    pub fn lsb(self) -> f64 {
        (-(self.frac_bits as f64)).exp2()
    }

    /// Signed integer held by a word of this format.
    #[inline]
    pub fn to_raw(self, w: u64) -> i64 {
        sign_extend(w & self.mask(), self.total_bits)
    }

    /// Word bits for a raw integer, which must already be in range.
    #[inline]
    pub fn to_word(self, raw: i64) -> u64 {
        debug_assert!(raw >= self.min_raw() && raw <= self.max_raw());
        raw as u64 & self.mask()
    }

    pub fn decode(self, w: u64) -> f64 {
        self.raw_to_real(self.to_raw(w))
    }

    #[inline]
    pub fn raw_to_real(self, raw: i64) -> f64 {
        raw as f64 * self.lsb()
    }

    /// Round to nearest (ties away from zero), saturating to the format range.
    pub fn encode(self, v: f64) -> Encoded {
        if v.is_nan() {
            return Encoded {
                word: 0,
                saturated: true,
            };
        }
        let scaled = (v * (self.frac_bits as f64).exp2()).round();
        let limit = ((self.total_bits - 1) as f64).exp2();
        let raw = if scaled >= limit {
            self.max_raw()
        } else if scaled < -limit {
            self.min_raw()
        } else {
            scaled as i64
        };
        Encoded {
            word: self.to_word(raw),
            saturated: scaled >= limit || scaled < -limit,
        }
    }

    /// Clamps a raw integer into range.
    pub fn saturate_raw(self, raw: i128) -> (i64, bool) {
        let lo = self.min_raw() as i128;
        let hi = self.max_raw() as i128;
        if raw < lo {
            (lo as i64, true)
        } else if raw > hi {
            (hi as i64, true)
        } else {
            (raw as i64, false)
        }
    }

    /// Re-expresses a raw value of format `from` in this format, exactly when
    /// possible, otherwise rounding half away from zero and saturating.
    pub fn convert_raw(self, raw: i64, from: FixedFormat) -> (i64, bool) {
        let raw = raw as i128;
        let scaled = if self.frac_bits >= from.frac_bits {
            raw << (self.frac_bits - from.frac_bits)
        } else {
            let shift = from.frac_bits - self.frac_bits;
            let half = 1i128 << (shift - 1);
            if raw >= 0 {
                (raw + half) >> shift
            } else {
                -((-raw + half) >> shift)
            }
        };
        self.saturate_raw(scaled)
    }
}

/// Exact decimal rendering of `num / 2^frac_bits` with `frac_bits` fraction
/// digits (every dyadic fraction has a finite decimal expansion).
pub fn dyadic_to_decimal(num: i128, frac_bits: u32) -> String {
    let neg = num < 0;
    let mag = num.unsigned_abs();
    let int_part = mag >> frac_bits;
    if frac_bits == 0 {
        return format!("{}{}", if neg { "-" } else { "" }, int_part);
    }
    let frac = mag & ((1u128 << frac_bits) - 1);
    // frac / 2^f == frac * 5^f / 10^f
    let digits = frac * 5u128.pow(frac_bits);
    format!(
        "{}{}.{:0width$}",
        if neg { "-" } else { "" },
        int_part,
        digits,
        width = frac_bits as usize
    )
}
