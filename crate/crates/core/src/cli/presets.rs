//! Benchmark functions F1, F2 and F3 and their `γ(α(px) + β(qx))` splits.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::romgen::{FfmTables, GammaFn, DEFAULT_GAMMA_CAP};
use crate::word::{DomainMap, FixedFormat, WordLayout};

/// Fixed-point widths used when compiling a preset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Formats {
    /// `c`, the α/β output width.
    pub rom_bits: u32,
    pub frac_bits: u32,
    /// `a`, the fitness width.
    pub fitness_bits: u32,
    pub gamma_cap: u64,
}

impl Default for Formats {
    fn default() -> Self {
        Formats {
            rom_bits: 48,
            frac_bits: 8,
            fitness_bits: 48,
            gamma_cap: DEFAULT_GAMMA_CAP,
        }
    }
}

impl Formats {
    pub fn rom_fmt(&self) -> Result<FixedFormat> {
        FixedFormat::new(self.rom_bits, self.frac_bits)
            .map_err(|e| Error::config("frac_bits", e.to_string()))
    }

    pub fn fitness_fmt(&self) -> Result<FixedFormat> {
        FixedFormat::new(self.fitness_bits, self.frac_bits)
            .map_err(|e| Error::config("fitness_bits", e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    /// `x^3 - 15x^2 + 500`, single variable in `qx`.
    F1,
    /// `8x - 4y + 1020`.
    F2,
    /// `sqrt(x^2 + y^2)`.
    F3,
}

fn f1_beta(q: f64) -> f64 {
    q * q * q - 15.0 * q * q + 500.0
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::F1, Preset::F2, Preset::F3];

    pub fn single_variable(self) -> bool {
        matches!(self, Preset::F1)
    }

    pub fn alpha(self, p: f64) -> f64 {
        match self {
            Preset::F1 => 0.0,
            Preset::F2 => 8.0 * p,
            Preset::F3 => p * p,
        }
    }

    pub fn beta(self, q: f64) -> f64 {
        match self {
            Preset::F1 => f1_beta(q),
            Preset::F2 => -4.0 * q + 1020.0,
            Preset::F3 => q * q,
        }
    }

    pub fn gamma(self) -> GammaFn {
        match self {
            Preset::F1 | Preset::F2 => GammaFn::Identity,
            Preset::F3 => GammaFn::Function(Arc::new(f64::sqrt)),
        }
    }

    /// The unquantized function.
    pub fn real_value(self, p: f64, q: f64) -> f64 {
        match self {
            Preset::F1 => f1_beta(q),
            Preset::F2 => 8.0 * p - 4.0 * q + 1020.0,
            Preset::F3 => (p * p + q * q).sqrt(),
        }
    }

    pub fn compile(self, layout: WordLayout, formats: &Formats) -> Result<FfmTables> {
        FfmTables::compile(
            &|p| self.alpha(p),
            &|q| self.beta(q),
            &self.gamma(),
            layout.half_bits(),
            DomainMap::TwosComplement,
            formats.rom_fmt()?,
            formats.fitness_fmt()?,
            formats.gamma_cap,
        )
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::F1 => "f1",
            Preset::F2 => "f2",
            Preset::F3 => "f3",
        })
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f1" => Ok(Preset::F1),
            "f2" => Ok(Preset::F2),
            "f3" => Ok(Preset::F3),
            _ => Err(Error::config("function", format!("unknown preset `{s}` (expected f1, f2 or f3)"))),
        }
    }
}
