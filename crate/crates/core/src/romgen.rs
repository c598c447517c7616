//! ROM compiler: quantizes the real functions `α`, `β` and `γ` into lookup
//! tables with declared fixed-point formats, and reads/writes table dumps.
//!
//! The fitness datapath computes `y = γ(α(px) + β(qx))`. `α` and `β` are
//! indexed directly by the half-word address. `γ` is indexed by the adder
//! output `δ`; since a raw `2^d` table is out of reach for `d` near 49, the
//! table only spans the achievable window `[min α + min β, max α + max β]`
//! and is addressed relative to its lower end.

use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::prng::ceil_log2;
use crate::word::{DomainMap, FixedFormat};

/// A real function compiled into a ROM.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Largest address width for a per-variable table.
pub const MAX_HALF_TABLE_BITS: u32 = 16;

/// Default entry cap above which `γ` is evaluated on the fly.
pub const DEFAULT_GAMMA_CAP: u64 = 1 << 24;

const DUMP_VERSION: u32 = 1;
const MAX_DUMP_IN_BITS: u32 = 30;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RomTable {
    pub in_bits: u32,
    pub out_fmt: FixedFormat,
    pub entries: Vec<u64>,
    /// Signed value subtracted from the input before indexing.
    pub addr_offset: i64,
}

impl RomTable {
    pub fn new(in_bits: u32, out_fmt: FixedFormat, entries: Vec<u64>, addr_offset: i64) -> Result<Self> {
        if in_bits > MAX_DUMP_IN_BITS {
            return Err(Error::Argument(format!("table address width {in_bits} too large")));
        }
        if entries.len() != 1usize << in_bits {
            return Err(Error::Argument(format!(
                "table has {} entries, expected 2^{in_bits}",
                entries.len()
            )));
        }
        if let Some(i) = entries.iter().position(|&w| !out_fmt.fits(w)) {
            return Err(Error::Argument(format!(
                "entry {i} ({:#x}) exceeds {} bits",
                entries[i],
                out_fmt.total_bits()
            )));
        }
        Ok(RomTable {
            in_bits,
            out_fmt,
            entries,
            addr_offset,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Raw signed value stored at `addr`.
    #[inline]
    pub fn raw(&self, addr: usize) -> i64 {
        self.out_fmt.to_raw(self.entries[addr])
    }

    /// Signed minimum and maximum over all entries.
    pub fn raw_range(&self) -> (i64, i64) {
        self.entries.iter().fold((i64::MAX, i64::MIN), |(lo, hi), &w| {
            let v = self.out_fmt.to_raw(w);
            (lo.min(v), hi.max(v))
        })
    }

    /// Value-level lookup for an absolute input `x`, honoring `addr_offset`.
    pub fn lookup(&self, x: i64) -> Option<u64> {
        let addr = x.checked_sub(self.addr_offset)?;
        usize::try_from(addr).ok().and_then(|a| self.entries.get(a)).copied()
    }
}

/// Builds an `in_bits`-address table: `entries[h] = encode(f(map(h)))`.
/// Returns the table and the number of saturated entries.
pub fn build_rom_counted(
    f: &(dyn Fn(f64) -> f64 + Sync),
    in_bits: u32,
    domain: DomainMap,
    out_fmt: FixedFormat,
) -> Result<(RomTable, usize)> {
    if !(1..=MAX_HALF_TABLE_BITS).contains(&in_bits) {
        return Err(Error::Argument(format!(
            "variable table width {in_bits} outside 1..={MAX_HALF_TABLE_BITS}"
        )));
    }
    let mut entries = Vec::with_capacity(1 << in_bits);
    let mut saturated = 0;
    for h in 0..(1u32 << in_bits) {
        let value = f(domain.apply(h, in_bits));
        if !value.is_finite() {
            return Err(Error::Build {
                address: h as i64,
                value,
            });
        }
        let e = out_fmt.encode(value);
        saturated += e.saturated as usize;
        entries.push(e.word);
    }
    Ok((
        RomTable {
            in_bits,
            out_fmt,
            entries,
            addr_offset: 0,
        },
        saturated,
    ))
}

pub fn build_rom(
    f: &(dyn Fn(f64) -> f64 + Sync),
    in_bits: u32,
    domain: DomainMap,
    out_fmt: FixedFormat,
) -> Result<RomTable> {
    build_rom_counted(f, in_bits, domain, out_fmt).map(|(t, _)| t)
}

/// The `γ` function handed to the compiler.
#[derive(Clone)]
pub enum GammaFn {
    Identity,
    Function(RealFn),
}

impl fmt::Debug for GammaFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaFn::Identity => f.write_str("Identity"),
            GammaFn::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// On-the-fly quantized evaluator, value-identical to the table it replaces.
#[derive(Clone)]
pub struct QuantizedFn {
    g: RealFn,
    delta_fmt: FixedFormat,
    out_fmt: FixedFormat,
    window: (i64, i64),
}

impl QuantizedFn {
    #[inline]
    pub fn eval(&self, delta_raw: i64) -> u64 {
        self.out_fmt.encode((self.g)(self.delta_fmt.raw_to_real(delta_raw))).word
    }

    pub fn window(&self) -> (i64, i64) {
        self.window
    }

    pub fn out_fmt(&self) -> FixedFormat {
        self.out_fmt
    }

    /// Materializes the sub-table starting at `from` with `len` entries.
    pub fn materialize(&self, from: i64, len: usize) -> Vec<u64> {
        (0..len as i64).map(|i| self.eval(from + i)).collect()
    }
}

impl fmt::Debug for QuantizedFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuantizedFn")
            .field("delta_fmt", &self.delta_fmt)
            .field("out_fmt", &self.out_fmt)
            .field("window", &self.window)
            .finish()
    }
}

/// The third pipeline stage.
#[derive(Clone, Debug)]
pub enum GammaStage {
    /// `y = δ`, re-encoded into the fitness format.
    Passthrough,
    Table(RomTable),
    OnTheFly(QuantizedFn),
}

impl GammaStage {
    pub fn is_passthrough(&self) -> bool {
        matches!(self, GammaStage::Passthrough)
    }
}

/// Compiles `γ` over the achievable window `[lo, hi]` of raw `δ` values.
pub fn build_gamma(
    g: &GammaFn,
    delta_fmt: FixedFormat,
    fitness_fmt: FixedFormat,
    achievable: (i64, i64),
    cap: u64,
) -> Result<GammaStage> {
    let g = match g {
        GammaFn::Identity => return Ok(GammaStage::Passthrough),
        GammaFn::Function(g) => g.clone(),
    };
    let (lo, hi) = achievable;
    if lo > hi {
        return Err(Error::Argument(format!("empty gamma window [{lo}, {hi}]")));
    }
    let span = (hi as i128 - lo as i128 + 1) as u64;
    let in_bits = ceil_log2(span);
    let padded = 1u64.checked_shl(in_bits).unwrap_or(u64::MAX);

    if padded > cap || in_bits > MAX_DUMP_IN_BITS {
        // Every reachable address must still be finite.
        let bad = (lo..=hi).into_par_iter().find_first(|&d| {
            !g(delta_fmt.raw_to_real(d)).is_finite()
        });
        if let Some(d) = bad {
            return Err(Error::Build {
                address: d,
                value: g(delta_fmt.raw_to_real(d)),
            });
        }
        return Ok(GammaStage::OnTheFly(QuantizedFn {
            g,
            delta_fmt,
            out_fmt: fitness_fmt,
            window: achievable,
        }));
    }

    let mut entries = Vec::with_capacity(padded as usize);
    for i in 0..padded as i64 {
        let d = lo + i;
        let value = g(delta_fmt.raw_to_real(d));
        if d <= hi {
            if !value.is_finite() {
                return Err(Error::Build { address: d, value });
            }
            entries.push(fitness_fmt.encode(value).word);
        } else if value.is_finite() {
            // padding beyond the window is unreachable
            entries.push(fitness_fmt.encode(value).word);
        } else {
            entries.push(0);
        }
    }
    Ok(GammaStage::Table(RomTable {
        in_bits,
        out_fmt: fitness_fmt,
        entries,
        addr_offset: lo,
    }))
}

/// The three compiled stages plus the formats linking them.
#[derive(Clone, Debug)]
pub struct FfmTables {
    pub alpha: RomTable,
    pub beta: RomTable,
    pub gamma: GammaStage,
    pub delta_fmt: FixedFormat,
    pub fitness_fmt: FixedFormat,
}

impl FfmTables {
    /// Checks format agreement and, for a `γ` table, window coverage.
    pub fn new(alpha: RomTable, beta: RomTable, gamma: GammaStage, fitness_fmt: FixedFormat) -> Result<Self> {
        if alpha.out_fmt != beta.out_fmt {
            return Err(Error::Argument(format!(
                "alpha format {:?} differs from beta format {:?}",
                alpha.out_fmt, beta.out_fmt
            )));
        }
        if alpha.in_bits != beta.in_bits {
            return Err(Error::Argument(format!(
                "alpha address width {} differs from beta width {}",
                alpha.in_bits, beta.in_bits
            )));
        }
        if alpha.addr_offset != 0 || beta.addr_offset != 0 {
            return Err(Error::Argument("alpha/beta tables must have zero address offset".into()));
        }
        let delta_fmt = delta_format(alpha.out_fmt)?;
        let tables = FfmTables {
            alpha,
            beta,
            gamma,
            delta_fmt,
            fitness_fmt,
        };
        let (lo, hi) = tables.delta_window();
        match &tables.gamma {
            GammaStage::Passthrough => {}
            GammaStage::Table(t) => {
                if t.out_fmt != fitness_fmt {
                    return Err(Error::Argument(format!(
                        "gamma format {:?} differs from fitness format {:?}",
                        t.out_fmt, fitness_fmt
                    )));
                }
                let end = t.addr_offset as i128 + t.len() as i128 - 1;
                if (t.addr_offset as i128) > lo as i128 || end < hi as i128 {
                    return Err(Error::Argument(format!(
                        "gamma table [{}, {end}] does not cover delta window [{lo}, {hi}]",
                        t.addr_offset
                    )));
                }
            }
            GammaStage::OnTheFly(q) => {
                if q.window.0 > lo || q.window.1 < hi {
                    return Err(Error::Argument("gamma evaluator window too narrow".into()));
                }
            }
        }
        Ok(tables)
    }

    /// Compiles all three stages from real functions.
    #[allow(clippy::too_many_arguments)]
    pub fn compile(
        alpha: &(dyn Fn(f64) -> f64 + Sync),
        beta: &(dyn Fn(f64) -> f64 + Sync),
        gamma: &GammaFn,
        half_bits: u32,
        domain: DomainMap,
        rom_fmt: FixedFormat,
        fitness_fmt: FixedFormat,
        gamma_cap: u64,
    ) -> Result<Self> {
        let alpha = build_rom(alpha, half_bits, domain, rom_fmt)?;
        let beta = build_rom(beta, half_bits, domain, rom_fmt)?;
        let delta_fmt = delta_format(rom_fmt)?;
        let window = achievable_window(&alpha, &beta);
        let gamma = build_gamma(gamma, delta_fmt, fitness_fmt, window, gamma_cap)?;
        FfmTables::new(alpha, beta, gamma, fitness_fmt)
    }

    pub fn half_bits(&self) -> u32 {
        self.alpha.in_bits
    }

    /// `[min α + min β, max α + max β]` in raw δ units.
    pub fn delta_window(&self) -> (i64, i64) {
        achievable_window(&self.alpha, &self.beta)
    }
}

/// `δ` holds the sum of two `c`-bit words, so it gets `c + 1` bits.
pub fn delta_format(rom_fmt: FixedFormat) -> Result<FixedFormat> {
    FixedFormat::new(rom_fmt.total_bits() + 1, rom_fmt.frac_bits())
}

pub fn achievable_window(alpha: &RomTable, beta: &RomTable) -> (i64, i64) {
    let (alo, ahi) = alpha.raw_range();
    let (blo, bhi) = beta.raw_range();
    (alo + blo, ahi + bhi)
}

/// Renders a table in the line-oriented dump format.
pub fn dump_rom(t: &RomTable) -> String {
    let digits = t.out_fmt.total_bits().div_ceil(4) as usize;
    let mut out = String::with_capacity(64 + t.len() * (digits + 1));
    let _ = writeln!(out, "rom-version {DUMP_VERSION}");
    let _ = writeln!(out, "in_bits {}", t.in_bits);
    let _ = writeln!(out, "out_total {}", t.out_fmt.total_bits());
    let _ = writeln!(out, "out_frac {}", t.out_fmt.frac_bits());
    let _ = writeln!(out, "addr_offset {}", t.addr_offset);
    for w in &t.entries {
        let _ = writeln!(out, "{w:0digits$x}");
    }
    out
}

fn header_value<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    key: &str,
    last_line: usize,
) -> Result<(usize, &'a str)> {
    let (n, line) = lines.next().ok_or_else(|| Error::Parse {
        line: last_line + 1,
        msg: format!("missing `{key}` header"),
    })?;
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(k), Some(v), None) if k == key => Ok((n, v)),
        _ => Err(Error::Parse {
            line: n,
            msg: format!("expected `{key} <value>`, found `{line}`"),
        }),
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad value `{v}` for `{key}`"),
    })
}

/// Parses a table dump. Line numbers in errors are 1-based.
pub fn load_rom(text: &str) -> Result<RomTable> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    let (n, v) = header_value(&mut lines, "rom-version", 0)?;
    let version: u32 = parse_num(n, "rom-version", v)?;
    if version != DUMP_VERSION {
        return Err(Error::Parse {
            line: n,
            msg: format!("unsupported rom-version {version}"),
        });
    }
    let (n, v) = header_value(&mut lines, "in_bits", n)?;
    let in_bits: u32 = parse_num(n, "in_bits", v)?;
    if in_bits > MAX_DUMP_IN_BITS {
        return Err(Error::Parse {
            line: n,
            msg: format!("in_bits {in_bits} exceeds {MAX_DUMP_IN_BITS}"),
        });
    }
    let (n, v) = header_value(&mut lines, "out_total", n)?;
    let total: u32 = parse_num(n, "out_total", v)?;
    let (n, v) = header_value(&mut lines, "out_frac", n)?;
    let frac: u32 = parse_num(n, "out_frac", v)?;
    let out_fmt = FixedFormat::new(total, frac).map_err(|e| Error::Parse {
        line: n,
        msg: e.to_string(),
    })?;
    let (mut last, v) = header_value(&mut lines, "addr_offset", n)?;
    let addr_offset: i64 = parse_num(last, "addr_offset", v)?;

    let expected = 1usize << in_bits;
    let mut entries = Vec::with_capacity(expected.min(1 << 20));
    for (n, line) in lines {
        if line.is_empty() {
            last = n;
            continue;
        }
        if entries.len() == expected {
            return Err(Error::Parse {
                line: n,
                msg: format!("more than {expected} entries"),
            });
        }
        let w = u64::from_str_radix(line, 16).map_err(|_| Error::Parse {
            line: n,
            msg: format!("`{line}` is not a hexadecimal word"),
        })?;
        if !out_fmt.fits(w) {
            return Err(Error::Parse {
                line: n,
                msg: format!("entry {w:#x} exceeds {total} bits"),
            });
        }
        entries.push(w);
        last = n;
    }
    if entries.len() != expected {
        return Err(Error::Parse {
            line: last + 1,
            msg: format!("expected {expected} entries, found {}", entries.len()),
        });
    }
    Ok(RomTable {
        in_bits,
        out_fmt,
        entries,
        addr_offset,
    })
}
