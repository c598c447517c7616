//! Ground truth: exhaustive optimum over the quantized domain, and a naive
//! line-by-line transcription of the generation loop for differential runs.
//!
//! The transcription deliberately avoids the engine's helpers: masks are
//! built bit by bit, the mutation uses the AND/OR form and the adder works
//! on sign-extended `i128` values.

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::GaConfig;
use crate::error::{Error, Result};
use crate::ffm::evaluate_raw;
use crate::genetic_ops::SelectionMode;
use crate::romgen::{FfmTables, GammaStage, RomTable};
use crate::word::{ChromosomeWord, WordLayout};

/// Largest domain the exhaustive scan will enumerate.
pub const EXHAUSTIVE_LIMIT: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimumReport {
    #[serde(serialize_with = "ser_word")]
    pub best_word: ChromosomeWord,
    pub best_raw: i64,
    pub best_fitness: f64,
    /// `(px, qx)` as two's-complement integers.
    pub argbest_vars: (i64, i64),
    pub evaluations: u64,
}

fn ser_word<S: serde::Serializer>(w: &ChromosomeWord, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u32(w.bits())
}

/// Argbest of the datapath over every admissible chromosome. With
/// `single_variable`, `px` is held at zero. Ties go to the smallest word.
pub fn exhaustive_optimum(
    tables: &FfmTables,
    layout: WordLayout,
    mode: SelectionMode,
    single_variable: bool,
) -> Result<OptimumReport> {
    let points: u64 = if single_variable {
        1 << layout.half_bits()
    } else {
        1 << layout.bits()
    };
    if points > EXHAUSTIVE_LIMIT {
        return Err(Error::Capacity {
            points,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let better = |a: (i64, u32), b: (i64, u32)| {
        if mode.beats(b.0, a.0) || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    };
    let (best_raw, best_bits) = (0..points as u32)
        .into_par_iter()
        .map(|x| {
            let w = layout.truncate(x);
            (evaluate_raw(w, layout, tables), w.bits())
        })
        .reduce_with(better)
        .expect("domain is not empty");
    let best_word = layout.truncate(best_bits);
    let (px, qx) = layout.split(best_word);
    Ok(OptimumReport {
        best_word,
        best_raw,
        best_fitness: tables.fitness_fmt.raw_to_real(best_raw),
        argbest_vars: (layout.half_as_signed(px), layout.half_as_signed(qx)),
        evaluations: points,
    })
}

fn naive_signed(word: u64, bits: u32) -> i128 {
    let w = word as i128;
    if (w >> (bits - 1)) & 1 == 1 {
        w - (1i128 << bits)
    } else {
        w
    }
}

fn naive_rom(t: &RomTable, addr: u32) -> i128 {
    naive_signed(t.entries[addr as usize], t.out_fmt.total_bits())
}

fn naive_fitness(x: u32, m: u32, tables: &FfmTables) -> i128 {
    let half = m / 2;
    let px = x >> half;
    let qx = x % (1u32 << half);
    let delta = naive_rom(&tables.alpha, px) + naive_rom(&tables.beta, qx);
    let fit = &tables.fitness_fmt;
    let word = match &tables.gamma {
        GammaStage::Passthrough => {
            let (raw, _) = fit.convert_raw(delta as i64, tables.delta_fmt);
            fit.to_word(raw)
        }
        GammaStage::Table(t) => t.entries[(delta - t.addr_offset as i128) as usize],
        GammaStage::OnTheFly(q) => q.eval(delta as i64),
    };
    naive_signed(word, fit.total_bits())
}

fn log2_exact(n: usize) -> u32 {
    let mut b = 0;
    while (1usize << b) < n {
        b += 1;
    }
    b
}

fn naive_cross(a: u32, b: u32, half: u32, r: u32) -> (u32, u32) {
    let mut sel_bits = 0;
    while (1u32 << sel_bits) < half + 1 {
        sel_bits += 1;
    }
    let shift = (r >> (32 - sel_bits)) % half;
    let mut ca = 0;
    let mut cb = 0;
    for i in 0..half {
        // bit i (from the least significant end) belongs to the tail when it
        // survives the right shift of the all-ones mask
        let in_tail = i < half - shift;
        let (bit_a, bit_b) = ((a >> i) & 1, (b >> i) & 1);
        if in_tail {
            ca |= bit_b << i;
            cb |= bit_a << i;
        } else {
            ca |= bit_a << i;
            cb |= bit_b << i;
        }
    }
    (ca, cb)
}

/// Next population from `population`, consuming `draws` in the engine's
/// documented schedule.
#[allow(clippy::needless_range_loop)]
pub fn naive_generation(
    population: &[ChromosomeWord],
    cfg: &GaConfig,
    draws: &[u32],
) -> Result<Vec<ChromosomeWord>> {
    let n = population.len();
    let m = cfg.layout.bits();
    let half = m / 2;
    let p = cfg.mutation_units();
    let expected = 2 * n + n + p;
    if draws.len() != expected {
        return Err(Error::DrawCount {
            expected,
            got: draws.len(),
        });
    }
    let x: Vec<u32> = population.iter().map(|w| w.bits()).collect();
    let mut next_draw = draws.iter().copied();

    // for j = 1..N: y_j = FF(x_j)
    let mut y = Vec::new();
    for j in 0..n {
        y.push(naive_fitness(x[j], m, &cfg.tables));
    }

    // for j = 1..N: w_j = SF(Y, X)
    let idx_bits = log2_exact(n);
    let mut w = Vec::new();
    for _ in 0..n {
        let i1 = (next_draw.next().unwrap() >> (32 - idx_bits)) as usize;
        let i2 = (next_draw.next().unwrap() >> (32 - idx_bits)) as usize;
        let pick_second = match cfg.mode {
            SelectionMode::Minimize => y[i2] < y[i1],
            SelectionMode::Maximize => y[i2] > y[i1],
        };
        w.push(if pick_second { x[i2] } else { x[i1] });
    }

    // for i = 1..N/2: (z_2i-1, z_2i) = CF(w_2i-1, w_2i)
    let mut z = vec![0u32; n];
    for i in 0..n / 2 {
        let rp = next_draw.next().unwrap();
        let rq = next_draw.next().unwrap();
        let (a, b) = (w[2 * i], w[2 * i + 1]);
        let low = (1u32 << half) - 1;
        let (pa, pb) = naive_cross(a >> half, b >> half, half, rp);
        let (qa, qb) = naive_cross(a & low, b & low, half, rq);
        z[2 * i] = (pa << half) + qa;
        z[2 * i + 1] = (pb << half) + qb;
    }

    // for v = 1..P: x_v = MF(z_v)
    let word_mask = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    for v in 0..p {
        let rand = next_draw.next().unwrap() >> (32 - m);
        z[v] = ((!z[v] & rand) | (z[v] & !rand)) & word_mask;
    }

    Ok(z.into_iter().map(|b| cfg.layout.truncate(b)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::presets::{Formats, Preset};
    use crate::engine::{init_population, step_generation};
    use crate::romgen::build_rom;
    use crate::word::{DomainMap, FixedFormat};
    use std::sync::Arc;

    fn tables(p: Preset, m: u32) -> (WordLayout, FfmTables) {
        let l = WordLayout::new(m).unwrap();
        (l, p.compile(l, &Formats::default()).unwrap())
    }

    #[test]
    fn f1_minimum() {
        let (l, t) = tables(Preset::F1, 26);
        let r = exhaustive_optimum(&t, l, SelectionMode::Minimize, true).unwrap();
        assert_eq!(r.evaluations, 8192);
        assert_eq!(r.argbest_vars, (0, -4096));
        assert!((r.best_fitness - -6.8971e10).abs() < 0.0001e10);
        assert_eq!(r.best_fitness, -68_971_134_476.0);
    }

    #[test]
    fn f3_minimum_is_zero() {
        let (l, t) = tables(Preset::F3, 20);
        let r = exhaustive_optimum(&t, l, SelectionMode::Minimize, false).unwrap();
        assert_eq!(r.evaluations, 1 << 20);
        assert_eq!(r.best_fitness, 0.0);
        assert_eq!(r.best_word.bits(), 0);
    }

    #[test]
    fn f2_corners() {
        let (l, t) = tables(Preset::F2, 20);
        let lo = exhaustive_optimum(&t, l, SelectionMode::Minimize, false).unwrap();
        assert_eq!(lo.argbest_vars, (-512, 511));
        assert_eq!(lo.best_fitness, -5120.0);
        let hi = exhaustive_optimum(&t, l, SelectionMode::Maximize, false).unwrap();
        assert_eq!(hi.argbest_vars, (511, -512));
        assert_eq!(hi.best_fitness, 7156.0);
    }

    #[test]
    fn constant_tables_tie_break() {
        let f = FixedFormat::new(48, 8).unwrap();
        let zero = build_rom(&|_| 0.0, 4, DomainMap::TwosComplement, f).unwrap();
        let t = FfmTables::new(zero.clone(), zero, GammaStage::Passthrough, f).unwrap();
        let l = WordLayout::new(8).unwrap();
        for mode in [SelectionMode::Minimize, SelectionMode::Maximize] {
            let r = exhaustive_optimum(&t, l, mode, false).unwrap();
            assert_eq!(r.best_fitness, 0.0);
            assert_eq!(r.best_word.bits(), 0);
        }
    }

    #[test]
    fn capacity_error() {
        let (l, t) = tables(Preset::F2, 26);
        assert!(matches!(
            exhaustive_optimum(&t, l, SelectionMode::Minimize, false),
            Err(Error::Capacity { .. })
        ));
    }

    fn cfg(p: Preset, n: usize, m: u32, seed: u64) -> GaConfig {
        let (l, t) = tables(p, m);
        let mut c = GaConfig::new(n, l, Arc::new(t));
        c.master_seed = seed;
        c.single_variable = p.single_variable();
        c
    }

    #[test]
    fn matches_engine_small() {
        let c = cfg(Preset::F3, 4, 8, 5);
        let mut s = init_population(&c).unwrap();
        for _ in 0..10 {
            let before = s.population.clone();
            let mut draws = Vec::new();
            step_generation(&mut s, &c, Some(&mut draws));
            assert_eq!(naive_generation(&before, &c, &draws).unwrap(), s.population);
        }
    }

    #[test]
    fn clones_stay_clones() {
        let mut c = cfg(Preset::F2, 8, 12, 3);
        c.mutation_rate = 0.0;
        let clone = c.layout.truncate(0xABC);
        let pop = vec![clone; 8];
        let draws: Vec<u32> = (0..24u32).map(|i| i.wrapping_mul(0x9E37_79B9) | 1).collect();
        assert_eq!(naive_generation(&pop, &c, &draws).unwrap(), pop);
        assert!(matches!(
            naive_generation(&pop, &c, &draws[1..]),
            Err(Error::DrawCount { expected: 24, got: 23 })
        ));
    }

    #[test]
    fn single_variable_px_never_matters() {
        let (_, t) = tables(Preset::F1, 12);
        for qx in 0..64u32 {
            let base = naive_fitness(qx, 12, &t);
            for px in 0..64u32 {
                assert_eq!(naive_fitness((px << 6) | qx, 12, &t), base);
            }
        }
    }
}
