//! Fitness datapath: split, two ROM lookups, adder, `γ` stage.
//!
//! Evaluation is functional and instantaneous; the two ROM delays of the
//! hardware pipeline are charged by the engine's cycle accounting.

use crate::romgen::{FfmTables, GammaStage};
use crate::word::{ChromosomeWord, WordLayout};

/// A fitness word in the tables' fitness format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FitnessWord(pub u64);

impl FitnessWord {
    pub fn bits(self) -> u64 {
        self.0
    }
}

/// Raw signed adder output `α[px] + β[qx]` in the δ format.
#[inline]
pub fn delta_raw(px: u32, qx: u32, tables: &FfmTables) -> i64 {
    // c <= 63, so the sum of two c-bit values fits in c + 1 <= 64 bits
    tables.alpha.raw(px as usize) + tables.beta.raw(qx as usize)
}

/// `γ` stage applied to a raw δ, producing the fitness word bits.
#[inline]
pub fn gamma_word(delta: i64, tables: &FfmTables) -> u64 {
    match &tables.gamma {
        GammaStage::Passthrough => {
            let (raw, _) = tables.fitness_fmt.convert_raw(delta, tables.delta_fmt);
            tables.fitness_fmt.to_word(raw)
        }
        GammaStage::Table(t) => t.entries[(delta - t.addr_offset) as usize],
        GammaStage::OnTheFly(q) => q.eval(delta),
    }
}

/// `y = γ(α(px) + β(qx))` for one chromosome.
pub fn ffm_evaluate(x: ChromosomeWord, layout: WordLayout, tables: &FfmTables) -> FitnessWord {
    debug_assert_eq!(layout.half_bits(), tables.half_bits());
    let (px, qx) = layout.split(x);
    FitnessWord(gamma_word(delta_raw(px, qx, tables), tables))
}

/// Signed raw fitness, the value the selection comparator sees.
#[inline]
pub fn evaluate_raw(x: ChromosomeWord, layout: WordLayout, tables: &FfmTables) -> i64 {
    tables.fitness_fmt.to_raw(ffm_evaluate(x, layout, tables).0)
}

/// Decoded real fitness.
pub fn evaluate_real(x: ChromosomeWord, layout: WordLayout, tables: &FfmTables) -> f64 {
    tables.fitness_fmt.decode(ffm_evaluate(x, layout, tables).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::presets::{Formats, Preset};
    use crate::romgen::{build_gamma, GammaFn, RomTable};
    use crate::word::FixedFormat;

    fn tables(p: Preset, m: u32) -> (WordLayout, FfmTables) {
        let layout = WordLayout::new(m).unwrap();
        (layout, p.compile(layout, &Formats::default()).unwrap())
    }

    #[test]
    fn f2_origin() {
        let (l, t) = tables(Preset::F2, 20);
        let x = l.concat(0, 0).unwrap();
        assert_eq!(evaluate_real(x, l, &t), 1020.0);
    }

    #[test]
    fn f3_three_four_five() {
        let (l, t) = tables(Preset::F3, 20);
        let x = l.concat(3, 4).unwrap();
        assert_eq!(evaluate_real(x, l, &t), 5.0);
        let (l, t) = tables(Preset::F3, 8);
        assert!(matches!(t.gamma, GammaStage::Table(_)));
        assert_eq!(evaluate_real(l.concat(3, 4).unwrap(), l, &t), 5.0);
    }

    #[test]
    fn f1_domain_minimum() {
        let (l, t) = tables(Preset::F1, 26);
        let x = l.concat(0, 0x1000).unwrap();
        let y = evaluate_real(x, l, &t);
        assert!((y - -6.8971e10).abs() < 0.0001e10);
        assert!((y - -68_971_134_476.0).abs() <= t.fitness_fmt.lsb());
    }

    #[test]
    fn single_variable_ignores_px() {
        let (l, t) = tables(Preset::F1, 16);
        for qx in [0u32, 1, 0x7F, 0x80, 0xC3] {
            let base = evaluate_raw(l.concat(0, qx).unwrap(), l, &t);
            for px in 0..=l.half_mask() {
                assert_eq!(evaluate_raw(l.concat(px, qx).unwrap(), l, &t), base);
            }
        }
    }

    // Oracle: every δ through the passthrough equals the same δ through an
    // explicitly materialized identity table.
    #[test]
    fn passthrough_equals_identity_table() {
        let rom = FixedFormat::new(15, 3).unwrap();
        let fit = FixedFormat::new(16, 3).unwrap();
        let delta_fmt = FixedFormat::new(16, 3).unwrap();
        let alpha = RomTable::new(1, rom, vec![rom.to_word(rom.min_raw()), rom.to_word(rom.max_raw())], 0).unwrap();
        let beta = alpha.clone();
        let pass = FfmTables::new(alpha.clone(), beta.clone(), GammaStage::Passthrough, fit).unwrap();
        let window = pass.delta_window();
        let ident = build_gamma(
            &GammaFn::Function(std::sync::Arc::new(|x| x)),
            delta_fmt,
            fit,
            window,
            1 << 20,
        )
        .unwrap();
        let table = FfmTables::new(alpha, beta, ident, fit).unwrap();
        for d in window.0..=window.1 {
            assert_eq!(gamma_word(d, &pass), gamma_word(d, &table), "delta {d}");
        }
    }

    #[test]
    fn matches_real_function_within_bound() {
        for (p, m) in [(Preset::F1, 16), (Preset::F2, 16), (Preset::F3, 16)] {
            let (l, t) = tables(p, m);
            let bound = 3.0 * t.fitness_fmt.lsb();
            for x in 0..(1u32 << m) {
                let w = l.word(x).unwrap();
                let (px, qx) = l.split(w);
                let expect = p.real_value(l.half_as_signed(px) as f64, l.half_as_signed(qx) as f64);
                let got = evaluate_real(w, l, &t);
                assert!((got - expect).abs() <= bound, "{p:?} x={x:#x}: {got} vs {expect}");
            }
        }
    }
}
