//! Bit-exact software model of a fully parallel hardware genetic algorithm.
//!
//! Chromosomes are `m`-bit words split into two halves `px` and `qx`. Fitness
//! is computed by a ROM datapath `γ(α(px) + β(qx))`, every genetic operator
//! draws from its own 32-bit LFSR, and a whole generation is produced in a
//! fixed number of clock cycles.
//!
//! ```
//! use std::sync::Arc;
//! use hwga::cli::presets::{Formats, Preset};
//! use hwga::engine::{run, GaConfig};
//! use hwga::word::WordLayout;
//!
//! let layout = WordLayout::new(12).unwrap();
//! let tables = Preset::F3.compile(layout, &Formats::default()).unwrap();
//! let mut cfg = GaConfig::new(16, layout, Arc::new(tables));
//! cfg.generations = 20;
//! let trace = run(&cfg).unwrap();
//! assert_eq!(trace.records.len(), 20);
//! ```

pub mod cli;
pub mod engine;
pub mod error;
pub mod ffm;
pub mod genetic_ops;
pub mod oracle;
pub mod prng;
pub mod romgen;
pub mod word;

pub use engine::{run, Engine, GaConfig, RunTrace};
pub use error::{Error, Result};
pub use genetic_ops::SelectionMode;
pub use word::{ChromosomeWord, FixedFormat, WordLayout};
