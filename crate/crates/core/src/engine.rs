//! The generation loop: register latching, LFSR bank wiring, synchronization
//! counter and trace capture.
//!
//! # Draw schedule
//!
//! Every unit LFSR advances exactly once per generation and its new state is
//! the unit's 32-bit draw. Units are visited in a fixed order:
//!
//! 1. selection units `j = 0..N`: `SMLFSR1_j` then `SMLFSR2_j`;
//! 2. crossover modules `i = 0..N/2`: `CMPQLFSR_p,i` then `CMPQLFSR_q,i`;
//! 3. mutation units `v = 0..P`.
//!
//! Seeds come from one [`SeedPlan`]: the first `N` seeds fill the RX
//! registers (top `m` bits), the rest seed the units in the order above.

use std::io::{self, Write};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ffm::evaluate_raw;
use crate::genetic_ops::{
    crossover_pair, mutate, mutated_count, mutation_word, tournament_index, SelectionMode,
};
use crate::prng::{expand_seeds, top_bits_unchecked, Lfsr32State, SeedPlan};
use crate::romgen::FfmTables;
use crate::word::{dyadic_to_decimal, ChromosomeWord, WordLayout};

pub const DEFAULT_SYNC_VAL: u32 = 2;

/// Full run configuration.
#[derive(Clone, Debug)]
pub struct GaConfig {
    /// `N`, a power of two, at least 4.
    pub population: usize,
    pub layout: WordLayout,
    /// `K`.
    pub generations: u32,
    /// `MR` as a fraction.
    pub mutation_rate: f64,
    pub mode: SelectionMode,
    pub master_seed: u64,
    pub tables: Arc<FfmTables>,
    pub single_variable: bool,
    pub sync_val: u32,
}

impl GaConfig {
    /// Defaults: `K = 100`, `MR = 1%`, minimize, seed 0, `sync_val = 2`.
    pub fn new(population: usize, layout: WordLayout, tables: Arc<FfmTables>) -> Self {
        GaConfig {
            population,
            layout,
            generations: 100,
            mutation_rate: 0.01,
            mode: SelectionMode::Minimize,
            master_seed: 0,
            tables,
            single_variable: false,
            sync_val: DEFAULT_SYNC_VAL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 4 || !self.population.is_power_of_two() {
            return Err(Error::config(
                "n",
                format!("population {} must be a power of two >= 4", self.population),
            ));
        }
        if self.generations < 1 {
            return Err(Error::config("k", "generation count must be at least 1"));
        }
        mutated_count(self.population, self.mutation_rate)?;
        if self.tables.half_bits() != self.layout.half_bits() {
            return Err(Error::config(
                "m",
                format!(
                    "tables address {} bits but m/2 = {}",
                    self.tables.half_bits(),
                    self.layout.half_bits()
                ),
            ));
        }
        Ok(())
    }

    /// `P`, the number of mutation units.
    pub fn mutation_units(&self) -> usize {
        mutated_count(self.population, self.mutation_rate).unwrap_or(0)
    }

    pub fn cycles_per_generation(&self) -> u64 {
        self.sync_val as u64 + 1
    }

    fn unit_labels(&self) -> Vec<String> {
        let n = self.population;
        let mut labels = Vec::with_capacity(4 * n + self.mutation_units());
        labels.extend((0..n).map(|j| format!("RX{j}")));
        for j in 0..n {
            labels.push(format!("SMLFSR1_{j}"));
            labels.push(format!("SMLFSR2_{j}"));
        }
        for i in 0..n / 2 {
            labels.push(format!("CMPQ1LFSR_{i}"));
            labels.push(format!("CMPQ2LFSR_{i}"));
        }
        labels.extend((0..self.mutation_units()).map(|v| format!("MMLFSR_{v}")));
        labels
    }

    /// The labeled seed plan for this configuration.
    pub fn seed_plan(&self) -> SeedPlan {
        let labels = self.unit_labels();
        expand_seeds(self.master_seed, labels.len()).relabel(labels)
    }

    /// Number of 32-bit draws consumed per generation.
    pub fn draws_per_generation(&self) -> usize {
        3 * self.population + self.mutation_units()
    }
}

/// `true` when the counter matches the stored constant.
#[inline]
pub fn sync_enable(counter: u32, sync_val: u32) -> bool {
    counter == sync_val
}

/// Free-running counter that enables the RX registers once per period.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyncModule {
    counter: u32,
    sync_val: u32,
}

impl SyncModule {
    pub fn new(sync_val: u32) -> Self {
        SyncModule {
            counter: 0,
            sync_val,
        }
    }

    /// One clock. Returns the enable line for this cycle.
    pub fn tick(&mut self) -> bool {
        let enable = sync_enable(self.counter, self.sync_val);
        self.counter = if enable { 0 } else { self.counter + 1 };
        enable
    }
}

/// The unit LFSR bank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LfsrBank {
    /// `[SMLFSR1_j, SMLFSR2_j]`
    pub selection: Vec<[Lfsr32State; 2]>,
    /// `[p-half, q-half]` per crossover module.
    pub crossover: Vec<[Lfsr32State; 2]>,
    pub mutation: Vec<Lfsr32State>,
}

/// Architectural state at a generation boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaState {
    /// The RX registers.
    pub population: Vec<ChromosomeWord>,
    pub bank: LfsrBank,
    pub sync: SyncModule,
    pub cycle_count: u64,
    pub generation: u64,
}

/// Statistics of one evaluated population.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenerationRecord {
    /// 1-based index `k` of the generation whose population was evaluated.
    pub generation: u64,
    pub best_raw: i64,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    /// Exact sum of the raw fitness values.
    #[serde(skip)]
    pub fitness_sum: i128,
    #[serde(serialize_with = "serialize_word")]
    pub best_word: ChromosomeWord,
}

fn serialize_word<S: serde::Serializer>(w: &ChromosomeWord, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u32(w.bits())
}

/// Seeds the RX registers and every unit from the master seed.
pub fn init_population(cfg: &GaConfig) -> Result<GaState> {
    cfg.validate()?;
    let n = cfg.population;
    let plan = cfg.seed_plan();
    let mut seeds = plan.seeds();
    let mut next = || Lfsr32State::new(seeds.next().expect("seed plan sized for the bank"));

    let mut population = Vec::with_capacity(n);
    for _ in 0..n {
        let s = next()?.value();
        population.push(cfg.layout.truncate(top_bits_unchecked(s, cfg.layout.bits())));
    }
    let mut selection = Vec::with_capacity(n);
    for _ in 0..n {
        selection.push([next()?, next()?]);
    }
    let mut crossover = Vec::with_capacity(n / 2);
    for _ in 0..n / 2 {
        crossover.push([next()?, next()?]);
    }
    let mutation = (0..cfg.mutation_units()).map(|_| next()).collect::<Result<Vec<_>>>()?;

    Ok(GaState {
        population,
        bank: LfsrBank {
            selection,
            crossover,
            mutation,
        },
        sync: SyncModule::new(cfg.sync_val),
        cycle_count: 0,
        generation: 0,
    })
}

/// Fitness of every RX register, as signed raw fitness words.
pub fn evaluate_population(pop: &[ChromosomeWord], cfg: &GaConfig) -> Vec<i64> {
    pop.iter()
        .map(|&x| evaluate_raw(x, cfg.layout, &cfg.tables))
        .collect()
}

fn summarize(generation: u64, pop: &[ChromosomeWord], fit: &[i64], cfg: &GaConfig) -> GenerationRecord {
    let mut best = 0;
    for j in 1..fit.len() {
        if cfg.mode.beats(fit[j], fit[best]) {
            best = j;
        }
    }
    let sum: i128 = fit.iter().map(|&f| f as i128).sum();
    let fmt = cfg.tables.fitness_fmt;
    GenerationRecord {
        generation,
        best_raw: fit[best],
        best_fitness: fmt.raw_to_real(fit[best]),
        mean_fitness: sum as f64 / fit.len() as f64 * fmt.lsb(),
        fitness_sum: sum,
        best_word: pop[best],
    }
}

/// One generation. When `draws` is given, every unit output is appended in
/// schedule order. Returns the statistics of the population that was
/// evaluated (the one present before latching).
pub fn step_generation(
    state: &mut GaState,
    cfg: &GaConfig,
    mut draws: Option<&mut Vec<u32>>,
) -> GenerationRecord {
    let n = cfg.population;
    let mut record = |r: u32| {
        if let Some(d) = draws.as_deref_mut() {
            d.push(r);
        }
        r
    };

    // FF
    let fit = evaluate_population(&state.population, cfg);
    let stats = summarize(state.generation + 1, &state.population, &fit, cfg);

    // SF
    let mut w = Vec::with_capacity(n);
    for unit in state.bank.selection.iter_mut() {
        unit[0] = unit[0].step();
        unit[1] = unit[1].step();
        let (r1, r2) = (record(unit[0].value()), record(unit[1].value()));
        w.push(state.population[tournament_index(&fit, r1, r2, cfg.mode)]);
    }

    // CF
    let mut z = Vec::with_capacity(n);
    for (i, unit) in state.bank.crossover.iter_mut().enumerate() {
        unit[0] = unit[0].step();
        unit[1] = unit[1].step();
        let (rp, rq) = (record(unit[0].value()), record(unit[1].value()));
        let (a, b) = crossover_pair(cfg.layout, w[2 * i], w[2 * i + 1], rp, rq);
        z.push(a);
        z.push(b);
    }

    // MF on the first P offspring
    for (v, unit) in state.bank.mutation.iter_mut().enumerate() {
        *unit = unit.step();
        let r = record(unit.value());
        z[v] = mutate(z[v], mutation_word(cfg.layout, r));
    }

    // SyncM: clock until the enable line latches Z into RX
    loop {
        state.cycle_count += 1;
        if state.sync.tick() {
            break;
        }
    }
    state.population = z;
    state.generation += 1;
    stats
}

/// Echo of the configuration that produced a trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub n: usize,
    pub m: u32,
    pub k: u32,
    pub mr: f64,
    pub p: usize,
    pub mode: SelectionMode,
    pub seed: u64,
    pub single_variable: bool,
    pub sync_val: u32,
    pub fitness_total_bits: u32,
    pub fitness_frac_bits: u32,
}

impl From<&GaConfig> for ConfigEcho {
    fn from(c: &GaConfig) -> Self {
        ConfigEcho {
            n: c.population,
            m: c.layout.bits(),
            k: c.generations,
            mr: c.mutation_rate,
            p: c.mutation_units(),
            mode: c.mode,
            seed: c.master_seed,
            single_variable: c.single_variable,
            sync_val: c.sync_val,
            fitness_total_bits: c.tables.fitness_fmt.total_bits(),
            fitness_frac_bits: c.tables.fitness_fmt.frac_bits(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunTrace {
    pub config: ConfigEcho,
    pub records: Vec<GenerationRecord>,
    pub total_cycles: u64,
    pub final_population: Vec<ChromosomeWord>,
    /// Wall-clock time of the generation loop. Informational only.
    pub elapsed: Duration,
}

pub const CSV_HEADER: &str = "run_id,generation,best_fitness,mean_fitness,best_word_hex,best_px,best_qx";

impl RunTrace {
    /// Best fitness over the whole run under `mode`.
    pub fn best_ever_raw(&self) -> i64 {
        let mode = self.config.mode;
        self.records
            .iter()
            .map(|r| r.best_raw)
            .reduce(|a, b| if mode.beats(b, a) { b } else { a })
            .expect("a trace holds at least one record")
    }

    /// First generation whose best raw fitness equals `target`.
    pub fn first_hit(&self, target: i64) -> Option<u64> {
        self.records
            .iter()
            .find(|r| r.best_raw == target)
            .map(|r| r.generation)
    }

    pub fn generations_per_second(&self) -> f64 {
        let secs = self.elapsed.as_secs_f64();
        if secs > 0.0 {
            self.records.len() as f64 / secs
        } else {
            f64::INFINITY
        }
    }

    /// CSV rows (with header). Fitness values are printed exactly.
    pub fn write_csv<W: Write>(&self, run_id: usize, mut out: W) -> io::Result<()> {
        let layout = WordLayout::new(self.config.m).expect("validated width");
        let frac = self.config.fitness_frac_bits;
        let log2n = self.config.n.trailing_zeros();
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.records {
            let (px, qx) = layout.split(r.best_word);
            writeln!(
                out,
                "{run_id},{},{},{},{:0w$x},{},{}",
                r.generation,
                dyadic_to_decimal(r.best_raw as i128, frac),
                // N is a power of two, so the mean is an exact dyadic value
                dyadic_to_decimal(r.fitness_sum, frac + log2n),
                r.best_word.bits(),
                layout.half_as_signed(px),
                layout.half_as_signed(qx),
                w = layout.hex_digits()
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self, run_id: usize) -> String {
        let mut buf = Vec::new();
        self.write_csv(run_id, &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii csv")
    }
}

/// Stepping handle over one run.
#[derive(Clone, Debug)]
pub struct Engine {
    cfg: GaConfig,
    state: GaState,
}

impl Engine {
    pub fn new(cfg: GaConfig) -> Result<Self> {
        let state = init_population(&cfg)?;
        Ok(Engine { cfg, state })
    }

    pub fn config(&self) -> &GaConfig {
        &self.cfg
    }

    pub fn state(&self) -> &GaState {
        &self.state
    }

    pub fn step(&mut self) -> GenerationRecord {
        step_generation(&mut self.state, &self.cfg, None)
    }

    pub fn step_recording(&mut self, draws: &mut Vec<u32>) -> GenerationRecord {
        step_generation(&mut self.state, &self.cfg, Some(draws))
    }
}

/// `K` generations from the initial population.
pub fn run(cfg: &GaConfig) -> Result<RunTrace> {
    let mut engine = Engine::new(cfg.clone())?;
    let start = Instant::now();
    let records: Vec<_> = (0..cfg.generations).map(|_| engine.step()).collect();
    let elapsed = start.elapsed();
    Ok(RunTrace {
        config: cfg.into(),
        records,
        total_cycles: engine.state.cycle_count,
        final_population: engine.state.population,
        elapsed,
    })
}
