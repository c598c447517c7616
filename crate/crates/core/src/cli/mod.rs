//! Command-line front end: config parsing, presets, experiment batches,
//! ROM dumping and CSV/summary emission.
//!
//! Values are resolved in three layers: built-in defaults, then the optional
//! `key = value` config file, then command-line flags.

pub mod presets;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use clap::Parser;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{run, ConfigEcho, GaConfig, RunTrace, DEFAULT_SYNC_VAL};
use crate::error::{Error, Result};
use crate::genetic_ops::SelectionMode;
use crate::oracle::{exhaustive_optimum, OptimumReport};
use crate::romgen::{dump_rom, load_rom, FfmTables, GammaStage, DEFAULT_GAMMA_CAP};
use crate::word::WordLayout;

use presets::{Formats, Preset};

pub const ALPHA_ROM: &str = "alpha.rom";
pub const BETA_ROM: &str = "beta.rom";
pub const GAMMA_ROM: &str = "gamma.rom";
pub const SUMMARY_FILE: &str = "summary.json";

/// Simulate the parallel hardware genetic algorithm.
#[derive(Parser, Debug, Default, Clone)]
#[command(name = "hwga", version, about)]
pub struct Args {
    /// Config file with `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Benchmark preset: f1, f2 or f3.
    #[arg(long)]
    pub function: Option<String>,
    /// Population size N (power of two, >= 4).
    #[arg(long)]
    pub n: Option<usize>,
    /// Chromosome width m in bits (even, 4..=32).
    #[arg(long)]
    pub m: Option<u32>,
    /// Generations K.
    #[arg(long)]
    pub k: Option<u32>,
    /// Mutation rate as a fraction (0.01) or percentage (1%).
    #[arg(long)]
    pub mr: Option<String>,
    /// min or max.
    #[arg(long)]
    pub mode: Option<String>,
    /// Master seed; run r uses seed + r.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Directory for per-run CSV traces and the summary.
    #[arg(long)]
    pub trace_dir: Option<PathBuf>,
    /// Load alpha.rom, beta.rom and optional gamma.rom from this directory.
    #[arg(long)]
    pub rom_dir: Option<PathBuf>,
    /// Write the compiled ROMs to this directory.
    #[arg(long)]
    pub dump_roms: Option<PathBuf>,
    /// Compute the exhaustive optimum and report first-hit statistics.
    #[arg(long)]
    pub check_oracle: bool,
    /// Treat the problem as single-variable (px ignored).
    #[arg(long)]
    pub single_variable: bool,
    /// Synchronization constant; a population latches every sync_val + 1 cycles.
    #[arg(long)]
    pub sync_val: Option<u32>,
}

#[derive(Clone, Debug)]
struct Settings {
    function: Option<String>,
    n: usize,
    m: u32,
    k: u32,
    mr: f64,
    mode: SelectionMode,
    seed: u64,
    runs: usize,
    single_variable: Option<bool>,
    frac_bits: u32,
    fitness_bits: u32,
    rom_dir: Option<PathBuf>,
    rom_cap: u64,
    out_dir: Option<PathBuf>,
    sync_val: u32,
}

impl Default for Settings {
    fn default() -> Self {
        let f = Formats::default();
        Settings {
            function: None,
            n: 32,
            m: 20,
            k: 100,
            mr: 0.01,
            mode: SelectionMode::Minimize,
            seed: 0,
            runs: 1,
            single_variable: None,
            frac_bits: f.frac_bits,
            fitness_bits: f.fitness_bits,
            rom_dir: None,
            rom_cap: DEFAULT_GAMMA_CAP,
            out_dir: None,
            sync_val: DEFAULT_SYNC_VAL,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::config(key, format!("malformed value `{v}`")))
}

fn parse_rate(v: &str) -> Result<f64> {
    let v = v.trim();
    let rate = match v.strip_suffix('%') {
        Some(p) => parse_value::<f64>("mr", p)? / 100.0,
        None => parse_value::<f64>("mr", v)?,
    };
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::config("mr", format!("mutation rate {v} outside [0, 1]")));
    }
    Ok(rate)
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::config(key, format!("malformed boolean `{v}`"))),
    }
}

impl Settings {
    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "function" => self.function = Some(v.trim().to_string()),
            "n" => self.n = parse_value(key, v)?,
            "m" => self.m = parse_value(key, v)?,
            "k" => self.k = parse_value(key, v)?,
            "mr" => self.mr = parse_rate(v)?,
            "mode" => self.mode = v.trim().parse()?,
            "seed" => self.seed = parse_value(key, v)?,
            "runs" => self.runs = parse_value(key, v)?,
            "single_variable" => self.single_variable = Some(parse_bool(key, v)?),
            "frac_bits" => self.frac_bits = parse_value(key, v)?,
            "fitness_bits" => self.fitness_bits = parse_value(key, v)?,
            "rom_dir" => self.rom_dir = Some(PathBuf::from(v.trim())),
            "rom_cap" => self.rom_cap = parse_value(key, v)?,
            "out_dir" => self.out_dir = Some(PathBuf::from(v.trim())),
            "sync_val" => self.sync_val = parse_value(key, v)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }
}

/// Parses a `key = value` config document. `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::config(line, format!("line {}: expected `key = value`", i + 1))
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Where the fitness tables come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FunctionSource {
    Preset(Preset),
    RomDir(PathBuf),
}

/// A resolved batch of runs.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub base: GaConfig,
    pub source: FunctionSource,
    pub runs: usize,
    pub out_dir: Option<PathBuf>,
    pub dump_roms: Option<PathBuf>,
    pub check_oracle: bool,
}

impl ExperimentSpec {
    /// Config for run `r`: the master seed offset by `r`.
    pub fn run_config(&self, r: usize) -> GaConfig {
        let mut c = self.base.clone();
        c.master_seed = self.base.master_seed.wrapping_add(r as u64);
        c
    }

    pub fn label(&self) -> String {
        match &self.source {
            FunctionSource::Preset(p) => p.to_string(),
            FunctionSource::RomDir(d) => format!("rom:{}", d.display()),
        }
    }
}

/// Resolves defaults, the optional config file and flags into a spec.
pub fn parse_config(args: &Args) -> Result<ExperimentSpec> {
    let mut s = Settings::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (k, v) in parse_config_text(&text)? {
            s.set(&k, &v)?;
        }
    }
    if let Some(v) = &args.function {
        s.function = Some(v.clone());
    }
    if let Some(v) = args.n {
        s.n = v;
    }
    if let Some(v) = args.m {
        s.m = v;
    }
    if let Some(v) = args.k {
        s.k = v;
    }
    if let Some(v) = &args.mr {
        s.mr = parse_rate(v)?;
    }
    if let Some(v) = &args.mode {
        s.mode = v.parse()?;
    }
    if let Some(v) = args.seed {
        s.seed = v;
    }
    if let Some(v) = args.runs {
        s.runs = v;
    }
    if let Some(v) = &args.trace_dir {
        s.out_dir = Some(v.clone());
    }
    if let Some(v) = &args.rom_dir {
        s.rom_dir = Some(v.clone());
    }
    if args.single_variable {
        s.single_variable = Some(true);
    }
    if let Some(v) = args.sync_val {
        s.sync_val = v;
    }
    build_spec(s, args.dump_roms.clone(), args.check_oracle)
}

fn build_spec(s: Settings, dump_roms: Option<PathBuf>, check_oracle: bool) -> Result<ExperimentSpec> {
    if s.runs < 1 {
        return Err(Error::config("runs", "at least one run is required"));
    }
    let layout = WordLayout::new(s.m)?;
    let formats = Formats {
        frac_bits: s.frac_bits,
        fitness_bits: s.fitness_bits,
        gamma_cap: s.rom_cap,
        ..Formats::default()
    };
    let preset = s.function.as_deref().map(Preset::from_str).transpose()?;

    let (tables, source) = match (&s.rom_dir, preset) {
        (Some(dir), _) => (load_roms(dir, &formats)?, FunctionSource::RomDir(dir.clone())),
        (None, Some(p)) => (p.compile(layout, &formats)?, FunctionSource::Preset(p)),
        (None, None) => {
            return Err(Error::config(
                "function",
                "no function preset and no ROM directory given",
            ))
        }
    };
    let mut base = GaConfig::new(s.n, layout, Arc::new(tables));
    base.generations = s.k;
    base.mutation_rate = s.mr;
    base.mode = s.mode;
    base.master_seed = s.seed;
    base.sync_val = s.sync_val;
    base.single_variable = s
        .single_variable
        .unwrap_or_else(|| preset.is_some_and(Preset::single_variable));
    base.validate()?;

    Ok(ExperimentSpec {
        base,
        source,
        runs: s.runs,
        out_dir: s.out_dir,
        dump_roms,
        check_oracle,
    })
}

/// Loads `alpha.rom`, `beta.rom` and, when present, `gamma.rom`.
pub fn load_roms(dir: &Path, formats: &Formats) -> Result<FfmTables> {
    let read = |name: &str| -> Result<crate::romgen::RomTable> {
        let path = dir.join(name);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        load_rom(&text).map_err(|e| match e {
            Error::Parse { line, msg } => Error::Parse {
                line,
                msg: format!("{}: {msg}", path.display()),
            },
            other => other,
        })
    };
    let alpha = read(ALPHA_ROM)?;
    let beta = read(BETA_ROM)?;
    let (gamma, fitness_fmt) = if dir.join(GAMMA_ROM).exists() {
        let g = read(GAMMA_ROM)?;
        let fmt = g.out_fmt;
        (GammaStage::Table(g), fmt)
    } else {
        let fmt = crate::word::FixedFormat::new(formats.fitness_bits, alpha.out_fmt.frac_bits())
            .map_err(|e| Error::config("fitness_bits", e.to_string()))?;
        (GammaStage::Passthrough, fmt)
    };
    FfmTables::new(alpha, beta, gamma, fitness_fmt)
}

/// Writes the compiled tables. A passthrough `γ` produces no file.
pub fn dump_roms(tables: &FfmTables, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut write = |name: &str, text: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    write(ALPHA_ROM, dump_rom(&tables.alpha))?;
    write(BETA_ROM, dump_rom(&tables.beta))?;
    match &tables.gamma {
        GammaStage::Passthrough => {}
        GammaStage::Table(t) => write(GAMMA_ROM, dump_rom(t))?,
        GammaStage::OnTheFly(q) => {
            return Err(Error::Argument(format!(
                "gamma window {:?} exceeds the ROM cap and is evaluated on the fly; \
                 raise rom_cap or lower m/frac_bits to dump it",
                q.window()
            )))
        }
    }
    Ok(written)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub run_id: usize,
    pub seed: u64,
    pub best_fitness: f64,
    pub first_hit_generation: Option<u64>,
    pub total_cycles: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentSummary {
    pub function: String,
    pub config: ConfigEcho,
    pub runs: usize,
    pub oracle: Option<OptimumReport>,
    pub per_run: Vec<RunSummary>,
    pub hit_rate: Option<f64>,
    pub median_first_hit: Option<f64>,
    pub total_cycles: u64,
    /// Informational wall-clock throughput of the simulator.
    pub generations_per_second: f64,
    pub rom_files: Vec<PathBuf>,
    pub trace_files: Vec<PathBuf>,
}

/// Median first-hit generation over all runs, counting misses as never.
/// `None` when the median falls on a miss.
pub fn median_first_hit(hits: &[Option<u64>]) -> Option<f64> {
    if hits.is_empty() {
        return None;
    }
    let mut v: Vec<u64> = hits.iter().map(|h| h.unwrap_or(u64::MAX)).collect();
    v.sort_unstable();
    let n = v.len();
    let (a, b) = if n % 2 == 1 {
        (v[n / 2], v[n / 2])
    } else {
        (v[n / 2 - 1], v[n / 2])
    };
    if a == u64::MAX || b == u64::MAX {
        None
    } else {
        Some((a as f64 + b as f64) / 2.0)
    }
}

pub fn hit_rate(hits: &[Option<u64>]) -> f64 {
    hits.iter().filter(|h| h.is_some()).count() as f64 / hits.len() as f64
}

/// Runs every seed of the batch. Traces are returned in run order.
pub fn run_batch(spec: &ExperimentSpec) -> Result<Vec<RunTrace>> {
    (0..spec.runs)
        .into_par_iter()
        .map(|r| run(&spec.run_config(r)))
        .collect()
}

pub fn trace_path(dir: &Path, run_id: usize) -> PathBuf {
    dir.join(format!("run_{run_id:03}.csv"))
}

/// Executes the batch and writes every requested artifact.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentSummary> {
    let rom_files = match &spec.dump_roms {
        Some(dir) => dump_roms(&spec.base.tables, dir)?,
        None => Vec::new(),
    };
    let oracle = if spec.check_oracle {
        Some(exhaustive_optimum(
            &spec.base.tables,
            spec.base.layout,
            spec.base.mode,
            spec.base.single_variable,
        )?)
    } else {
        None
    };

    let start = Instant::now();
    let traces = run_batch(spec)?;
    let wall = start.elapsed().as_secs_f64();

    let mut trace_files = Vec::new();
    if let Some(dir) = &spec.out_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (r, t) in traces.iter().enumerate() {
            let path = trace_path(dir, r);
            fs::write(&path, t.to_csv_string(r)).map_err(|e| Error::io(&path, e))?;
            trace_files.push(path);
        }
    }

    let per_run: Vec<RunSummary> = traces
        .iter()
        .enumerate()
        .map(|(r, t)| RunSummary {
            run_id: r,
            seed: t.config.seed,
            best_fitness: spec.base.tables.fitness_fmt.raw_to_real(t.best_ever_raw()),
            first_hit_generation: oracle.as_ref().and_then(|o| t.first_hit(o.best_raw)),
            total_cycles: t.total_cycles,
        })
        .collect();
    let hits: Vec<Option<u64>> = per_run.iter().map(|r| r.first_hit_generation).collect();
    let total_generations: usize = traces.iter().map(|t| t.records.len()).sum();

    let summary = ExperimentSummary {
        function: spec.label(),
        config: ConfigEcho::from(&spec.base),
        runs: spec.runs,
        hit_rate: oracle.as_ref().map(|_| hit_rate(&hits)),
        median_first_hit: oracle.as_ref().and_then(|_| median_first_hit(&hits)),
        oracle,
        per_run,
        total_cycles: traces.iter().map(|t| t.total_cycles).sum(),
        generations_per_second: if wall > 0.0 {
            total_generations as f64 / wall
        } else {
            f64::INFINITY
        },
        rom_files,
        trace_files,
    };

    if let Some(dir) = &spec.out_dir {
        let path = dir.join(SUMMARY_FILE);
        let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
        fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    }
    Ok(summary)
}

impl fmt::Display for ExperimentSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        writeln!(f, "function        {}", self.function)?;
        writeln!(
            f,
            "config          N={} m={} K={} MR={} P={} mode={} seed={} sync_val={}",
            c.n, c.m, c.k, c.mr, c.p, c.mode, c.seed, c.sync_val
        )?;
        writeln!(f, "runs            {}", self.runs)?;
        if let Some(o) = &self.oracle {
            writeln!(
                f,
                "oracle optimum  {} at (px, qx) = ({}, {}), {} evaluations",
                o.best_fitness, o.argbest_vars.0, o.argbest_vars.1, o.evaluations
            )?;
        }
        if let Some(h) = self.hit_rate {
            writeln!(f, "hit rate        {:.1}%", h * 100.0)?;
        }
        if self.oracle.is_some() {
            match self.median_first_hit {
                Some(m) => writeln!(f, "median hit gen  {m}")?,
                None => writeln!(f, "median hit gen  none")?,
            }
        }
        for r in &self.per_run {
            writeln!(
                f,
                "run {:>3} seed {:>20} best {} first hit {} cycles {}",
                r.run_id,
                r.seed,
                r.best_fitness,
                r.first_hit_generation.map_or("-".to_string(), |g| g.to_string()),
                r.total_cycles
            )?;
        }
        writeln!(f, "total cycles    {}", self.total_cycles)?;
        write!(f, "throughput      {:.0} generations/s (wall clock)", self.generations_per_second)
    }
}
