//! C ABI over the `hwga` model.
//!
//! Handles are opaque and owned by the caller: every `*_new` has a matching
//! `*_free`. Functions return an [`HwgaStatus`]; on failure the message is
//! available from [`hwga_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use hwga::cli::{dump_roms, parse_config, Args};
use hwga::engine::{run, Engine, GaConfig, GenerationRecord};
use hwga::oracle::exhaustive_optimum;
use hwga::prng::{expand_seeds, lfsr_step};
use hwga::{Error, SelectionMode};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HwgaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Parse = 4,
    Io = 5,
    Capacity = 6,
    Runtime = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HwgaMode {
    Minimize = 0,
    Maximize = 1,
}

/// Statistics of one evaluated generation.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HwgaRecord {
    pub generation: u64,
    pub best_raw: i64,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_word: u32,
}

impl From<&GenerationRecord> for HwgaRecord {
    fn from(r: &GenerationRecord) -> Self {
        HwgaRecord {
            generation: r.generation,
            best_raw: r.best_raw,
            best_fitness: r.best_fitness,
            mean_fitness: r.mean_fitness,
            best_word: r.best_word.bits(),
        }
    }
}

/// Exhaustive optimum of a config's fitness datapath.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HwgaOptimum {
    pub best_word: u32,
    pub best_raw: i64,
    pub best_fitness: f64,
    pub px: i64,
    pub qx: i64,
}

/// Opaque run configuration.
pub struct HwgaConfig {
    inner: GaConfig,
}

/// Opaque stepping engine.
pub struct HwgaEngine {
    inner: Engine,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HwgaStatus {
    match e {
        Error::ZeroLfsrState | Error::Argument(_) => HwgaStatus::InvalidArgument,
        Error::Config { .. } => HwgaStatus::Config,
        Error::Parse { .. } => HwgaStatus::Parse,
        Error::Io { .. } => HwgaStatus::Io,
        Error::Capacity { .. } => HwgaStatus::Capacity,
        Error::Build { .. } | Error::DrawCount { .. } => HwgaStatus::Runtime,
    }
}

fn guard<F: FnOnce() -> Result<(), HwgaStatus>>(f: F) -> HwgaStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HwgaStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".to_string());
            HwgaStatus::Panic
        }
    }
}

fn fail(e: Error) -> HwgaStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> HwgaStatus {
    set_error(format!("{what} is null"));
    HwgaStatus::NullPointer
}

unsafe fn str_arg(p: *const c_char, what: &str) -> Result<String, HwgaStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_string)
        .map_err(|_| {
            set_error(format!("{what} is not valid UTF-8"));
            HwgaStatus::InvalidArgument
        })
}

unsafe fn opt_str_arg(p: *const c_char, what: &str) -> Result<Option<String>, HwgaStatus> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, what).map(Some)
    }
}

fn config_from(args: &Args) -> Result<Box<HwgaConfig>, HwgaStatus> {
    let spec = parse_config(args).map_err(fail)?;
    Ok(Box::new(HwgaConfig { inner: spec.base }))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn hwga_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// One Galois step of the 32-bit LFSR. Zero is rejected.
///
/// # Safety
/// `out` must be a valid pointer to a `u32`.
#[no_mangle]
pub unsafe extern "C" fn hwga_lfsr_step(state: u32, out: *mut u32) -> HwgaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lfsr_step(state).map_err(fail)?;
        Ok(())
    })
}

/// Writes `count` distinct nonzero seeds derived from `master`.
///
/// # Safety
/// `out` must point to at least `count` writable `u32`s.
#[no_mangle]
pub unsafe extern "C" fn hwga_expand_seeds(master: u64, out: *mut u32, count: usize) -> HwgaStatus {
    guard(|| {
        if out.is_null() && count > 0 {
            return Err(null("out"));
        }
        for (i, s) in expand_seeds(master, count).seeds().enumerate() {
            *out.add(i) = s;
        }
        Ok(())
    })
}

/// Builds a config from a preset name (`f1`, `f2`, `f3`) or, when
/// `rom_dir` is non-null, from ROM files in that directory.
///
/// # Safety
/// `function` and `rom_dir` must be null or valid C strings; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hwga_config_new(
    function: *const c_char,
    rom_dir: *const c_char,
    n: usize,
    m: u32,
    out: *mut *mut HwgaConfig,
) -> HwgaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let args = Args {
            function: opt_str_arg(function, "function")?,
            rom_dir: opt_str_arg(rom_dir, "rom_dir")?.map(PathBuf::from),
            n: Some(n),
            m: Some(m),
            ..Args::default()
        };
        *out = Box::into_raw(config_from(&args)?);
        Ok(())
    })
}

/// Builds a config from a `key = value` config file.
///
/// # Safety
/// `path` must be a valid C string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hwga_config_from_file(path: *const c_char, out: *mut *mut HwgaConfig) -> HwgaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let args = Args {
            config: Some(PathBuf::from(str_arg(path, "path")?)),
            ..Args::default()
        };
        *out = Box::into_raw(config_from(&args)?);
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle from `hwga_config_new`/`hwga_config_from_file`
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn hwga_config_free(cfg: *mut HwgaConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

unsafe fn update<F: FnOnce(&mut GaConfig)>(cfg: *mut HwgaConfig, f: F) -> HwgaStatus {
    guard(|| {
        let c = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        let mut next = c.inner.clone();
        f(&mut next);
        next.validate().map_err(fail)?;
        c.inner = next;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn hwga_config_set_generations(cfg: *mut HwgaConfig, k: u32) -> HwgaStatus {
    update(cfg, |c| c.generations = k)
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn hwga_config_set_mutation_rate(cfg: *mut HwgaConfig, mr: f64) -> HwgaStatus {
    update(cfg, |c| c.mutation_rate = mr)
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn hwga_config_set_mode(cfg: *mut HwgaConfig, mode: HwgaMode) -> HwgaStatus {
    update(cfg, |c| {
        c.mode = match mode {
            HwgaMode::Minimize => SelectionMode::Minimize,
            HwgaMode::Maximize => SelectionMode::Maximize,
        }
    })
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn hwga_config_set_seed(cfg: *mut HwgaConfig, seed: u64) -> HwgaStatus {
    update(cfg, |c| c.master_seed = seed)
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn hwga_config_set_sync_val(cfg: *mut HwgaConfig, sync_val: u32) -> HwgaStatus {
    update(cfg, |c| c.sync_val = sync_val)
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn hwga_config_set_single_variable(cfg: *mut HwgaConfig, on: bool) -> HwgaStatus {
    update(cfg, |c| c.single_variable = on)
}

/// Writes the compiled ROMs into `dir`.
///
/// # Safety
/// `cfg` must be a live config handle and `dir` a valid C string.
#[no_mangle]
pub unsafe extern "C" fn hwga_config_dump_roms(cfg: *const HwgaConfig, dir: *const c_char) -> HwgaStatus {
    guard(|| {
        let c = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let dir = PathBuf::from(str_arg(dir, "dir")?);
        dump_roms(&c.inner.tables, &dir).map_err(fail)?;
        Ok(())
    })
}

/// Exhaustive optimum for the config's function and mode.
///
/// # Safety
/// `cfg` must be a live config handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hwga_config_optimum(cfg: *const HwgaConfig, out: *mut HwgaOptimum) -> HwgaStatus {
    guard(|| {
        let c = &cfg.as_ref().ok_or_else(|| null("cfg"))?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = exhaustive_optimum(&c.tables, c.layout, c.mode, c.single_variable).map_err(fail)?;
        *out = HwgaOptimum {
            best_word: r.best_word.bits(),
            best_raw: r.best_raw,
            best_fitness: r.best_fitness,
            px: r.argbest_vars.0,
            qx: r.argbest_vars.1,
        };
        Ok(())
    })
}

/// Runs all `K` generations and writes the CSV trace to `path`.
///
/// # Safety
/// `cfg` must be a live config handle and `path` a valid C string.
/// `total_cycles` may be null.
#[no_mangle]
pub unsafe extern "C" fn hwga_run_to_csv(
    cfg: *const HwgaConfig,
    run_id: usize,
    path: *const c_char,
    total_cycles: *mut u64,
) -> HwgaStatus {
    guard(|| {
        let c = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let path = PathBuf::from(str_arg(path, "path")?);
        let trace = run(&c.inner).map_err(fail)?;
        std::fs::write(&path, trace.to_csv_string(run_id)).map_err(|e| {
            fail(Error::Io {
                path: path.clone(),
                source: e,
            })
        })?;
        if !total_cycles.is_null() {
            *total_cycles = trace.total_cycles;
        }
        Ok(())
    })
}

/// Seeds a new engine from the config. The config may be freed afterwards.
///
/// # Safety
/// `cfg` must be a live config handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hwga_engine_new(cfg: *const HwgaConfig, out: *mut *mut HwgaEngine) -> HwgaStatus {
    guard(|| {
        let c = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = Engine::new(c.inner.clone()).map_err(fail)?;
        *out = Box::into_raw(Box::new(HwgaEngine { inner }));
        Ok(())
    })
}

/// # Safety
/// `engine` must be null or a live engine handle.
#[no_mangle]
pub unsafe extern "C" fn hwga_engine_free(engine: *mut HwgaEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Advances one generation; `record` receives the statistics of the
/// population that was evaluated. `record` may be null.
///
/// # Safety
/// `engine` must be a live engine handle.
#[no_mangle]
pub unsafe extern "C" fn hwga_engine_step(engine: *mut HwgaEngine, record: *mut HwgaRecord) -> HwgaStatus {
    guard(|| {
        let e = engine.as_mut().ok_or_else(|| null("engine"))?;
        let r = e.inner.step();
        if !record.is_null() {
            *record = HwgaRecord::from(&r);
        }
        Ok(())
    })
}

/// Copies the RX registers into `buf`. With a null `buf` only the
/// population size is reported through `len_out`.
///
/// # Safety
/// `engine` must be a live engine handle; `buf` must be null or point to
/// `cap` writable `u32`s; `len_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hwga_engine_population(
    engine: *const HwgaEngine,
    buf: *mut u32,
    cap: usize,
    len_out: *mut usize,
) -> HwgaStatus {
    guard(|| {
        let e = engine.as_ref().ok_or_else(|| null("engine"))?;
        if len_out.is_null() {
            return Err(null("len_out"));
        }
        let pop = &e.inner.state().population;
        *len_out = pop.len();
        if buf.is_null() {
            return Ok(());
        }
        if cap < pop.len() {
            set_error(format!("buffer holds {cap} words, population has {}", pop.len()));
            return Err(HwgaStatus::InvalidArgument);
        }
        for (i, w) in pop.iter().enumerate() {
            *buf.add(i) = w.bits();
        }
        Ok(())
    })
}

/// Generations completed and clock cycles elapsed so far.
///
/// # Safety
/// `engine` must be a live engine handle; either out pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn hwga_engine_progress(
    engine: *const HwgaEngine,
    generation: *mut u64,
    cycles: *mut u64,
) -> HwgaStatus {
    guard(|| {
        let s = engine.as_ref().ok_or_else(|| null("engine"))?.inner.state();
        if !generation.is_null() {
            *generation = s.generation;
        }
        if !cycles.is_null() {
            *cycles = s.cycle_count;
        }
        Ok(())
    })
}
