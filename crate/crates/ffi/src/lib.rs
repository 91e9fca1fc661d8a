//! C ABI over `dschan`.
//!
//! Every fallible call returns a [`DschanStatus`]; on failure the message is
//! available from [`dschan_last_error_message`] on the same thread.
//! Configurations are opaque heap handles released with
//! [`dschan_config_free`]. Matrices cross the boundary as separate real and
//! imaginary `double` arrays in column-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use dschan::harness::{
    emit_results, run_sweep, run_trial, OutputFormat, PilotRule, SweepAxis, SweepSpec,
};
use dschan::recovery::{mutual_coherence, somp, MeasurementMatrix, SompOptions};
use dschan::{verify, CMatrix, Error, SelectionMode, SystemConfig, C64};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DschanStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    DimensionMismatch = 3,
    Infeasible = 4,
    RankDeficient = 5,
    Degenerate = 6,
    Io = 7,
    Format = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DschanAxis {
    SnrDb = 0,
    DopplerNorm = 1,
    Antennas = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DschanPilotRule {
    Fixed = 0,
    Proportional = 1,
}

/// Opaque experiment configuration.
pub struct DschanConfig {
    inner: SystemConfig,
}

/// Outcome of one Monte-Carlo trial. `smoothed_nmse_db` is NaN when
/// `has_smoothed` is false.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DschanTrialResult {
    pub seed: u64,
    pub proposed_nmse_db: f64,
    pub has_smoothed: bool,
    pub smoothed_nmse_db: f64,
    pub ls_nmse_db: f64,
    pub mu_phi: f64,
    pub support_hit: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> DschanStatus {
    match err {
        Error::Parameter(_) => DschanStatus::InvalidParameter,
        Error::Dimension(_) => DschanStatus::DimensionMismatch,
        Error::Infeasible(_) => DschanStatus::Infeasible,
        Error::RankDeficient { .. } => DschanStatus::RankDeficient,
        Error::Degenerate(_) => DschanStatus::Degenerate,
        Error::Io { .. } => DschanStatus::Io,
        Error::Format(_) => DschanStatus::Format,
    }
}

struct Fail(DschanStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(DschanStatus::NullPointer, format!("{what} is null"))
}

/// Run `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DschanStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DschanStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            DschanStatus::Panic
        }
    }
}

unsafe fn config_mut<'a>(cfg: *mut DschanConfig) -> Result<&'a mut SystemConfig, Fail> {
    cfg.as_mut()
        .map(|c| &mut c.inner)
        .ok_or_else(|| null("config"))
}

unsafe fn config_ref<'a>(cfg: *const DschanConfig) -> Result<&'a SystemConfig, Fail> {
    cfg.as_ref().map(|c| &c.inner).ok_or_else(|| null("config"))
}

unsafe fn c_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        Fail(
            DschanStatus::InvalidParameter,
            format!("{what} is not UTF-8"),
        )
    })
}

unsafe fn complex_matrix(
    re: *const f64,
    im: *const f64,
    rows: usize,
    cols: usize,
) -> Result<CMatrix, Fail> {
    if re.is_null() || im.is_null() {
        return Err(null("matrix data"));
    }
    let len = rows.checked_mul(cols).ok_or_else(|| {
        Fail(
            DschanStatus::InvalidParameter,
            "matrix size overflows".into(),
        )
    })?;
    let (re, im) = (
        std::slice::from_raw_parts(re, len),
        std::slice::from_raw_parts(im, len),
    );
    let data: Vec<C64> = re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect();
    Ok(CMatrix::from_vec(rows, cols, data))
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dschan_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dschan_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Desk-scale defaults (`N = 256`, `G = 24`, `N_t = 16`).
#[no_mangle]
pub extern "C" fn dschan_config_desk_scale() -> *mut DschanConfig {
    Box::into_raw(Box::new(DschanConfig {
        inner: SystemConfig::desk_scale(),
    }))
}

/// Full-size defaults (`N = 1024`, `G = 96`, `N_t = 16`).
#[no_mangle]
pub extern "C" fn dschan_config_full_scale() -> *mut DschanConfig {
    Box::into_raw(Box::new(DschanConfig {
        inner: SystemConfig::full_scale(),
    }))
}

/// Parse a TOML document holding the configuration fields at top level.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dschan_config_from_toml(
    text: *const c_char,
    out: *mut *mut DschanConfig,
) -> DschanStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let text = c_str(text, "text")?;
        let inner = SystemConfig::from_toml(text)?;
        *out = Box::into_raw(Box::new(DschanConfig { inner }));
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dschan_config_free(cfg: *mut DschanConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Independent copy of `cfg`, or NULL when `cfg` is NULL.
///
/// # Safety
/// `cfg` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dschan_config_clone(cfg: *const DschanConfig) -> *mut DschanConfig {
    match cfg.as_ref() {
        Some(c) => Box::into_raw(Box::new(DschanConfig {
            inner: c.inner.clone(),
        })),
        None => ptr::null_mut(),
    }
}

/// Apply `edit` to a copy, keep it only if it validates.
unsafe fn update(cfg: *mut DschanConfig, edit: impl FnOnce(&mut SystemConfig)) -> DschanStatus {
    guard(|| {
        let cfg = config_mut(cfg)?;
        let mut next = cfg.clone();
        edit(&mut next);
        next.validate()?;
        *cfg = next;
        Ok(())
    })
}

/// Receive SNR in dB; `+INFINITY` disables noise.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dschan_config_set_snr_db(
    cfg: *mut DschanConfig,
    value: f64,
) -> DschanStatus {
    update(cfg, |c| {
        c.snr_db = if value == f64::INFINITY {
            None
        } else {
            Some(value)
        }
    })
}

/// Maximum Doppler shift times the symbol duration.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dschan_config_set_doppler_norm(
    cfg: *mut DschanConfig,
    value: f64,
) -> DschanStatus {
    update(cfg, |c| c.doppler_norm = value)
}

/// Transmit antennas `N_t`.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dschan_config_set_antennas(
    cfg: *mut DschanConfig,
    value: usize,
) -> DschanStatus {
    update(cfg, |c| c.antennas = value)
}

/// Nonzero-pilot groups `G`.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dschan_config_set_pilot_groups(
    cfg: *mut DschanConfig,
    value: usize,
) -> DschanStatus {
    update(cfg, |c| c.pilot_groups = value)
}

/// Subcarriers `N`.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dschan_config_set_subcarriers(
    cfg: *mut DschanConfig,
    value: usize,
) -> DschanStatus {
    update(cfg, |c| c.subcarriers = value)
}

/// Channel length `L`.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dschan_config_set_taps(
    cfg: *mut DschanConfig,
    value: usize,
) -> DschanStatus {
    update(cfg, |c| c.taps = value)
}

/// Strong taps `K`.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dschan_config_set_strong_taps(
    cfg: *mut DschanConfig,
    value: usize,
) -> DschanStatus {
    update(cfg, |c| c.strong_taps = value)
}

/// Basis order `D` (odd).
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dschan_config_set_bem_order(
    cfg: *mut DschanConfig,
    value: usize,
) -> DschanStatus {
    update(cfg, |c| c.bem_order = value)
}

/// Base seed of sweeps.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dschan_config_set_seed(
    cfg: *mut DschanConfig,
    value: u64,
) -> DschanStatus {
    update(cfg, |c| c.seed = value)
}

/// Select whole taps across antennas instead of single rows.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dschan_config_set_block_selection(
    cfg: *mut DschanConfig,
    value: bool,
) -> DschanStatus {
    update(cfg, |c| {
        c.selection = if value {
            SelectionMode::Block
        } else {
            SelectionMode::Row
        }
    })
}

/// Run one trial with the given seed.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dschan_run_trial(
    cfg: *const DschanConfig,
    seed: u64,
    out: *mut DschanTrialResult,
) -> DschanStatus {
    guard(|| {
        let cfg = config_ref(cfg)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = run_trial(cfg, seed)?;
        *out = DschanTrialResult {
            seed: r.seed,
            proposed_nmse_db: r.proposed_nmse_db,
            has_smoothed: r.smoothed_nmse_db.is_some(),
            smoothed_nmse_db: r.smoothed_nmse_db.unwrap_or(f64::NAN),
            ls_nmse_db: r.ls_nmse_db,
            mu_phi: r.mu_phi,
            support_hit: r.support_hit,
        };
        Ok(())
    })
}

/// Run a sweep and write the CSV table (plus its manifest) to `out_path`.
///
/// # Safety
/// `cfg` must be a live handle, `points` must hold `n_points` values and
/// `out_path` must be a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn dschan_run_sweep(
    cfg: *const DschanConfig,
    axis: DschanAxis,
    points: *const f64,
    n_points: usize,
    trials: usize,
    rule: DschanPilotRule,
    out_path: *const c_char,
) -> DschanStatus {
    guard(|| {
        let base = config_ref(cfg)?.clone();
        if points.is_null() {
            return Err(null("points"));
        }
        let points = std::slice::from_raw_parts(points, n_points).to_vec();
        let path = c_str(out_path, "out_path")?;
        let spec = SweepSpec {
            base,
            axis: match axis {
                DschanAxis::SnrDb => SweepAxis::SnrDb,
                DschanAxis::DopplerNorm => SweepAxis::DopplerNorm,
                DschanAxis::Antennas => SweepAxis::Antennas,
            },
            points,
            trials,
            pilot_rule: match rule {
                DschanPilotRule::Fixed => PilotRule::Fixed,
                DschanPilotRule::Proportional => PilotRule::Proportional,
            },
        };
        let table = run_sweep(&spec)?;
        emit_results(&table, &spec, OutputFormat::Csv, Path::new(path), None)?;
        Ok(())
    })
}

/// Run the operator identity suite.
///
/// # Safety
/// `passed` and `total` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn dschan_verify(passed: *mut usize, total: *mut usize) -> DschanStatus {
    guard(|| {
        let passed = passed.as_mut().ok_or_else(|| null("passed"))?;
        let total = total.as_mut().ok_or_else(|| null("total"))?;
        let checks = verify::run_all();
        *total = checks.len();
        *passed = checks.iter().filter(|c| c.passed).count();
        Ok(())
    })
}

/// Largest normalized inner product between distinct columns of a
/// `rows x cols` matrix.
///
/// # Safety
/// `re` and `im` must each hold `rows * cols` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dschan_mutual_coherence(
    re: *const f64,
    im: *const f64,
    rows: usize,
    cols: usize,
    out: *mut f64,
) -> DschanStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = mutual_coherence(&complex_matrix(re, im, rows, cols)?)?;
        Ok(())
    })
}

/// Joint-sparse recovery of `X` from `Y = A X` with `iterations` single
/// column selections.
///
/// `A` is `rows x cols`, `Y` is `rows x y_cols`; `x_re`/`x_im` receive the
/// `cols x y_cols` estimate and `support` the `iterations` selected column
/// indices in ascending order.
///
/// # Safety
/// All pointers must be valid for the sizes above.
#[no_mangle]
pub unsafe extern "C" fn dschan_somp(
    a_re: *const f64,
    a_im: *const f64,
    rows: usize,
    cols: usize,
    y_re: *const f64,
    y_im: *const f64,
    y_cols: usize,
    iterations: usize,
    x_re: *mut f64,
    x_im: *mut f64,
    support: *mut usize,
) -> DschanStatus {
    guard(|| {
        if x_re.is_null() || x_im.is_null() || support.is_null() {
            return Err(null("output buffer"));
        }
        let phi = MeasurementMatrix {
            phi: complex_matrix(a_re, a_im, rows, cols)?,
            antennas: 1,
            taps: cols,
        };
        let y = complex_matrix(y_re, y_im, rows, y_cols)?;
        let res = somp(&phi, &y, &SompOptions::iterations(iterations))?;
        let n = cols * y_cols;
        let (xr, xi) = (
            std::slice::from_raw_parts_mut(x_re, n),
            std::slice::from_raw_parts_mut(x_im, n),
        );
        for (k, v) in res.x.iter().enumerate() {
            xr[k] = v.re;
            xi[k] = v.im;
        }
        std::slice::from_raw_parts_mut(support, iterations).copy_from_slice(&res.support_rows);
        Ok(())
    })
}
