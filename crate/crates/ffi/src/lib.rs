//! C ABI over `rnna`.
//!
//! Conventions:
//! - Every fallible function returns an [`RnnaStatus`]; on failure a message
//!   is available from [`rnna_last_error`] on the same thread.
//! - Objects are opaque handles created by `*_new`/`*_load`/`*_peg` functions
//!   and released with the matching `*_free`. Freeing NULL is a no-op.
//! - Caller-owned output buffers are passed with their lengths; the library
//!   never keeps pointers to caller memory.
//! - Panics are caught at the boundary and reported as `RNNA_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use rnna::channel::{ChannelParams, SymbolPage, VoltagePage};
use rnna::dde::{analytic_densities, dde_run, DdeGrid, ZeroMass};
use rnna::detector::{detect, harden_value, DetectorModel};
use rnna::ldpc::{peg_construct, DegreeDistributions, Encoder, NmsDecoder, ParityCheckMatrix};
use rnna::soft::{integer_llr_for_interval, mutual_information, soft_boundaries};
use rnna::thresholds::{build_counts, dp_thresholds, optimum_sep, HardThresholds, SearchGrid};
use rnna::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RnnaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    LengthMismatch = 3,
    Infeasible = 4,
    Io = 5,
    Format = 6,
    Diverged = 7,
    Panic = 8,
}

/// Channel parameters at a fixed (N_PE, T).
pub struct RnnaChannel(ChannelParams);

/// Trained GRU detector.
pub struct RnnaDetector(DetectorModel);

/// LDPC code with its systematic encoder.
pub struct RnnaCode {
    h: ParityCheckMatrix,
    encoder: Encoder,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> RnnaStatus {
    match e {
        Error::InvalidParameter(_) | Error::NonFinite(_) | Error::UnknownFigure { .. } => {
            RnnaStatus::InvalidArgument
        }
        Error::LengthMismatch { .. } => RnnaStatus::LengthMismatch,
        Error::InfeasibleGrid { .. } | Error::OverlappingRegions { .. } | Error::InfeasibleCode(_) => {
            RnnaStatus::Infeasible
        }
        Error::Io(_) => RnnaStatus::Io,
        Error::Diverged { .. } => RnnaStatus::Diverged,
        Error::Context { source, .. } => status_of(source),
        _ => RnnaStatus::Format,
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (RnnaStatus, String)>) -> RnnaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RnnaStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside rnna".into());
            RnnaStatus::Panic
        }
    }
}

type FfiResult<T> = Result<T, (RnnaStatus, String)>;

fn lift<T>(r: rnna::Result<T>) -> FfiResult<T> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (RnnaStatus, String) {
    (RnnaStatus::NullPointer, format!("{what} is NULL"))
}

fn invalid(msg: impl Into<String>) -> (RnnaStatus, String) {
    (RnnaStatus::InvalidArgument, msg.into())
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, what: &str) -> FfiResult<&'a mut [T]> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, v: T, what: &str) -> FfiResult<()> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn string(p: *const c_char, what: &str) -> FfiResult<String> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call on the same thread; never NULL.
#[no_mangle]
pub extern "C" fn rnna_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rnna_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---------------------------------------------------------------- channel

/// Default MLC channel at (`n_pe`, `t_ret` hours).
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn rnna_channel_new(n_pe: u64, t_ret: f64, out: *mut *mut RnnaChannel) -> RnnaStatus {
    guard(|| {
        if !(t_ret >= 0.0) || !t_ret.is_finite() {
            return Err(invalid(format!("retention time {t_ret} must be finite and >= 0")));
        }
        let ch = Box::new(RnnaChannel(ChannelParams::default().at(n_pe, t_ret)));
        put(out, Box::into_raw(ch), "out")
    })
}

/// Channel from a TOML document (same schema as the CLI channel presets).
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rnna_channel_from_toml(toml: *const c_char, out: *mut *mut RnnaChannel) -> RnnaStatus {
    guard(|| {
        let s = string(toml, "toml")?;
        let p = lift(ChannelParams::from_toml_str(&s))?;
        put(out, Box::into_raw(Box::new(RnnaChannel(p))), "out")
    })
}

/// # Safety
/// `ch` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rnna_channel_free(ch: *mut RnnaChannel) {
    if !ch.is_null() {
        drop(Box::from_raw(ch));
    }
}

/// Per-state means and standard deviations (states s11, s10, s00, s01).
///
/// # Safety
/// `mu` and `sigma` must each hold 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn rnna_channel_moments(ch: *const RnnaChannel, mu: *mut f64, sigma: *mut f64) -> RnnaStatus {
    guard(|| {
        let ch = handle(ch, "channel")?;
        let m = ch.0.state_moments();
        output(mu, 4, "mu")?.copy_from_slice(&m.mu);
        output(sigma, 4, "sigma")?.copy_from_slice(&m.sigma);
        Ok(())
    })
}

/// Draws one voltage per symbol (symbols in 0..4, Gray order s11..s01).
///
/// # Safety
/// `symbols` holds `len` bytes and `voltages` room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rnna_channel_sample(
    ch: *const RnnaChannel,
    symbols: *const u8,
    len: usize,
    seed: u64,
    voltages: *mut f64,
) -> RnnaStatus {
    guard(|| {
        let ch = handle(ch, "channel")?;
        let syms = input(symbols, len, "symbols")?;
        if let Some(&s) = syms.iter().find(|&&s| s > 3) {
            return Err(invalid(format!("symbol {s} outside 0..4")));
        }
        let page = ch.0.sample_page(&SymbolPage { symbols: syms.to_vec() }, seed);
        output(voltages, len, "voltages")?.copy_from_slice(&page.voltages);
        Ok(())
    })
}

/// Hard thresholds minimizing the symbol error probability, and that SEP.
///
/// # Safety
/// `thresholds` must hold 3 doubles; `sep` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn rnna_optimum_thresholds(
    ch: *const RnnaChannel,
    thresholds: *mut f64,
    sep: *mut f64,
) -> RnnaStatus {
    guard(|| {
        let ch = handle(ch, "channel")?;
        let o = optimum_sep(&ch.0);
        output(thresholds, 3, "thresholds")?.copy_from_slice(&o.thresholds.a);
        if !sep.is_null() {
            sep.write(o.sep);
        }
        Ok(())
    })
}

/// Mutual information (bits) of the quantizer with `len` increasing
/// boundaries on this channel.
///
/// # Safety
/// `boundaries` holds `len` doubles; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rnna_mutual_information(
    ch: *const RnnaChannel,
    boundaries: *const f64,
    len: usize,
    out: *mut f64,
) -> RnnaStatus {
    guard(|| {
        let ch = handle(ch, "channel")?;
        let b = input(boundaries, len, "boundaries")?;
        if b.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("boundaries must be strictly increasing"));
        }
        put(out, mutual_information(&ch.0.state_moments(), b), "out")
    })
}

/// Error fraction after each of `iterations` density-evolution rounds for
/// the regular (`d_v`, `d_c`) ensemble, with the channel quantized by the
/// soft regions `widths` around `hard`.
///
/// # Safety
/// `hard` and `widths` hold 3 doubles; `trace` room for `iterations`.
#[no_mangle]
pub unsafe extern "C" fn rnna_dde_run(
    ch: *const RnnaChannel,
    hard: *const f64,
    widths: *const f64,
    d_v: usize,
    d_c: usize,
    alpha: f64,
    iterations: usize,
    trace: *mut f64,
) -> RnnaStatus {
    guard(|| {
        let ch = handle(ch, "channel")?;
        let hard = lift(HardThresholds::new(input(hard, 3, "hard")?.to_vec()))?;
        let w = input(widths, 3, "widths")?;
        let soft = lift(soft_boundaries(&hard, [w[0], w[1], w[2]]))?;
        let pmf = analytic_densities(&ch.0.state_moments(), &soft).symmetrized(DdeGrid::default());
        let ensemble = DegreeDistributions::regular(d_v, d_c);
        let t = lift(dde_run(&pmf, &ensemble, alpha, iterations, ZeroMass::Half))?;
        output(trace, iterations, "trace")?.copy_from_slice(&t);
        Ok(())
    })
}

// -------------------------------------------------------- thresholds

/// DP thresholds maximizing agreement with `decisions` over a uniform grid
/// of `m` cells on [`lo`, `hi`].
///
/// # Safety
/// `voltages` and `decisions` hold `len` items; `thresholds` 3 doubles;
/// `objective` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn rnna_dp_thresholds(
    voltages: *const f64,
    decisions: *const u8,
    len: usize,
    lo: f64,
    hi: f64,
    m: usize,
    thresholds: *mut f64,
    objective: *mut u64,
) -> RnnaStatus {
    guard(|| {
        let v = input(voltages, len, "voltages")?;
        let d = input(decisions, len, "decisions")?;
        let grid = lift(SearchGrid::uniform(lo, hi, m))?;
        let pages = [VoltagePage { voltages: v.to_vec() }];
        let labels = [SymbolPage { symbols: d.to_vec() }];
        let counts = lift(build_counts(&pages, &labels, &grid))?;
        let dp = lift(dp_thresholds(&counts, &grid, 4))?;
        output(thresholds, 3, "thresholds")?.copy_from_slice(&dp.thresholds.a);
        if !objective.is_null() {
            objective.write(dp.objective);
        }
        Ok(())
    })
}

/// Six soft boundaries from 3 hard thresholds and 3 region widths.
///
/// # Safety
/// `hard`, `widths` hold 3 doubles; `boundaries` room for 6.
#[no_mangle]
pub unsafe extern "C" fn rnna_soft_boundaries(
    hard: *const f64,
    widths: *const f64,
    boundaries: *mut f64,
) -> RnnaStatus {
    guard(|| {
        let hard = lift(HardThresholds::new(input(hard, 3, "hard")?.to_vec()))?;
        let w = input(widths, 3, "widths")?;
        let soft = lift(soft_boundaries(&hard, [w[0], w[1], w[2]]))?;
        output(boundaries, 6, "boundaries")?.copy_from_slice(&soft.boundaries);
        Ok(())
    })
}

/// Integer MSB/LSB reliabilities per voltage; `llrs[2k]` is the MSB and
/// `llrs[2k + 1]` the LSB of cell `k`.
///
/// # Safety
/// `boundaries` holds 6 increasing doubles, `voltages` `len` doubles and
/// `llrs` room for `2 * len` bytes.
#[no_mangle]
pub unsafe extern "C" fn rnna_integer_llrs(
    boundaries: *const f64,
    voltages: *const f64,
    len: usize,
    llrs: *mut i8,
) -> RnnaStatus {
    guard(|| {
        let b = input(boundaries, 6, "boundaries")?;
        if b.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(invalid("boundaries must be non-decreasing"));
        }
        let v = input(voltages, len, "voltages")?;
        let out = output(llrs, 2 * len, "llrs")?;
        for (k, &x) in v.iter().enumerate() {
            let p = integer_llr_for_interval(b.partition_point(|&t| t <= x));
            out[2 * k] = p.l_msb;
            out[2 * k + 1] = p.l_lsb;
        }
        Ok(())
    })
}

// ---------------------------------------------------------- detector

/// Loads a detector saved by `rnna train-detector`.
///
/// # Safety
/// `path` must be NUL-terminated; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rnna_detector_load(path: *const c_char, out: *mut *mut RnnaDetector) -> RnnaStatus {
    guard(|| {
        let p = string(path, "path")?;
        let m = lift(DetectorModel::load(p))?;
        put(out, Box::into_raw(Box::new(RnnaDetector(m))), "out")
    })
}

/// # Safety
/// `det` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rnna_detector_free(det: *mut RnnaDetector) {
    if !det.is_null() {
        drop(Box::from_raw(det));
    }
}

/// Soft symbol estimates, and optionally hardened symbols.
///
/// # Safety
/// `voltages` holds `len` doubles, `soft` room for `len` doubles; `hard`
/// is NULL or has room for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn rnna_detector_detect(
    det: *const RnnaDetector,
    voltages: *const f64,
    len: usize,
    soft: *mut f64,
    hard: *mut u8,
) -> RnnaStatus {
    guard(|| {
        let det = handle(det, "detector")?;
        let v = input(voltages, len, "voltages")?;
        let est = lift(detect(&det.0, &VoltagePage { voltages: v.to_vec() }))?;
        output(soft, len, "soft")?.copy_from_slice(&est.values);
        if !hard.is_null() {
            for (h, &x) in slice::from_raw_parts_mut(hard, len).iter_mut().zip(&est.values) {
                *h = harden_value(x);
            }
        }
        Ok(())
    })
}

// -------------------------------------------------------------- LDPC

/// Regular (`d_v`, `d_c`) PEG code of length `n`, deterministic in `seed`.
///
/// # Safety
/// `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rnna_code_peg(
    n: usize,
    d_v: usize,
    d_c: usize,
    seed: u64,
    out: *mut *mut RnnaCode,
) -> RnnaStatus {
    guard(|| {
        let h = lift(peg_construct(n, d_v, d_c, seed))?;
        let encoder = Encoder::new(&h);
        put(out, Box::into_raw(Box::new(RnnaCode { h, encoder })), "out")
    })
}

/// # Safety
/// `code` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rnna_code_free(code: *mut RnnaCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Code length, information length and number of checks. Any output may
/// be NULL.
///
/// # Safety
/// `code` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rnna_code_dims(
    code: *const RnnaCode,
    n: *mut usize,
    k: *mut usize,
    m: *mut usize,
) -> RnnaStatus {
    guard(|| {
        let c = handle(code, "code")?;
        for (p, v) in [(n, c.h.n()), (k, c.encoder.k()), (m, c.h.m())] {
            if !p.is_null() {
                p.write(v);
            }
        }
        Ok(())
    })
}

/// Systematic encoding of `k` information bits into `n` code bits.
///
/// # Safety
/// `info` holds `k` bytes (0/1), `codeword` room for `n` bytes.
#[no_mangle]
pub unsafe extern "C" fn rnna_code_encode(
    code: *const RnnaCode,
    info: *const u8,
    k: usize,
    codeword: *mut u8,
    n: usize,
) -> RnnaStatus {
    guard(|| {
        let c = handle(code, "code")?;
        if n != c.h.n() {
            return Err((RnnaStatus::LengthMismatch, format!("codeword buffer {n}, code length {}", c.h.n())));
        }
        let cw = lift(c.encoder.encode(input(info, k, "info")?))?;
        output(codeword, n, "codeword")?.copy_from_slice(&cw);
        Ok(())
    })
}

/// Normalized min-sum decoding (positive LLR means bit 0).
///
/// # Safety
/// `llrs` holds `n` doubles, `bits` room for `n` bytes; `iterations` and
/// `converged` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn rnna_code_decode(
    code: *const RnnaCode,
    llrs: *const f64,
    n: usize,
    alpha: f64,
    max_iterations: usize,
    bits: *mut u8,
    iterations: *mut usize,
    converged: *mut bool,
) -> RnnaStatus {
    guard(|| {
        let c = handle(code, "code")?;
        if n != c.h.n() {
            return Err((RnnaStatus::LengthMismatch, format!("LLR buffer {n}, code length {}", c.h.n())));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(invalid(format!("alpha {alpha} must be positive")));
        }
        let l = input(llrs, n, "llrs")?;
        if l.iter().any(|x| x.is_nan()) {
            return Err(invalid("LLRs contain NaN"));
        }
        let r = NmsDecoder::new(&c.h).decode(l, alpha, max_iterations);
        output(bits, n, "bits")?.copy_from_slice(&r.bits);
        if !iterations.is_null() {
            iterations.write(r.iterations);
        }
        if !converged.is_null() {
            converged.write(r.converged);
        }
        Ok(())
    })
}
