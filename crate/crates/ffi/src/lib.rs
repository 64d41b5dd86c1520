//! C ABI over the `bh-complexity` engine.
//!
//! Every fallible function returns a [`BhcStatus`]; on failure a
//! human-readable message is available from [`bhc_last_error_message`]
//! on the calling thread. Results that own heap data are returned as
//! opaque handles and must be released with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bh_complexity::complexity::{phase_point_complexity, ComplexityReport};
use bh_complexity::gaussian_ref::{c_closed_form, c_kappa_quadrature, GaussianParams};
use bh_complexity::holo::{cv_delta, HoloParams};
use bh_complexity::onsite::{locate_tip, self_consistent_phi, MeanFieldSolution, ModelParams};
use bh_complexity::Error;

/// Largest supported lattice dimension.
pub const BHC_MAX_DIM: usize = 3;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BhcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Convergence = 3,
    Instability = 4,
    Domain = 5,
    Panic = 6,
}

/// Model point. Only the first `d` entries of `extents` are read.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BhcParams {
    pub d: usize,
    pub extents: [usize; BHC_MAX_DIM],
    /// Fock-space truncation (levels per site).
    pub n: usize,
    pub t: f64,
    pub mu_bar: f64,
}

/// Opaque mean-field solution.
pub struct BhcMeanField(MeanFieldSolution);

/// Opaque complexity report.
pub struct BhcReport(ComplexityReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> BhcStatus {
    match e {
        Error::InvalidTruncation(_) | Error::InvalidParams(_) | Error::OffGrid(_) | Error::DimensionCap(_) => {
            BhcStatus::InvalidArgument
        }
        Error::Convergence { .. } | Error::Bracket { .. } => BhcStatus::Convergence,
        Error::Instability { .. } => BhcStatus::Instability,
        Error::Domain(_) | Error::Fit(_) => BhcStatus::Domain,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), BhcStatus>) -> BhcStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BhcStatus::Ok,
        Ok(Err(s)) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            BhcStatus::Panic
        }
    }
}

fn fail(e: Error) -> BhcStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> BhcStatus {
    set_error(&format!("null pointer: {what}"));
    BhcStatus::NullPointer
}

unsafe fn read_params(p: *const BhcParams) -> Result<ModelParams, BhcStatus> {
    let p = unsafe { p.as_ref() }.ok_or_else(|| null("params"))?;
    if p.d == 0 || p.d > BHC_MAX_DIM {
        set_error(&format!("d = {} outside 1..={BHC_MAX_DIM}", p.d));
        return Err(BhcStatus::InvalidArgument);
    }
    ModelParams::new(p.d, p.extents[..p.d].to_vec(), p.n, p.t, p.mu_bar).map_err(fail)
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), BhcStatus> {
    if out.is_null() {
        return Err(null(what));
    }
    unsafe { out.write(value) };
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bhc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failure on this thread (empty after success).
/// Valid until the next `bhc_*` call on the same thread.
#[no_mangle]
pub extern "C" fn bhc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Self-consistent mean field at `params`.
///
/// # Safety
/// `params` must point to a valid `BhcParams`; `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn bhc_meanfield_solve(params: *const BhcParams, out: *mut *mut BhcMeanField) -> BhcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = unsafe { read_params(params)? };
        let mfs = self_consistent_phi(&p).map_err(fail)?;
        unsafe { write(out, Box::into_raw(Box::new(BhcMeanField(mfs))), "out") }
    })
}

/// Order parameter; NaN for a null handle.
///
/// # Safety
/// `h` must be null or a live handle from `bhc_meanfield_solve`.
#[no_mangle]
pub unsafe extern "C" fn bhc_meanfield_phi(h: *const BhcMeanField) -> f64 {
    unsafe { h.as_ref() }.map_or(f64::NAN, |m| m.0.phi)
}

/// Mean-field energy per site; NaN for a null handle.
///
/// # Safety
/// As [`bhc_meanfield_phi`].
#[no_mangle]
pub unsafe extern "C" fn bhc_meanfield_free_energy(h: *const BhcMeanField) -> f64 {
    unsafe { h.as_ref() }.map_or(f64::NAN, |m| m.0.free_energy)
}

/// Number of on-site levels; 0 for a null handle.
///
/// # Safety
/// As [`bhc_meanfield_phi`].
#[no_mangle]
pub unsafe extern "C" fn bhc_meanfield_levels(h: *const BhcMeanField) -> usize {
    unsafe { h.as_ref() }.map_or(0, |m| m.0.energies.len())
}

/// Copy the on-site energies (ascending) into `buf`, which holds `len` doubles.
///
/// # Safety
/// `h` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn bhc_meanfield_energies(h: *const BhcMeanField, buf: *mut f64, len: usize) -> BhcStatus {
    guard(|| {
        let m = unsafe { h.as_ref() }.ok_or_else(|| null("handle"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let e = &m.0.energies;
        if len < e.len() {
            set_error(&format!("buffer holds {len}, need {}", e.len()));
            return Err(BhcStatus::InvalidArgument);
        }
        unsafe { ptr::copy_nonoverlapping(e.as_ptr(), buf, e.len()) };
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bhc_meanfield_free(h: *mut BhcMeanField) {
    if !h.is_null() {
        drop(unsafe { Box::from_raw(h) });
    }
}

/// Complexity of the fluctuation-corrected ground state for each of the
/// `n_kappas` orders in `kappas`.
///
/// # Safety
/// `params` valid, `kappas` valid for `n_kappas` reads, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bhc_complexity(
    params: *const BhcParams,
    kappas: *const f64,
    n_kappas: usize,
    out: *mut *mut BhcReport,
) -> BhcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if kappas.is_null() {
            return Err(null("kappas"));
        }
        if n_kappas == 0 {
            set_error("need at least one kappa");
            return Err(BhcStatus::InvalidArgument);
        }
        let p = unsafe { read_params(params)? };
        let ks = unsafe { std::slice::from_raw_parts(kappas, n_kappas) };
        let r = phase_point_complexity(&p, ks).map_err(fail)?;
        unsafe { write(out, Box::into_raw(Box::new(BhcReport(r))), "out") }
    })
}

/// Number of complexity orders in the report; 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn bhc_report_num_kappas(h: *const BhcReport) -> usize {
    unsafe { h.as_ref() }.map_or(0, |r| r.0.kappas.len())
}

unsafe fn report_value(h: *const BhcReport, i: usize, out: *mut f64, pick: fn(&ComplexityReport) -> &[f64]) -> BhcStatus {
    guard(|| {
        let r = unsafe { h.as_ref() }.ok_or_else(|| null("handle"))?;
        let v = pick(&r.0).get(i).copied().ok_or_else(|| {
            set_error(&format!("kappa index {i} out of range"));
            BhcStatus::InvalidArgument
        })?;
        unsafe { write(out, v, "out") }
    })
}

/// Total complexity `C_kappa` for the `i`-th requested order.
///
/// # Safety
/// `h` a live report handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bhc_report_total(h: *const BhcReport, i: usize, out: *mut f64) -> BhcStatus {
    unsafe { report_value(h, i, out, |r| &r.totals) }
}

/// Complexity per site for the `i`-th requested order.
///
/// # Safety
/// As [`bhc_report_total`].
#[no_mangle]
pub unsafe extern "C" fn bhc_report_density(h: *const BhcReport, i: usize, out: *mut f64) -> BhcStatus {
    unsafe { report_value(h, i, out, |r| &r.densities) }
}

/// `sqrt(C_2)`; `Domain` if order 2 was not requested.
///
/// # Safety
/// As [`bhc_report_total`].
#[no_mangle]
pub unsafe extern "C" fn bhc_report_c_qc(h: *const BhcReport, out: *mut f64) -> BhcStatus {
    guard(|| {
        let r = unsafe { h.as_ref() }.ok_or_else(|| null("handle"))?;
        let v = r.0.c_qc().ok_or_else(|| {
            set_error("kappa = 2 was not requested");
            BhcStatus::Domain
        })?;
        unsafe { write(out, v, "out") }
    })
}

/// Number of modes excluded as zero modes.
///
/// # Safety
/// `h` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn bhc_report_zero_modes(h: *const BhcReport) -> usize {
    unsafe { h.as_ref() }.map_or(0, |r| r.0.zero_modes_dropped)
}

/// Smallest non-zero-mode frequency; NaN for a null handle.
///
/// # Safety
/// As [`bhc_report_zero_modes`].
#[no_mangle]
pub unsafe extern "C" fn bhc_report_min_omega(h: *const BhcReport) -> f64 {
    unsafe { h.as_ref() }.map_or(f64::NAN, |r| r.0.min_omega)
}

/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bhc_report_free(h: *mut BhcReport) {
    if !h.is_null() {
        drop(unsafe { Box::from_raw(h) });
    }
}

/// Tip of Mott lobe `lobe` (>= 1) for the truncation in `params`.
///
/// # Safety
/// `params` valid, `t_c` and `mu_c` writable.
#[no_mangle]
pub unsafe extern "C" fn bhc_locate_tip(params: *const BhcParams, lobe: usize, t_c: *mut f64, mu_c: *mut f64) -> BhcStatus {
    guard(|| {
        if t_c.is_null() || mu_c.is_null() {
            return Err(null("t_c/mu_c"));
        }
        let p = unsafe { read_params(params)? };
        let tip = locate_tip(&p, lobe).map_err(fail)?;
        unsafe {
            write(t_c, tip.t_c, "t_c")?;
            write(mu_c, tip.mu_c, "mu_c")
        }
    })
}

/// Free-field reference complexity density in closed form.
///
/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bhc_c_closed_form(m: f64, omega0: f64, d: usize, kappa: f64, out: *mut f64) -> BhcStatus {
    guard(|| {
        let g = GaussianParams::new(m, omega0, d, kappa).map_err(fail)?;
        let v = c_closed_form(&g).map_err(fail)?.value;
        unsafe { write(out, v, "out") }
    })
}

/// Free-field reference complexity density by adaptive quadrature.
///
/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bhc_c_kappa_quadrature(m: f64, omega0: f64, d: usize, kappa: f64, out: *mut f64) -> BhcStatus {
    guard(|| {
        let g = GaussianParams::new(m, omega0, d, kappa).map_err(fail)?;
        let v = c_kappa_quadrature(&g).map_err(fail)?;
        unsafe { write(out, v, "out") }
    })
}

/// Holographic complexity shift `delta C_V` for correlation length `xi`.
///
/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bhc_cv_delta(
    d: usize,
    l: f64,
    g_n: f64,
    sigma_d: f64,
    xi: f64,
    nu: f64,
    out: *mut f64,
) -> BhcStatus {
    guard(|| {
        let r = cv_delta(&HoloParams {
            d,
            l,
            g_n,
            sigma_d,
            xi,
            nu,
            delta_t: None,
        })
        .map_err(fail)?;
        unsafe { write(out, r.delta_cv, "out") }
    })
}
