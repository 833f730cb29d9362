//! C ABI over `cohest`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` or
//! `*_generate` functions and released by the matching `*_free`. Every
//! fallible call returns a [`CohestStatus`]; the message of the most recent
//! failure on the calling thread is available from
//! [`cohest_last_error_message`]. Strings returned by the library are owned by
//! the caller and must be released with [`cohest_string_free`].


use cohest::costs::{self, Algorithm, CostOptions};
use cohest::estimators::{self, EstimationReport, EstimatorOptions, EtaRule, InstanceKind, RoundingPromiseInstance};
use cohest::polynomials::{self, ChebyshevSeries, RealPolynomial};
use cohest::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CohestStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Range = 3,
    Budget = 4,
    Numerical = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CohestAlgorithm {
    TextbookPe = 0,
    ImprovedPe = 1,
    TextbookEe = 2,
    ImprovedEe = 3,
}

impl From<CohestAlgorithm> for Algorithm {
    fn from(a: CohestAlgorithm) -> Self {
        match a {
            CohestAlgorithm::TextbookPe => Algorithm::TextbookPe,
            CohestAlgorithm::ImprovedPe => Algorithm::ImprovedPe,
            CohestAlgorithm::TextbookEe => Algorithm::TextbookEe,
            CohestAlgorithm::ImprovedEe => Algorithm::ImprovedEe,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CohestEtaRule {
    Linear = 0,
    Exact = 1,
}

impl From<CohestEtaRule> for EtaRule {
    fn from(r: CohestEtaRule) -> Self {
        match r {
            CohestEtaRule::Linear => EtaRule::Linear,
            CohestEtaRule::Exact => EtaRule::Exact,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CohestInstanceKind {
    Unitary = 0,
    Hamiltonian = 1,
}

/// Query and qubit counts of one algorithm at one parameter point.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CohestCost {
    pub queries: u64,
    pub garbage_qubits: u64,
    pub ancilla_qubits: u64,
}

/// Knobs shared by cost evaluation and simulation.
pub struct CohestOptions {
    eta_rule: EtaRule,
    m_svt: f64,
    m_cos: f64,
    uncompute: bool,
}

/// A seeded rounding-promise instance.
pub struct CohestInstance(RoundingPromiseInstance);

/// Outcome of a dense estimator simulation.
pub struct CohestReport(EstimationReport);

/// A polynomial in Chebyshev form.
pub struct CohestPolynomial(ChebyshevSeries);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CohestStatus {
    match e {
        Error::InvalidInput(_) => CohestStatus::InvalidInput,
        Error::Range(_) => CohestStatus::Range,
        Error::Budget(_) => CohestStatus::Budget,
        Error::Numerical(_) => CohestStatus::Numerical,
        Error::Io(_) | Error::Json(_) => CohestStatus::Io,
    }
}

fn fail(status: CohestStatus, msg: impl Into<String>) -> CohestStatus {
    set_last_error(msg.into());
    status
}

/// Runs `f`, mapping library errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), CohestStatus>) -> CohestStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CohestStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(CohestStatus::Panic, "internal panic"),
    }
}

fn lib<T>(r: cohest::Result<T>) -> Result<T, CohestStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, CohestStatus> {
    p.as_ref().ok_or_else(|| fail(CohestStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, CohestStatus> {
    p.as_mut().ok_or_else(|| fail(CohestStatus::NullPointer, format!("{what} is null")))
}

fn to_c_string(s: String) -> Result<*mut c_char, CohestStatus> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| fail(CohestStatus::Numerical, "string contains a NUL byte"))
}

/// Copies `src` into `buf` of capacity `cap`, writing the required length to
/// `len`. With `buf` null only the length is reported.
unsafe fn copy_out(src: &[f64], buf: *mut f64, cap: usize, len: *mut usize) -> Result<(), CohestStatus> {
    *out_ptr(len, "len")? = src.len();
    if buf.is_null() {
        return Ok(());
    }
    if cap < src.len() {
        return Err(fail(CohestStatus::BufferTooSmall, format!("need {} elements, have {cap}", src.len())));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Library version as a static NUL-terminated string. Do not free.
#[no_mangle]
pub extern "C" fn cohest_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or null if there was none.
/// Release with [`cohest_string_free`].
#[no_mangle]
pub extern "C" fn cohest_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        Some(c) => c.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// # Safety
/// `s` must be null or a string returned by this library that was not freed.
#[no_mangle]
pub unsafe extern "C" fn cohest_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Options with the defaults of the cost model: exact η rule, m_svt = m_cos = 3
/// and no uncompute for phase estimation.
#[no_mangle]
pub extern "C" fn cohest_options_new() -> *mut CohestOptions {
    let d = CostOptions::default();
    Box::into_raw(Box::new(CohestOptions { eta_rule: d.eta_rule, m_svt: d.m_svt, m_cos: d.m_cos, uncompute: d.uncompute_pe }))
}

/// # Safety
/// `opts` must be null or a handle from [`cohest_options_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cohest_options_free(opts: *mut CohestOptions) {
    if !opts.is_null() {
        drop(Box::from_raw(opts));
    }
}

/// # Safety
/// `opts` must be a live handle from [`cohest_options_new`].
#[no_mangle]
pub unsafe extern "C" fn cohest_options_set_eta_rule(opts: *mut CohestOptions, rule: CohestEtaRule) -> CohestStatus {
    guard(|| {
        out_ptr(opts, "opts")?.eta_rule = rule.into();
        Ok(())
    })
}

/// Sets the SVT and cosine-approximation precision exponents.
///
/// # Safety
/// `opts` must be a live handle from [`cohest_options_new`].
#[no_mangle]
pub unsafe extern "C" fn cohest_options_set_precision(opts: *mut CohestOptions, m_svt: f64, m_cos: f64) -> CohestStatus {
    guard(|| {
        if !(m_svt.is_finite() && m_svt > 0.0 && m_cos.is_finite() && m_cos > 0.0) {
            return Err(fail(CohestStatus::InvalidInput, "m_svt and m_cos must be positive"));
        }
        let o = out_ptr(opts, "opts")?;
        o.m_svt = m_svt;
        o.m_cos = m_cos;
        Ok(())
    })
}

/// # Safety
/// `opts` must be a live handle from [`cohest_options_new`].
#[no_mangle]
pub unsafe extern "C" fn cohest_options_set_uncompute(opts: *mut CohestOptions, uncompute: bool) -> CohestStatus {
    guard(|| {
        out_ptr(opts, "opts")?.uncompute = uncompute;
        Ok(())
    })
}

unsafe fn cost_options(opts: *const CohestOptions) -> CostOptions {
    match opts.as_ref() {
        Some(o) => CostOptions { eta_rule: o.eta_rule, m_svt: o.m_svt, m_cos: o.m_cos, uncompute_pe: o.uncompute, ..CostOptions::default() },
        None => CostOptions::default(),
    }
}

unsafe fn estimator_options(opts: *const CohestOptions) -> EstimatorOptions {
    match opts.as_ref() {
        Some(o) => EstimatorOptions { eta_rule: o.eta_rule, m_svt: o.m_svt, m_cos: o.m_cos, uncompute: o.uncompute },
        None => EstimatorOptions::default(),
    }
}

/// Query cost of `alg` at `(n, alpha, delta)`. `opts` may be null for the
/// defaults.
///
/// # Safety
/// `opts` must be null or live; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn cohest_cost(
    alg: CohestAlgorithm,
    n: u32,
    alpha: f64,
    delta: f64,
    opts: *const CohestOptions,
    out: *mut CohestCost,
) -> CohestStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let r = lib(costs::cost(alg.into(), n, alpha, delta, &cost_options(opts)))?;
        *out = CohestCost {
            queries: r.queries,
            garbage_qubits: r.garbage_qubits,
            ancilla_qubits: r.ancilla_qubits,
        };
        Ok(())
    })
}

/// Sweep CSV (header plus one row per point) for a named preset grid,
/// `"fig4"` or `"fig5"`. Release `*out` with [`cohest_string_free`].
///
/// # Safety
/// `figure` must be a NUL-terminated string; `opts` null or live; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn cohest_figure_csv(
    figure: *const c_char,
    opts: *const CohestOptions,
    out: *mut *mut c_char,
) -> CohestStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let name = CStr::from_ptr(deref(figure, "figure")?)
            .to_str()
            .map_err(|_| fail(CohestStatus::InvalidInput, "figure is not UTF-8"))?;
        let fig = lib(name.parse::<costs::Figure>())?;
        let rows = lib(costs::sweep_points(&costs::figure_points(fig), &cost_options(opts)))?;
        *out = to_c_string(costs::to_csv(&rows))?;
        Ok(())
    })
}

/// Seeded random instance obeying the `(n, alpha)` rounding promise.
///
/// # Safety
/// `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn cohest_instance_generate(
    n: u32,
    alpha: f64,
    dim: usize,
    seed: u64,
    kind: CohestInstanceKind,
    out: *mut *mut CohestInstance,
) -> CohestStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let kind = match kind {
            CohestInstanceKind::Unitary => InstanceKind::Unitary,
            CohestInstanceKind::Hamiltonian => InstanceKind::Hamiltonian,
        };
        let inst = lib(estimators::gen_instance(n, alpha, dim, seed, kind))?;
        *out = Box::into_raw(Box::new(CohestInstance(inst)));
        Ok(())
    })
}

/// # Safety
/// `inst` must be null or a live instance handle.
#[no_mangle]
pub unsafe extern "C" fn cohest_instance_free(inst: *mut CohestInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Eigenvalues `λ_j ∈ [0, 1)`. See [`cohest_report_success`] for the buffer
/// protocol.
///
/// # Safety
/// `inst` must be live; `buf` null or holding `cap` doubles; `len` writable.
#[no_mangle]
pub unsafe extern "C" fn cohest_instance_eigenvalues(
    inst: *const CohestInstance,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> CohestStatus {
    guard(|| copy_out(deref(inst, "inst")?.0.eigenvalues(), buf, cap, len))
}

/// Dense simulation of `alg` on `inst`. Textbook energy estimation has no
/// dense simulation and yields `InvalidInput`.
///
/// # Safety
/// `inst` must be live; `opts` null or live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cohest_simulate(
    alg: CohestAlgorithm,
    inst: *const CohestInstance,
    delta: f64,
    opts: *const CohestOptions,
    out: *mut *mut CohestReport,
) -> CohestStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let inst = &deref(inst, "inst")?.0;
        let eo = estimator_options(opts);
        let (_, rep) = match alg {
            CohestAlgorithm::TextbookPe => lib(estimators::textbook_pe(inst, delta))?,
            CohestAlgorithm::ImprovedPe => lib(estimators::improved_pe(inst, delta, &eo))?,
            CohestAlgorithm::ImprovedEe => lib(estimators::improved_ee(inst, delta, &eo))?,
            CohestAlgorithm::TextbookEe => {
                return Err(fail(CohestStatus::InvalidInput, "textbook energy estimation is cost-only"))
            }
        };
        *out = Box::into_raw(Box::new(CohestReport(rep)));
        Ok(())
    })
}

/// # Safety
/// `rep` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn cohest_report_free(rep: *mut CohestReport) {
    if !rep.is_null() {
        drop(Box::from_raw(rep));
    }
}

/// # Safety
/// `rep` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cohest_report_query_count(rep: *const CohestReport, out: *mut u64) -> CohestStatus {
    guard(|| {
        *out_ptr(out, "out")? = deref(rep, "rep")?.0.query_count;
        Ok(())
    })
}

/// # Safety
/// `rep` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cohest_report_coherence_fidelity(rep: *const CohestReport, out: *mut f64) -> CohestStatus {
    guard(|| {
        *out_ptr(out, "out")? = deref(rep, "rep")?.0.coherence_fidelity;
        Ok(())
    })
}

/// Per-eigenstate success probabilities. `*len` receives the element count;
/// pass `buf = NULL` to query it. A buffer shorter than the count yields
/// `BufferTooSmall` and leaves the buffer untouched.
///
/// # Safety
/// `rep` must be live; `buf` null or holding `cap` doubles; `len` writable.
#[no_mangle]
pub unsafe extern "C" fn cohest_report_success(
    rep: *const CohestReport,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> CohestStatus {
    guard(|| copy_out(&deref(rep, "rep")?.0.per_eigenstate_success, buf, cap, len))
}

/// The whole report as JSON. Release `*out` with [`cohest_string_free`].
///
/// # Safety
/// `rep` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cohest_report_json(rep: *const CohestReport, out: *mut *mut c_char) -> CohestStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let s = lib(serde_json::to_string(&deref(rep, "rep")?.0).map_err(Error::from))?;
        *out = to_c_string(s)?;
        Ok(())
    })
}

fn store_poly(out: &mut *mut CohestPolynomial, p: ChebyshevSeries) {
    *out = Box::into_raw(Box::new(CohestPolynomial(p)));
}

/// Amplifying polynomial: at least `1 − delta` on `[0, 1/2 − eta]`, at most
/// `delta` on `[1/2 + eta, 1]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cohest_poly_amplifying(eta: f64, delta: f64, out: *mut *mut CohestPolynomial) -> CohestStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        store_poly(out, lib(polynomials::amplifying_poly(eta, delta))?.0);
        Ok(())
    })
}

/// Even approximant of `cos(t x)` on `[-1, 1]` within `eps`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cohest_poly_cos(t: f64, eps: f64, out: *mut *mut CohestPolynomial) -> CohestStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        store_poly(out, lib(polynomials::jacobi_anger_cos(t, eps))?);
        Ok(())
    })
}

/// Odd approximant of `sin(t x)` on `[-1, 1]` within `eps`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cohest_poly_sin(t: f64, eps: f64, out: *mut *mut CohestPolynomial) -> CohestStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        store_poly(out, lib(polynomials::jacobi_anger_sin(t, eps))?);
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a live polynomial handle.
#[no_mangle]
pub unsafe extern "C" fn cohest_poly_free(p: *mut CohestPolynomial) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cohest_poly_eval(p: *const CohestPolynomial, x: f64, out: *mut f64) -> CohestStatus {
    guard(|| {
        *out_ptr(out, "out")? = RealPolynomial::eval(&deref(p, "p")?.0, x);
        Ok(())
    })
}

/// # Safety
/// `p` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cohest_poly_degree(p: *const CohestPolynomial, out: *mut usize) -> CohestStatus {
    guard(|| {
        *out_ptr(out, "out")? = RealPolynomial::degree(&deref(p, "p")?.0);
        Ok(())
    })
}

/// Chebyshev coefficients, same buffer protocol as [`cohest_report_success`].
///
/// # Safety
/// `p` must be live; `buf` null or holding `cap` doubles; `len` writable.
#[no_mangle]
pub unsafe extern "C" fn cohest_poly_coefficients(
    p: *const CohestPolynomial,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> CohestStatus {
    guard(|| copy_out(deref(p, "p")?.0.coeffs(), buf, cap, len))
}
