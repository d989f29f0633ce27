//! C ABI for `linqnet`.
//!
//! Components live behind opaque `LqComponent` handles created by the
//! `lq_*_new` / composition functions and released with
//! `lq_component_free`. Every fallible call returns an `LqStatus`; on
//! failure `lq_last_error_message` describes what went wrong on the calling
//! thread. Matrices cross the boundary as row-major arrays of `LqComplex`.
//! A null pointer is accepted for an array of length zero.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use linqnet::matkit::ComplexMatrix;
use linqnet::netfile::{self, build_partitioned, NetDocument};
use linqnet::network::{self, BeamSplitter, PartitionedComponent, StarWiring};
use linqnet::slh::{self, CavityParams, LinearComponent};
use linqnet::stratcal::{self, StratonovichModel};
use linqnet::{transfer, Error};
use num_complex::Complex64;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LqStatus {
    Ok = 0,
    NullPointer = 1,
    /// Array lengths or port counts that do not fit together.
    DimensionMismatch = 2,
    /// The parameters do not describe a physical component.
    InvalidComponent = 3,
    NotHermitian = 4,
    NonFinite = 5,
    /// A linear solve failed, or the transfer function has a pole at `s`.
    Singular = 6,
    AlgebraicLoop = 7,
    /// Input to a conversion lies outside its domain.
    OutsideDomain = 8,
    ParseError = 9,
    InvalidArgument = 10,
    /// A bug on the Rust side; the call had no effect.
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LqComplex {
    pub re: f64,
    pub im: f64,
}

/// Opaque handle to a linear component `(S, C, Omega)`.
pub struct LqComponent {
    inner: LinearComponent,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> LqStatus {
    match err {
        Error::SingularMatrix { .. } | Error::SingularAtS { .. } => LqStatus::Singular,
        Error::NotHermitian { .. } => LqStatus::NotHermitian,
        Error::DimensionMismatch(_) => LqStatus::DimensionMismatch,
        Error::NonFinite(_) => LqStatus::NonFinite,
        Error::AlgebraicLoop => LqStatus::AlgebraicLoop,
        Error::OutsideDomain | Error::CayleySingular | Error::NotCommuting { .. } | Error::ZeroModeAmbiguity => {
            LqStatus::OutsideDomain
        }
        Error::BadPartition(_) => LqStatus::InvalidArgument,
        Error::InvalidComponent(_) => LqStatus::InvalidComponent,
        Error::Parse(_) => LqStatus::ParseError,
    }
}

struct Failure(LqStatus, String);

/// `NotHermitian` when that is the only problem, `InvalidComponent` otherwise.
fn check(report: slh::ValidationReport) -> Result<(), Failure> {
    if report.is_empty() {
        return Ok(());
    }
    let status = match report.residual_of(slh::Violation::SNotUnitary) {
        None => LqStatus::NotHermitian,
        Some(_) => LqStatus::InvalidComponent,
    };
    fail(status, report.to_string().trim_end())
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn fail<T>(status: LqStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

/// Runs `f`, records any failure and turns panics into `LqStatus::Panic`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LqStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error (panic)");
            LqStatus::Panic
        }
    }
}

unsafe fn handle<'a>(p: *const LqComponent, what: &str) -> Result<&'a LinearComponent, Failure> {
    match p.as_ref() {
        Some(h) => Ok(&h.inner),
        None => fail(LqStatus::NullPointer, format!("{what} is null")),
    }
}

unsafe fn matrix_in(p: *const LqComplex, rows: usize, cols: usize, what: &str) -> Result<ComplexMatrix, Failure> {
    let len = rows * cols;
    if len == 0 {
        return Ok(ComplexMatrix::zeros(rows, cols));
    }
    if p.is_null() {
        return fail(LqStatus::NullPointer, format!("{what} is null"));
    }
    let data = std::slice::from_raw_parts(p, len);
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| {
        let z = data[i * cols + j];
        Complex64::new(z.re, z.im)
    }))
}

unsafe fn matrix_out(m: &ComplexMatrix, out: *mut LqComplex, len: usize, what: &str) -> Result<(), Failure> {
    let need = m.nrows() * m.ncols();
    if len != need {
        return fail(LqStatus::DimensionMismatch, format!("{what} needs {need} entries, buffer has {len}"));
    }
    if need == 0 {
        return Ok(());
    }
    if out.is_null() {
        return fail(LqStatus::NullPointer, format!("{what} buffer is null"));
    }
    let data = std::slice::from_raw_parts_mut(out, len);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            data[i * m.ncols() + j] = LqComplex { re: z.re, im: z.im };
        }
    }
    Ok(())
}

unsafe fn store(out: *mut *mut LqComponent, comp: LinearComponent) -> Result<(), Failure> {
    if out.is_null() {
        return fail(LqStatus::NullPointer, "output handle pointer is null");
    }
    *out = Box::into_raw(Box::new(LqComponent { inner: comp }));
    Ok(())
}

unsafe fn text_in<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(LqStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(LqStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Message for the last failed call on this thread, or null after a success.
///
/// The pointer stays valid until the next `lq_*` call on the same thread.
#[no_mangle]
pub extern "C" fn lq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a component from row-major `S` (n×n), `C` (n×m) and `Omega` (m×m).
///
/// Rejects a non-unitary `S` (`InvalidComponent`) or non-hermitian `Omega`
/// (`NotHermitian`) at the default tolerance.
///
/// # Safety
/// Each array must hold the stated number of entries (or be null when that
/// number is zero); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lq_component_new(
    n_ports: usize,
    n_modes: usize,
    s: *const LqComplex,
    c: *const LqComplex,
    omega: *const LqComplex,
    out: *mut *mut LqComponent,
) -> LqStatus {
    guard(|| {
        let s = matrix_in(s, n_ports, n_ports, "S")?;
        let c = matrix_in(c, n_ports, n_modes, "C")?;
        let omega = matrix_in(omega, n_modes, n_modes, "Omega")?;
        let comp = LinearComponent::new(s, c, omega)?;
        check(slh::validate(&comp))?;
        store(out, comp)
    })
}

/// Single-mode cavity with decay rate `gamma`, detuning `omega`, phase `phi`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lq_cavity_new(gamma: f64, omega: f64, phi: f64, out: *mut *mut LqComponent) -> LqStatus {
    guard(|| store(out, slh::make_cavity(CavityParams { gamma, omega, phi })?))
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `comp` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lq_component_free(comp: *mut LqComponent) {
    if !comp.is_null() {
        drop(Box::from_raw(comp));
    }
}

/// # Safety
/// `comp` must be a live handle; `n_ports` and `n_modes` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lq_component_dims(
    comp: *const LqComponent,
    n_ports: *mut usize,
    n_modes: *mut usize,
) -> LqStatus {
    guard(|| {
        let comp = handle(comp, "component")?;
        if n_ports.is_null() || n_modes.is_null() {
            return fail(LqStatus::NullPointer, "dimension output is null");
        }
        *n_ports = comp.n_ports();
        *n_modes = comp.n_modes();
        Ok(())
    })
}

/// Copies `S` into `out` (`len` must be n²).
///
/// # Safety
/// `out` must have room for `len` entries.
#[no_mangle]
pub unsafe extern "C" fn lq_component_s(comp: *const LqComponent, out: *mut LqComplex, len: usize) -> LqStatus {
    guard(|| matrix_out(handle(comp, "component")?.s(), out, len, "S"))
}

/// Copies `C` into `out` (`len` must be n·m).
///
/// # Safety
/// `out` must have room for `len` entries.
#[no_mangle]
pub unsafe extern "C" fn lq_component_c(comp: *const LqComponent, out: *mut LqComplex, len: usize) -> LqStatus {
    guard(|| matrix_out(handle(comp, "component")?.c(), out, len, "C"))
}

/// Copies `Omega` into `out` (`len` must be m²).
///
/// # Safety
/// `out` must have room for `len` entries.
#[no_mangle]
pub unsafe extern "C" fn lq_component_omega(comp: *const LqComponent, out: *mut LqComplex, len: usize) -> LqStatus {
    guard(|| matrix_out(handle(comp, "component")?.omega(), out, len, "Omega"))
}

/// `Ok` if `S` is unitary and `Omega` hermitian within `tol`; otherwise the
/// same statuses as `lq_component_new`.
///
/// # Safety
/// `comp` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lq_component_validate(comp: *const LqComponent, tol: f64) -> LqStatus {
    guard(|| check(slh::validate_with_tol(handle(comp, "component")?, tol)))
}

/// Side-by-side placement: ports and modes of `a`, then those of `b`.
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lq_concatenate(
    a: *const LqComponent,
    b: *const LqComponent,
    out: *mut *mut LqComponent,
) -> LqStatus {
    guard(|| store(out, slh::concatenate(handle(a, "a")?, handle(b, "b")?)))
}

/// `first` feeding `second`.
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lq_series(
    first: *const LqComponent,
    second: *const LqComponent,
    out: *mut *mut LqComponent,
) -> LqStatus {
    guard(|| store(out, network::series_product(handle(second, "second")?, handle(first, "first")?)?))
}

/// Feeds output `from[k]` back into input `to[k]` for each of the `n_edges`
/// edges and eliminates those channels. Open ports keep their relative order.
///
/// # Safety
/// `from` and `to` must hold `n_edges` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lq_feedback(
    comp: *const LqComponent,
    from: *const usize,
    to: *const usize,
    n_edges: usize,
    out: *mut *mut LqComponent,
) -> LqStatus {
    guard(|| {
        let comp = handle(comp, "component")?.clone();
        let edges: Vec<(usize, usize)> = if n_edges == 0 {
            Vec::new()
        } else if from.is_null() || to.is_null() {
            return fail(LqStatus::NullPointer, "edge array is null");
        } else {
            let (f, t) = (std::slice::from_raw_parts(from, n_edges), std::slice::from_raw_parts(to, n_edges));
            f.iter().copied().zip(t.iter().copied()).collect()
        };
        let pc = PartitionedComponent::from_edges(comp, &edges)?;
        store(out, network::feedback_reduce(&pc)?)
    })
}

/// Redheffer star product: the first `a_outer` ports of `a` and the last
/// ports of `b` stay open; the rest face each other.
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lq_star(
    a: *const LqComponent,
    b: *const LqComponent,
    a_outer: usize,
    b_inner: usize,
    out: *mut *mut LqComponent,
) -> LqStatus {
    guard(|| {
        let wiring = StarWiring { a_outer, b_inner };
        store(out, network::redheffer_star(handle(a, "a")?, handle(b, "b")?, wiring)?)
    })
}

/// Closes the `n2` in-loop channels of the unitary `t` ((n1+n2)×(n1+n2),
/// row-major) around `plant`.
///
/// # Safety
/// `t` must hold (n1+n2)² entries; `plant` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lq_beamsplitter_loop(
    t: *const LqComplex,
    n1: usize,
    n2: usize,
    plant: *const LqComponent,
    out: *mut *mut LqComponent,
) -> LqStatus {
    guard(|| {
        let t = BeamSplitter::new(matrix_in(t, n1 + n2, n1 + n2, "T")?, n1)?;
        store(out, network::beamsplitter_loop(&t, handle(plant, "plant")?)?)
    })
}

/// Writes `Xi(s)` (n×n, row-major) to `out`.
///
/// # Safety
/// `comp` must be live; `out` must have room for `len` entries.
#[no_mangle]
pub unsafe extern "C" fn lq_transfer(
    comp: *const LqComponent,
    s: LqComplex,
    out: *mut LqComplex,
    len: usize,
) -> LqStatus {
    guard(|| {
        let xi = transfer::transfer_at(handle(comp, "component")?, Complex64::new(s.re, s.im))?;
        matrix_out(&xi, out, len, "Xi")
    })
}

/// Converts a Stratonovich model `E` (n×n), `F` (n×m), `K` (m×m) to a component.
///
/// # Safety
/// Arrays must hold the stated number of entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lq_strat_to_ito(
    n_ports: usize,
    n_modes: usize,
    e: *const LqComplex,
    f: *const LqComplex,
    k: *const LqComplex,
    out: *mut *mut LqComponent,
) -> LqStatus {
    guard(|| {
        let sm = StratonovichModel::new(
            matrix_in(e, n_ports, n_ports, "E")?,
            matrix_in(f, n_ports, n_modes, "F")?,
            matrix_in(k, n_modes, n_modes, "K")?,
        )?;
        store(out, stratcal::strat_to_ito(&sm)?)
    })
}

/// Parses QNET text and reduces its network (or its only component).
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lq_netfile_reduce(source: *const c_char, out: *mut *mut LqComponent) -> LqStatus {
    guard(|| {
        let doc = netfile::parse(text_in(source, "source")?).map_err(Error::from)?;
        if doc.components.is_empty() {
            return fail(LqStatus::InvalidArgument, "no components");
        }
        let pc = build_partitioned(&doc)?;
        store(out, network::feedback_reduce(&pc)?)
    })
}

/// Canonical QNET text for one component. Free it with `lq_string_free`.
///
/// # Safety
/// `comp` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lq_component_to_qnet(comp: *const LqComponent, out: *mut *mut c_char) -> LqStatus {
    guard(|| {
        let text = netfile::serialize(&NetDocument::from_component(handle(comp, "component")?));
        if out.is_null() {
            return fail(LqStatus::NullPointer, "output string pointer is null");
        }
        *out = CString::new(text).expect("QNET text has no NUL").into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
