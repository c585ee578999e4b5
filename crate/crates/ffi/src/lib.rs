//! C interface to `qrecovery`.
//!
//! States and channels cross the boundary as opaque handles that the caller
//! frees with `qr_state_free` / `qr_channel_free`. Every fallible call
//! returns a [`QrStatus`]; on failure `qr_last_error` holds a message for the
//! calling thread until its next failing call.
//!
//! Matrices are passed as separate row-major arrays of real and imaginary
//! parts. Subsystems are ordered big-endian.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use num_complex::Complex64;
use qrecovery::entropy::cmi;
use qrecovery::linalg::{fidelity, ComplexMatrix};
use qrecovery::recovery::{
    averaged_rotated_petz, petz_transpose, recovery_report, rotated_petz, validate_tpcp,
    AveragingScheme, Channel, WeightLaw,
};
use qrecovery::sdp::fidelity_of_recovery;
use qrecovery::{DensityMatrix, DimVector, Error, TripartiteLabels};

/// Opaque density operator.
pub struct QrState {
    inner: DensityMatrix,
}

/// Opaque quantum channel.
pub struct QrChannel {
    inner: Channel,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotPsd = 4,
    Numerical = 5,
    Solver = 6,
    Io = 7,
    Parse = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QrWeights {
    Cosh = 0,
    Uniform = 1,
}

/// Recovery-bound quantities, information in bits. `dm_bits` and
/// `delta_meas` are NaN unless requested.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct QrRecoveryReport {
    pub i_bits: f64,
    pub fid: f64,
    pub neg2logf: f64,
    pub dm_bits: f64,
    pub delta_thm1: f64,
    pub delta_meas: f64,
    pub delta_cor3: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct QrOptimum {
    /// Fidelity of the repaired witness channel.
    pub value: f64,
    pub sdp_value: f64,
    pub dual_bound: f64,
    /// Nonzero when the solver reached full accuracy.
    pub optimal: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QrStatus {
    match e {
        Error::NotSquare { .. }
        | Error::DimensionMismatch(_)
        | Error::SubsystemOutOfRange { .. } => QrStatus::DimensionMismatch,
        Error::NotPsd { .. } | Error::BadTrace { .. } => QrStatus::NotPsd,
        Error::NonFinite | Error::FunctionNotFinite { .. } => QrStatus::Numerical,
        Error::InvalidArgument(_) | Error::KrausIncomplete { .. } => QrStatus::InvalidArgument,
        Error::Solver(_) => QrStatus::Solver,
        Error::Io(_) => QrStatus::Io,
        Error::Json(_) => QrStatus::Parse,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QrStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            QrStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            QrStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(Failure::Null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Error::InvalidArgument("path is not valid UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

/// Message of the last failing call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a state from `n × n` row-major real and imaginary parts, where
/// `n` is the product of the `n_dims` entries of `dims`. `im` may be NULL.
///
/// # Safety
/// `dims` must point to `n_dims` values and `re` (and `im` if non-NULL) to
/// `n * n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qr_state_new(
    dims: *const usize,
    n_dims: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut QrState,
) -> QrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        if dims.is_null() {
            return Err(Failure::Null("dims"));
        }
        if re.is_null() {
            return Err(Failure::Null("re"));
        }
        let dims = DimVector::new(std::slice::from_raw_parts(dims, n_dims).to_vec())?;
        let n = dims.total();
        let re = std::slice::from_raw_parts(re, n * n);
        let im = (!im.is_null()).then(|| std::slice::from_raw_parts(im, n * n));
        let m = ComplexMatrix::from_fn(n, n, |r, c| {
            let k = r * n + c;
            Complex64::new(re[k], im.map_or(0.0, |v| v[k]))
        });
        let state = DensityMatrix::new(m, dims)?;
        *out = Box::into_raw(Box::new(QrState { inner: state }));
        Ok(())
    })
}

/// Loads a state JSON file (`{"dims", "matrix": [[re, im], ...]}`).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qr_state_load_json(
    path: *const c_char,
    out: *mut *mut QrState,
) -> QrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let state = DensityMatrix::load_json(&path_arg(path)?)?;
        *out = Box::into_raw(Box::new(QrState { inner: state }));
        Ok(())
    })
}

/// # Safety
/// `state` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn qr_state_save_json(
    state: *const QrState,
    path: *const c_char,
) -> QrStatus {
    guard(|| {
        let state = deref(state, "state")?;
        state.inner.save_json(&path_arg(path)?)?;
        Ok(())
    })
}

/// # Safety
/// `state` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qr_state_free(state: *mut QrState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Total dimension, or 0 for NULL.
///
/// # Safety
/// `state` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qr_state_dim(state: *const QrState) -> usize {
    state.as_ref().map_or(0, |s| s.inner.dim())
}

/// Number of tensor factors, or 0 for NULL.
///
/// # Safety
/// `state` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qr_state_num_systems(state: *const QrState) -> usize {
    state.as_ref().map_or(0, |s| s.inner.dims().len())
}

/// Marginal on the `n_keep` subsystems listed in `keep`.
///
/// # Safety
/// `state` must be live, `keep` must hold `n_keep` values, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qr_state_marginal(
    state: *const QrState,
    keep: *const usize,
    n_keep: usize,
    out: *mut *mut QrState,
) -> QrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let state = deref(state, "state")?;
        if keep.is_null() && n_keep > 0 {
            return Err(Failure::Null("keep"));
        }
        let keep = if n_keep == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(keep, n_keep)
        };
        let m = state.inner.marginal(keep)?;
        *out = Box::into_raw(Box::new(QrState { inner: m }));
        Ok(())
    })
}

/// `I(A:C|B)` in bits for a state on `A ⊗ B ⊗ C`.
///
/// # Safety
/// `state` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qr_cmi(state: *const QrState, out: *mut f64) -> QrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let state = deref(state, "state")?;
        *out = cmi(&state.inner, &TripartiteLabels::standard())?.i_ac_given_b;
        Ok(())
    })
}

/// `‖√ρ √σ‖₁`.
///
/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qr_fidelity(
    a: *const QrState,
    b: *const QrState,
    out: *mut f64,
) -> QrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        *out = fidelity(a.inner.matrix(), b.inner.matrix())?;
        Ok(())
    })
}

fn boxed(chan: Channel) -> *mut QrChannel {
    Box::into_raw(Box::new(QrChannel { inner: chan }))
}

/// Transpose (Petz) map of a bipartite `ρ_BC`.
///
/// # Safety
/// `rho_bc` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qr_petz_transpose(
    rho_bc: *const QrState,
    out: *mut *mut QrChannel,
) -> QrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        *out = boxed(petz_transpose(&deref(rho_bc, "rho_bc")?.inner)?);
        Ok(())
    })
}

/// Rotated Petz map at parameter `t`.
///
/// # Safety
/// `rho_bc` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qr_rotated_petz(
    rho_bc: *const QrState,
    t: f64,
    out: *mut *mut QrChannel,
) -> QrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        *out = boxed(rotated_petz(&deref(rho_bc, "rho_bc")?.inner, t)?);
        Ok(())
    })
}

/// Average of rotated Petz maps over `nodes` points on `[−halfwidth, halfwidth]`.
///
/// # Safety
/// `rho_bc` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qr_averaged_petz(
    rho_bc: *const QrState,
    nodes: usize,
    halfwidth: f64,
    weights: QrWeights,
    out: *mut *mut QrChannel,
) -> QrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let law = match weights {
            QrWeights::Cosh => WeightLaw::Cosh,
            QrWeights::Uniform => WeightLaw::Uniform,
        };
        let scheme = AveragingScheme::grid(nodes, halfwidth, law)?;
        *out = boxed(averaged_rotated_petz(
            &deref(rho_bc, "rho_bc")?.inner,
            &scheme,
        )?);
        Ok(())
    })
}

/// Loads a channel JSON file (`{"dim_in", "dim_out", "choi"}`).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qr_channel_load_json(
    path: *const c_char,
    out: *mut *mut QrChannel,
) -> QrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        *out = boxed(Channel::load_json(&path_arg(path)?)?);
        Ok(())
    })
}

/// # Safety
/// `chan` must be live and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn qr_channel_save_json(
    chan: *const QrChannel,
    path: *const c_char,
) -> QrStatus {
    guard(|| {
        deref(chan, "chan")?.inner.save_json(&path_arg(path)?)?;
        Ok(())
    })
}

/// # Safety
/// `chan` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qr_channel_free(chan: *mut QrChannel) {
    if !chan.is_null() {
        drop(Box::from_raw(chan));
    }
}

/// Input and output dimensions.
///
/// # Safety
/// `chan` must be live; the out pointers writable.
#[no_mangle]
pub unsafe extern "C" fn qr_channel_dims(
    chan: *const QrChannel,
    dim_in: *mut usize,
    dim_out: *mut usize,
) -> QrStatus {
    guard(|| {
        let chan = deref(chan, "chan")?;
        *out_ref(dim_in, "dim_in")? = chan.inner.dim_in();
        *out_ref(dim_out, "dim_out")? = chan.inner.dim_out();
        Ok(())
    })
}

/// Writes 1 to `out` when the channel is CPTP at the library tolerance.
///
/// # Safety
/// `chan` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qr_channel_is_tpcp(chan: *const QrChannel, out: *mut i32) -> QrStatus {
    guard(|| {
        let chan = deref(chan, "chan")?;
        *out_ref(out, "out")? = validate_tpcp(&chan.inner).passed() as i32;
        Ok(())
    })
}

/// Applies the channel to a single-system operator given row-major, writing
/// `dim_out²` entries into `out_re` / `out_im`.
///
/// # Safety
/// `re` and `im` must hold `dim_in²` values, `out_re` and `out_im` room for
/// `dim_out²`; `im` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn qr_channel_apply(
    chan: *const QrChannel,
    re: *const f64,
    im: *const f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> QrStatus {
    guard(|| {
        let chan = deref(chan, "chan")?;
        if re.is_null() {
            return Err(Failure::Null("re"));
        }
        if out_re.is_null() || out_im.is_null() {
            return Err(Failure::Null("out"));
        }
        let n = chan.inner.dim_in();
        let re = std::slice::from_raw_parts(re, n * n);
        let im = (!im.is_null()).then(|| std::slice::from_raw_parts(im, n * n));
        let x = ComplexMatrix::from_fn(n, n, |r, c| {
            Complex64::new(re[r * n + c], im.map_or(0.0, |v| v[r * n + c]))
        });
        let y = chan.inner.apply_matrix(&x)?;
        let m = chan.inner.dim_out();
        let (or, oi) = (
            std::slice::from_raw_parts_mut(out_re, m * m),
            std::slice::from_raw_parts_mut(out_im, m * m),
        );
        for r in 0..m {
            for c in 0..m {
                or[r * m + c] = y[(r, c)].re;
                oi[r * m + c] = y[(r, c)].im;
            }
        }
        Ok(())
    })
}

/// Recovery-bound report of `chan` (mapping `B → BC`) on `ρ_ABC`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qr_recovery_report(
    rho_abc: *const QrState,
    chan: *const QrChannel,
    with_dm: i32,
    out: *mut QrRecoveryReport,
) -> QrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let rho = deref(rho_abc, "rho_abc")?;
        let chan = deref(chan, "chan")?;
        let r = recovery_report(
            &rho.inner,
            &TripartiteLabels::standard(),
            &chan.inner,
            with_dm != 0,
        )?;
        *out = QrRecoveryReport {
            i_bits: r.i_bits,
            fid: r.fid,
            neg2logf: r.neg2logf,
            dm_bits: r.dm_bits.unwrap_or(f64::NAN),
            delta_thm1: r.delta_thm1,
            delta_meas: r.delta_meas.unwrap_or(f64::NAN),
            delta_cor3: r.delta_cor3,
        };
        Ok(())
    })
}

/// Fidelity of recovery by semidefinite programming. `witness` may be NULL;
/// otherwise it receives the optimal channel.
///
/// # Safety
/// `rho_abc` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qr_fidelity_of_recovery(
    rho_abc: *const QrState,
    out: *mut QrOptimum,
    witness: *mut *mut QrChannel,
) -> QrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if !witness.is_null() {
            *witness = ptr::null_mut();
        }
        let rho = deref(rho_abc, "rho_abc")?;
        let opt = fidelity_of_recovery(&rho.inner, &TripartiteLabels::standard())?;
        *out = QrOptimum {
            value: opt.value,
            sdp_value: opt.sdp_value,
            dual_bound: opt.dual_bound,
            optimal: (opt.status == qrecovery::sdp::Status::Optimal) as i32,
        };
        if !witness.is_null() {
            *witness = boxed(opt.witness);
        }
        Ok(())
    })
}
