//! C ABI over the `hg-crosstalk` engine.
//!
//! Every function returns an [`HgStatus`]; results come back through out
//! pointers. Handles are opaque and must be released with the matching
//! `*_free` function. The message of the most recent failure on the calling
//! thread is available from [`hg_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hg_crosstalk::engine::{modes_up_to_total_order, ModeIndex, ModePair};
use hg_crosstalk::{
    channel, DerivedConstants, Engine, Error, Normalization, OpticalConfig, ProbabilityMatrix,
    TurbulenceSpec,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HgStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Pole = 3,
    NumericalRegime = 4,
    NumericalFailure = 5,
    Calibration = 6,
    Quadrature = 7,
    InvalidParameter = 8,
    OutOfRange = 9,
    Panic = 10,
}

impl From<&Error> for HgStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => HgStatus::Domain,
            Error::Pole(_) => HgStatus::Pole,
            Error::NumericalRegime(_) => HgStatus::NumericalRegime,
            Error::NumericalFailure(_) => HgStatus::NumericalFailure,
            Error::Calibration(_) => HgStatus::Calibration,
            Error::Quadrature(_) => HgStatus::Quadrature,
            Error::InvalidParameter(_) => HgStatus::InvalidParameter,
        }
    }
}

/// How the `value` argument of [`hg_channel_new`] is interpreted.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HgTurbulenceKind {
    /// No turbulence; `value` is ignored.
    Vacuum = 0,
    /// Structure constant Cn² [m^-2/3].
    Cn2 = 1,
    /// Rytov variance σ_R².
    Rytov = 2,
    /// Kernel strength γ.
    Gamma = 3,
}

/// Opaque channel: geometry, turbulence and a memoised Π table.
pub struct HgChannel {
    engine: Engine,
}

/// Opaque probability matrix.
pub struct HgMatrix {
    matrix: ProbabilityMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: HgStatus, msg: impl Into<String>) -> HgStatus {
    set_last_error(msg.into());
    status
}

fn from_error(e: Error) -> HgStatus {
    fail(HgStatus::from(&e), e.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), HgStatus>) -> HgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HgStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(HgStatus::Panic, "internal panic"),
    }
}

fn write<T>(out: *mut T, value: T) -> Result<(), HgStatus> {
    if out.is_null() {
        return Err(fail(HgStatus::NullPointer, "null output pointer"));
    }
    // SAFETY: non-null, caller guarantees it points to writable storage for T.
    unsafe { out.write(value) };
    Ok(())
}

fn deref<'a, T>(p: *const T) -> Result<&'a T, HgStatus> {
    // SAFETY: caller passes a handle obtained from this library or null.
    unsafe { p.as_ref() }.ok_or_else(|| fail(HgStatus::NullPointer, "null handle"))
}

fn normalization(calibrated: bool) -> Normalization {
    if calibrated {
        Normalization::calibrated_default()
    } else {
        Normalization::Raw
    }
}

/// Creates a channel. `pump_waist` is the pump spot size at the crystal W0p [m];
/// `kind` is one of the `HgTurbulenceKind` values and selects how `value` is read.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn hg_channel_new(
    wavelength: f64,
    distance: f64,
    pump_waist: f64,
    kind: u32,
    value: f64,
    out: *mut *mut HgChannel,
) -> HgStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(HgStatus::NullPointer, "null output pointer"));
        }
        let cfg = OpticalConfig::new(wavelength, distance, pump_waist).map_err(from_error)?;
        let spec = match kind {
            k if k == HgTurbulenceKind::Vacuum as u32 => TurbulenceSpec::Vacuum,
            k if k == HgTurbulenceKind::Cn2 as u32 => TurbulenceSpec::StructureConstant(value),
            k if k == HgTurbulenceKind::Rytov as u32 => TurbulenceSpec::Rytov(value),
            k if k == HgTurbulenceKind::Gamma as u32 => TurbulenceSpec::Strength(value),
            other => {
                return Err(fail(
                    HgStatus::InvalidParameter,
                    format!("unknown turbulence kind {other}"),
                ))
            }
        };
        let turbulence = spec.resolve(&cfg).map_err(from_error)?;
        let consts = DerivedConstants::new(cfg, turbulence).map_err(from_error)?;
        let handle = Box::into_raw(Box::new(HgChannel {
            engine: Engine::new(consts),
        }));
        write(out, handle)
    })
}

/// Releases a channel. Null is ignored.
///
/// # Safety
/// `channel` must be null or a handle from [`hg_channel_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hg_channel_free(channel: *mut HgChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// Turbulence strength γ of the channel.
///
/// # Safety
/// `channel` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hg_channel_gamma(channel: *const HgChannel, out: *mut f64) -> HgStatus {
    guard(|| write(out, deref(channel)?.engine.constants().gamma))
}

/// One-axis factor Π(μ, ν).
///
/// # Safety
/// `channel` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hg_pi_factor(
    channel: *const HgChannel,
    mu: u32,
    nu: u32,
    out: *mut f64,
) -> HgStatus {
    guard(|| {
        let engine = &deref(channel)?.engine;
        if mu.max(nu) > engine.max_order() {
            return Err(fail(
                HgStatus::OutOfRange,
                format!("order exceeds cap {}", engine.max_order()),
            ));
        }
        write(out, engine.pi(mu, nu).map_err(from_error)?)
    })
}

/// Unnormalised joint probability P(HG_{m_s n_s}, HG_{m_i n_i}).
///
/// # Safety
/// `channel` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hg_joint_probability(
    channel: *const HgChannel,
    m_s: u32,
    n_s: u32,
    m_i: u32,
    n_i: u32,
    out: *mut f64,
) -> HgStatus {
    guard(|| {
        let engine = &deref(channel)?.engine;
        if [m_s, n_s, m_i, n_i]
            .into_iter()
            .any(|o| o > engine.max_order())
        {
            return Err(fail(
                HgStatus::OutOfRange,
                format!("order exceeds cap {}", engine.max_order()),
            ));
        }
        let pair = ModePair::new(ModeIndex::new(m_s, n_s), ModeIndex::new(m_i, n_i));
        write(out, engine.joint_probability(pair).map_err(from_error)?)
    })
}

/// Factor that maps raw probabilities onto the calibrated scale.
///
/// # Safety
/// `channel` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hg_calibration_scale(
    channel: *const HgChannel,
    out: *mut f64,
) -> HgStatus {
    guard(|| {
        let engine = &deref(channel)?.engine;
        let applied = engine
            .normalization_scale(Normalization::calibrated_default())
            .map_err(from_error)?;
        write(out, applied.scale)
    })
}

fn matrix_for(
    channel: *const HgChannel,
    modes: &[ModeIndex],
    calibrated: bool,
    out: *mut *mut HgMatrix,
) -> Result<(), HgStatus> {
    if out.is_null() {
        return Err(fail(HgStatus::NullPointer, "null output pointer"));
    }
    let engine = &deref(channel)?.engine;
    if modes.is_empty() {
        return Err(fail(HgStatus::InvalidParameter, "empty mode list"));
    }
    let matrix = engine
        .probability_matrix(modes, normalization(calibrated))
        .map_err(from_error)?;
    write(out, Box::into_raw(Box::new(HgMatrix { matrix })))
}

/// Matrix over all modes with m+n ≤ `max_sum`, in ascending total order.
///
/// # Safety
/// `channel` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hg_matrix_new(
    channel: *const HgChannel,
    max_sum: u32,
    calibrated: bool,
    out: *mut *mut HgMatrix,
) -> HgStatus {
    guard(|| matrix_for(channel, &modes_up_to_total_order(max_sum), calibrated, out))
}

/// Matrix over the modes (m[k], n[k]), k < len.
///
/// # Safety
/// `m` and `n` must each point to `len` readable values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hg_matrix_from_modes(
    channel: *const HgChannel,
    m: *const u32,
    n: *const u32,
    len: usize,
    calibrated: bool,
    out: *mut *mut HgMatrix,
) -> HgStatus {
    guard(|| {
        if len > 0 && (m.is_null() || n.is_null()) {
            return Err(fail(HgStatus::NullPointer, "null mode array"));
        }
        let modes: Vec<ModeIndex> = if len == 0 {
            Vec::new()
        } else {
            let (ms, ns) = (
                std::slice::from_raw_parts(m, len),
                std::slice::from_raw_parts(n, len),
            );
            ms.iter()
                .zip(ns)
                .map(|(&a, &b)| ModeIndex::new(a, b))
                .collect()
        };
        matrix_for(channel, &modes, calibrated, out)
    })
}

/// Releases a matrix. Null is ignored.
///
/// # Safety
/// `matrix` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hg_matrix_free(matrix: *mut HgMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Number of rows (= columns). Returns 0 for a null handle.
///
/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hg_matrix_dim(matrix: *const HgMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.matrix.dim())
}

/// Entry (row = signal, column = idler).
///
/// # Safety
/// `matrix` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hg_matrix_get(
    matrix: *const HgMatrix,
    row: usize,
    col: usize,
    out: *mut f64,
) -> HgStatus {
    guard(|| {
        let m = &deref(matrix)?.matrix;
        let v = m.values.get(row).and_then(|r| r.get(col)).ok_or_else(|| {
            fail(
                HgStatus::OutOfRange,
                format!("index ({row}, {col}) outside {}×{}", m.dim(), m.dim()),
            )
        })?;
        write(out, *v)
    })
}

/// Mode (m, n) labelling row/column `index`.
///
/// # Safety
/// `matrix` must be a live handle, `m` and `n` writable.
#[no_mangle]
pub unsafe extern "C" fn hg_matrix_mode(
    matrix: *const HgMatrix,
    index: usize,
    m: *mut u32,
    n: *mut u32,
) -> HgStatus {
    guard(|| {
        let mat = &deref(matrix)?.matrix;
        let mode = *mat.ordering.get(index).ok_or_else(|| {
            fail(
                HgStatus::OutOfRange,
                format!("index {index} outside {}", mat.dim()),
            )
        })?;
        if n.is_null() {
            return Err(fail(HgStatus::NullPointer, "null output pointer"));
        }
        write(m, mode.m)?;
        write(n, mode.n)
    })
}

/// Copies the matrix row-major into `buffer`, which must hold dim² values.
///
/// # Safety
/// `matrix` must be a live handle and `buffer` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hg_matrix_copy(
    matrix: *const HgMatrix,
    buffer: *mut f64,
    len: usize,
) -> HgStatus {
    guard(|| {
        let m = &deref(matrix)?.matrix;
        let need = m.dim() * m.dim();
        if buffer.is_null() {
            return Err(fail(HgStatus::NullPointer, "null buffer"));
        }
        if len < need {
            return Err(fail(
                HgStatus::OutOfRange,
                format!("buffer holds {len} values, need {need}"),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(buffer, need);
        for (d, s) in dst.iter_mut().zip(m.values.iter().flatten()) {
            *d = *s;
        }
        Ok(())
    })
}

/// σ_R² = 1.23 Cn² k^{7/6} z^{11/6}.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hg_rytov_variance(
    cn2: f64,
    wavelength: f64,
    distance: f64,
    out: *mut f64,
) -> HgStatus {
    guard(|| {
        write(
            out,
            channel::rytov_variance(cn2, wavelength, distance).map_err(from_error)?,
        )
    })
}

/// γ = 1.63 (σ_R²)^{6/5}.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hg_turbulence_strength(rytov: f64, out: *mut f64) -> HgStatus {
    guard(|| {
        write(
            out,
            channel::turbulence_strength(rytov).map_err(from_error)?,
        )
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn hg_status_message(status: HgStatus) -> *const c_char {
    let s: &'static CStr = match status {
        HgStatus::Ok => c"ok",
        HgStatus::NullPointer => c"null pointer",
        HgStatus::Domain => c"argument outside the domain",
        HgStatus::Pole => c"pole of a special function",
        HgStatus::NumericalRegime => c"parameters outside the supported numerical regime",
        HgStatus::NumericalFailure => c"numerical failure",
        HgStatus::Calibration => c"calibration failed",
        HgStatus::Quadrature => c"quadrature did not converge",
        HgStatus::InvalidParameter => c"invalid parameter",
        HgStatus::OutOfRange => c"index out of range",
        HgStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Detail of the last failure on this thread, or null if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
