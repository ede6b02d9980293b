//! C interface to the vortex-blob library.
//!
//! Sheets live behind the opaque `VbSheet` handle, created by
//! `vb_sheet_discretize` or `vb_snapshot_read` and released with
//! `vb_sheet_free`. Every fallible call returns a `VbStatus`; on failure
//! `vb_last_error` describes the most recent error on the calling thread.
//! Output arrays are caller-allocated and their capacity is passed in.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use vortex_blob::concentration::{maximal_global_sheet, maximal_local};
use vortex_blob::evolve::{hamiltonian, impulse, rk4_step, velocities};
use vortex_blob::io::{read_snapshot, write_snapshot};
use vortex_blob::sheet::discretize;
use vortex_blob::{Error, InitialDataKind, VortexSheet};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VbStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    InvalidSheet = 3,
    BlowUp = 4,
    DriftExceeded = 5,
    Config = 6,
    CorruptSnapshot = 7,
    Io = 8,
    BufferTooSmall = 9,
    InvalidString = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VbKind {
    LoadedWing = 0,
    FuselageFlap = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VbVec2 {
    pub x: f64,
    pub y: f64,
}

/// Opaque handle to a discrete vortex sheet.
pub struct VbSheet {
    inner: VortexSheet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: VbStatus, message: impl Into<String>) -> VbStatus {
    set_error(message.into());
    status
}

fn status_of(e: &Error) -> VbStatus {
    match e {
        Error::Domain(_) => VbStatus::Domain,
        Error::InvalidSheet(_) => VbStatus::InvalidSheet,
        Error::BlowUp { .. } => VbStatus::BlowUp,
        Error::DriftExceeded { .. } => VbStatus::DriftExceeded,
        Error::Config(_) => VbStatus::Config,
        Error::CorruptSnapshot { .. } => VbStatus::CorruptSnapshot,
        Error::Io { .. } => VbStatus::Io,
    }
}

/// Runs `body`, turning library errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), VbStatus>) -> VbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => VbStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(VbStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, VbStatus>;
}

impl<T> OrStatus<T> for vortex_blob::Result<T> {
    fn or_status(self) -> Result<T, VbStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

unsafe fn sheet_ref<'a>(sheet: *const VbSheet) -> Result<&'a VortexSheet, VbStatus> {
    sheet
        .as_ref()
        .map(|s| &s.inner)
        .ok_or_else(|| fail(VbStatus::NullPointer, "null sheet handle"))
}

unsafe fn out_slice<'a, T>(
    ptr: *mut T,
    capacity: usize,
    needed: usize,
    what: &str,
) -> Result<&'a mut [T], VbStatus> {
    if ptr.is_null() {
        return Err(fail(VbStatus::NullPointer, format!("null {what} buffer")));
    }
    if capacity < needed {
        return Err(fail(
            VbStatus::BufferTooSmall,
            format!("{what} buffer holds {capacity}, {needed} needed"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, needed))
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a Path, VbStatus> {
    if path.is_null() {
        return Err(fail(VbStatus::NullPointer, "null path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(Path::new)
        .map_err(|_| fail(VbStatus::InvalidString, "path is not valid UTF-8"))
}

fn give(out: *mut *mut VbSheet, sheet: VortexSheet) -> Result<(), VbStatus> {
    // SAFETY: callers check `out` for null before doing any work
    unsafe { *out = Box::into_raw(Box::new(VbSheet { inner: sheet })) };
    Ok(())
}

/// Message for the most recent failure on this thread, or NULL if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Discretizes initial data with `n_intervals` intervals (`n_intervals + 1` vortices).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn vb_sheet_discretize(
    kind: VbKind,
    n_intervals: usize,
    eps: f64,
    out: *mut *mut VbSheet,
) -> VbStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(VbStatus::NullPointer, "null output handle"));
        }
        let kind = match kind {
            VbKind::LoadedWing => InitialDataKind::LoadedWing,
            VbKind::FuselageFlap => InitialDataKind::FuselageFlap,
        };
        give(out, discretize(kind, n_intervals, eps).or_status()?)
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `sheet` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vb_sheet_free(sheet: *mut VbSheet) {
    if !sheet.is_null() {
        drop(Box::from_raw(sheet));
    }
}

/// Number of vortices, or 0 for a NULL handle.
///
/// # Safety
/// `sheet` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vb_sheet_len(sheet: *const VbSheet) -> usize {
    sheet.as_ref().map_or(0, |s| s.inner.len())
}

/// Simulation time of the sheet, NaN for a NULL handle.
///
/// # Safety
/// `sheet` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vb_sheet_time(sheet: *const VbSheet) -> f64 {
    sheet.as_ref().map_or(f64::NAN, |s| s.inner.time())
}

/// Blob size of the sheet, NaN for a NULL handle.
///
/// # Safety
/// `sheet` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vb_sheet_eps(sheet: *const VbSheet) -> f64 {
    sheet.as_ref().map_or(f64::NAN, |s| s.inner.eps())
}

/// Copies positions, circulations and sheet parameters. Any of the output
/// pointers may be NULL to skip that array; the others need `capacity >= len`.
///
/// # Safety
/// Non-NULL outputs must point to at least `capacity` writable values.
#[no_mangle]
pub unsafe extern "C" fn vb_sheet_copy(
    sheet: *const VbSheet,
    positions: *mut VbVec2,
    weights: *mut f64,
    alphas: *mut f64,
    capacity: usize,
) -> VbStatus {
    guard(|| {
        let s = sheet_ref(sheet)?;
        let n = s.len();
        if !positions.is_null() {
            for (o, p) in out_slice(positions, capacity, n, "positions")?
                .iter_mut()
                .zip(s.positions())
            {
                *o = VbVec2 { x: p.x, y: p.y };
            }
        }
        if !weights.is_null() {
            out_slice(weights, capacity, n, "weights")?.copy_from_slice(s.weights());
        }
        if !alphas.is_null() {
            out_slice(alphas, capacity, n, "alphas")?.copy_from_slice(s.alphas());
        }
        Ok(())
    })
}

/// Regularized velocity of every vortex.
///
/// # Safety
/// `out` must point to at least `capacity` writable values.
#[no_mangle]
pub unsafe extern "C" fn vb_sheet_velocities(
    sheet: *const VbSheet,
    out: *mut VbVec2,
    capacity: usize,
) -> VbStatus {
    guard(|| {
        let s = sheet_ref(sheet)?;
        let dst = out_slice(out, capacity, s.len(), "velocity")?;
        for (o, v) in dst.iter_mut().zip(velocities(s)) {
            *o = VbVec2 { x: v.x, y: v.y };
        }
        Ok(())
    })
}

/// Advances the sheet in place by one classical Runge-Kutta step.
/// On failure the sheet is left unchanged.
///
/// # Safety
/// `sheet` must be a live handle not used concurrently.
#[no_mangle]
pub unsafe extern "C" fn vb_sheet_rk4_step(sheet: *mut VbSheet, dt: f64) -> VbStatus {
    guard(|| {
        let handle = sheet
            .as_mut()
            .ok_or_else(|| fail(VbStatus::NullPointer, "null sheet handle"))?;
        handle.inner = rk4_step(&handle.inner, dt).or_status()?;
        Ok(())
    })
}

/// Regularized Hamiltonian `H^eps`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_sheet_hamiltonian(sheet: *const VbSheet, out: *mut f64) -> VbStatus {
    guard(|| {
        let s = sheet_ref(sheet)?;
        out_slice(out, 1, 1, "result")?[0] = hamiltonian(s);
        Ok(())
    })
}

/// Linear impulse `sum w_j z_j`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_sheet_impulse(sheet: *const VbSheet, out: *mut VbVec2) -> VbStatus {
    guard(|| {
        let s = sheet_ref(sheet)?;
        let w = impulse(s);
        out_slice(out, 1, 1, "result")?[0] = VbVec2 { x: w.x, y: w.y };
        Ok(())
    })
}

/// Reads a binary snapshot file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_snapshot_read(path: *const c_char, out: *mut *mut VbSheet) -> VbStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(VbStatus::NullPointer, "null output handle"));
        }
        let path = path_arg(path)?;
        give(out, read_snapshot(path).or_status()?)
    })
}

/// Writes a binary snapshot file.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn vb_snapshot_write(sheet: *const VbSheet, path: *const c_char) -> VbStatus {
    guard(|| {
        let s = sheet_ref(sheet)?;
        let path = path_arg(path)?;
        write_snapshot(path, s).or_status()
    })
}

/// Global maximal function on an `nd x nd` grid: writes `levels` radii and
/// values.
///
/// # Safety
/// `radii` and `values` must each hold `capacity` writable values.
#[no_mangle]
pub unsafe extern "C" fn vb_maximal_global(
    sheet: *const VbSheet,
    nd: usize,
    levels: usize,
    radii: *mut f64,
    values: *mut f64,
    capacity: usize,
) -> VbStatus {
    guard(|| {
        let s = sheet_ref(sheet)?;
        let r_out = out_slice(radii, capacity, levels, "radii")?;
        let v_out = out_slice(values, capacity, levels, "values")?;
        let curve = maximal_global_sheet(s, nd, levels).or_status()?;
        r_out.copy_from_slice(&curve.radii);
        v_out.copy_from_slice(&curve.values);
        Ok(())
    })
}

/// Total `|w|` within each radius of vortex `center_index`; `radii` must be
/// strictly increasing.
///
/// # Safety
/// `radii` must hold `count` values and `values` `count` writable values.
#[no_mangle]
pub unsafe extern "C" fn vb_maximal_local(
    sheet: *const VbSheet,
    center_index: usize,
    radii: *const f64,
    count: usize,
    values: *mut f64,
) -> VbStatus {
    guard(|| {
        let s = sheet_ref(sheet)?;
        if radii.is_null() {
            return Err(fail(VbStatus::NullPointer, "null radii"));
        }
        let radii = std::slice::from_raw_parts(radii, count);
        let v_out = out_slice(values, count, count, "values")?;
        let curve = maximal_local(s, center_index, radii).or_status()?;
        v_out.copy_from_slice(&curve.values);
        Ok(())
    })
}
