//! C ABI over the lightlattice engine.
//!
//! Every function returns an [`LlStatus`]; on failure a message is kept per
//! thread and can be copied out with [`ll_last_error_message`]. Panics are
//! caught at the boundary and reported as `LL_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use lightlattice::equilibria::find_equilibrium;
use lightlattice::forcefield::{pair_forces_approx, ChainSystem, PairForceParams};
use lightlattice::lattice::lattice_constant;
use lightlattice::wavecore::{amplitude, intensity_profile, reflection_transmission, solve_fields, Mode};
use lightlattice::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    NegativeDistance = 3,
    SingularBoundary = 4,
    NoConvergence = 5,
    Numerical = 6,
    Panic = 7,
}

/// Opaque chain of scatterers plus its light modes.
pub struct LlSystem {
    zeta: Complex64,
    positions: Vec<f64>,
    modes: Vec<Mode>,
}

impl LlSystem {
    fn system(&self) -> Result<ChainSystem, Error> {
        ChainSystem::uniform(self.positions.len(), self.zeta, self.modes.clone())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LlStatus {
    match e {
        Error::InvalidInput(_) | Error::WavenumberMismatch { .. } => LlStatus::InvalidInput,
        Error::NegativeDistance(_) => LlStatus::NegativeDistance,
        Error::SingularBoundary(_) => LlStatus::SingularBoundary,
        Error::NoConvergence { .. } => LlStatus::NoConvergence,
        _ => LlStatus::Numerical,
    }
}

fn fail(e: Error) -> LlStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> LlStatus {
    set_error(format!("{what} is null"));
    LlStatus::NullPointer
}

fn guarded(f: impl FnOnce() -> LlStatus) -> LlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic".into());
            LlStatus::Panic
        }
    }
}

/// Creates a chain of `n` scatterers with uniform coupling, placed at
/// `0, 1, ..., n-1` (internal length units). Returns null on invalid input.
#[no_mangle]
pub extern "C" fn ll_system_new(n: usize, zeta_re: f64, zeta_im: f64) -> *mut LlSystem {
    let mut out = ptr::null_mut();
    let status = guarded(|| {
        if !zeta_re.is_finite() || !(zeta_im >= 0.0) {
            set_error("zeta must be finite with a non-negative imaginary part".into());
            return LlStatus::InvalidInput;
        }
        out = Box::into_raw(Box::new(LlSystem {
            zeta: Complex64::new(zeta_re, zeta_im),
            positions: (0..n).map(|j| j as f64).collect(),
            modes: Vec::new(),
        }));
        LlStatus::Ok
    });
    if status == LlStatus::Ok {
        out
    } else {
        ptr::null_mut()
    }
}

/// # Safety
/// `system` must come from [`ll_system_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ll_system_free(system: *mut LlSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Adds a mode with wavenumber `k` (units of `k_ref`) driven from either side.
///
/// # Safety
/// `system` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ll_system_add_mode(
    system: *mut LlSystem,
    k: f64,
    intensity_left: f64,
    intensity_right: f64,
    phase_left: f64,
    phase_right: f64,
) -> LlStatus {
    guarded(|| {
        let Some(s) = system.as_mut() else { return null("system") };
        let label = format!("mode{}", s.modes.len());
        let mode = Mode::new(label, k).with_drives(
            amplitude(intensity_left, phase_left),
            amplitude(intensity_right, phase_right),
        );
        if let Err(e) = mode.validate() {
            return fail(e);
        }
        if !phase_left.is_finite() || !phase_right.is_finite() {
            set_error("phases must be finite".into());
            return LlStatus::InvalidInput;
        }
        s.modes.push(mode);
        LlStatus::Ok
    })
}

/// Number of scatterers.
///
/// # Safety
/// `system` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ll_system_len(system: *const LlSystem) -> usize {
    system.as_ref().map_or(0, |s| s.positions.len())
}

/// Replaces the positions; `n` must equal the chain length and positions must increase.
///
/// # Safety
/// `positions` must point to `n` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn ll_system_set_positions(system: *mut LlSystem, positions: *const f64, n: usize) -> LlStatus {
    guarded(|| {
        let Some(s) = system.as_mut() else { return null("system") };
        if positions.is_null() {
            return null("positions");
        }
        if n != s.positions.len() {
            set_error(format!("expected {} positions, got {n}", s.positions.len()));
            return LlStatus::InvalidInput;
        }
        let x = slice::from_raw_parts(positions, n).to_vec();
        if let Err(e) = s.system().and_then(|sys| sys.chain(&x)) {
            return fail(e);
        }
        s.positions = x;
        LlStatus::Ok
    })
}

/// Copies the current positions into `out` (length `n`).
///
/// # Safety
/// `out` must point to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ll_system_positions(system: *const LlSystem, out: *mut f64, n: usize) -> LlStatus {
    guarded(|| {
        let Some(s) = system.as_ref() else { return null("system") };
        if out.is_null() {
            return null("out");
        }
        if n != s.positions.len() {
            set_error(format!("expected room for {} positions, got {n}", s.positions.len()));
            return LlStatus::InvalidInput;
        }
        slice::from_raw_parts_mut(out, n).copy_from_slice(&s.positions);
        LlStatus::Ok
    })
}

/// Total force on each scatterer, summed over modes.
///
/// # Safety
/// `out` must point to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ll_system_forces(system: *const LlSystem, out: *mut f64, n: usize) -> LlStatus {
    guarded(|| {
        let Some(s) = system.as_ref() else { return null("system") };
        if out.is_null() {
            return null("out");
        }
        if n != s.positions.len() {
            set_error(format!("expected room for {} forces, got {n}", s.positions.len()));
            return LlStatus::InvalidInput;
        }
        match s.system().and_then(|sys| sys.forces(&s.positions)) {
            Ok(f) => {
                slice::from_raw_parts_mut(out, n).copy_from_slice(&f);
                LlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Reflection and transmission amplitudes `[re, im]` of mode `mode` for light from the left.
///
/// # Safety
/// `r` and `t` must each point to two writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ll_system_reflection_transmission(
    system: *const LlSystem,
    mode: usize,
    r: *mut f64,
    t: *mut f64,
) -> LlStatus {
    guarded(|| {
        let Some(s) = system.as_ref() else { return null("system") };
        if r.is_null() || t.is_null() {
            return null("output");
        }
        let Some(m) = s.modes.get(mode) else {
            set_error(format!("mode index {mode} out of range"));
            return LlStatus::InvalidInput;
        };
        let res = s.system().and_then(|sys| sys.chain(&s.positions)).and_then(|c| reflection_transmission(&c, m));
        match res {
            Ok(sc) => {
                slice::from_raw_parts_mut(r, 2).copy_from_slice(&[sc.r.re, sc.r.im]);
                slice::from_raw_parts_mut(t, 2).copy_from_slice(&[sc.t.re, sc.t.im]);
                LlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Total intensity of all modes at the `m` points `xs`.
///
/// # Safety
/// `xs` must point to `m` readable and `out` to `m` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ll_system_intensity(
    system: *const LlSystem,
    xs: *const f64,
    out: *mut f64,
    m: usize,
) -> LlStatus {
    guarded(|| {
        let Some(s) = system.as_ref() else { return null("system") };
        if xs.is_null() || out.is_null() {
            return null("buffer");
        }
        let xs = slice::from_raw_parts(xs, m);
        let res = s.system().and_then(|sys| sys.chain(&s.positions)).and_then(|c| solve_fields(&c, &s.modes));
        match res {
            Ok(sol) => {
                let out = slice::from_raw_parts_mut(out, m);
                for (o, p) in out.iter_mut().zip(intensity_profile(&sol, xs)) {
                    *o = p.total;
                }
                LlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Moves the chain to a nearby stationary configuration. With `relative`
/// nonzero only the gaps are required to be stationary. The final residual
/// is written to `residual` when it is not null.
///
/// # Safety
/// `system` must be a live handle; `residual` may be null.
#[no_mangle]
pub unsafe extern "C" fn ll_system_relax(system: *mut LlSystem, relative: i32, residual: *mut f64) -> LlStatus {
    guarded(|| {
        let Some(s) = system.as_mut() else { return null("system") };
        let res = s.system().and_then(|sys| find_equilibrium(&sys, &s.positions, relative != 0));
        match res {
            Ok(r) => {
                if let Some(out) = residual.as_mut() {
                    *out = r.residual;
                }
                s.positions = r.positions;
                LlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Self-consistent lattice constant `k d` of a standing-wave lattice.
///
/// # Safety
/// `out` must point to one writable double.
#[no_mangle]
pub unsafe extern "C" fn ll_lattice_constant(zeta: f64, asymmetry: f64, out: *mut f64) -> LlStatus {
    guarded(|| {
        let Some(out) = out.as_mut() else { return null("out") };
        match lattice_constant(zeta, asymmetry) {
            Ok(v) => {
                *out = v;
                LlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Leading-order forces on a pair at separation `d` lit by two counter-propagating modes.
///
/// # Safety
/// `f1` and `f2` must each point to one writable double.
#[no_mangle]
pub unsafe extern "C" fn ll_pair_forces_approx(
    d: f64,
    intensity_ratio: f64,
    k_y: f64,
    k_z: f64,
    zeta: f64,
    i_y: f64,
    f1: *mut f64,
    f2: *mut f64,
) -> LlStatus {
    guarded(|| {
        let (Some(f1), Some(f2)) = (f1.as_mut(), f2.as_mut()) else { return null("output") };
        let p = PairForceParams::new(intensity_ratio, k_y, k_z, zeta, i_y);
        if let Err(e) = p.validate() {
            return fail(e);
        }
        (*f1, *f2) = pair_forces_approx(d, &p);
        LlStatus::Ok
    })
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length, 0 when there is none.
///
/// # Safety
/// `buf` must point to `len` writable bytes or be null.
#[no_mangle]
pub unsafe extern "C" fn ll_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let m = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, m);
            *buf.add(m) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ll_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
