use std::ffi::{c_char, CStr};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use lightlattice::forcefield::ChainSystem;
use lightlattice::wavecore::Mode;
use lightlattice_ffi::*;
use num_complex::Complex64;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe {
        ll_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn pair() -> *mut LlSystem {
    let s = ll_system_new(2, 0.01, 0.0);
    assert!(!s.is_null());
    unsafe {
        assert_eq!(ll_system_add_mode(s, 1.0, 1.0, 0.0, 0.0, 0.0), LlStatus::Ok);
        assert_eq!(ll_system_add_mode(s, 1.0, 0.0, 1.0, 0.0, 0.0), LlStatus::Ok);
        let x = [0.0, 0.75 * std::f64::consts::PI];
        assert_eq!(ll_system_set_positions(s, x.as_ptr(), 2), LlStatus::Ok);
    }
    s
}

#[test]
fn forces_match_the_library() {
    let s = pair();
    let mut f = [0.0; 2];
    unsafe {
        assert_eq!(ll_system_forces(s, f.as_mut_ptr(), 2), LlStatus::Ok);
        ll_system_free(s);
    }
    let modes = vec![Mode::from_left("y", 1.0, 1.0), Mode::from_right("z", 1.0, 1.0)];
    let sys = ChainSystem::uniform(2, Complex64::new(0.01, 0.0), modes).unwrap();
    let expected = sys.forces(&[0.0, 0.75 * std::f64::consts::PI]).unwrap();
    assert_eq!(f.to_vec(), expected);
}

#[test]
fn scattering_is_unitary_for_lossless_chain() {
    let s = pair();
    let (mut r, mut t) = ([0.0; 2], [0.0; 2]);
    unsafe {
        assert_eq!(ll_system_reflection_transmission(s, 0, r.as_mut_ptr(), t.as_mut_ptr()), LlStatus::Ok);
        assert_eq!(ll_system_reflection_transmission(s, 5, r.as_mut_ptr(), t.as_mut_ptr()), LlStatus::InvalidInput);
        ll_system_free(s);
    }
    let p = r[0] * r[0] + r[1] * r[1] + t[0] * t[0] + t[1] * t[1];
    assert!((p - 1.0).abs() < 1e-12);
}

#[test]
fn intensity_outside_is_constant_for_one_sided_mode() {
    let s = ll_system_new(1, 0.1, 0.0);
    let xs = [2.0, 2.5, 3.0];
    let mut out = [0.0; 3];
    unsafe {
        assert_eq!(ll_system_add_mode(s, 1.0, 1.0, 0.0, 0.0, 0.0), LlStatus::Ok);
        assert_eq!(ll_system_intensity(s, xs.as_ptr(), out.as_mut_ptr(), 3), LlStatus::Ok);
        ll_system_free(s);
    }
    assert!((out[0] - out[1]).abs() < 1e-14 && (out[1] - out[2]).abs() < 1e-14);
}

#[test]
fn relax_finds_pair_equilibrium() {
    let s = pair();
    let mut res = f64::NAN;
    let mut x = [0.0; 2];
    unsafe {
        assert_eq!(ll_system_relax(s, 1, &mut res), LlStatus::Ok);
        assert_eq!(ll_system_positions(s, x.as_mut_ptr(), 2), LlStatus::Ok);
        ll_system_free(s);
    }
    assert!(res < 1e-10);
    assert!(((x[1] - x[0]) - 0.75 * std::f64::consts::PI).abs() < 0.02);
}

#[test]
fn errors_carry_status_and_message() {
    let s = pair();
    let bad = [1.0, 0.5];
    unsafe {
        assert_eq!(ll_system_set_positions(s, bad.as_ptr(), 2), LlStatus::InvalidInput);
        assert!(last_error().contains("increasing"), "{}", last_error());
        assert_eq!(ll_system_set_positions(s, bad.as_ptr(), 3), LlStatus::InvalidInput);
        assert_eq!(ll_system_add_mode(s, -1.0, 1.0, 0.0, 0.0, 0.0), LlStatus::InvalidInput);
        assert_eq!(ll_system_forces(ptr::null(), ptr::null_mut(), 0), LlStatus::NullPointer);
        assert_eq!(ll_system_forces(s, ptr::null_mut(), 2), LlStatus::NullPointer);
        ll_system_free(s);
        ll_system_free(ptr::null_mut());
    }
    assert!(ll_system_new(2, 0.1, -0.1).is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { ll_system_len(ptr::null()) }, 0);
}

#[test]
fn success_clears_the_last_error() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(ll_lattice_constant(1.0, 3.0, &mut v), LlStatus::Numerical);
        assert!(ll_last_error_message(ptr::null_mut(), 0) > 0);
        assert_eq!(ll_lattice_constant(0.0, 0.0, &mut v), LlStatus::Ok);
        assert_eq!(ll_last_error_message(ptr::null_mut(), 0), 0);
    }
    assert!((v - std::f64::consts::PI).abs() < 1e-15);
}

#[test]
fn pair_approximation_vanishes_at_symmetric_zeros() {
    let (mut f1, mut f2) = (1.0, 1.0);
    let d = 0.75 * std::f64::consts::PI;
    unsafe {
        assert_eq!(ll_pair_forces_approx(d, 1.0, 1.0, 1.0, 0.01, 1.0, &mut f1, &mut f2), LlStatus::Ok);
    }
    assert!(f1.abs() < 1e-15 && f2.abs() < 1e-15);
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(ll_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/lightlattice.h")
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(header()).unwrap();
    for name in [
        "ll_system_new",
        "ll_system_free",
        "ll_system_add_mode",
        "ll_system_set_positions",
        "ll_system_positions",
        "ll_system_forces",
        "ll_system_reflection_transmission",
        "ll_system_intensity",
        "ll_system_relax",
        "ll_lattice_constant",
        "ll_pair_forces_approx",
        "ll_last_error_message",
        "ll_version",
        "LL_STATUS_OK",
        "typedef struct LlSystem LlSystem",
    ] {
        assert!(h.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"]).arg(header()).output()
    else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
