use std::ffi::{c_char, CStr};
use std::ptr;

use barotropic_ns_ffi::*;

const FIG4: BnsBoundary = BnsBoundary {
    half_length: 1.0,
    epsilon: 0.1,
    u_minus: 0.5,
    u_plus: 1.0,
    v_minus: 0.612_372_435_695_794_5,
};

fn last_error() -> String {
    let mut buf = [0 as c_char; 512];
    let n = unsafe { bns_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let s = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned();
    assert_eq!(n, s.len());
    s
}

fn saint_venant() -> *mut BnsLaws {
    let mut laws = ptr::null_mut();
    assert_eq!(
        unsafe { bns_laws_new_saint_venant(1.0, 1.0, 1.0, &mut laws) },
        BnsStatus::Ok
    );
    assert!(!laws.is_null());
    laws
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(bns_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn steady_profile_round_trip() {
    let laws = saint_venant();
    let mut profile = ptr::null_mut();
    assert_eq!(
        unsafe { bns_solve_steady(laws, &FIG4, 100, &mut profile) },
        BnsStatus::Ok
    );
    let len = unsafe { bns_profile_len(profile) };
    assert_eq!(len, 101);
    let (mut alpha, mut v_bar, mut residual) = (0.0, 0.0, 0.0);
    assert_eq!(
        unsafe { bns_profile_summary(profile, &mut alpha, &mut v_bar, &mut residual) },
        BnsStatus::Ok
    );
    assert!((alpha - 0.875045353581745).abs() < 1e-10);
    assert_eq!(v_bar, FIG4.v_minus);
    assert!(residual < 1e-6);
    let (mut x, mut u) = (vec![0.0; len], vec![0.0; len]);
    assert_eq!(
        unsafe { bns_profile_copy(profile, x.as_mut_ptr(), u.as_mut_ptr(), len) },
        BnsStatus::Ok
    );
    assert_eq!((x[0], x[100], u[0], u[100]), (-1.0, 1.0, 0.5, 1.0));
    assert!(u.windows(2).all(|w| w[1] > w[0]));

    let mut short = vec![0.0; 10];
    let status = unsafe { bns_profile_copy(profile, short.as_mut_ptr(), short.as_mut_ptr(), 10) };
    assert_eq!(status, BnsStatus::InvalidArgument);
    assert!(last_error().contains("101 required"));
    unsafe {
        bns_profile_free(profile);
        bns_laws_free(laws);
    }
}

#[test]
fn admissible_region_and_length() {
    let laws = saint_venant();
    let mut bar = 0.0;
    assert_eq!(
        unsafe { bns_alpha_bar(laws, FIG4.v_minus, 0.5, 1.0, &mut bar) },
        BnsStatus::Ok
    );
    assert!((bar - 0.875).abs() < 1e-12);
    let (mut inside, mut margin) = (false, 0.0);
    assert_eq!(
        unsafe { bns_sigma_membership(laws, FIG4.v_minus, 1.2, 0.5, 1.0, &mut inside, &mut margin) },
        BnsStatus::Ok
    );
    assert!(inside && margin > 0.0);
    let mut g = 0.0;
    assert_eq!(
        unsafe { bns_length(laws, 0.5, FIG4.v_minus, 0.5, 1.0, 0.1, &mut g) },
        BnsStatus::Domain
    );
    assert!(last_error().contains("outside the admissible region"));
    assert_eq!(
        unsafe { bns_length(laws, 1.2, FIG4.v_minus, 0.5, 1.0, 0.1, &mut g) },
        BnsStatus::Ok
    );
    assert!(g > 0.0 && g.is_finite());
    unsafe { bns_laws_free(laws) };
}

#[test]
fn jump_verdicts() {
    let laws = saint_venant();
    let v = FIG4.v_minus;
    let mut verdict = BnsJumpVerdict::default();
    assert_eq!(
        unsafe { bns_assess_jump(laws, 0.5, v / 0.5, 1.0, v, 0.0, &mut verdict) },
        BnsStatus::Ok
    );
    assert!(verdict.admissible);
    assert!(verdict.mass_residual.abs() < 1e-12 && verdict.momentum_residual.abs() < 1e-12);
    assert_eq!(
        unsafe { bns_assess_jump(laws, 1.0, v, 0.5, v / 0.5, 0.0, &mut verdict) },
        BnsStatus::Ok
    );
    assert!(!verdict.admissible);
    assert_eq!(
        unsafe { bns_assess_jump(laws, -1.0, 0.0, 1.0, 0.0, 0.0, &mut verdict) },
        BnsStatus::Domain
    );
    assert!(last_error().contains("rho_minus"));
    unsafe { bns_laws_free(laws) };
}

#[test]
fn simulation_steps_and_relaxes() {
    let laws = saint_venant();
    let mut profile = ptr::null_mut();
    assert_eq!(
        unsafe { bns_solve_steady(laws, &FIG4, 60, &mut profile) },
        BnsStatus::Ok
    );
    let scheme = BnsScheme {
        n: 60,
        cfl_hyperbolic: 0.5,
        cfl_parabolic: 0.5,
        t_final: 0.5,
        vacuum_floor: 1e-8,
        right_closure: 0,
    };
    let mut sim = ptr::null_mut();
    assert_eq!(
        unsafe { bns_simulation_new(laws, &FIG4, &scheme, ptr::null(), 0.25, 20.0, &mut sim) },
        BnsStatus::Ok
    );
    let (mut l0, mut d0) = (0.0, 0.0);
    assert_eq!(
        unsafe { bns_simulation_distance(sim, profile, &mut l0, &mut d0) },
        BnsStatus::Ok
    );
    let mut dt = 0.0;
    assert_eq!(unsafe { bns_simulation_step(sim, &mut dt) }, BnsStatus::Ok);
    assert!(dt > 0.0 && unsafe { bns_simulation_time(sim) } == dt);
    assert_eq!(unsafe { bns_simulation_run(sim) }, BnsStatus::Ok);
    assert_eq!(unsafe { bns_simulation_time(sim) }, 0.5);
    assert_eq!(unsafe { bns_simulation_step(sim, &mut dt) }, BnsStatus::Ok);
    assert_eq!(dt, 0.0);
    let (mut u, mut v) = (vec![0.0; 61], vec![0.0; 61]);
    assert_eq!(
        unsafe { bns_simulation_copy_state(sim, u.as_mut_ptr(), v.as_mut_ptr(), 61) },
        BnsStatus::Ok
    );
    assert_eq!((u[0], u[60], v[0]), (0.5, 1.0, FIG4.v_minus));
    let (mut l1, mut d1) = (0.0, 0.0);
    assert_eq!(
        unsafe { bns_simulation_distance(sim, profile, &mut l1, &mut d1) },
        BnsStatus::Ok
    );
    assert!(l0 > 0.0 && l1 > 0.0 && l1 < l0);
    unsafe {
        bns_simulation_free(sim);
        bns_profile_free(profile);
        bns_laws_free(laws);
    }
}

#[test]
fn null_and_invalid_arguments_are_reported() {
    let mut laws = ptr::null_mut();
    assert_eq!(
        unsafe { bns_laws_new_power(1.0, 0.5, 1.0, 1.0, &mut laws) },
        BnsStatus::InvalidArgument
    );
    assert!(laws.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(
        unsafe { bns_laws_new_power(1.0, 2.0, 1.0, 1.0, ptr::null_mut()) },
        BnsStatus::NullPointer
    );
    assert!(last_error().contains("`out`"));
    let mut out = 0.0;
    assert_eq!(
        unsafe { bns_alpha_bar(ptr::null(), 1.0, 0.5, 1.0, &mut out) },
        BnsStatus::NullPointer
    );
    assert_eq!(unsafe { bns_profile_len(ptr::null()) }, 0);
    assert!(unsafe { bns_simulation_time(ptr::null()) }.is_nan());
    unsafe {
        bns_laws_free(ptr::null_mut());
        bns_profile_free(ptr::null_mut());
        bns_simulation_free(ptr::null_mut());
    }
    let laws = saint_venant();
    assert_eq!(unsafe { bns_alpha_bar(laws, 1.0, 0.5, 1.0, &mut out) }, BnsStatus::Ok);
    assert_eq!(last_error(), "");
    let scheme = BnsScheme {
        n: 40,
        cfl_hyperbolic: 0.5,
        cfl_parabolic: 0.5,
        t_final: 1.0,
        vacuum_floor: 1e-8,
        right_closure: 9,
    };
    let mut sim = ptr::null_mut();
    let status = unsafe { bns_simulation_new(laws, &FIG4, &scheme, ptr::null(), 0.0, 10.0, &mut sim) };
    assert_eq!(status, BnsStatus::InvalidArgument);
    assert!(sim.is_null());
    unsafe { bns_laws_free(laws) };
}

#[test]
fn errors_are_thread_local() {
    let mut out = 0.0;
    assert_eq!(
        unsafe { bns_alpha_bar(ptr::null(), 1.0, 0.5, 1.0, &mut out) },
        BnsStatus::NullPointer
    );
    let other = std::thread::spawn(last_error).join().unwrap();
    assert_eq!(other, "");
    assert!(!last_error().is_empty());
}
