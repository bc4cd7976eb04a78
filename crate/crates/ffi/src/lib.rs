//! C ABI over `barotropic-ns`.
//!
//! Objects cross the boundary as opaque handles created by `bns_*_new` /
//! `bns_solve_*` and released with the matching `bns_*_free`. Every fallible
//! call returns a [`BnsStatus`]; on failure the message is kept per thread
//! and can be read with [`bns_last_error_message`]. Panics never unwind
//! into the caller.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use barotropic_ns::diagnostics::{l2_distance, modulated_energy};
use barotropic_ns::evolve::{Evolver, FieldState, InitialData, RightClosure, SchemeConfig};
use barotropic_ns::hyperbolic::{assess, JumpCandidate};
use barotropic_ns::steady::{alpha_bar, length_g, sigma_membership, solve_steady, BoundaryData, SteadyProfile};
use barotropic_ns::{Error, Laws, PressureLaw, ViscosityLaw};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnsStatus {
    Ok = 0,
    NullPointer = 1,
    /// Unusable laws, parameters or buffer sizes.
    InvalidArgument = 2,
    /// An argument outside the domain of the requested function.
    Domain = 3,
    /// Root finding, quadrature or ODE integration failed.
    Solver = 4,
    /// Density fell below the vacuum floor, or the time step collapsed.
    Breakdown = 5,
    Io = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

/// Opaque constitutive laws.
pub struct BnsLaws(Laws);

/// Opaque stationary profile on a uniform grid.
pub struct BnsProfile(SteadyProfile);

/// Opaque time integrator together with its current state.
pub struct BnsSimulation {
    evolver: Evolver,
    state: FieldState,
}

/// Two-point boundary data on `[-half_length, half_length]`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BnsBoundary {
    pub half_length: f64,
    pub epsilon: f64,
    pub u_minus: f64,
    pub u_plus: f64,
    pub v_minus: f64,
}

/// Discretisation parameters. `right_closure` is 0 for the one-sided
/// Neumann closure and 1 for linear extrapolation.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BnsScheme {
    pub n: usize,
    pub cfl_hyperbolic: f64,
    pub cfl_parabolic: f64,
    pub t_final: f64,
    pub vacuum_floor: f64,
    pub right_closure: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BnsJumpVerdict {
    pub mass_residual: f64,
    pub momentum_residual: f64,
    pub entropy_jump: f64,
    pub admissible: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs were replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BnsStatus {
    match e {
        Error::Configuration(_) | Error::Usage(_) => BnsStatus::InvalidArgument,
        Error::Domain(_) | Error::DegenerateJump(_) | Error::NoRealJump(_) => BnsStatus::Domain,
        Error::Solver(_) => BnsStatus::Solver,
        Error::Vacuum { .. } | Error::Timestep { .. } => BnsStatus::Breakdown,
        Error::Io(_) => BnsStatus::Io,
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

/// Runs `body`, translating errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), Failure>>(body: F) -> BnsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => BnsStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("null pointer passed for `{name}`"));
            BnsStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            BnsStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn get_mut<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(name))
}

unsafe fn put<T>(out: *mut T, value: T, name: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn buffer<'a>(p: *mut f64, len: usize, need: usize, name: &'static str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    if len < need {
        return Err(Error::Usage(format!("buffer `{name}` holds {len} values, {need} required")).into());
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

impl From<BnsBoundary> for BoundaryData {
    fn from(b: BnsBoundary) -> Self {
        BoundaryData {
            half_length: b.half_length,
            epsilon: b.epsilon,
            u_minus: b.u_minus,
            u_plus: b.u_plus,
            v_minus: b.v_minus,
        }
    }
}

impl BnsScheme {
    fn to_scheme(self) -> Result<SchemeConfig, Error> {
        let right_closure = match self.right_closure {
            0 => RightClosure::Neumann,
            1 => RightClosure::Extrapolation,
            other => return Err(Error::Usage(format!("unknown right closure {other}"))),
        };
        Ok(SchemeConfig {
            n: self.n,
            cfl_hyperbolic: self.cfl_hyperbolic,
            cfl_parabolic: self.cfl_parabolic,
            t_final: self.t_final,
            stride: 1,
            vacuum_floor: self.vacuum_floor,
            right_closure,
        })
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bns_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (always
/// NUL-terminated when `len > 0`) and returns the full message length
/// excluding the terminator; 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn bns_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            0
        }
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// `P(u) = κ u^γ`, `ν(u) = c u^a`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bns_laws_new_power(
    kappa: f64,
    gamma: f64,
    c: f64,
    a: f64,
    out: *mut *mut BnsLaws,
) -> BnsStatus {
    guard(|| {
        let laws = Laws::new(PressureLaw::PowerLaw { kappa, gamma }, ViscosityLaw::PowerLaw { c, a })?;
        put(out, Box::into_raw(Box::new(BnsLaws(laws))), "out")
    })
}

/// `P(u) = ½ κ u²`, `ν(u) = c u^a`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bns_laws_new_saint_venant(kappa: f64, c: f64, a: f64, out: *mut *mut BnsLaws) -> BnsStatus {
    guard(|| {
        let laws = Laws::new(PressureLaw::SaintVenant { kappa }, ViscosityLaw::PowerLaw { c, a })?;
        put(out, Box::into_raw(Box::new(BnsLaws(laws))), "out")
    })
}

/// # Safety
/// `laws` must be null or a handle from `bns_laws_new_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bns_laws_free(laws: *mut BnsLaws) {
    if !laws.is_null() {
        drop(Box::from_raw(laws));
    }
}

/// Lower edge `ᾱ` of the admissible `α` range for the given momentum.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn bns_alpha_bar(
    laws: *const BnsLaws,
    v_star: f64,
    u_minus: f64,
    u_plus: f64,
    out: *mut f64,
) -> BnsStatus {
    guard(|| {
        let laws = get(laws, "laws")?;
        put(out, alpha_bar(v_star, u_minus, u_plus, &laws.0)?, "out")
    })
}

/// Membership of `(v*, α)` in the admissible region and its margin.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn bns_sigma_membership(
    laws: *const BnsLaws,
    v_star: f64,
    alpha: f64,
    u_minus: f64,
    u_plus: f64,
    in_sigma: *mut bool,
    margin: *mut f64,
) -> BnsStatus {
    guard(|| {
        let laws = get(laws, "laws")?;
        let p = sigma_membership(v_star, alpha, u_minus, u_plus, &laws.0)?;
        put(in_sigma, p.in_sigma, "in_sigma")?;
        put(margin, p.margin, "margin")
    })
}

/// Length of the orbit from `u-` to `u+` at the given `α`.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn bns_length(
    laws: *const BnsLaws,
    alpha: f64,
    v_star: f64,
    u_minus: f64,
    u_plus: f64,
    epsilon: f64,
    out: *mut f64,
) -> BnsStatus {
    guard(|| {
        let laws = get(laws, "laws")?;
        put(out, length_g(alpha, v_star, u_minus, u_plus, epsilon, &laws.0)?, "out")
    })
}

/// Jump relation residuals and entropy verdict for a discontinuity moving
/// at speed `c`.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn bns_assess_jump(
    laws: *const BnsLaws,
    rho_minus: f64,
    w_minus: f64,
    rho_plus: f64,
    w_plus: f64,
    c: f64,
    out: *mut BnsJumpVerdict,
) -> BnsStatus {
    guard(|| {
        let laws = get(laws, "laws")?;
        let j = JumpCandidate::new(rho_minus, w_minus, rho_plus, w_plus, c)?;
        let v = assess(&j, &laws.0)?;
        let verdict = BnsJumpVerdict {
            mass_residual: v.rh_residuals.0,
            momentum_residual: v.rh_residuals.1,
            entropy_jump: v.entropy_jump,
            admissible: v.admissible,
        };
        put(out, verdict, "out")
    })
}

/// Solves for the stationary connection on `n` uniform intervals.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn bns_solve_steady(
    laws: *const BnsLaws,
    boundary: *const BnsBoundary,
    n: usize,
    out: *mut *mut BnsProfile,
) -> BnsStatus {
    guard(|| {
        let laws = get(laws, "laws")?;
        let b = BoundaryData::from(*get(boundary, "boundary")?);
        let p = solve_steady(&b, n, &laws.0)?;
        put(out, Box::into_raw(Box::new(BnsProfile(p))), "out")
    })
}

/// # Safety
/// `profile` must be null or a handle from `bns_solve_steady` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bns_profile_free(profile: *mut BnsProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Number of grid nodes (`n + 1`), or 0 for a null handle.
///
/// # Safety
/// `profile` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bns_profile_len(profile: *const BnsProfile) -> usize {
    profile.as_ref().map_or(0, |p| p.0.grid.len())
}

/// `α*`, `v̄` and the sup ODE residual of the profile.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn bns_profile_summary(
    profile: *const BnsProfile,
    alpha_star: *mut f64,
    v_bar: *mut f64,
    residual: *mut f64,
) -> BnsStatus {
    guard(|| {
        let p = &get(profile, "profile")?.0;
        put(alpha_star, p.alpha_star, "alpha_star")?;
        put(v_bar, p.v_bar, "v_bar")?;
        put(residual, p.residual_inf, "residual")
    })
}

/// Copies nodes and `ū` into caller buffers of at least
/// `bns_profile_len` values.
///
/// # Safety
/// `x` and `u` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bns_profile_copy(
    profile: *const BnsProfile,
    x: *mut f64,
    u: *mut f64,
    len: usize,
) -> BnsStatus {
    guard(|| {
        let p = &get(profile, "profile")?.0;
        let need = p.grid.len();
        buffer(x, len, need, "x")?.copy_from_slice(&p.grid);
        buffer(u, len, need, "u")?.copy_from_slice(&p.u_bar);
        Ok(())
    })
}

/// Creates a simulation started from the stationary profile (`profile`
/// non-null) or from the tanh front centred at `a` with steepness `b`
/// (`profile` null).
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn bns_simulation_new(
    laws: *const BnsLaws,
    boundary: *const BnsBoundary,
    scheme: *const BnsScheme,
    profile: *const BnsProfile,
    tanh_a: f64,
    tanh_b: f64,
    out: *mut *mut BnsSimulation,
) -> BnsStatus {
    guard(|| {
        let laws = get(laws, "laws")?;
        let b = BoundaryData::from(*get(boundary, "boundary")?);
        let scheme = get(scheme, "scheme")?.to_scheme()?;
        let evolver = Evolver::new(laws.0.clone(), b, scheme)?;
        let state = match profile.as_ref() {
            Some(p) => evolver.initial_state(&InitialData::Steady, Some(&p.0))?,
            None => evolver.initial_state(&InitialData::Tanh { a: tanh_a, b: tanh_b }, None)?,
        };
        put(out, Box::into_raw(Box::new(BnsSimulation { evolver, state })), "out")
    })
}

/// # Safety
/// `sim` must be null or a handle from `bns_simulation_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bns_simulation_free(sim: *mut BnsSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances one CFL-limited step (clipped at the final time) and reports
/// the step taken; a call at the final time is a no-op with `dt = 0`.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn bns_simulation_step(sim: *mut BnsSimulation, dt: *mut f64) -> BnsStatus {
    guard(|| {
        let sim = get_mut(sim, "sim")?;
        if sim.state.t >= sim.evolver.scheme.t_final {
            return put(dt, 0.0, "dt");
        }
        let (next, taken) = sim.evolver.step(&sim.state)?;
        sim.state = next;
        put(dt, taken, "dt")
    })
}

/// Integrates to the final time.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bns_simulation_run(sim: *mut BnsSimulation) -> BnsStatus {
    guard(|| {
        let sim = get_mut(sim, "sim")?;
        while sim.state.t < sim.evolver.scheme.t_final {
            sim.state = sim.evolver.step(&sim.state)?.0;
        }
        Ok(())
    })
}

/// Current time, or NaN for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bns_simulation_time(sim: *const BnsSimulation) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.state.t)
}

/// Copies the current `u` and `v` into buffers of at least `n + 1` values.
///
/// # Safety
/// `u` and `v` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bns_simulation_copy_state(
    sim: *const BnsSimulation,
    u: *mut f64,
    v: *mut f64,
    len: usize,
) -> BnsStatus {
    guard(|| {
        let s = &get(sim, "sim")?.state;
        let need = s.u.len();
        buffer(u, len, need, "u")?.copy_from_slice(&s.u);
        buffer(v, len, need, "v")?.copy_from_slice(&s.v);
        Ok(())
    })
}

/// Modulated energy `L` and `L²` distance of the current state from a
/// profile on the same grid.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn bns_simulation_distance(
    sim: *const BnsSimulation,
    profile: *const BnsProfile,
    energy: *mut f64,
    l2: *mut f64,
) -> BnsStatus {
    guard(|| {
        let sim = get(sim, "sim")?;
        let p = &get(profile, "profile")?.0;
        put(energy, modulated_energy(&sim.state, p, &sim.evolver.laws)?, "energy")?;
        put(l2, l2_distance(&sim.state, p)?, "l2")
    })
}
