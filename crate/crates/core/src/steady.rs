//! Stationary connections on `[-ℓ, ℓ]`.
//!
//! With constant momentum `v*`, the stationary momentum equation integrates
//! once to `ε v* ν(u) u_x / u = f(u) = -P(u) u + α u - v*²`. In the variable
//! `w = Φ(u)` this is the autonomous equation `ε v* w_x = g(w)`; the constant
//! `α` is fixed by asking the orbit from `u-` to `u+` to take exactly `2ℓ`.
//!
//! When Φ⁻¹ has no closed form the same integrals and ODE are evaluated in
//! the density variable, which avoids nesting a root solve inside every
//! integrand evaluation.

use serde::Serialize;

use crate::constitutive::{Laws, ViscosityLaw};
use crate::error::{Error, Result};
use crate::hyperbolic;
use crate::numerics::ode::{self, OdeOptions};
use crate::numerics::quad::{self, QuadOptions};
use crate::numerics::roots;

/// Largest `α` probed when bracketing.
pub const ALPHA_CAP: f64 = 1e12;

/// Quadrature settings for the length functional. The integrand is close to
/// singular near the lower edge of the admissible α range, so the budget is
/// generous.
pub const LENGTH_QUAD: QuadOptions = QuadOptions {
    abs_tol: 1e-15,
    rel_tol: 1e-13,
    max_intervals: 20_000,
};

/// Integration tolerances for the connection profile.
pub const CONNECTION_ODE: OdeOptions = OdeOptions {
    abs_tol: 1e-13,
    rel_tol: 1e-12,
    min_step_fraction: 1e-15,
    max_steps: 5_000_000,
};

/// Interval half-length, viscosity scale and boundary values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryData {
    pub half_length: f64,
    pub epsilon: f64,
    pub u_minus: f64,
    pub u_plus: f64,
    /// Left boundary momentum; the stationary momentum `v*`.
    pub v_minus: f64,
}

impl BoundaryData {
    /// Boundary data with `v-` chosen so the inviscid stationary jump from
    /// `u-` to `u+` is a weak solution.
    pub fn with_jump_momentum(half_length: f64, epsilon: f64, u_minus: f64, u_plus: f64, laws: &Laws) -> Result<Self> {
        let (v_star, _) = hyperbolic::compatible_boundary_data(u_minus, u_plus, laws)?;
        Ok(Self {
            half_length,
            epsilon,
            u_minus,
            u_plus,
            v_minus: v_star,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        for (key, value) in [
            ("half_length", self.half_length),
            ("epsilon", self.epsilon),
            ("u_minus", self.u_minus),
            ("u_plus", self.u_plus),
            ("v_minus", self.v_minus),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                bad.push(format!("{key} must be positive and finite (got {value})"));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Configuration(bad.join("; ")))
        }
    }

    /// Relative deviation of `v-` from the jump-compatible momentum, or
    /// `None` when `u- = u+`.
    pub fn jump_compatibility_gap(&self, laws: &Laws) -> Option<f64> {
        let (v_star, _) = hyperbolic::compatible_boundary_data(self.u_minus, self.u_plus, laws).ok()?;
        Some((self.v_minus - v_star).abs() / v_star)
    }

    pub fn dx(&self, n: usize) -> f64 {
        2.0 * self.half_length / n as f64
    }

    /// `n + 1` uniform nodes with the end points placed exactly.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let dx = self.dx(n);
        (0..=n)
            .map(|i| {
                if i == n {
                    self.half_length
                } else {
                    -self.half_length + i as f64 * dx
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroStructure {
    /// Maximiser of `f`.
    pub u_star: f64,
    pub f_at_ustar: f64,
    pub u1: f64,
    pub u2: f64,
    /// `Φ(u1)`, `Φ(u2)` when Φ is defined.
    pub w1: Option<f64>,
    pub w2: Option<f64>,
    pub exists: bool,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {x}")))
    }
}

/// Maximiser of `f(·; α)`: the root of the strictly decreasing `f'`.
pub fn argmax_f(alpha: f64, laws: &Laws) -> Result<f64> {
    if let Some((k, g)) = laws.pressure.power_form() {
        return Ok((alpha / (k * (g + 1.0))).powf(1.0 / g));
    }
    let hi = roots::grow_until(1.0, 2.0, 64, |u| laws.stationary_f_prime(u, alpha) < 0.0)?;
    roots::brent(|u| laws.stationary_f_prime(u, alpha), 0.0, hi, 1e-15 * hi)
}

/// Maximiser of `f`, its maximum and the two zeros bracketing it.
pub fn zero_structure(alpha: f64, v_star: f64, laws: &Laws) -> Result<ZeroStructure> {
    positive("alpha", alpha)?;
    positive("v_star", v_star)?;
    let u_star = argmax_f(alpha, laws)?;
    let f = |u: f64| laws.stationary_f_unchecked(u, alpha, v_star);
    let f_at_ustar = f(u_star);
    if !(f_at_ustar > 0.0) {
        return Ok(ZeroStructure {
            u_star,
            f_at_ustar,
            u1: f64::NAN,
            u2: f64::NAN,
            w1: None,
            w2: None,
            exists: false,
        });
    }
    let u1 = roots::brent(f, 0.0, u_star, 1e-15 * u_star)?;
    let hi = roots::grow_until(2.0 * u_star, 2.0, 64, |u| f(u) < 0.0)?;
    let u2 = roots::brent(f, u_star, hi, 1e-15 * hi)?;
    Ok(ZeroStructure {
        u_star,
        f_at_ustar,
        u1,
        u2,
        w1: laws.phi_transform(u1).ok(),
        w2: laws.phi_transform(u2).ok(),
        exists: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaPoint {
    pub v_star: f64,
    pub alpha: f64,
    pub in_sigma: bool,
    /// Smallest slack among `P'(u*)u*² - v*²`, `f(u-)`, `f(u+)`.
    pub margin: f64,
    /// `2v*²/w1 - α`: a sufficient-condition refinement reported for
    /// inspection only; it does not enter `in_sigma`.
    pub third_inequality_slack: Option<f64>,
}

/// Whether `(v*, α)` admits two zeros of `g` straddling both transformed
/// boundary densities, i.e. `f(u±) > 0`.
pub fn sigma_membership(v_star: f64, alpha: f64, u_minus: f64, u_plus: f64, laws: &Laws) -> Result<SigmaPoint> {
    positive("u_minus", u_minus)?;
    positive("u_plus", u_plus)?;
    let z = zero_structure(alpha, v_star, laws)?;
    // f(u*) = P'(u*) u*² - v*² because f'(u*) = 0.
    let existence = z.f_at_ustar;
    let left = laws.stationary_f_unchecked(u_minus, alpha, v_star);
    let right = laws.stationary_f_unchecked(u_plus, alpha, v_star);
    let margin = existence.min(left).min(right);
    Ok(SigmaPoint {
        v_star,
        alpha,
        in_sigma: z.exists && left > 0.0 && right > 0.0,
        margin,
        third_inequality_slack: z.w1.map(|w1| 2.0 * v_star * v_star / w1 - alpha),
    })
}

/// Smallest `α` for which `f(·; α)` has positive zeros: the minimum of
/// `v*²/u + P(u)`.
pub fn existence_threshold(v_star: f64, laws: &Laws) -> Result<f64> {
    positive("v_star", v_star)?;
    let vs2 = v_star * v_star;
    let u = if let Some((k, g)) = laws.pressure.power_form() {
        (vs2 / (k * g)).powf(1.0 / (g + 1.0))
    } else {
        let h = |u: f64| u * u * laws.pressure.derivative(u) - vs2;
        let hi = roots::grow_until(1.0, 2.0, 128, |u| h(u) > 0.0)?;
        roots::brent(h, 0.0, hi, 1e-15 * hi)?
    };
    Ok(vs2 / u + laws.pressure.value(u))
}

/// Infimum of the admissible α set for the given boundary densities, by
/// bisection on the membership predicate.
pub fn alpha_bar(v_star: f64, u_minus: f64, u_plus: f64, laws: &Laws) -> Result<f64> {
    let member = |alpha: f64| {
        sigma_membership(v_star, alpha, u_minus, u_plus, laws)
            .map(|p| p.in_sigma)
            .unwrap_or(false)
    };
    let mut lo = existence_threshold(v_star, laws)?;
    let mut hi = roots::grow_until(2.0 * lo.max(1e-300), 2.0, 200, |a| a > ALPHA_CAP || member(a))?;
    if hi > ALPHA_CAP {
        return Err(Error::Solver(format!(
            "no admissible alpha below {ALPHA_CAP:e} for v* = {v_star}, u- = {u_minus}, u+ = {u_plus}"
        )));
    }
    if member(lo) {
        return Ok(lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if member(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Whether Φ and Φ⁻¹ are available in closed form.
fn closed_form_transform(laws: &Laws) -> bool {
    matches!(laws.viscosity, ViscosityLaw::PowerLaw { a, .. } if a > 0.0)
}

/// Length functional with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LengthEstimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// `G(α) = ε v* ∫_{Φ(u-)}^{Φ(u+)} dw / g(w)`, the extent of the orbit from
/// `u-` to `u+`.
pub fn length_g(alpha: f64, v_star: f64, u_minus: f64, u_plus: f64, epsilon: f64, laws: &Laws) -> Result<f64> {
    length_g_estimate(alpha, v_star, u_minus, u_plus, epsilon, laws).map(|e| e.value)
}

pub fn length_g_estimate(
    alpha: f64,
    v_star: f64,
    u_minus: f64,
    u_plus: f64,
    epsilon: f64,
    laws: &Laws,
) -> Result<LengthEstimate> {
    positive("epsilon", epsilon)?;
    let point = sigma_membership(v_star, alpha, u_minus, u_plus, laws)?;
    if !point.in_sigma {
        return Err(Error::Domain(format!(
            "alpha = {alpha} is outside the admissible region for v* = {v_star} (margin {:e})",
            point.margin
        )));
    }
    let scale = epsilon * v_star;
    // Integrate in u with dw = Φ'(u) du, each half referenced to its own
    // endpoint so that f keeps full relative accuracy where it is smallest.
    let mid = 0.5 * (u_minus + u_plus);
    let half = |r: f64, a: f64, b: f64| {
        let f_r = laws.stationary_f_unchecked(r, alpha, v_star);
        quad::integrate(
            |u| scale * laws.phi_transform_derivative(u) / laws.stationary_f_from(u, r, f_r, alpha),
            a,
            b,
            LENGTH_QUAD,
        )
    };
    let (left, right) = (half(u_minus, u_minus, mid), half(u_plus, mid, u_plus));
    let r = quad::QuadResult {
        value: left.value + right.value,
        error: left.error + right.error,
        intervals: left.intervals + right.intervals,
        converged: left.converged && right.converged,
    };
    if !r.value.is_finite() || r.error > 1e-8 * r.value.abs() {
        return Err(Error::Solver(format!(
            "length quadrature at alpha = {alpha} did not converge (estimate {}, error {:e})",
            r.value, r.error
        )));
    }
    Ok(LengthEstimate {
        value: r.value,
        error: r.error,
        intervals: r.intervals,
    })
}

/// Result of the length solve `G(α*) = 2ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaSolution {
    pub alpha_star: f64,
    pub alpha_bar: f64,
    /// `G(α*) - 2ℓ`.
    pub length_residual: f64,
}

fn require_increasing(b: &BoundaryData) -> Result<()> {
    b.validate()?;
    if !(b.u_minus < b.u_plus) {
        return Err(Error::Domain(format!(
            "a positive connection needs u- < u+ (got u- = {}, u+ = {})",
            b.u_minus, b.u_plus
        )));
    }
    Ok(())
}

/// Unique `α*` with `G(α*) = 2ℓ`.
pub fn solve_alpha_star(b: &BoundaryData, laws: &Laws) -> Result<AlphaSolution> {
    require_increasing(b)?;
    let target = 2.0 * b.half_length;
    let v = b.v_minus;
    let g = |alpha: f64| length_g(alpha, v, b.u_minus, b.u_plus, b.epsilon, laws);
    let a_bar = alpha_bar(v, b.u_minus, b.u_plus, laws)?;
    let lo = a_bar * (1.0 + 1e-9);
    let g_lo = g(lo)?;
    if g_lo <= target {
        return Err(Error::Solver(format!(
            "G({lo}) = {g_lo} already below 2l = {target}; interval too long for the available range"
        )));
    }
    let mut hi = 2.0 * a_bar;
    let mut g_hi = g(hi)?;
    while g_hi >= target {
        hi *= 2.0;
        if hi > ALPHA_CAP {
            return Err(Error::Solver(format!(
                "G stays above 2l = {target} up to alpha = {ALPHA_CAP:e} (G range [{g_hi}, {g_lo}])"
            )));
        }
        g_hi = g(hi)?;
    }
    let residual = |alpha: f64| g(alpha).map(|x| x - target).unwrap_or(f64::NAN);
    let alpha_star = roots::brent(residual, lo, hi, 1e-15 * hi)?;
    let length_residual = residual(alpha_star);
    if !(length_residual.abs() <= 1e-9 * b.half_length) {
        return Err(Error::Solver(format!(
            "length solve stalled at alpha = {alpha_star} with residual {length_residual:e}"
        )));
    }
    Ok(AlphaSolution {
        alpha_star,
        alpha_bar: a_bar,
        length_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyProfile {
    pub grid: Vec<f64>,
    pub u_bar: Vec<f64>,
    pub v_bar: f64,
    pub alpha_star: f64,
    pub alpha_bar: f64,
    /// Sup of the per-interval ODE residual, and the terminal mismatch.
    pub residual_inf: f64,
    pub length_residual: f64,
    /// `|ū(ℓ) - u+|` before the last node is set to `u+`.
    pub boundary_mismatch: f64,
}

impl SteadyProfile {
    pub fn n(&self) -> usize {
        self.grid.len() - 1
    }

    pub fn v_bar_nodes(&self) -> Vec<f64> {
        vec![self.v_bar; self.grid.len()]
    }
}

/// Integrates the stationary equation from `u-` at `x = -ℓ` onto the uniform
/// `N + 1` node grid.
pub fn integrate_connection(alpha_star: f64, b: &BoundaryData, n: usize, laws: &Laws) -> Result<SteadyProfile> {
    require_increasing(b)?;
    if n < 16 {
        return Err(Error::Usage(format!("connection grid needs N >= 16, got {n}")));
    }
    let grid = b.grid(n);
    let v = b.v_minus;
    let scale = b.epsilon * v;
    let closed = closed_form_transform(laws);
    let x0 = grid[0];
    let mut u_bar = if closed {
        let w0 = laws.phi_transform(b.u_minus)?;
        let ws = ode::integrate_to_nodes(
            |_, w| laws.g(w.max(0.0), alpha_star, v).unwrap_or(f64::NAN) / scale,
            x0,
            w0,
            &grid[1..],
            CONNECTION_ODE,
        )?;
        let mut us = vec![b.u_minus];
        for w in ws {
            us.push(laws.phi_inverse(w)?);
        }
        us
    } else {
        let us = ode::integrate_to_nodes(
            |_, u| u * laws.stationary_f_unchecked(u, alpha_star, v) / (scale * laws.viscosity.value(u)),
            x0,
            b.u_minus,
            &grid[1..],
            CONNECTION_ODE,
        )?;
        std::iter::once(b.u_minus).chain(us).collect()
    };
    let boundary_mismatch = (u_bar[n] - b.u_plus).abs();
    u_bar[n] = b.u_plus;
    if let Some(i) = (0..n).find(|&i| !(u_bar[i + 1] > u_bar[i])) {
        return Err(Error::Solver(format!(
            "connection profile is not increasing at x = {} (mismatch {boundary_mismatch:e})",
            grid[i]
        )));
    }

    // Per-interval residual: the discrete slope of Φ(ū) against the exact
    // mean slope over the same interval, ε v* ΔΦ / τ, where τ is the exact
    // traversal length of [ū_i, ū_{i+1}].
    let dx = b.dx(n);
    let mut residual_inf = boundary_mismatch;
    for i in 0..n {
        let (ua, ub) = (u_bar[i], u_bar[i + 1]);
        let tau = quad::integrate(
            |u| scale * laws.phi_transform_derivative(u) / laws.stationary_f_unchecked(u, alpha_star, v),
            ua,
            ub,
            LENGTH_QUAD,
        )
        .value;
        let dphi = quad::gauss_legendre10(|u| laws.phi_transform_derivative(u), ua, ub);
        let r = (scale * dphi / dx - scale * dphi / tau).abs();
        residual_inf = residual_inf.max(r);
    }
    Ok(SteadyProfile {
        grid,
        u_bar,
        v_bar: v,
        alpha_star,
        alpha_bar: f64::NAN,
        residual_inf,
        length_residual: f64::NAN,
        boundary_mismatch,
    })
}

/// `solve_alpha_star` followed by `integrate_connection`.
pub fn solve_steady(b: &BoundaryData, n: usize, laws: &Laws) -> Result<SteadyProfile> {
    let sol = solve_alpha_star(b, laws)?;
    let mut profile = integrate_connection(sol.alpha_star, b, n, laws)?;
    profile.alpha_bar = sol.alpha_bar;
    profile.length_residual = sol.length_residual;
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig4() -> (BoundaryData, Laws) {
        let laws = Laws::saint_venant(1.0);
        (
            BoundaryData::with_jump_momentum(1.0, 0.1, 0.5, 1.0, &laws).unwrap(),
            laws,
        )
    }

    #[test]
    fn saint_venant_argmax() {
        let laws = Laws::saint_venant(1.0);
        let z = zero_structure(400.0, 1000f64.sqrt(), &laws).unwrap();
        assert!((z.u_star - (800.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(z.exists);
        assert!(z.u1 > 0.0 && z.u1 < z.u_star && z.u_star < z.u2);
        for u in [z.u1, z.u2] {
            assert!(laws.stationary_f(u, 400.0, 1000f64.sqrt()).unwrap().abs() < 1e-9);
        }
        assert_eq!(z.w1, Some(z.u1));
    }

    #[test]
    fn cardano_threshold() {
        let laws = Laws::saint_venant(1.0);
        let v = 1000f64.sqrt();
        let alpha_c = (27.0 / 8.0 * v.powi(4)).cbrt();
        assert!((existence_threshold(v, &laws).unwrap() - alpha_c).abs() < 1e-10 * alpha_c);
        assert!(!zero_structure(alpha_c * (1.0 - 1e-9), v, &laws).unwrap().exists);
        assert!(zero_structure(alpha_c * (1.0 + 1e-9), v, &laws).unwrap().exists);
    }

    #[test]
    fn alpha_bar_matches_parabola_conditions() {
        let (b, laws) = fig4();
        let v2 = b.v_minus * b.v_minus;
        let oracle = [b.u_minus, b.u_plus]
            .iter()
            .map(|&u| v2 / u + laws.pressure(u).unwrap())
            .fold(f64::MIN, f64::max);
        let ab = alpha_bar(b.v_minus, b.u_minus, b.u_plus, &laws).unwrap();
        assert!((ab - oracle).abs() < 1e-12 * oracle, "{ab} vs {oracle}");
        let d = 1e-6 * ab;
        assert!(
            sigma_membership(b.v_minus, ab + d, b.u_minus, b.u_plus, &laws)
                .unwrap()
                .in_sigma
        );
        assert!(
            !sigma_membership(b.v_minus, ab - d, b.u_minus, b.u_plus, &laws)
                .unwrap()
                .in_sigma
        );
    }

    #[test]
    fn boundary_zero_is_outside_with_zero_margin() {
        let laws = Laws::saint_venant(1.0);
        // f(1) = -½ + α - v*² = 0 for α = 2, v*² = 3/2, while f(1.2) > 0.
        let p = sigma_membership(1.5f64.sqrt(), 2.0, 1.0, 1.2, &laws).unwrap();
        assert!(p.margin.abs() < 1e-14, "{p:?}");
        let strictly = sigma_membership(1.5f64.sqrt(), 2.0 + 1e-9, 1.0, 1.2, &laws).unwrap();
        assert!(strictly.in_sigma);
    }

    #[test]
    fn length_outside_sigma_is_domain_error() {
        let (b, laws) = fig4();
        let r = length_g(0.5, b.v_minus, b.u_minus, b.u_plus, b.epsilon, &laws);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn length_scales_with_epsilon() {
        let (b, laws) = fig4();
        let a = 1.2;
        let g1 = length_g(a, b.v_minus, b.u_minus, b.u_plus, 0.1, &laws).unwrap();
        let g2 = length_g(a, b.v_minus, b.u_minus, b.u_plus, 0.2, &laws).unwrap();
        assert!((g2 - 2.0 * g1).abs() < 1e-12 * g2);
    }

    #[test]
    fn fig4_steady_profile() {
        let (b, laws) = fig4();
        let p = solve_steady(&b, 200, &laws).unwrap();
        assert!(p.length_residual.abs() <= 1e-9);
        assert!(p.boundary_mismatch <= 1e-6, "{}", p.boundary_mismatch);
        assert!(p.residual_inf <= 1e-6, "{}", p.residual_inf);
        assert_eq!(p.u_bar[0], 0.5);
        assert!(p.alpha_star > p.alpha_bar);
    }

    #[test]
    fn decreasing_data_rejected() {
        let laws = Laws::saint_venant(1.0);
        let b = BoundaryData {
            half_length: 1.0,
            epsilon: 0.1,
            u_minus: 1.0,
            u_plus: 0.5,
            v_minus: 0.6,
        };
        assert!(matches!(solve_alpha_star(&b, &laws), Err(Error::Domain(_))));
    }
}
