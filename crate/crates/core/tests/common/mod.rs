#![allow(dead_code)]

use std::f64::consts::PI;

use barotropic_ns::evolve::{Evolver, FieldState, SchemeConfig};
use barotropic_ns::steady::BoundaryData;
use barotropic_ns::Laws;

pub const HALF_LENGTH: f64 = 1.0;
pub const EPSILON: f64 = 0.1;
pub const U_MINUS: f64 = 0.5;
pub const U_PLUS: f64 = 1.0;

pub fn fig4_laws() -> Laws {
    Laws::saint_venant(1.0)
}

/// `v*² = ½ u- u+ (u- + u+)`, the jump-compatible momentum for `P = u²/2`.
pub fn fig4_v_star() -> f64 {
    (0.5 * U_MINUS * U_PLUS * (U_MINUS + U_PLUS)).sqrt()
}

pub fn fig4_boundary() -> BoundaryData {
    BoundaryData {
        half_length: HALF_LENGTH,
        epsilon: EPSILON,
        u_minus: U_MINUS,
        u_plus: U_PLUS,
        v_minus: fig4_v_star(),
    }
}

pub fn fig4_evolver(scheme: SchemeConfig) -> Evolver {
    Evolver::new(fig4_laws(), fig4_boundary(), scheme).unwrap()
}

/// Fixed-step RK4 for `u' = rhs(u)` from `x = -ℓ` to `x = ℓ`; returns `u(ℓ)`
/// or `None` if the trajectory leaves `(0, ∞)`.
pub fn shoot(rhs: &dyn Fn(f64) -> f64, u0: f64, half_length: f64, steps: usize) -> Option<f64> {
    let h = 2.0 * half_length / steps as f64;
    let mut u = u0;
    for _ in 0..steps {
        let k1 = rhs(u);
        let k2 = rhs(u + 0.5 * h * k1);
        let k3 = rhs(u + 0.5 * h * k2);
        let k4 = rhs(u + h * k3);
        u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !(u.is_finite() && u > 0.0) {
            return None;
        }
    }
    Some(u)
}

/// Independent shooting solve for `α*`: integrate `ε v* ν(u)/u · u_x = f(u)`
/// with `f(u) = -P(u) u + αu - v*²` from `u-` and bisect on `u(ℓ) = u+`.
pub fn shooting_alpha_star(
    pressure: &dyn Fn(f64) -> f64,
    viscosity: &dyn Fn(f64) -> f64,
    b: &BoundaryData,
    alpha_lo: f64,
    alpha_hi: f64,
    steps: usize,
) -> f64 {
    let vs = b.v_minus;
    let miss = |alpha: f64| {
        let rhs = |u: f64| u * (-pressure(u) * u + alpha * u - vs * vs) / (b.epsilon * vs * viscosity(u));
        shoot(&rhs, b.u_minus, b.half_length, steps).unwrap_or(0.0) - b.u_plus
    };
    let (mut lo, mut hi) = (alpha_lo, alpha_hi);
    assert!(
        miss(lo) < 0.0 && miss(hi) > 0.0,
        "shooting bracket does not straddle the target"
    );
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if miss(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Manufactured state `u = 2 + sin πx`, `v = 3/2 + cos πx` and the exact
/// right-hand side of the continuous system for `P = u²/2`, `ν = u`.
pub struct Manufactured {
    pub epsilon: f64,
}

impl Manufactured {
    pub fn boundary(&self) -> BoundaryData {
        BoundaryData {
            half_length: 1.0,
            epsilon: self.epsilon,
            u_minus: 2.0,
            u_plus: 2.0,
            v_minus: 0.5,
        }
    }

    pub fn state(&self, grid: &[f64]) -> FieldState {
        FieldState {
            u: grid.iter().map(|x| 2.0 + (PI * x).sin()).collect(),
            v: grid.iter().map(|x| 1.5 + (PI * x).cos()).collect(),
            grid: grid.to_vec(),
            t: 0.0,
        }
    }

    /// `(u_t, v_t)` at `x`: `u_t = -v_x`,
    /// `v_t = -(v²/u + u²/2)_x + ε (u (v/u)_x)_x`.
    pub fn exact_rhs(&self, x: f64) -> (f64, f64) {
        let (u, ux, uxx) = (2.0 + (PI * x).sin(), PI * (PI * x).cos(), -PI * PI * (PI * x).sin());
        let (v, vx, vxx) = (1.5 + (PI * x).cos(), -PI * (PI * x).sin(), -PI * PI * (PI * x).cos());
        let momentum_flux_x = 2.0 * v * vx / u - v * v * ux / (u * u) + u * ux;
        // (u (v/u)_x)_x = (v_x - v u_x / u)_x
        let viscous = vxx - (vx * ux + v * uxx) / u + v * ux * ux / (u * u);
        (-vx, -momentum_flux_x + self.epsilon * viscous)
    }

    /// Sup over interior nodes of the semi-discrete truncation error.
    pub fn truncation_error(&self, n: usize) -> f64 {
        let e = Evolver::new(
            Laws::saint_venant(1.0),
            self.boundary(),
            SchemeConfig {
                n,
                ..SchemeConfig::default()
            },
        )
        .unwrap();
        let grid = e.grid();
        let (du, dv) = e.spatial_rhs(&self.state(&grid)).unwrap();
        (1..n)
            .map(|i| {
                let (eu, ev) = self.exact_rhs(grid[i]);
                (du[i] - eu).abs().max((dv[i] - ev).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Observed orders `log2(e_k / e_{k+1})` for a sequence of halvings.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

pub fn sup_diff(a: &FieldState, b: &FieldState) -> f64 {
    a.u.iter()
        .zip(&b.u)
        .chain(a.v.iter().zip(&b.v))
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

/// Richardson estimate of the temporal order of `step_with_dt` on a fixed
/// grid: `steps` steps of `dt`, `2 steps` of `dt/2`, `4 steps` of `dt/4`.
pub fn time_order(e: &Evolver, s0: &FieldState, dt: f64, steps: usize) -> (f64, f64, f64) {
    let run = |k: usize| {
        let mut s = s0.clone();
        for _ in 0..steps * k {
            s = e.step_with_dt(&s, dt / k as f64).unwrap();
        }
        s
    };
    let (a, b, c) = (run(1), run(2), run(4));
    let (d1, d2) = (sup_diff(&a, &b), sup_diff(&b, &c));
    ((d1 / d2).log2(), d1, d2)
}
