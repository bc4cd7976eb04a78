//! Adaptive Dormand–Prince 5(4) integrator for scalar ODEs.
//!
//! Steps are clipped so that every requested output abscissa is hit exactly;
//! the step-size controller keeps its own proposal across clipped steps so a
//! dense output grid does not throttle the integration.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Smallest admissible |h| relative to the total span.
    pub min_step_fraction: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            min_step_fraction: 1e-14,
            max_steps: 2_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(x, y)` from `(x0, y0)` and returns `y` at every entry of
/// `nodes`. The nodes must be monotone in the direction of integration and
/// must not lie behind `x0`; integration may run backwards.
pub fn integrate_to_nodes<F: Fn(f64, f64) -> f64>(
    f: F,
    x0: f64,
    y0: f64,
    nodes: &[f64],
    opts: OdeOptions,
) -> Result<Vec<f64>> {
    let Some(&x_end) = nodes.last() else {
        return Ok(Vec::new());
    };
    let span = (x_end - x0).abs();
    let dir = if x_end >= x0 { 1.0 } else { -1.0 };
    if nodes.iter().any(|&xn| (xn - x0) * dir < 0.0) {
        return Err(Error::Usage("output node lies behind the initial abscissa".into()));
    }
    let h_min = opts.min_step_fraction * span.max(1.0);
    let mut out = Vec::with_capacity(nodes.len());
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, y);
    let mut h = dir * (1e-3 * span).max(h_min);
    let mut steps = 0usize;
    for &target in nodes {
        while (target - x) * dir > 0.0 {
            if steps >= opts.max_steps {
                return Err(Error::Solver(format!("ODE step budget exhausted at x = {x}")));
            }
            let remaining = target - x;
            let clipped = remaining.abs() <= h.abs();
            let h_try = if clipped { remaining } else { h };
            let k2 = f(x + C2 * h_try, y + h_try * A21 * k1);
            let k3 = f(x + C3 * h_try, y + h_try * (A31 * k1 + A32 * k2));
            let k4 = f(x + C4 * h_try, y + h_try * (A41 * k1 + A42 * k2 + A43 * k3));
            let k5 = f(x + C5 * h_try, y + h_try * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
            let k6 = f(
                x + h_try,
                y + h_try * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
            );
            let y_new = y + h_try * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
            let k7 = f(x + h_try, y_new);
            let err_abs = (h_try * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)).abs();
            let scale = opts.abs_tol + opts.rel_tol * y.abs().max(y_new.abs());
            let err = err_abs / scale;
            steps += 1;
            if !err.is_finite() {
                h *= 0.2;
                if h.abs() < h_min {
                    return Err(Error::Solver(format!("ODE right-hand side not finite near x = {x}")));
                }
                continue;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                x = if clipped { target } else { x + h_try };
                y = y_new;
                k1 = k7;
                // Only a full, unclipped step is evidence for growing h.
                if !clipped {
                    h = h_try * factor;
                } else if factor < 1.0 {
                    h *= factor;
                }
            } else {
                h = h_try * factor;
                if h.abs() < h_min {
                    return Err(Error::Solver(format!(
                        "ODE step size underflow at x = {x} (h = {:e})",
                        h.abs()
                    )));
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// Classical fixed-step RK4 for a scalar ODE; returns the terminal value.
pub fn rk4_fixed<F: Fn(f64, f64) -> f64>(f: F, x0: f64, y0: f64, x1: f64, steps: usize) -> f64 {
    let h = (x1 - x0) / steps as f64;
    let mut y = y0;
    for i in 0..steps {
        let x = x0 + i as f64 * h;
        let k1 = f(x, y);
        let k2 = f(x + 0.5 * h, y + 0.5 * h * k1);
        let k3 = f(x + 0.5 * h, y + 0.5 * h * k2);
        let k4 = f(x + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    y
}
