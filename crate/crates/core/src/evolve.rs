//! Explicit method-of-lines solver for
//!
//! ```text
//! u_t + v_x = 0
//! v_t + (v²/u + P(u))_x = ε (ν(u) (v/u)_x)_x
//! ```
//!
//! on the uniform grid `x_i = -ℓ + iΔx`, `i = 0..=N`, with `u(±ℓ) = u±`,
//! `v(-ℓ) = v-` and the Neumann closure `v_x(ℓ) = 0` at the right end.
//!
//! Convective fluxes are local Lax–Friedrichs: the central node average plus
//! `λ/2` times the jump between centrally reconstructed interface states.
//! That jump is a third difference, so the scheme stays second order on
//! smooth data. The two interfaces next to the boundaries carry no
//! dissipation. The viscous term is in conservation form with arithmetic
//! face viscosities. Time stepping is classical RK4. The right-boundary
//! momentum is re-closed inside every right-hand-side evaluation so
//! intermediate stages see a consistent boundary.

use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constitutive::Laws;
use crate::error::{Error, Result};
use crate::steady::{BoundaryData, SteadyProfile};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldState {
    pub grid: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
}

impl FieldState {
    pub fn n(&self) -> usize {
        self.grid.len() - 1
    }

    pub fn dx(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    pub fn check_shape(&self) -> Result<()> {
        let len = self.grid.len();
        if len < 4 || self.u.len() != len || self.v.len() != len {
            return Err(Error::Usage(format!(
                "field state needs matching grids of at least 4 nodes (grid {}, u {}, v {})",
                len,
                self.u.len(),
                self.v.len()
            )));
        }
        Ok(())
    }
}

/// How the right-boundary momentum is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RightClosure {
    /// Second-order one-sided `v_x(ℓ) = 0`: `v_N = (4 v_{N-1} - v_{N-2}) / 3`.
    Neumann,
    /// Linear extrapolation `v_N = 2 v_{N-1} - v_{N-2}`, kept for comparison.
    Extrapolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    /// Number of grid intervals.
    pub n: usize,
    pub cfl_hyperbolic: f64,
    pub cfl_parabolic: f64,
    pub t_final: f64,
    /// Steps between diagnostic callbacks.
    pub stride: usize,
    pub vacuum_floor: f64,
    pub right_closure: RightClosure,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            n: 200,
            cfl_hyperbolic: 0.5,
            cfl_parabolic: 0.5,
            t_final: 10.0,
            stride: 100,
            vacuum_floor: 1e-8,
            right_closure: RightClosure::Neumann,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.n < 8 {
            bad.push(format!("N must be at least 8 (got {})", self.n));
        }
        for (key, value) in [
            ("cfl_hyperbolic", self.cfl_hyperbolic),
            ("cfl_parabolic", self.cfl_parabolic),
        ] {
            if !(value > 0.0 && value <= 1.0) {
                bad.push(format!("{key} must lie in (0, 1] (got {value})"));
            }
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            bad.push(format!("t_final must be positive (got {})", self.t_final));
        }
        if self.stride == 0 {
            bad.push("stride must be at least 1".into());
        }
        if !(self.vacuum_floor > 0.0) {
            bad.push(format!("vacuum_floor must be positive (got {})", self.vacuum_floor));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Configuration(bad.join("; ")))
        }
    }
}

/// Initial-data presets.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Steady,
    /// `u0 = (u- + u+)/2 + a tanh(b x)`, `v0 ≡ v-`.
    Tanh {
        a: f64,
        b: f64,
    },
    /// Steady profile plus a few random sine modes vanishing at both ends,
    /// scaled by `amplitude` relative to the steady values.
    PerturbedSteady {
        amplitude: f64,
        seed: u64,
    },
    State(FieldState),
}

/// Everything a diagnostic callback sees at a logged time.
pub struct LogEvent<'a> {
    pub step: usize,
    pub state: &'a FieldState,
    /// State one step earlier (absent for the initial log).
    pub previous: Option<&'a FieldState>,
    /// Size of the step from `previous` to `state`.
    pub last_dt: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub final_state: FieldState,
    pub steps: usize,
    pub logs: usize,
    pub wall_seconds: f64,
    pub min_dt: f64,
    pub max_dt: f64,
}

#[derive(Debug, Clone)]
pub struct Evolver {
    pub laws: Laws,
    pub boundary: BoundaryData,
    pub scheme: SchemeConfig,
}

const RK4_C: [f64; 4] = [0.0, 0.5, 0.5, 1.0];

impl Evolver {
    pub fn new(laws: Laws, boundary: BoundaryData, scheme: SchemeConfig) -> Result<Self> {
        boundary.validate()?;
        scheme.validate()?;
        Ok(Self { laws, boundary, scheme })
    }

    pub fn grid(&self) -> Vec<f64> {
        self.boundary.grid(self.scheme.n)
    }

    fn close_right(&self, v: &[f64]) -> f64 {
        let n = v.len() - 1;
        match self.scheme.right_closure {
            RightClosure::Neumann => (4.0 * v[n - 1] - v[n - 2]) / 3.0,
            RightClosure::Extrapolation => 2.0 * v[n - 1] - v[n - 2],
        }
    }

    /// Imposes the boundary values in place.
    pub fn apply_boundaries(&self, s: &mut FieldState) {
        let n = s.n();
        s.u[0] = self.boundary.u_minus;
        s.u[n] = self.boundary.u_plus;
        s.v[0] = self.boundary.v_minus;
        s.v[n] = self.close_right(&s.v);
    }

    fn check_vacuum(&self, grid: &[f64], u: &[f64], t: f64) -> Result<()> {
        for (i, &ui) in u.iter().enumerate() {
            if !(ui >= self.scheme.vacuum_floor) {
                return Err(Error::Vacuum {
                    x: grid[i],
                    t,
                    value: ui,
                    floor: self.scheme.vacuum_floor,
                });
            }
        }
        Ok(())
    }

    fn flux(&self, u: f64, v: f64) -> (f64, f64) {
        (v, v * v / u + self.laws.pressure.value(u))
    }

    /// Semi-discrete right-hand side written into `du`, `dv`. The last entry
    /// of `v` is ignored and replaced by the right closure.
    pub fn rhs_into(&self, grid: &[f64], u: &[f64], v: &[f64], t: f64, du: &mut [f64], dv: &mut [f64]) -> Result<()> {
        self.check_vacuum(grid, u, t)?;
        let n = u.len() - 1;
        let dx = grid[1] - grid[0];
        let eps = self.boundary.epsilon;
        let v_right = self.close_right(v);
        let vv = |i: usize| if i == n { v_right } else { v[i] };

        // Interface fluxes F_{i+1/2}, i = 0..n-1: node-average central part
        // plus a dissipative jump between reconstructed states.
        let mut f_mass = vec![0.0; n];
        let mut f_mom = vec![0.0; n];
        for i in 0..n {
            let (a0, a1) = self.flux(u[i], vv(i));
            let (b0, b1) = self.flux(u[i + 1], vv(i + 1));
            f_mass[i] = 0.5 * (a0 + b0);
            f_mom[i] = 0.5 * (a1 + b1);
            if i > 0 && i < n - 1 {
                // U_R - U_L = -(U_{i+2} - 3U_{i+1} + 3U_i - U_{i-1}) / 4
                let jump_u = -0.25 * (u[i + 2] - 3.0 * u[i + 1] + 3.0 * u[i] - u[i - 1]);
                let jump_v = -0.25 * (vv(i + 2) - 3.0 * vv(i + 1) + 3.0 * vv(i) - vv(i - 1));
                let lambda = self
                    .laws
                    .wave_speed(u[i], vv(i))
                    .max(self.laws.wave_speed(u[i + 1], vv(i + 1)));
                f_mass[i] -= 0.5 * lambda * jump_u;
                f_mom[i] -= 0.5 * lambda * jump_v;
            }
        }

        // Viscous face fluxes ν_{i+1/2} (w_{i+1} - w_i), w = v/u.
        let mut visc = vec![0.0; n];
        for i in 0..n {
            let nu_face = 0.5 * (self.laws.viscosity.value(u[i]) + self.laws.viscosity.value(u[i + 1]));
            visc[i] = nu_face * (vv(i + 1) / u[i + 1] - vv(i) / u[i]);
        }

        du[0] = 0.0;
        dv[0] = 0.0;
        du[n] = 0.0;
        for i in 1..n {
            du[i] = -(f_mass[i] - f_mass[i - 1]) / dx;
            dv[i] = -(f_mom[i] - f_mom[i - 1]) / dx + eps * (visc[i] - visc[i - 1]) / (dx * dx);
        }
        dv[n] = self.close_right(dv);
        Ok(())
    }

    pub fn spatial_rhs(&self, s: &FieldState) -> Result<(Vec<f64>, Vec<f64>)> {
        s.check_shape()?;
        let mut du = vec![0.0; s.u.len()];
        let mut dv = vec![0.0; s.u.len()];
        self.rhs_into(&s.grid, &s.u, &s.v, s.t, &mut du, &mut dv)?;
        Ok((du, dv))
    }

    /// CFL-limited time step for the current state.
    pub fn stable_dt(&self, s: &FieldState) -> f64 {
        let dx = s.dx();
        let mut lambda: f64 = 0.0;
        let mut u_min = f64::INFINITY;
        let mut nu_max: f64 = 0.0;
        for (&u, &v) in s.u.iter().zip(&s.v) {
            lambda = lambda.max(self.laws.wave_speed(u, v));
            u_min = u_min.min(u);
            nu_max = nu_max.max(self.laws.viscosity.value(u));
        }
        let hyperbolic = self.scheme.cfl_hyperbolic * dx / lambda;
        let parabolic = self.scheme.cfl_parabolic * dx * dx * u_min / (self.boundary.epsilon * nu_max);
        hyperbolic.min(parabolic)
    }

    /// One classical RK4 step of size `dt`, followed by the boundary update.
    pub fn step_with_dt(&self, s: &FieldState, dt: f64) -> Result<FieldState> {
        s.check_shape()?;
        let len = s.u.len();
        let mut ku = [vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]];
        let mut kv = [vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]];
        let mut su = s.u.clone();
        let mut sv = s.v.clone();
        for k in 0..4 {
            if k > 0 {
                let h = RK4_C[k] * dt;
                for i in 0..len {
                    su[i] = s.u[i] + h * ku[k - 1][i];
                    sv[i] = s.v[i] + h * kv[k - 1][i];
                }
            }
            let (a, b) = (&mut ku[k], &mut kv[k]);
            self.rhs_into(&s.grid, &su, &sv, s.t + RK4_C[k] * dt, a, b)?;
        }
        let mut next = FieldState {
            grid: s.grid.clone(),
            u: vec![0.0; len],
            v: vec![0.0; len],
            t: s.t + dt,
        };
        for i in 0..len {
            next.u[i] = s.u[i] + dt / 6.0 * (ku[0][i] + 2.0 * ku[1][i] + 2.0 * ku[2][i] + ku[3][i]);
            next.v[i] = s.v[i] + dt / 6.0 * (kv[0][i] + 2.0 * kv[1][i] + 2.0 * kv[2][i] + kv[3][i]);
        }
        self.apply_boundaries(&mut next);
        self.check_vacuum(&next.grid, &next.u, next.t)?;
        Ok(next)
    }

    /// One CFL-limited step, clipped so as not to overshoot `t_final`. A
    /// step that would leave a sliver of less than `1e-9` of itself is
    /// stretched to land on `t_final` exactly.
    pub fn step(&self, s: &FieldState) -> Result<(FieldState, f64)> {
        let remaining = self.scheme.t_final - s.t;
        let stable = self.stable_dt(s);
        if !(stable >= 1e-14 * self.scheme.t_final) {
            return Err(Error::Timestep { t: s.t, dt: stable });
        }
        if remaining <= stable * (1.0 + 1e-9) {
            let mut next = self.step_with_dt(s, remaining)?;
            next.t = self.scheme.t_final;
            return Ok((next, remaining));
        }
        Ok((self.step_with_dt(s, stable)?, stable))
    }

    /// Integrates to `t_final`, calling `observer` on the initial state,
    /// every `stride` steps and on the final state.
    pub fn run<F>(&self, initial: FieldState, mut observer: F) -> Result<RunSummary>
    where
        F: FnMut(&LogEvent<'_>) -> Result<()>,
    {
        initial.check_shape()?;
        if initial.n() != self.scheme.n {
            return Err(Error::Usage(format!(
                "initial state has N = {} but the scheme expects N = {}",
                initial.n(),
                self.scheme.n
            )));
        }
        let clock = Instant::now();
        let mut state = initial;
        self.apply_boundaries(&mut state);
        self.check_vacuum(&state.grid, &state.u, state.t)?;
        observer(&LogEvent {
            step: 0,
            state: &state,
            previous: None,
            last_dt: 0.0,
        })?;
        let mut logs = 1;
        let mut steps = 0;
        let (mut min_dt, mut max_dt) = (f64::INFINITY, 0.0f64);
        while state.t < self.scheme.t_final {
            let (next, dt) = self.step(&state)?;
            steps += 1;
            min_dt = min_dt.min(dt);
            max_dt = max_dt.max(dt);
            let done = next.t >= self.scheme.t_final;
            if steps % self.scheme.stride == 0 || done {
                observer(&LogEvent {
                    step: steps,
                    state: &next,
                    previous: Some(&state),
                    last_dt: dt,
                })?;
                logs += 1;
            }
            state = next;
        }
        Ok(RunSummary {
            final_state: state,
            steps,
            logs,
            wall_seconds: clock.elapsed().as_secs_f64(),
            min_dt,
            max_dt: if steps == 0 { 0.0 } else { max_dt },
        })
    }

    /// Builds the initial state for a preset. `steady` is required for the
    /// steady-based presets and must live on the scheme grid.
    pub fn initial_state(&self, data: &InitialData, steady: Option<&SteadyProfile>) -> Result<FieldState> {
        let grid = self.grid();
        let n = self.scheme.n;
        let b = &self.boundary;
        let need_steady = || -> Result<&SteadyProfile> {
            let p = steady.ok_or_else(|| Error::Usage("this initial-data preset needs a steady profile".into()))?;
            if p.n() != n {
                return Err(Error::Usage(format!(
                    "steady profile has N = {} but the scheme expects {n}",
                    p.n()
                )));
            }
            Ok(p)
        };
        let mut s = match data {
            InitialData::Steady => {
                let p = need_steady()?;
                FieldState {
                    grid,
                    u: p.u_bar.clone(),
                    v: p.v_bar_nodes(),
                    t: 0.0,
                }
            }
            InitialData::Tanh { a, b: k } => {
                let mid = 0.5 * (b.u_minus + b.u_plus);
                FieldState {
                    u: grid.iter().map(|&x| mid + a * (k * x).tanh()).collect(),
                    v: vec![b.v_minus; n + 1],
                    grid,
                    t: 0.0,
                }
            }
            InitialData::PerturbedSteady { amplitude, seed } => {
                let p = need_steady()?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let modes: Vec<(f64, f64)> = (0..4)
                    .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                let l = b.half_length;
                let bump = |x: f64, pick: usize| -> f64 {
                    modes
                        .iter()
                        .enumerate()
                        .map(|(k, m)| {
                            let c = if pick == 0 { m.0 } else { m.1 };
                            c * ((k + 1) as f64 * std::f64::consts::PI * (x + l) / (2.0 * l)).sin() / (k + 1) as f64
                        })
                        .sum()
                };
                FieldState {
                    u: grid
                        .iter()
                        .zip(&p.u_bar)
                        .map(|(&x, &ub)| ub * (1.0 + amplitude * bump(x, 0)))
                        .collect(),
                    v: grid.iter().map(|&x| p.v_bar * (1.0 + amplitude * bump(x, 1))).collect(),
                    grid,
                    t: 0.0,
                }
            }
            InitialData::State(state) => {
                state.check_shape()?;
                if state.n() != n {
                    return Err(Error::Usage(format!(
                        "loaded state has N = {} but the scheme expects {n}",
                        state.n()
                    )));
                }
                let mut s = state.clone();
                s.t = 0.0;
                s
            }
        };
        self.apply_boundaries(&mut s);
        self.check_vacuum(&s.grid, &s.u, 0.0)?;
        Ok(s)
    }
}

/// `(∑ u_i Δx)` by the trapezoid rule.
pub fn total_mass(s: &FieldState) -> f64 {
    trapezoid(&s.u, s.dx())
}

pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    let n = values.len() - 1;
    let inner: f64 = values[1..n].iter().sum();
    dx * (inner + 0.5 * (values[0] + values[n]))
}
