//! Runtime diagnostics along trajectories: the Lyapunov functional built
//! from the modulated energy, the discrete energy identity, the boundary
//! smallness margins and a ledger of a-priori norms.
//!
//! All spatial integrals use the trapezoid rule on the shared grid.
//!
//! With `w = v/u`, `E = v²/(2u) + uφ(u)` and
//! `Q = w (E + P(u)) - ε w ν(u) w_x`, smooth solutions satisfy
//! `E_t + Q_x = -ε ν(u) w_x²`, which integrates to
//! `d/dt ∫E + [Q]_{-ℓ}^{ℓ} + ε ∫ ν w_x² = 0`.

use serde::Serialize;

use crate::constitutive::Laws;
use crate::error::{Error, Result};
use crate::evolve::{trapezoid, Evolver, FieldState, LogEvent};
use crate::steady::{BoundaryData, SteadyProfile};

/// Default H3 gate thresholds `(δ1, δ2)`.
pub const DEFAULT_H3_GATE: (f64, f64) = (0.6, 5.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovRecord {
    pub t: f64,
    pub l: f64,
    /// `(L_k - L_{k-1}) / (t_k - t_{k-1})` between logged times.
    pub dl_estimate: f64,
    /// `ε ∫ ν(u) ((v/u)_x)²`.
    pub dissipation: f64,
    /// `-[Q]_{-ℓ}^{ℓ}` for the energy flux `Q`.
    pub boundary_terms: f64,
    pub entropy_residual: f64,
    pub delta1_obs: f64,
    pub delta2_obs: f64,
    /// `‖(u, v) - (ū, v̄)‖_{L²}`.
    pub l2_distance: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct NormLedger {
    pub t: f64,
    pub sqrt_rho_w_l2: f64,
    pub rho_lgamma: f64,
    pub wx_l2_timeintegral: f64,
    pub rho_linf: f64,
    pub rho_x_l2: f64,
    pub wx_linf: f64,
    pub sqrt_rho_wt_l2_timeintegral: f64,
}

fn same_grid(s: &FieldState, p: &SteadyProfile) -> Result<()> {
    s.check_shape()?;
    if s.grid.len() != p.grid.len() || s.grid.iter().zip(&p.grid).any(|(a, b)| (a - b).abs() > 1e-12) {
        return Err(Error::Usage(format!(
            "state grid ({} nodes) does not match the steady profile grid ({} nodes)",
            s.grid.len(),
            p.grid.len()
        )));
    }
    Ok(())
}

/// `L = ∫ (v - v̄)²/(2u) + u ψ(u, ū)`.
pub fn modulated_energy(s: &FieldState, p: &SteadyProfile, laws: &Laws) -> Result<f64> {
    same_grid(s, p)?;
    let mut density = Vec::with_capacity(s.u.len());
    for i in 0..s.u.len() {
        let (u, dv) = (s.u[i], s.v[i] - p.v_bar);
        density.push(dv * dv / (2.0 * u) + u * laws.relative_potential(u, p.u_bar[i])?);
    }
    Ok(trapezoid(&density, s.dx()))
}

/// `‖(u, v) - (ū, v̄)‖_{L²}`.
pub fn l2_distance(s: &FieldState, p: &SteadyProfile) -> Result<f64> {
    same_grid(s, p)?;
    let sq: Vec<f64> = (0..s.u.len())
        .map(|i| (s.u[i] - p.u_bar[i]).powi(2) + (s.v[i] - p.v_bar).powi(2))
        .collect();
    Ok(trapezoid(&sq, s.dx()).sqrt())
}

/// Second-order derivative on the grid: central inside, one-sided at ends.
pub fn grid_derivative(values: &[f64], dx: f64) -> Vec<f64> {
    let n = values.len() - 1;
    let mut d = vec![0.0; n + 1];
    d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dx);
    d[n] = (3.0 * values[n] - 4.0 * values[n - 1] + values[n - 2]) / (2.0 * dx);
    for i in 1..n {
        d[i] = (values[i + 1] - values[i - 1]) / (2.0 * dx);
    }
    d
}

fn velocity(s: &FieldState) -> Vec<f64> {
    s.v.iter().zip(&s.u).map(|(v, u)| v / u).collect()
}

/// `∫ E` with `E = v²/(2u) + uφ(u)`.
pub fn total_energy(s: &FieldState, laws: &Laws) -> Result<f64> {
    let mut e = Vec::with_capacity(s.u.len());
    for (&u, &v) in s.u.iter().zip(&s.v) {
        e.push(v * v / (2.0 * u) + u * laws.pressure_potential(u)?);
    }
    Ok(trapezoid(&e, s.dx()))
}

/// `ε ∫ ν(u) ((v/u)_x)²`.
pub fn dissipation(s: &FieldState, epsilon: f64, laws: &Laws) -> f64 {
    let wx = grid_derivative(&velocity(s), s.dx());
    let integrand: Vec<f64> =
        s.u.iter()
            .zip(&wx)
            .map(|(&u, &d)| laws.viscosity.value(u) * d * d)
            .collect();
    epsilon * trapezoid(&integrand, s.dx())
}

/// `[Q]_{-ℓ}^{ℓ}` for `Q = w(E + P) - ε w ν w_x`.
pub fn boundary_flux(s: &FieldState, epsilon: f64, laws: &Laws) -> Result<f64> {
    let w = velocity(s);
    let dx = s.dx();
    let n = s.n();
    let q = |i: usize, wx: f64| -> Result<f64> {
        let u = s.u[i];
        let e = s.v[i] * s.v[i] / (2.0 * u) + u * laws.pressure_potential(u)?;
        Ok(w[i] * (e + laws.pressure.value(u)) - epsilon * w[i] * laws.viscosity.value(u) * wx)
    };
    let wx_left = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * dx);
    let wx_right = (3.0 * w[n] - 4.0 * w[n - 1] + w[n - 2]) / (2.0 * dx);
    Ok(q(n, wx_right)? - q(0, wx_left)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBalance {
    pub d_energy_dt: f64,
    pub boundary_flux: f64,
    pub dissipation: f64,
    /// `d/dt ∫E + [Q] + ε∫νw_x²`, boundary flux and dissipation averaged
    /// over the two time levels.
    pub residual: f64,
}

/// Discrete residual of the energy identity between two states.
pub fn entropy_identity_residual(
    s: &FieldState,
    next: &FieldState,
    epsilon: f64,
    laws: &Laws,
) -> Result<EnergyBalance> {
    let dt = next.t - s.t;
    if !(dt > 0.0) {
        return Err(Error::Usage(format!(
            "states are not in time order (t = {}, {})",
            s.t, next.t
        )));
    }
    let d_energy_dt = (total_energy(next, laws)? - total_energy(s, laws)?) / dt;
    let boundary = 0.5 * (boundary_flux(s, epsilon, laws)? + boundary_flux(next, epsilon, laws)?);
    let diss = 0.5 * (dissipation(s, epsilon, laws) + dissipation(next, epsilon, laws));
    Ok(EnergyBalance {
        d_energy_dt,
        boundary_flux: boundary,
        dissipation: diss,
        residual: d_energy_dt + boundary + diss,
    })
}

/// `(|u+ - u-|, |u_x(ℓ) - u_x(-ℓ)|)` with one-sided second-order slopes.
pub fn h3_margins(s: &FieldState, b: &BoundaryData) -> (f64, f64) {
    let d = grid_derivative(&s.u, s.dx());
    ((b.u_plus - b.u_minus).abs(), (d[s.n()] - d[0]).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DecayVerdict {
    Pass,
    Fail { index: usize, t: f64, increase: f64 },
    NotApplicable { reason: String },
}

impl DecayVerdict {
    pub fn label(&self) -> String {
        match self {
            DecayVerdict::Pass => "pass".into(),
            DecayVerdict::Fail { t, increase, .. } => format!("fail (L increased by {increase:e} at t = {t})"),
            DecayVerdict::NotApplicable { reason } => format!("not applicable ({reason})"),
        }
    }
}

/// Passes iff `L_{k+1} ≤ L_k + tol · max(L_0, 1)` for every logged `k`.
/// Reported as not applicable when the observed margins exceed `gate`.
pub fn lyapunov_decay_check(series: &[LyapunovRecord], tol: f64, gate: (f64, f64)) -> DecayVerdict {
    let Some(first) = series.first() else {
        return DecayVerdict::NotApplicable {
            reason: "empty series".into(),
        };
    };
    let d1 = series.iter().map(|r| r.delta1_obs).fold(0.0, f64::max);
    let d2 = series.iter().map(|r| r.delta2_obs).fold(0.0, f64::max);
    if d1 >= gate.0 || d2 >= gate.1 {
        return DecayVerdict::NotApplicable {
            reason: format!(
                "H3 unmet: observed margins ({d1}, {d2}) vs thresholds ({}, {})",
                gate.0, gate.1
            ),
        };
    }
    decay_with_floor(series, tol * first.l.max(1.0))
}

/// Same test with an explicit absolute slack.
pub fn decay_with_floor(series: &[LyapunovRecord], slack: f64) -> DecayVerdict {
    for (k, w) in series.windows(2).enumerate() {
        if w[1].l > w[0].l + slack {
            return DecayVerdict::Fail {
                index: k + 1,
                t: w[1].t,
                increase: w[1].l - w[0].l,
            };
        }
    }
    DecayVerdict::Pass
}

impl NormLedger {
    /// Updates every entry at a logged time; `elapsed` is the time since the
    /// previous update and weights the running integrals (rectangle rule).
    pub fn update(&mut self, s: &FieldState, elapsed: f64, evolver: &Evolver) -> Result<()> {
        let laws = &evolver.laws;
        let dx = s.dx();
        let w = velocity(s);
        let wx = grid_derivative(&w, dx);
        let ux = grid_derivative(&s.u, dx);
        let gamma = laws.ledger_exponent();
        let (du, dv) = evolver.spatial_rhs(s)?;
        let mut kinetic = Vec::with_capacity(w.len());
        let mut power = Vec::with_capacity(w.len());
        let mut wt_sq = Vec::with_capacity(w.len());
        for i in 0..w.len() {
            let u = s.u[i];
            kinetic.push(u * w[i] * w[i]);
            power.push(u.powf(gamma));
            let wt = (dv[i] - w[i] * du[i]) / u;
            wt_sq.push(u * wt * wt);
        }
        let wx_sq: Vec<f64> = wx.iter().map(|d| d * d).collect();
        let ux_sq: Vec<f64> = ux.iter().map(|d| d * d).collect();
        self.t = s.t;
        self.sqrt_rho_w_l2 = trapezoid(&kinetic, dx).sqrt();
        self.rho_lgamma = trapezoid(&power, dx).powf(1.0 / gamma);
        self.rho_linf = s.u.iter().cloned().fold(f64::MIN, f64::max);
        self.rho_x_l2 = trapezoid(&ux_sq, dx).sqrt();
        self.wx_linf = wx.iter().map(|d| d.abs()).fold(0.0, f64::max);
        self.wx_l2_timeintegral += elapsed * trapezoid(&wx_sq, dx);
        self.sqrt_rho_wt_l2_timeintegral += elapsed * trapezoid(&wt_sq, dx);
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        [
            self.sqrt_rho_w_l2,
            self.rho_lgamma,
            self.wx_l2_timeintegral,
            self.rho_linf,
            self.rho_x_l2,
            self.wx_linf,
            self.sqrt_rho_wt_l2_timeintegral,
        ]
        .iter()
        .all(|x| x.is_finite())
    }
}

/// Column order of `diagnostics.csv`.
pub const CSV_COLUMNS: [&str; 16] = [
    "t",
    "L",
    "dL_estimate",
    "dissipation",
    "entropy_residual",
    "delta1_obs",
    "delta2_obs",
    "sqrt_rho_w_L2",
    "rho_Lgamma",
    "wx_L2_timeintegral",
    "rho_Linf",
    "rho_x_L2",
    "wx_Linf",
    "sqrt_rho_wt_L2_timeintegral",
    "boundary_terms",
    "l2_distance",
];

/// Time series collected by [`DiagnosticRecorder`].
#[derive(Debug, Clone, Default, Serialize)]
pub struct DiagnosticSeries {
    pub records: Vec<LyapunovRecord>,
    pub ledgers: Vec<NormLedger>,
    pub min_density: Vec<f64>,
}

impl DiagnosticSeries {
    pub fn rows(&self) -> Vec<[f64; 16]> {
        self.records
            .iter()
            .zip(&self.ledgers)
            .map(|(r, n)| {
                [
                    r.t,
                    r.l,
                    r.dl_estimate,
                    r.dissipation,
                    r.entropy_residual,
                    r.delta1_obs,
                    r.delta2_obs,
                    n.sqrt_rho_w_l2,
                    n.rho_lgamma,
                    n.wx_l2_timeintegral,
                    n.rho_linf,
                    n.rho_x_l2,
                    n.wx_linf,
                    n.sqrt_rho_wt_l2_timeintegral,
                    r.boundary_terms,
                    r.l2_distance,
                ]
            })
            .collect()
    }

    pub fn max_entropy_residual(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.entropy_residual.abs())
            .filter(|x| x.is_finite())
            .fold(0.0, f64::max)
    }
}

/// Collects one [`LyapunovRecord`] and one [`NormLedger`] per logged time.
pub struct DiagnosticRecorder<'a> {
    pub evolver: &'a Evolver,
    pub steady: &'a SteadyProfile,
    pub series: DiagnosticSeries,
    ledger: NormLedger,
}

impl<'a> DiagnosticRecorder<'a> {
    pub fn new(evolver: &'a Evolver, steady: &'a SteadyProfile) -> Self {
        Self {
            evolver,
            steady,
            series: DiagnosticSeries::default(),
            ledger: NormLedger::default(),
        }
    }

    pub fn observe(&mut self, ev: &LogEvent<'_>) -> Result<()> {
        let s = ev.state;
        let laws = &self.evolver.laws;
        let eps = self.evolver.boundary.epsilon;
        let l = modulated_energy(s, self.steady, laws)?;
        let (dl_estimate, elapsed) = match self.series.records.last() {
            Some(prev) => ((l - prev.l) / (s.t - prev.t), s.t - prev.t),
            None => (0.0, 0.0),
        };
        let entropy_residual = match ev.previous {
            Some(prev) => entropy_identity_residual(prev, s, eps, laws)?.residual,
            None => f64::NAN,
        };
        let (d1, d2) = h3_margins(s, &self.evolver.boundary);
        self.series.records.push(LyapunovRecord {
            t: s.t,
            l,
            dl_estimate,
            dissipation: dissipation(s, eps, laws),
            boundary_terms: -boundary_flux(s, eps, laws)?,
            entropy_residual,
            delta1_obs: d1,
            delta2_obs: d2,
            l2_distance: l2_distance(s, self.steady)?,
        });
        self.ledger.update(s, elapsed, self.evolver)?;
        self.series.ledgers.push(self.ledger);
        self.series
            .min_density
            .push(s.u.iter().cloned().fold(f64::INFINITY, f64::min));
        Ok(())
    }
}
