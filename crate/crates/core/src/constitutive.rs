//! Pressure and viscosity laws, and every scalar function derived from them.
//!
//! Two different "f"s appear in this problem and are kept apart by name:
//!
//! * [`Laws::internal_energy`] is `u * φ(u)` with `φ(u) = ∫₀ᵘ P(z)/z² dz`,
//!   the potential part of the convex entropy;
//! * [`Laws::stationary_f`] is `-P(u) u + α u - v*²`, the right-hand side of
//!   the once-integrated stationary momentum equation.
//!
//! Power laws use closed forms throughout; user-supplied ("tabulated") laws
//! fall back to adaptive quadrature and bracketed root finding.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::quad::{self, QuadOptions};
use crate::numerics::roots;

/// Tolerances used for every quadrature over a constitutive law.
pub const LAW_QUAD: QuadOptions = QuadOptions {
    abs_tol: 1e-12,
    rel_tol: 1e-10,
    max_intervals: 4000,
};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied scalar function of density together with its first two
/// derivatives (the second is only consulted for pressure laws).
#[derive(Clone)]
pub struct Tabulated {
    pub name: String,
    value: ScalarFn,
    derivative: ScalarFn,
    second_derivative: ScalarFn,
}

impl Tabulated {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
        second_derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            value: Arc::new(value),
            derivative: Arc::new(derivative),
            second_derivative: Arc::new(second_derivative),
        }
    }

    /// A law given only by its values; derivatives by central differences.
    pub fn from_values(name: impl Into<String>, value: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let value: ScalarFn = Arc::new(value);
        let v1 = value.clone();
        let v2 = value.clone();
        Self {
            name: name.into(),
            value,
            derivative: Arc::new(move |u| crate::numerics::central_diff(|s| v1(s), u)),
            second_derivative: Arc::new(move |u| {
                let h = 1e-4 * (1.0 + u.abs());
                (v2(u + h) - 2.0 * v2(u) + v2(u - h)) / (h * h)
            }),
        }
    }
}

impl fmt::Debug for Tabulated {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tabulated({})", self.name)
    }
}

#[derive(Debug, Clone)]
pub enum PressureLaw {
    /// `P(u) = κ u^γ`
    PowerLaw {
        kappa: f64,
        gamma: f64,
    },
    /// Shallow-water convention `P(u) = ½ κ u²`.
    SaintVenant {
        kappa: f64,
    },
    Tabulated(Tabulated),
}

impl PressureLaw {
    /// `(κ_eff, γ)` with `P(u) = κ_eff u^γ` when the law is a power law.
    pub fn power_form(&self) -> Option<(f64, f64)> {
        match self {
            PressureLaw::PowerLaw { kappa, gamma } => Some((*kappa, *gamma)),
            PressureLaw::SaintVenant { kappa } => Some((0.5 * kappa, 2.0)),
            PressureLaw::Tabulated(_) => None,
        }
    }

    pub fn value(&self, u: f64) -> f64 {
        match self.power_form() {
            Some((k, g)) => {
                if u == 0.0 {
                    0.0
                } else if g == 2.0 {
                    k * u * u
                } else {
                    k * u.powf(g)
                }
            }
            None => match self {
                PressureLaw::Tabulated(t) => (t.value)(u),
                _ => unreachable!(),
            },
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match self.power_form() {
            Some((k, g)) => {
                if g == 2.0 {
                    2.0 * k * u
                } else {
                    k * g * u.powf(g - 1.0)
                }
            }
            None => match self {
                PressureLaw::Tabulated(t) => (t.derivative)(u),
                _ => unreachable!(),
            },
        }
    }

    pub fn second_derivative(&self, u: f64) -> f64 {
        match self.power_form() {
            Some((k, g)) => k * g * (g - 1.0) * u.powf(g - 2.0),
            None => match self {
                PressureLaw::Tabulated(t) => (t.second_derivative)(u),
                _ => unreachable!(),
            },
        }
    }

    /// Checks `P(0) = 0`, `P' > 0`, `P'' > 0` and unbounded growth on
    /// geometric sample ladders.
    pub fn validate(&self) -> Result<()> {
        match self {
            PressureLaw::PowerLaw { kappa, gamma } => {
                if !(*kappa > 0.0 && kappa.is_finite()) {
                    return Err(Error::Configuration(format!("pressure kappa must be > 0, got {kappa}")));
                }
                if !(*gamma > 1.0 && gamma.is_finite()) {
                    return Err(Error::Configuration(format!("pressure gamma must be > 1, got {gamma}")));
                }
            }
            PressureLaw::SaintVenant { kappa } => {
                if !(*kappa > 0.0 && kappa.is_finite()) {
                    return Err(Error::Configuration(format!("pressure kappa must be > 0, got {kappa}")));
                }
            }
            PressureLaw::Tabulated(_) => {}
        }
        if self.value(0.0).abs() > 1e-14 {
            return Err(Error::Configuration(format!(
                "P(0) = {} but must vanish",
                self.value(0.0)
            )));
        }
        for s in crate::numerics::log_space(1e-3, 1e3, 50) {
            let (d1, d2) = (self.derivative(s), self.second_derivative(s));
            if !(d1 > 0.0) || !(d2 > 0.0) {
                return Err(Error::Configuration(format!(
                    "pressure must be strictly increasing and convex: P'({s}) = {d1}, P''({s}) = {d2}"
                )));
            }
        }
        let mut previous = self.value(1.0);
        let first = previous;
        let mut s = 1.0;
        for _ in 0..12 {
            s *= 10.0;
            let p = self.value(s);
            if !(p > previous) {
                return Err(Error::Configuration(format!("pressure stops growing near u = {s}")));
            }
            previous = p;
        }
        if !(previous > 1e6 * first) {
            return Err(Error::Configuration("pressure does not grow without bound".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum ViscosityLaw {
    /// `ν(u) = C u^a`
    PowerLaw {
        c: f64,
        a: f64,
    },
    Constant {
        c: f64,
    },
    Tabulated(Tabulated),
}

impl ViscosityLaw {
    pub fn value(&self, u: f64) -> f64 {
        match self {
            ViscosityLaw::PowerLaw { c, a } => {
                if *a == 1.0 {
                    c * u
                } else {
                    c * u.powf(*a)
                }
            }
            ViscosityLaw::Constant { c } => *c,
            ViscosityLaw::Tabulated(t) => (t.value)(u),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ViscosityLaw::PowerLaw { c, a } => {
                if !(*c > 0.0 && c.is_finite()) || !a.is_finite() {
                    return Err(Error::Configuration(format!(
                        "viscosity needs C > 0 and finite exponent, got C = {c}, a = {a}"
                    )));
                }
            }
            ViscosityLaw::Constant { c } => {
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(Error::Configuration(format!("viscosity constant must be > 0, got {c}")));
                }
            }
            ViscosityLaw::Tabulated(_) => {}
        }
        for s in crate::numerics::log_space(1e-3, 1e3, 50) {
            let nu = self.value(s);
            if !(nu > 0.0 && nu.is_finite()) {
                return Err(Error::Configuration(format!(
                    "viscosity must be positive: nu({s}) = {nu}"
                )));
            }
        }
        Ok(())
    }
}

/// A validated pressure/viscosity pair and the functions derived from it.
#[derive(Debug, Clone)]
pub struct Laws {
    pub pressure: PressureLaw,
    pub viscosity: ViscosityLaw,
}

fn check_density(u: f64, allow_zero: bool) -> Result<()> {
    let ok = u.is_finite() && if allow_zero { u >= 0.0 } else { u > 0.0 };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "density must be {} and finite, got {u}",
            if allow_zero { ">= 0" } else { "> 0" }
        )))
    }
}

impl Laws {
    pub fn new(pressure: PressureLaw, viscosity: ViscosityLaw) -> Result<Self> {
        pressure.validate()?;
        viscosity.validate()?;
        Ok(Self { pressure, viscosity })
    }

    /// Shallow-water pair `P = ½ κ u²`, `ν = u`.
    pub fn saint_venant(kappa: f64) -> Self {
        Self {
            pressure: PressureLaw::SaintVenant { kappa },
            viscosity: ViscosityLaw::PowerLaw { c: 1.0, a: 1.0 },
        }
    }

    pub fn pressure(&self, u: f64) -> Result<f64> {
        check_density(u, true)?;
        Ok(self.pressure.value(u))
    }

    /// `φ(u) = ∫₀ᵘ P(z)/z² dz`.
    pub fn pressure_potential(&self, u: f64) -> Result<f64> {
        check_density(u, true)?;
        if u == 0.0 {
            return Ok(0.0);
        }
        if let Some((k, g)) = self.pressure.power_form() {
            return Ok(k * u.powf(g - 1.0) / (g - 1.0));
        }
        let r = quad::integrate(|z| self.pressure.value(z) / (z * z), 0.0, u, LAW_QUAD);
        if !r.converged || !r.value.is_finite() {
            return Err(Error::Configuration(format!(
                "P(z)/z^2 is not integrable at 0 (quadrature error {:e})",
                r.error
            )));
        }
        Ok(r.value)
    }

    /// `u φ(u)`; vanishes at `u = 0` by continuity.
    pub fn internal_energy(&self, u: f64) -> Result<f64> {
        Ok(u * self.pressure_potential(u)?)
    }

    /// Derivative of [`Self::internal_energy`]: `φ(u) + P(u)/u`.
    pub fn internal_energy_derivative(&self, u: f64) -> Result<f64> {
        check_density(u, false)?;
        Ok(self.pressure_potential(u)? + self.pressure.value(u) / u)
    }

    /// `-P(u) u + α u - v*²`, the stationary right-hand side.
    pub fn stationary_f(&self, u: f64, alpha: f64, v_star: f64) -> Result<f64> {
        check_density(u, false)?;
        Ok(self.stationary_f_unchecked(u, alpha, v_star))
    }

    pub(crate) fn stationary_f_unchecked(&self, u: f64, alpha: f64, v_star: f64) -> f64 {
        -self.pressure.value(u) * u + alpha * u - v_star * v_star
    }

    /// `P(u) u - P(r) r`, free of cancellation for power laws when `u ≈ r`.
    pub(crate) fn pressure_moment_difference(&self, u: f64, r: f64) -> f64 {
        match self.pressure.power_form() {
            Some((k, g)) => k * r.powf(g + 1.0) * ((g + 1.0) * ((u - r) / r).ln_1p()).exp_m1(),
            None => self.pressure.value(u) * u - self.pressure.value(r) * r,
        }
    }

    /// `f(u)` expressed as an offset from a reference density `r` with known
    /// `f(r)`; accurate where `f` is small compared to its terms.
    pub(crate) fn stationary_f_from(&self, u: f64, r: f64, f_r: f64, alpha: f64) -> f64 {
        f_r + alpha * (u - r) - self.pressure_moment_difference(u, r)
    }

    /// `d/du (-P(u) u + α u)`; strictly decreasing in `u`.
    pub fn stationary_f_prime(&self, u: f64, alpha: f64) -> f64 {
        alpha - self.pressure.value(u) - self.pressure.derivative(u) * u
    }

    /// Φ(u) = ∫₀ᵘ ν(s)/s ds.
    pub fn phi_transform(&self, u: f64) -> Result<f64> {
        check_density(u, true)?;
        match &self.viscosity {
            ViscosityLaw::PowerLaw { c, a } if *a > 0.0 => {
                if u == 0.0 {
                    Ok(0.0)
                } else if *a == 1.0 {
                    Ok(c * u)
                } else {
                    Ok(c / a * u.powf(*a))
                }
            }
            ViscosityLaw::PowerLaw { a, .. } => Err(Error::Configuration(format!(
                "nu(s)/s is not integrable at 0 for viscosity exponent {a} <= 0"
            ))),
            ViscosityLaw::Constant { .. } => Err(Error::Configuration(
                "nu(s)/s is not integrable at 0 for constant viscosity".into(),
            )),
            ViscosityLaw::Tabulated(t) => {
                if u == 0.0 {
                    return Ok(0.0);
                }
                let r = quad::integrate(|s| (t.value)(s) / s, 0.0, u, LAW_QUAD);
                if !r.converged || !r.value.is_finite() {
                    return Err(Error::Configuration(format!(
                        "nu(s)/s is not integrable at 0 for viscosity {} (error {:e})",
                        t.name, r.error
                    )));
                }
                Ok(r.value)
            }
        }
    }

    /// Φ'(u) = ν(u)/u.
    pub fn phi_transform_derivative(&self, u: f64) -> f64 {
        self.viscosity.value(u) / u
    }

    /// Inverse of Φ: closed form for power laws, otherwise a geometric
    /// bracket from `[0, 1]`, bisection and a Newton polish.
    pub fn phi_inverse(&self, w: f64) -> Result<f64> {
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::Domain(format!("transformed density must be >= 0, got {w}")));
        }
        if w == 0.0 {
            return Ok(0.0);
        }
        match &self.viscosity {
            ViscosityLaw::PowerLaw { c, a } if *a > 0.0 => {
                if *a == 1.0 {
                    Ok(w / c)
                } else {
                    Ok((a * w / c).powf(1.0 / a))
                }
            }
            ViscosityLaw::Tabulated(_) => {
                let hi = roots::grow_until(1.0, 2.0, 64, |u| self.phi_transform(u).map(|p| p >= w).unwrap_or(true))
                    .map_err(|e| Error::Solver(format!("cannot bracket inverse transform of {w}: {e}")))?;
                let lo = if hi > 1.0 { 0.5 * hi } else { 0.0 };
                let residual = |u: f64| self.phi_transform(u).map(|p| p - w).unwrap_or(f64::NAN);
                let mut u = roots::bisect(residual, lo, hi, 1e-10 * (1.0 + hi))?;
                for _ in 0..3 {
                    let step = residual(u) / self.phi_transform_derivative(u);
                    if !step.is_finite() {
                        break;
                    }
                    u -= step;
                }
                Ok(u)
            }
            _ => {
                self.phi_transform(1.0)?;
                unreachable!()
            }
        }
    }

    /// g(w) = f(Φ⁻¹(w)), the right-hand side of the autonomous stationary
    /// equation in transformed variables. `g(0) = -v*²`.
    pub fn g(&self, w: f64, alpha: f64, v_star: f64) -> Result<f64> {
        if w == 0.0 {
            return Ok(-v_star * v_star);
        }
        let u = self.phi_inverse(w)?;
        Ok(self.stationary_f_unchecked(u, alpha, v_star))
    }

    /// Entropy `E = ½ρw² + uφ(ρ)` and entropy flux
    /// `Q = w(½ρw² + ρ (uφ)'(ρ))` for density `ρ` and velocity `w`.
    pub fn entropy_pair(&self, rho: f64, w: f64) -> Result<(f64, f64)> {
        check_density(rho, false)?;
        let kinetic = 0.5 * rho * w * w;
        let e = kinetic + self.internal_energy(rho)?;
        let q = w * (kinetic + rho * self.internal_energy_derivative(rho)?);
        Ok((e, q))
    }

    /// `ψ(u, ū) = ∫_ū^u (P(z) - P(ū))/z² dz ≥ 0`, the potential part of the
    /// modulated energy.
    pub fn relative_potential(&self, u: f64, ubar: f64) -> Result<f64> {
        check_density(u, false)?;
        check_density(ubar, false)?;
        let p_bar = self.pressure.value(ubar);
        let integrand = |z: f64| (self.pressure.value(z) - p_bar) / (z * z);
        let rel = (u - ubar).abs() / ubar;
        if rel < 0.05 {
            // Gauss–Legendre keeps the sign exact where the closed form cancels.
            return Ok(quad::gauss_legendre10(integrand, ubar, u));
        }
        if let Some((k, g)) = self.pressure.power_form() {
            let pot = |s: f64| k * s.powf(g - 1.0) / (g - 1.0);
            return Ok(pot(u) - pot(ubar) + p_bar * (1.0 / u - 1.0 / ubar));
        }
        let r = quad::integrate(integrand, ubar, u, LAW_QUAD);
        Ok(r.value)
    }

    /// Upper bound on the characteristic speeds `|v/u| ± sqrt(P'(u))`.
    pub fn wave_speed(&self, u: f64, v: f64) -> f64 {
        (v / u).abs() + self.pressure.derivative(u).max(0.0).sqrt()
    }

    /// Exponent used for the `L^γ` entry of the norm ledger: the pressure
    /// exponent for power laws, 2 otherwise.
    pub fn ledger_exponent(&self) -> f64 {
        self.pressure.power_form().map(|(_, g)| g).unwrap_or(2.0)
    }
}
