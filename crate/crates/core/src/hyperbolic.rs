//! Jump relations of the inviscid system and the entropy selection of
//! admissible discontinuities.
//!
//! A jump connects a left state `(ρ-, w-)` to a right state `(ρ+, w+)` moving
//! with speed `c`; brackets are always `[X] = X+ - X-` and `z = w - c` is the
//! velocity relative to the discontinuity.

use serde::Serialize;

use crate::constitutive::{Laws, PressureLaw};
use crate::error::{Error, Result};

/// Absolute part of the "zero" tolerance for jump residuals.
pub const JUMP_ABS_TOL: f64 = 1e-9;
/// Relative part, scaled by the largest flux magnitude involved.
pub const JUMP_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpCandidate {
    pub rho_minus: f64,
    pub w_minus: f64,
    pub rho_plus: f64,
    pub w_plus: f64,
    pub c: f64,
}

impl JumpCandidate {
    pub fn new(rho_minus: f64, w_minus: f64, rho_plus: f64, w_plus: f64, c: f64) -> Result<Self> {
        for (name, rho) in [("rho_minus", rho_minus), ("rho_plus", rho_plus)] {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(Error::Domain(format!("{name} must be a positive density, got {rho}")));
            }
        }
        if ![w_minus, w_plus, c].iter().all(|x| x.is_finite()) {
            return Err(Error::Domain("velocities and jump speed must be finite".into()));
        }
        Ok(Self {
            rho_minus,
            w_minus,
            rho_plus,
            w_plus,
            c,
        })
    }

    /// Stationary jump between momentum-variable states `(u±, v)`.
    pub fn stationary(u_minus: f64, u_plus: f64, v: f64) -> Result<Self> {
        Self::new(u_minus, v / u_minus, u_plus, v / u_plus, 0.0)
    }

    /// The same discontinuity with left and right exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            rho_minus: self.rho_plus,
            w_minus: self.w_plus,
            rho_plus: self.rho_minus,
            w_plus: self.w_minus,
            c: self.c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityVerdict {
    pub rh_residuals: (f64, f64),
    pub entropy_jump: f64,
    pub admissible: bool,
    pub notes: String,
}

/// `([ρ(w-c)], [ρw(w-c) + P(ρ)])`.
pub fn rankine_hugoniot_residuals(j: &JumpCandidate, pressure: &PressureLaw) -> (f64, f64) {
    let mass = |rho: f64, w: f64| rho * (w - j.c);
    let momentum = |rho: f64, w: f64| rho * w * (w - j.c) + pressure.value(rho);
    (
        mass(j.rho_plus, j.w_plus) - mass(j.rho_minus, j.w_minus),
        momentum(j.rho_plus, j.w_plus) - momentum(j.rho_minus, j.w_minus),
    )
}

fn relative_entropy_flux(laws: &Laws, rho: f64, z: f64) -> Result<f64> {
    Ok(0.5 * rho * z * z * z + rho * z * laws.internal_energy_derivative(rho)?)
}

/// `[½ρz³ + ρz f'(ρ)]` with `f(ρ) = ρφ(ρ)`; nonpositive values are
/// entropy-admissible.
pub fn entropy_jump(j: &JumpCandidate, laws: &Laws) -> Result<f64> {
    Ok(relative_entropy_flux(laws, j.rho_plus, j.w_plus - j.c)?
        - relative_entropy_flux(laws, j.rho_minus, j.w_minus - j.c)?)
}

fn flux_scale(j: &JumpCandidate, laws: &Laws) -> f64 {
    [(j.rho_minus, j.w_minus), (j.rho_plus, j.w_plus)]
        .iter()
        .map(|&(rho, w)| {
            let z = w - j.c;
            (rho * z).abs().max((rho * w * z).abs()).max(laws.pressure.value(rho))
        })
        .fold(0.0, f64::max)
}

/// Residuals, entropy jump and the combined verdict for one candidate.
pub fn assess(j: &JumpCandidate, laws: &Laws) -> Result<AdmissibilityVerdict> {
    let (r1, r2) = rankine_hugoniot_residuals(j, &laws.pressure);
    let eta = entropy_jump(j, laws)?;
    let scale = flux_scale(j, laws);
    let tol = JUMP_ABS_TOL + JUMP_REL_TOL * scale;
    let rh_ok = r1.abs() <= tol && r2.abs() <= tol;
    let entropy_ok = eta <= JUMP_ABS_TOL + JUMP_REL_TOL * scale.max(eta.abs());
    let notes = match (rh_ok, entropy_ok) {
        (true, true) => "weak-solution jump satisfying the entropy inequality".to_string(),
        (true, false) => format!("jump relations hold but entropy increases across the jump ({eta:e})"),
        (false, _) => format!("jump relations violated: residuals ({r1:e}, {r2:e}), tolerance {tol:e}"),
    };
    Ok(AdmissibilityVerdict {
        rh_residuals: (r1, r2),
        entropy_jump: eta,
        admissible: rh_ok && entropy_ok,
        notes,
    })
}

/// Momentum `v*` for which the stationary jump between `u-` and `u+` is a
/// weak solution, and the entropy verdict for that jump:
/// `v*² = u- u+ (P(u+) - P(u-)) / (u+ - u-)`.
pub fn compatible_boundary_data(u_minus: f64, u_plus: f64, laws: &Laws) -> Result<(f64, AdmissibilityVerdict)> {
    for (name, u) in [("u_minus", u_minus), ("u_plus", u_plus)] {
        if !(u > 0.0 && u.is_finite()) {
            return Err(Error::Domain(format!("{name} must be a positive density, got {u}")));
        }
    }
    if u_minus == u_plus {
        return Err(Error::DegenerateJump(u_minus));
    }
    let dp = laws.pressure.value(u_plus) - laws.pressure.value(u_minus);
    let radicand = u_minus * u_plus * dp / (u_plus - u_minus);
    if !(radicand > 0.0) {
        return Ok((
            0.0,
            AdmissibilityVerdict {
                rh_residuals: (f64::NAN, f64::NAN),
                entropy_jump: f64::NAN,
                admissible: false,
                notes: format!("no real momentum: v*^2 = {radicand:e} <= 0"),
            },
        ));
    }
    let v_star = radicand.sqrt();
    let verdict = assess(&JumpCandidate::stationary(u_minus, u_plus, v_star)?, laws)?;
    Ok((v_star, verdict))
}

/// Given `ρ-`, `ρ+` and `w-`, returns `(c, w+)` satisfying both jump
/// relations, taking the branch with positive relative velocity `z = w - c`.
pub fn jump_speed_solve(rho_minus: f64, rho_plus: f64, w_minus: f64, laws: &Laws) -> Result<(f64, f64)> {
    JumpCandidate::new(rho_minus, w_minus, rho_plus, w_minus, 0.0)?;
    if rho_minus == rho_plus {
        return Err(Error::DegenerateJump(rho_minus));
    }
    let slope = (laws.pressure.value(rho_plus) - laws.pressure.value(rho_minus)) / (rho_plus - rho_minus);
    let z_plus_sq = rho_minus / rho_plus * slope;
    let z_minus_sq = rho_plus / rho_minus * slope;
    if !(z_plus_sq >= 0.0 && z_minus_sq >= 0.0) {
        return Err(Error::NoRealJump(format!(
            "negative radicand: z+^2 = {z_plus_sq:e}, z-^2 = {z_minus_sq:e}"
        )));
    }
    let c = w_minus - z_minus_sq.sqrt();
    Ok((c, c + z_plus_sq.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv() -> Laws {
        Laws::saint_venant(1.0)
    }

    #[test]
    fn equal_states_have_no_residual() {
        let j = JumpCandidate::new(1.3, 0.7, 1.3, 0.7, -2.0).unwrap();
        assert_eq!(rankine_hugoniot_residuals(&j, &sv().pressure), (0.0, 0.0));
        assert_eq!(entropy_jump(&j, &sv()).unwrap(), 0.0);
    }

    #[test]
    fn fig4_boundary_momentum() {
        let (v, verdict) = compatible_boundary_data(0.5, 1.0, &sv()).unwrap();
        // ½κ u- u+ (u+ + u-)
        let oracle = 0.5 * 0.5 * 1.0 * 1.5;
        assert!((v * v - oracle).abs() < 1e-15);
        assert!(verdict.admissible, "{verdict:?}");
        assert!(verdict.entropy_jump <= 0.0);
    }

    #[test]
    fn decreasing_jump_is_rejected() {
        let (_, verdict) = compatible_boundary_data(1.0, 0.5, &sv()).unwrap();
        assert!(!verdict.admissible);
        assert!(verdict.entropy_jump > 0.0);
        assert!(verdict.rh_residuals.0.abs() < 1e-12 && verdict.rh_residuals.1.abs() < 1e-12);
    }

    #[test]
    fn degenerate_jump() {
        assert_eq!(
            compatible_boundary_data(0.7, 0.7, &sv()),
            Err(Error::DegenerateJump(0.7))
        );
        assert!(matches!(
            jump_speed_solve(0.7, 0.7, 1.0, &sv()),
            Err(Error::DegenerateJump(_))
        ));
    }

    #[test]
    fn r1_is_linear_in_right_velocity() {
        let laws = sv();
        let (v, _) = compatible_boundary_data(0.5, 1.0, &laws).unwrap();
        let mut j = JumpCandidate::stationary(0.5, 1.0, v).unwrap();
        j.w_plus += 0.1;
        let (r1, _) = rankine_hugoniot_residuals(&j, &laws.pressure);
        assert!((r1 - 0.1).abs() < 1e-14);
    }

    #[test]
    fn speed_solve_recovers_stationary_jump() {
        let laws = sv();
        let (v, _) = compatible_boundary_data(0.5, 1.0, &laws).unwrap();
        let (c, w_plus) = jump_speed_solve(0.5, 1.0, v / 0.5, &laws).unwrap();
        assert!(c.abs() < 1e-12);
        assert!((w_plus - v).abs() < 1e-12);
    }
}
