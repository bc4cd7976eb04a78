mod common;

use proptest::prelude::*;

use barotropic_ns::diagnostics::modulated_energy;
use barotropic_ns::evolve::{Evolver, InitialData, SchemeConfig};
use barotropic_ns::hyperbolic::{
    assess, compatible_boundary_data, jump_speed_solve, rankine_hugoniot_residuals, JumpCandidate,
};
use barotropic_ns::steady::{alpha_bar, sigma_membership, solve_steady};
use barotropic_ns::{Laws, PressureLaw, ViscosityLaw};

use common::*;

fn power_laws(kappa: f64, gamma: f64, a: f64) -> Laws {
    Laws::new(
        PressureLaw::PowerLaw { kappa, gamma },
        ViscosityLaw::PowerLaw { c: 1.0, a },
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn stationary_jump_satisfies_jump_relations(u_minus in 0.05f64..8.0, ratio in 1.01f64..10.0, kappa in 0.2f64..5.0) {
        let laws = Laws::saint_venant(kappa);
        for (a, b) in [(u_minus, u_minus * ratio), (u_minus * ratio, u_minus)] {
            let (v, verdict) = compatible_boundary_data(a, b, &laws).unwrap();
            let (r1, r2) = verdict.rh_residuals;
            let scale = 1.0 + v * v / a.min(b) + laws.pressure.value(a.max(b));
            prop_assert!(r1.abs() <= 1e-12 * scale && r2.abs() <= 1e-12 * scale);
            prop_assert_eq!(verdict.admissible, a < b);
        }
    }

    #[test]
    fn jump_speed_solve_round_trips(rho_minus in 0.1f64..5.0, ratio in 1.05f64..6.0, w_minus in -3.0f64..3.0, gamma in 1.1f64..3.0) {
        let laws = power_laws(1.0, gamma, 1.0);
        let rho_plus = rho_minus * ratio;
        let (c, w_plus) = jump_speed_solve(rho_minus, rho_plus, w_minus, &laws).unwrap();
        let j = JumpCandidate::new(rho_minus, w_minus, rho_plus, w_plus, c).unwrap();
        let (r1, r2) = rankine_hugoniot_residuals(&j, &laws.pressure);
        let scale = 1.0 + rho_plus * (w_minus.abs() + c.abs()).powi(2) + laws.pressure.value(rho_plus);
        prop_assert!(r1.abs() <= 1e-10 * scale, "mass residual {}", r1);
        prop_assert!(r2.abs() <= 1e-10 * scale, "momentum residual {}", r2);
    }

    #[test]
    fn jump_speed_is_galilean(rho_minus in 0.1f64..5.0, ratio in 1.05f64..6.0, w_minus in -2.0f64..2.0, shift in -3.0f64..3.0) {
        let laws = Laws::saint_venant(1.0);
        let rho_plus = rho_minus * ratio;
        let (c, w_plus) = jump_speed_solve(rho_minus, rho_plus, w_minus, &laws).unwrap();
        let (c2, w_plus2) = jump_speed_solve(rho_minus, rho_plus, w_minus + shift, &laws).unwrap();
        prop_assert!((c2 - c - shift).abs() <= 1e-9 * (1.0 + c.abs() + shift.abs()));
        prop_assert!((w_plus2 - w_plus - shift).abs() <= 1e-9 * (1.0 + w_plus.abs() + shift.abs()));
        let a = assess(&JumpCandidate::new(rho_minus, w_minus, rho_plus, w_plus, c).unwrap(), &laws).unwrap();
        let b = assess(&JumpCandidate::new(rho_minus, w_minus + shift, rho_plus, w_plus2, c2).unwrap(), &laws).unwrap();
        prop_assert_eq!(a.admissible, b.admissible);
    }

    #[test]
    fn sigma_is_an_epigraph(v_star in 0.05f64..3.0, alpha in 0.01f64..12.0, bump in 1e-9f64..20.0, gamma in 1.2f64..3.0) {
        for laws in [Laws::saint_venant(1.0), power_laws(1.0, gamma, 1.0)] {
            let here = sigma_membership(v_star, alpha, U_MINUS, U_PLUS, &laws).unwrap();
            if here.in_sigma {
                let above = sigma_membership(v_star, alpha + bump, U_MINUS, U_PLUS, &laws).unwrap();
                prop_assert!(above.in_sigma);
            }
        }
    }

    #[test]
    fn sigma_lower_edge_is_alpha_bar(v_star in 0.05f64..2.0, gamma in 1.2f64..3.0) {
        let laws = power_laws(1.0, gamma, 1.0);
        let bar = alpha_bar(v_star, U_MINUS, U_PLUS, &laws).unwrap();
        prop_assert!(sigma_membership(v_star, bar * (1.0 + 1e-7), U_MINUS, U_PLUS, &laws).unwrap().in_sigma);
        prop_assert!(!sigma_membership(v_star, bar * (1.0 - 1e-7), U_MINUS, U_PLUS, &laws).unwrap().in_sigma);
    }

    #[test]
    fn relative_potential_is_nonnegative(u in 1e-3f64..20.0, ubar in 1e-3f64..20.0, gamma in 1.05f64..4.0) {
        for laws in [Laws::saint_venant(1.0), power_laws(2.0, gamma, 1.0)] {
            let psi = laws.relative_potential(u, ubar).unwrap();
            prop_assert!(psi >= 0.0, "psi({}, {}) = {}", u, ubar, psi);
        }
    }

    #[test]
    fn phi_inverse_round_trips(u in 1e-4f64..50.0, a in 0.2f64..3.0, c in 0.1f64..4.0) {
        let laws = Laws::new(PressureLaw::SaintVenant { kappa: 1.0 }, ViscosityLaw::PowerLaw { c, a }).unwrap();
        let w = laws.phi_transform(u).unwrap();
        let back = laws.phi_inverse(w).unwrap();
        prop_assert!((back - u).abs() <= 1e-10 * u.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn modulated_energy_is_nonnegative(amplitude in 0.0f64..0.3, seed in 0u64..1000) {
        let laws = fig4_laws();
        let b = fig4_boundary();
        let p = solve_steady(&b, 64, &laws).unwrap();
        let e = Evolver::new(laws.clone(), b, SchemeConfig { n: 64, ..SchemeConfig::default() }).unwrap();
        let s = e.initial_state(&InitialData::PerturbedSteady { amplitude, seed }, Some(&p)).unwrap();
        let l = modulated_energy(&s, &p, &laws).unwrap();
        prop_assert!(l >= 0.0);
        if amplitude == 0.0 {
            prop_assert_eq!(l, 0.0);
        }
    }
}
