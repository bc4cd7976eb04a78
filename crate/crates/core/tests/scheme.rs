mod common;

use barotropic_ns::evolve::{FieldState, InitialData, SchemeConfig};
use barotropic_ns::steady::solve_steady;

use common::*;

fn tanh_final(n: usize, t_final: f64) -> FieldState {
    let e = fig4_evolver(SchemeConfig {
        n,
        t_final,
        stride: 1_000_000,
        ..SchemeConfig::default()
    });
    let s0 = e.initial_state(&InitialData::Tanh { a: 0.25, b: 5.0 }, None).unwrap();
    e.run(s0, |_| Ok(())).unwrap().final_state
}

/// Sup difference between a solution and its refinement on the shared nodes.
fn nested_diff(coarse: &FieldState, fine: &FieldState) -> f64 {
    (0..=coarse.n())
        .map(|i| {
            (coarse.u[i] - fine.u[2 * i])
                .abs()
                .max((coarse.v[i] - fine.v[2 * i]).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn manufactured_order_is_two_for_several_viscosity_scales() {
    for epsilon in [0.02, 0.1, 0.5] {
        let mms = Manufactured { epsilon };
        let errors: Vec<f64> = [64, 128, 256, 512].iter().map(|&n| mms.truncation_error(n)).collect();
        for order in observed_orders(&errors) {
            assert!(
                (1.8..=2.2).contains(&order),
                "epsilon {epsilon}: orders from {errors:?}"
            );
        }
    }
}

#[test]
fn time_integrator_is_fourth_order() {
    let e = fig4_evolver(SchemeConfig {
        n: 48,
        ..SchemeConfig::default()
    });
    let p = solve_steady(&fig4_boundary(), 48, &fig4_laws()).unwrap();
    let s0 = e
        .initial_state(
            &InitialData::PerturbedSteady {
                amplitude: 0.05,
                seed: 7,
            },
            Some(&p),
        )
        .unwrap();
    let (order, _, _) = time_order(&e, &s0, e.stable_dt(&s0), 16);
    assert!(order > 3.5, "{order}");
}

#[test]
fn self_convergence_on_layer_dynamics() {
    let runs: Vec<FieldState> = [50, 100, 200, 400, 800].iter().map(|&n| tanh_final(n, 0.2)).collect();
    assert!(runs.iter().all(|s| s.t == 0.2));
    let diffs: Vec<f64> = runs.windows(2).map(|w| nested_diff(&w[0], &w[1])).collect();
    let orders = observed_orders(&diffs);
    assert!(
        orders.last().unwrap() > &1.7,
        "differences {diffs:?}, orders {orders:?}"
    );
}

#[test]
fn runs_are_bitwise_reproducible() {
    let (a, b) = (tanh_final(80, 0.3), tanh_final(80, 0.3));
    assert_eq!(a, b);
}

#[test]
fn perturbations_follow_the_seed() {
    let e = fig4_evolver(SchemeConfig {
        n: 60,
        ..SchemeConfig::default()
    });
    let p = solve_steady(&fig4_boundary(), 60, &fig4_laws()).unwrap();
    let s = |seed| {
        e.initial_state(&InitialData::PerturbedSteady { amplitude: 0.1, seed }, Some(&p))
            .unwrap()
    };
    assert_eq!(s(1), s(1));
    assert_ne!(s(1), s(2));
    let base = s(1);
    assert_eq!((base.u[0], base.u[60]), (U_MINUS, U_PLUS));
}
