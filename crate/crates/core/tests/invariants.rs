use proptest::prelude::*;

use tdgauge::dynamics::{thermal_product_state, uniform_grid, vacuum_state};
use tdgauge::ground_state::ground_state_mutual_information;
use tdgauge::model::{jc_gauge, InteractionCoefficients};
use tdgauge::observables::{
    energy_report, mutual_information, photon_number, thermo_bound_residual,
};
use tdgauge::transit::{transit_envelope, TransitScenario};
use tdgauge::{evolve, CouplingEnvelope, Mode, ModelParams, Variant};

fn params() -> impl Strategy<Value = ModelParams> {
    (1.0f64 / 3.0..3.0, 0.0f64..1.0, 0.0f64..1.0)
        .prop_map(|(d, e, a)| ModelParams::new(d, e, a).unwrap())
}

fn smoothed_box() -> impl Strategy<Value = CouplingEnvelope> {
    (1.0f64..4.0, 1.0f64..6.0, 0.8f64..3.0)
        .prop_map(|(t0, tau, s)| CouplingEnvelope::smoothed_box(t0, tau, s).unwrap())
}

fn end_time(env: &CouplingEnvelope) -> f64 {
    match *env {
        CouplingEnvelope::SmoothedBox { t0, tau, .. } => 2.0 * t0 + tau,
        _ => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn vacuum_stays_pure_and_physical(p in params(), env in smoothed_box()) {
        let grid = uniform_grid(0.0, end_time(&env), 21).unwrap();
        let tr = evolve(&vacuum_state(), &p, &env, Variant::Standard, &grid, 1e-9).unwrap();
        for s in &tr.states {
            prop_assert!(s.heisenberg_min_eigenvalue() > -1e-9);
            prop_assert!((s.det_2sigma() - 1.0).abs() < 1e-7);
            prop_assert!(mutual_information(s).unwrap() >= 0.0);
            prop_assert!(photon_number(s, Mode::Cavity) >= 0.0);
        }
    }

    #[test]
    fn thermal_start_respects_the_bound(
        p in params(),
        env in smoothed_box(),
        bc in 0.5f64..5.0,
        bm in 0.5f64..5.0,
    ) {
        let s0 = thermal_product_state(bc, bm).unwrap();
        let grid = uniform_grid(0.0, end_time(&env), 11).unwrap();
        let tr = evolve(&s0, &p, &env, Variant::Standard, &grid, 1e-9).unwrap();
        let s = tr.final_state();
        let i = mutual_information(s).unwrap();
        let r = energy_report(s, &s0, &p);
        let res = thermo_bound_residual(&r, bm / p.omega_m(), bc / p.omega(), i).unwrap();
        prop_assert!(res >= -1e-7, "residual {res}");
        prop_assert!(((s.det_2sigma() - s0.det_2sigma()) / s0.det_2sigma()).abs() < 1e-7);
    }

    #[test]
    fn jc_gauge_removes_counter_rotating_terms(delta in 0.05f64..20.0, eta in 0.0f64..3.0, level in 0.0f64..1.0) {
        let p = ModelParams::new(delta, eta, jc_gauge(delta).unwrap()).unwrap();
        prop_assert!(InteractionCoefficients::at_level(&p, level).u_plus.abs() < 1e-13);
    }

    #[test]
    fn ground_correlations_symmetric_about_jc_gauge(delta in 0.1f64..10.0, eta in 0.0f64..2.0, x in 0.0f64..1.0) {
        let p = ModelParams::new(delta, eta, 0.0).unwrap();
        let ag = jc_gauge(delta).unwrap();
        let lo = ground_state_mutual_information(&p, ag - x);
        let hi = ground_state_mutual_information(&p, ag + x);
        prop_assert!((lo - hi).abs() <= 1e-12 * lo.abs().max(1.0));
        prop_assert!(ground_state_mutual_information(&p, ag).abs() < 1e-14);
        prop_assert!(lo >= 0.0);
    }

    #[test]
    fn tilde_dynamics_independent_of_gauge(
        delta in 1.0f64 / 3.0..3.0,
        eta in 0.1f64..1.0,
        theta in 0.0f64..std::f64::consts::PI,
        ratio in 0.5f64..2.0,
        a1 in 0.0f64..1.0,
        a2 in 0.0f64..1.0,
    ) {
        let sc = TransitScenario::new(ratio, 5.0, theta).unwrap();
        let env = transit_envelope(&sc).unwrap();
        let grid = uniform_grid(0.0, sc.exit_time(), 11).unwrap();
        let run = |a: f64| {
            let p = ModelParams::new(delta, eta, a).unwrap();
            *evolve(&vacuum_state(), &p, &env, Variant::Tilde { theta }, &grid, 1e-10).unwrap().final_state()
        };
        let (s1, s2) = (run(a1), run(a2));
        prop_assert!((photon_number(&s1, Mode::Cavity) - photon_number(&s2, Mode::Cavity)).abs() < 1e-6);
        prop_assert!((mutual_information(&s1).unwrap() - mutual_information(&s2).unwrap()).abs() < 1e-6);
    }
}
