//! Randomized invariants over the whole alpha range.

use num_complex::Complex64;
use proptest::prelude::*;

use lorenz_lab::integrator::integrate_dde;
use lorenz_lab::model::{
    control_signal, controlled_rhs, equilibria, uncontrolled_rhs, AlphaParams, RegulationTarget,
    State,
};
use lorenz_lab::spectral::{build_aux_cubic, build_char_poly, critical_delay, delay_sequence};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn equilibria_are_fixed_points(alpha in 0.0f64..=1.0) {
        let p = AlphaParams::from_alpha(alpha).unwrap();
        let eq = equilibria(&p);
        for e in [eq.e0, eq.e_plus, eq.e_minus] {
            prop_assert!(uncontrolled_rhs(&p, &e).norm() < 1e-9);
        }
    }

    #[test]
    fn control_decomposes_the_closed_loop(
        alpha in 0.0f64..=1.0,
        x in -20.0f64..20.0, y in -20.0f64..20.0, z in -5.0f64..45.0,
        dx in -20.0f64..20.0, dy in -20.0f64..20.0, dz in -5.0f64..45.0,
    ) {
        let p = AlphaParams::from_alpha(alpha).unwrap();
        let t = RegulationTarget::e_plus(&p);
        let s = State::new(x, y, z);
        let d = State::new(dx, dy, dz);
        let open = uncontrolled_rhs(&p, &s);
        let closed = controlled_rhs(&p, &t, &s, &d);
        let u = control_signal(&p, &t, &d);
        let scale = 1.0 + closed.norm();
        prop_assert!((open.x - closed.x).abs() / scale < 1e-12);
        prop_assert!((open.y + u - closed.y).abs() / scale < 1e-12);
        prop_assert!((open.z - closed.z).abs() / scale < 1e-12);
    }

    #[test]
    fn f_identity_everywhere(alpha in 0.0f64..=1.0, nu in 0.01f64..50.0) {
        let p = AlphaParams::from_alpha(alpha).unwrap();
        let t = RegulationTarget::e_plus(&p);
        let poly = build_char_poly(&p, &t);
        let aux = build_aux_cubic(&p, &t);
        let i_nu = Complex64::new(0.0, nu);
        let lhs = poly.p(i_nu).norm_sqr() - poly.q(i_nu).norm_sqr();
        let rhs = aux.eval(nu * nu);
        let scale = lhs.abs().max(rhs.abs()).max(aux.scale());
        prop_assert!((lhs - rhs).abs() < 1e-8 * scale);
    }

    #[test]
    fn delay_sequences_are_arithmetic_with_gap_two_pi_over_nu(
        alpha in 0.0f64..=1.0,
    ) {
        let p = AlphaParams::from_alpha(alpha).unwrap();
        let t = RegulationTarget::e_plus(&p);
        let poly = build_char_poly(&p, &t);
        let sw = critical_delay(&p, &t).unwrap();
        for root in &sw.roots {
            let seq = delay_sequence(&poly, root.nu, 5).unwrap();
            prop_assert!(seq[0] > 0.0);
            for w in seq.windows(2) {
                let gap = w[1] - w[0];
                let expect = 2.0 * std::f64::consts::PI / root.nu;
                prop_assert!((gap - expect).abs() < 1e-9 * expect);
            }
        }
    }

    #[test]
    fn equilibrium_history_stays_put(alpha in 0.0f64..=1.0) {
        let p = AlphaParams::from_alpha(alpha).unwrap();
        let t = RegulationTarget::e_plus(&p);
        let tau = 0.05;
        let traj = integrate_dde(&p, &t, tau, t.as_state(), tau / 16.0, 5.0).unwrap();
        prop_assert!(traj.last_state().sub(&t.as_state()).norm() < 1e-9);
    }

    #[test]
    fn trajectories_below_tau_c_stay_bounded(alpha in 0.0f64..=1.0, frac in 0.2f64..0.9) {
        let p = AlphaParams::from_alpha(alpha).unwrap();
        let t = RegulationTarget::e_plus(&p);
        let sw = critical_delay(&p, &t).unwrap();
        let tau = frac * sw.tau_c.unwrap();
        let initial = t.as_state().add_scaled(&State::new(1.0, 1.0, 1.0), 0.2);
        let traj = integrate_dde(&p, &t, tau, initial, tau / 32.0, 20.0).unwrap();
        let max_norm = traj.states.iter().map(|s| s.norm()).fold(0.0f64, f64::max);
        prop_assert!(max_norm < 100.0, "max norm {}", max_norm);
    }
}
