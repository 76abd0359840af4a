use hypwave::blowlab::{blowup_time_bound, boost_sequence, john_recursion, BlowupParams, Region, TimeInputs};
use hypwave::fdoracle::LeapfrogStepper;
use hypwave::globalsolver::weighted_norm;
use hypwave::hypgeo::{log_phi_weight, theta_k, EnvelopeParams};
use hypwave::meanprop::{sine_propagator, spherical_mean, MonotoneWeight};
use hypwave::nonlin::{lipschitz_diff_bound, Nonlinearity, NonlinearitySpec};
use hypwave::{QuadratureConfig, RadialFn, RadialProfile, SpaceTimeField};
use num_rational::Ratio;
use proptest::prelude::*;

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weight_inverse_round_trips(s in 0.0f64..20.0, sq in any::<bool>()) {
        let a = if sq { MonotoneWeight::square() } else { MonotoneWeight::two_cosh() };
        let back = a.inverse(a.value(s));
        prop_assert!((back - s).abs() <= 1e-9 * s.max(1.0));
    }

    #[test]
    fn weight_difference_is_consistent(u in 0.0f64..15.0, v in 0.0f64..15.0) {
        let a = MonotoneWeight::two_cosh();
        let d = a.diff(u, v);
        prop_assert!((d - (a.value(u) - a.value(v))).abs() <= 1e-9 * a.value(u.max(v)));
        prop_assert_eq!(d.signum() * (u - v).signum() >= 0.0, true);
    }

    #[test]
    fn mean_of_constant_is_constant(c in -5.0f64..5.0, t in 0.0f64..9.0, r in 0.0f64..9.0) {
        let m = spherical_mean(&RadialProfile::constant(c), t, r, &q()).unwrap();
        prop_assert!((m - c).abs() <= 1e-10 * c.abs().max(1.0));
    }

    #[test]
    fn mean_is_symmetric_in_time_and_radius(t in 0.0f64..6.0, r in 0.0f64..6.0) {
        let b = RadialProfile::bump(0.7).unwrap();
        let x = spherical_mean(&b, t, r, &q()).unwrap();
        let y = spherical_mean(&b, r, t, &q()).unwrap();
        prop_assert!((x - y).abs() <= 1e-9);
    }

    #[test]
    fn propagator_is_linear(a in -3.0f64..3.0, t in 0.05f64..5.0, r in 0.0f64..5.0) {
        let th = RadialProfile::theta(1.0).unwrap();
        let x = sine_propagator(&th, t, r, &q()).unwrap();
        let y = sine_propagator(&th.clone().scaled(a), t, r, &q()).unwrap();
        prop_assert!((y - a * x).abs() <= 1e-12 * x.abs().max(1e-300) * 10.0);
    }

    #[test]
    fn propagator_respects_finite_speed(t in 0.1f64..3.0, extra in 0.01f64..4.0) {
        // bump(1) lives in [0.5, 3.5]; points farther than t from it see nothing
        let b = RadialProfile::bump(1.0).unwrap();
        let r = 3.5 + t + extra;
        prop_assert_eq!(sine_propagator(&b, t, r, &q()).unwrap(), 0.0);
    }

    #[test]
    fn canonical_difference_bound_holds(x in -1.0f64..1.0, y in -1.0f64..1.0, e in 1.0f64..40.0) {
        let spec = NonlinearitySpec::canonical(3.5).unwrap();
        let scale = (-e).exp() / spec.a;
        let (u, v) = (x * scale, y * scale);
        let (lhs, rhs) = lipschitz_diff_bound(u, v, &spec).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-9), "{lhs} > {rhs}");
    }

    #[test]
    fn nonlinearities_are_even_and_nonnegative(u in -50.0f64..50.0, p in 1.2f64..5.0) {
        let c = NonlinearitySpec::canonical(p.max(3.05)).unwrap();
        let g = NonlinearitySpec::generic(p, 2.0, 0.1).unwrap();
        prop_assert_eq!(c.eval(-u), c.eval(u));
        prop_assert_eq!(g.eval(-u), g.eval(u));
        prop_assert!(c.eval(u) >= 0.0 && g.eval(u) >= 0.0);
    }

    #[test]
    fn weighted_norm_is_homogeneous(c in -4.0f64..4.0, h in 1.05f64..2.0) {
        let g: Vec<f64> = (0..=12).map(|i| i as f64 * 0.5).collect();
        let u = SpaceTimeField::from_fn(g.clone(), g.clone(), |t, r| (t - r).sin() * (-r).exp()).unwrap();
        let v = u.map(|x| c * x).unwrap();
        prop_assert!((weighted_norm(&v, h) - c.abs() * weighted_norm(&u, h)).abs() <= 1e-12 * weighted_norm(&u, h));
    }

    #[test]
    fn phi_weight_inverts_model_field(t in 0.0f64..10.0, r in 0.0f64..10.0, h in 1.05f64..2.0) {
        let u = (-0.5 * r).exp() * (1.0 + (t - r).powi(2)).powf(-0.5 * h);
        prop_assert!((log_phi_weight(t, r, h).unwrap().exp() * u - 1.0).abs() < 1e-12);
    }

    #[test]
    fn envelope_bounds_theta_profile(r in 0.0f64..30.0, k in 0.2f64..3.0) {
        let th = RadialProfile::theta(k).unwrap();
        prop_assert!(th.value(r) <= theta_k(r, EnvelopeParams::new(k).unwrap()).unwrap() * (1.0 + 1e-15));
    }

    #[test]
    fn sigma_regions_nest(l in 1u32..8, lam in 0.0f64..20.0, tau in 0.0f64..120.0, tau0 in 0.2f64..2.0) {
        let inner = Region::Sigma { l: l + 1, tau0 };
        let outer = Region::Sigma { l, tau0 };
        prop_assert!(!inner.contains(lam, tau) || outer.contains(lam, tau));
    }

    #[test]
    fn boost_stop_rule(p in 1.05f64..2.95) {
        let params = BlowupParams { p, q: 2.0, tau0: 1.0, epsilon: 0.1, delta0: 0.1, c_lower: 0.1, c0: 0.01 };
        let b = boost_sequence(&params).unwrap();
        let n = b.entries.len();
        prop_assert_eq!(n as u32, b.l0);
        for (i, e) in b.entries.iter().enumerate() {
            let l = (i + 1) as f64;
            prop_assert!((e.a - (2.0 * l - 2.0)).abs() < 1e-12);
            prop_assert!((e.b - (p - 1.0) * l).abs() < 1e-9);
            if i + 1 < n {
                prop_assert!(e.a <= e.b + 1e-12);
            }
        }
        prop_assert!(b.entries[n - 1].a > b.entries[n - 1].b);
        prop_assert!(b.a0 > 0.0);
    }

    #[test]
    fn time_bound_nonincreasing_in_e(e in -60.0f64..5.0, de in 0.0f64..10.0, a0 in 0.1f64..2.0) {
        let x = TimeInputs { a0, e, q: 2.0, tau0: 1.0, c: 1e-3, epsilon: 0.5, delta0: 0.05, tilde_c: 1e-3 };
        let lo = blowup_time_bound(&x).unwrap();
        let hi = blowup_time_bound(&TimeInputs { e: e + de, ..x }).unwrap();
        prop_assert!(hi.log_t <= lo.log_t);
    }

    #[test]
    fn leapfrog_retraces_its_steps(n in 1usize..200) {
        let th = RadialProfile::theta(1.0).unwrap();
        let z = RadialProfile::zero();
        let f = NonlinearitySpec::generic(2.0, 2.0, 0.05).unwrap();
        let mut st = LeapfrogStepper::new(&z, &th, &f, 0.05, 0.04, 12.0);
        let start = st.previous().to_vec();
        for _ in 0..n { st.step().unwrap(); }
        st.reverse();
        for _ in 0..n { st.step().unwrap(); }
        let gap = st.current().iter().zip(&start).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(gap < 1e-9, "gap {gap}");
    }
}

#[test]
fn john_closed_forms_hold_exactly_for_rational_q() {
    for (num, den) in [(3i128, 2i128), (2, 1), (3, 1)] {
        let q = Ratio::new(num, den);
        let two = Ratio::from_integer(2);
        let (mut a, mut b) = (Ratio::from_integer(1), Ratio::from_integer(0));
        let mut qm = Ratio::from_integer(1);
        for m in 0..=20 {
            assert_eq!(a, qm);
            assert_eq!(b, two * (qm - 1) / (q - 1), "q = {q}, m = {m}");
            if m >= 1 {
                // B_m ≤ 2m q^{m−1}
                assert!(b <= two * Ratio::from_integer(m) * qm / q);
            }
            a *= q;
            b = b * q + two;
            qm *= q;
        }
        let qf = num as f64 / den as f64;
        let j = john_recursion(1.0, 0.5, qf, 0.1, 0.05, 20).unwrap();
        for e in &j.entries {
            let closed = 2.0 * (qf.powi(e.m as i32) - 1.0) / (qf - 1.0);
            assert!((e.b - closed).abs() <= 1e-12 * closed.max(1.0));
            assert!(e.log_d >= (j.e - j.e_tail_bound) * qf.powi(e.m as i32));
        }
    }
}

#[test]
fn john_log_recursion_matches_direct_loop() {
    // with C0·δ0 = 4: ln D_m = 2^m + Σ_{i=1}^{m} 2^{m−i}(ln 4 − 2 ln B_i), B_i = 2^{i+1} − 2
    let j = john_recursion(1.0, std::f64::consts::E, 2.0, 1.0, 4.0, 20).unwrap();
    for e in &j.entries {
        let m = e.m as i32;
        let mut closed = 2f64.powi(m);
        for i in 1..=m {
            closed += 2f64.powi(m - i) * (4f64.ln() - 2.0 * (2f64.powi(i + 1) - 2.0).ln());
        }
        assert!((e.log_d - closed).abs() <= 1e-13 * closed.abs().max(1.0), "m = {m}: {} vs {closed}", e.log_d);
    }
}

#[test]
fn theta_data_are_radial_functions() {
    let th = RadialProfile::theta(1.0).unwrap();
    assert_eq!(th.support(), None);
    assert!(th.kinks().is_empty());
}
