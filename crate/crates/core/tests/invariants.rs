//! Property tests of the loop-space operators and the action gradient.

use cupflow_core::action::{action_gradient, action_value, ChiCutoff};
use cupflow_core::hamiltonian::{benchmark_spec, lift, HamiltonianSpec};
use cupflow_core::loops::{h_half_weight, FourierLoop, ProductPoint};
use proptest::prelude::*;

fn loop_strategy(dim: usize, max_mode: usize) -> impl Strategy<Value = FourierLoop> {
    prop::collection::vec(-1.0f64..1.0, (2 * max_mode + 1) * dim).prop_map(move |vals| {
        let mut l = FourierLoop::zeros(dim, max_mode);
        l.as_mut_slice().copy_from_slice(&vals);
        l
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn l_is_jstar_of_neg_j_dt(l in loop_strategy(4, 6)) {
        let lhs = l.neg_j_dt().apply_jstar();
        let rhs = l.apply_l();
        for k in lhs.modes() {
            for (a, b) in lhs.coeff(k).iter().zip(rhs.coeff(k)) {
                prop_assert!((a - b).abs() <= f64::EPSILON * b.abs());
            }
        }
    }

    #[test]
    fn jstar_is_the_l2_adjoint(u in loop_strategy(4, 5), v in loop_strategy(4, 5)) {
        prop_assert!((u.apply_jstar().h_half_inner(&v) - u.l2_inner(&v)).abs() < 1e-12);
    }

    #[test]
    fn jstar_contracts_into_h_half(u in loop_strategy(6, 8)) {
        prop_assert!(u.apply_jstar().h_half_norm_sq() <= u.l2_norm_sq() * (1.0 + 1e-14));
    }

    #[test]
    fn parseval(l in loop_strategy(2, 5)) {
        let n = 4 * 5 + 4;
        let samples = l.sample_grid(n);
        let quad: f64 = samples.iter().map(|v| v * v).sum::<f64>() / n as f64;
        prop_assert!((quad - l.l2_norm_sq()).abs() < 1e-10);
    }

    #[test]
    fn phase_rotation_is_an_isometry(l in loop_strategy(4, 5), theta in 0.0f64..1.0) {
        let r = l.rotate_phase(theta);
        prop_assert!((r.h_half_norm_sq() - l.h_half_norm_sq()).abs() < 1e-10);
        prop_assert!((r.l2_norm_sq() - l.l2_norm_sq()).abs() < 1e-10);
    }

    #[test]
    fn quotient_distance_is_a_pseudometric_on_orbits(
        x in loop_strategy(2, 4),
        y in loop_strategy(4, 4),
        theta in 0.0f64..1.0,
        shift in -3i64..=3,
    ) {
        let p = ProductPoint::new(x.clone(), y.clone(), 0.1);
        let mut xs = x.clone();
        xs.coeff_mut(0)[0] += shift as f64;
        let q = ProductPoint::new(xs, y.rotate_phase(theta), 0.1);
        // cancellation in |y|^2 - sqrt(A^2 + B^2) leaves an error floor
        // of about |y| * sqrt(machine epsilon)
        let floor = 1e-6 * (1.0 + y.h_half_norm_sq().sqrt());
        prop_assert!(p.quotient_distance(&q) < floor);
        prop_assert!(p.quotient_distance(&p) < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences(
        x in loop_strategy(2, 3),
        y in loop_strategy(4, 3),
        lambda in -0.6f64..0.6,
    ) {
        let h = lift(benchmark_spec()).unwrap();
        let chi = ChiCutoff::standard(0.05).unwrap();
        let p = ProductPoint::new(x, y, lambda);
        let g = action_gradient(&h, &chi, &p);
        let step = 1e-6;
        // spot-check a few coordinates rather than the full dimension
        for (k, i) in [(0i64, 0usize), (1, 1), (-2, 0)] {
            let mut pp = p.clone();
            pp.y.coeff_mut(k)[i] += step;
            let mut pm = p.clone();
            pm.y.coeff_mut(k)[i] -= step;
            let fd = (action_value(&h, &chi, &pp) - action_value(&h, &chi, &pm)) / (2.0 * step);
            prop_assert!((fd - h_half_weight(k) * g.y.coeff(k)[i]).abs() < 1e-5);
        }
    }

    #[test]
    fn action_is_invariant_under_the_symmetries(
        x in loop_strategy(2, 3),
        y in loop_strategy(4, 3),
        theta in 0.0f64..1.0,
    ) {
        let h = lift(benchmark_spec()).unwrap();
        let chi = ChiCutoff::standard(0.05).unwrap();
        let p = ProductPoint::new(x.clone(), y.clone(), 0.2);
        let a0 = action_value(&h, &chi, &p);
        let rotated = ProductPoint::new(x.clone(), y.rotate_phase(theta), 0.2);
        prop_assert!((action_value(&h, &chi, &rotated) - a0).abs() < 1e-9);
        let mut xs = x.clone();
        xs.coeff_mut(0)[1] += 1.0;
        let shifted = ProductPoint::new(xs, y.clone(), 0.2);
        prop_assert!((action_value(&h, &chi, &shifted) - a0).abs() < 1e-9);
    }
}

#[test]
fn zero_hamiltonian_action_is_purely_quadratic() {
    let h = lift(HamiltonianSpec::zero(1, 1)).unwrap();
    let chi = ChiCutoff::standard(0.1).unwrap();
    let y = FourierLoop::single_mode(2, &[0.5, 0.0, 0.0, 0.0], 4);
    let x = FourierLoop::zeros(2, 4);
    let p = ProductPoint::new(x, y, 0.0);
    let expected = std::f64::consts::PI * 2.0 * 0.25;
    assert!((action_value(&h, &chi, &p) - expected).abs() < 1e-12);
}
