use proptest::prelude::*;
use unitparam::entanglement::{
    bopt_objective, bound_b, bound_b_plain, bound_b_rotated_state, bound_x, offdiag_positions, pure_m_concurrence_sq,
};
use unitparam::linalg::{partial_trace, partial_transpose, ComplexMatrix, C64};
use unitparam::states::{build_density, simplex_weights, StateVector};
use unitparam::{build_unitary, decompose, minimize, OptimizerConfig, ParamMatrix};

fn angles(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
}

fn param_matrix(d: usize) -> impl Strategy<Value = ParamMatrix> {
    angles(d * d).prop_map(move |v| ParamMatrix::from_vec(d, v).unwrap())
}

fn pure_state(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
        .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(|v| StateVector::normalized(v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap())
}

/// Rank-k two-qutrit state from arbitrary angles.
fn qutrit_pair_state() -> impl Strategy<Value = unitparam::DensityMatrix> {
    (1usize..=9).prop_flat_map(|k| {
        (angles(k - 1), param_matrix(9)).prop_map(move |(theta, p)| build_density(&theta, &p, k).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitary_for_any_angles(p in (2usize..=6).prop_flat_map(param_matrix)) {
        let u = build_unitary(&p);
        prop_assert!(u.matrix().unitarity_deviation() < 1e-12);
    }

    #[test]
    fn decompose_inverts_build(p in (2usize..=6).prop_flat_map(param_matrix)) {
        let u = build_unitary(&p);
        let q = decompose(&u).unwrap();
        prop_assert!(q.is_canonical());
        prop_assert!(build_unitary(&q).matrix().max_abs_diff(u.matrix()) < 1e-10);
    }

    #[test]
    fn simplex_weights_form_a_distribution(theta in angles(5)) {
        let w = simplex_weights(&theta, 6).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(w.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn subsystem_maps_keep_trace_and_transpose_is_involutive(rho in qutrit_pair_state()) {
        let m = rho.matrix();
        for keep in 0..2 {
            let t = partial_trace(m, &[3, 3], keep).unwrap().trace();
            prop_assert!((t - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
        let twice = partial_transpose(&partial_transpose(m, &[3, 3], 0).unwrap(), &[3, 3], 0).unwrap();
        prop_assert_eq!(&twice, m);
    }

    #[test]
    fn bound_terms_are_nonnegative(rho in qutrit_pair_state(), pa in param_matrix(3), pb in param_matrix(3)) {
        let r = bound_b(&rho, &build_unitary(&pa), &build_unitary(&pb)).unwrap();
        prop_assert!(r.terms.iter().all(|t| t.x >= 0.0 && t.x.is_finite()));
    }

    #[test]
    fn product_states_have_zero_terms(a in pure_state(3), b in pure_state(3), pa in param_matrix(3)) {
        let rho = a.tensor(&b).density();
        let ua = build_unitary(&pa);
        let id = unitparam::Unitary::identity(3);
        for (k, l) in [(1, 2), (1, 3), (2, 3)] {
            prop_assert!(bound_x(&rho, k, l, 1, 3, &ua, &id).unwrap() < 1e-12);
        }
    }

    #[test]
    fn pure_states_collapse_to_concurrence(psi in pure_state(9)) {
        let b = bound_b_plain(&psi.density(), 3, 3).unwrap();
        prop_assert!((b.bound_sq - pure_m_concurrence_sq(&psi, 3, 3).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn conjugating_sigmas_equals_rotating_state(rho in qutrit_pair_state(), pa in param_matrix(3), pb in param_matrix(3)) {
        let (ua, ub) = (build_unitary(&pa), build_unitary(&pb));
        let a = bound_b(&rho, &ua, &ub).unwrap();
        let b = bound_b_rotated_state(&rho, &ua, &ub).unwrap();
        for (x, y) in a.terms.iter().zip(&b.terms) {
            prop_assert!((x.x - y.x).abs() < 1e-10);
        }
    }

    #[test]
    fn diagonal_phases_drop_out(rho in qutrit_pair_state(), pa in param_matrix(3), pb in param_matrix(3)) {
        let pos = offdiag_positions(3);
        let reduced = bopt_objective(&rho, 3, 3, &pa.pack(&pos), &pb.pack(&pos)).unwrap();
        let ua = build_unitary(&pa).adjoint();
        let ub = build_unitary(&pb).adjoint();
        let full = bound_b_rotated_state(&rho, &ua, &ub).unwrap();
        prop_assert!((reduced + full.bound_sq).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn optimizer_never_returns_worse_than_its_start(c in angles(4), seed in any::<u64>()) {
        let f = |x: &[f64]| x.iter().zip(&c).map(|(a, b)| (a - b).sin().powi(2) + 0.01 * a * a).sum::<f64>();
        let cfg = OptimizerConfig { restarts: 3, seed, max_iterations: 300, ..Default::default() };
        let r = minimize(f, 4, &cfg);
        prop_assert!(r.best_value <= f(&[0.0; 4]));
        prop_assert_eq!(r.best_value, f(&r.best_params));
    }
}

#[test]
fn identity_decomposes_to_zero_angles() {
    let id = unitparam::Unitary::new(ComplexMatrix::identity(4)).unwrap();
    assert!(decompose(&id).unwrap().as_slice().iter().all(|&x| x == 0.0));
}
