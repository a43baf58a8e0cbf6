use std::f64::consts::{PI, TAU};

use bellopt::inequality::{ich3_value, lhv_max, RankClass};
use bellopt::optimizer::start_rng;
use bellopt::oracle::{draw_parameters, haar_unitary, scenario_of};
use bellopt::quantum::{
    joint_probability, make_state, povm_from_angles, positivity_residuals, projector_pair, Operator2, PovmAngles,
    ProjectiveSetting,
};
use bellopt::tolerance::{povm_advantage, ToleranceInput, ToleranceRecords};
use bellopt::StateSpec;
use proptest::prelude::*;

fn angles() -> impl Strategy<Value = [f64; 8]> {
    [
        0.0..PI,
        0.0..PI,
        0.0..PI,
        0.0..PI,
        0.0..PI,
        0.0..PI,
        0.0..TAU,
        0.0..TAU,
    ]
}

fn class() -> impl Strategy<Value = RankClass> {
    prop::sample::select(vec![
        RankClass::General,
        RankClass::R00,
        RankClass::R01,
        RankClass::R10,
        RankClass::R11,
        RankClass::R02,
        RankClass::R20,
    ])
}

proptest! {
    #[test]
    fn povm_elements_are_hermitian_and_complete(a in angles()) {
        let povm = povm_from_angles(&PovmAngles::from_slice(&a));
        prop_assert!(povm.hermiticity_deviation() <= 1e-12);
        prop_assert!(povm.completeness_deviation() <= 1e-12);
    }

    #[test]
    fn projectors_are_idempotent_and_orthogonal(phi in -PI..PI, nu in -TAU..TAU) {
        let (p0, p1) = projector_pair(&ProjectiveSetting::new(phi, nu));
        prop_assert!((p0 * p0).max_abs_diff(&p0) <= 1e-12);
        prop_assert!((p1 * p1).max_abs_diff(&p1) <= 1e-12);
        prop_assert!((p0 * p1).max_abs_diff(&Operator2::zero()) <= 1e-12);
        prop_assert!((p0 + p1).max_abs_diff(&Operator2::identity()) <= 1e-12);
    }

    #[test]
    fn probabilities_sum_to_one(a in angles(), ratio in 0.0..3.0f64, phi in 0.0..PI, nu in 0.0..TAU) {
        let psi = make_state(ratio).unwrap().vector();
        let povm = povm_from_angles(&PovmAngles::from_slice(&a));
        let (b0, b1) = projector_pair(&ProjectiveSetting::new(phi, nu));
        let total: f64 = povm
            .elements()
            .iter()
            .flat_map(|m| [psi.expectation(m, &b0), psi.expectation(m, &b1)])
            .sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn clamped_probabilities_of_valid_measurements_sum_to_one(class in class(), seed: u64, ratio in 0.0..3.0f64) {
        let state = make_state(ratio).unwrap();
        let x = draw_parameters(class, &mut start_rng(seed, 3));
        let s = scenario_of(1.0, &state, class, &x).unwrap();
        prop_assume!(s.alice2.is_feasible(0.0));
        for bob in [&s.bob0, &s.bob1] {
            let total: f64 = s
                .alice2
                .elements()
                .iter()
                .flat_map(|m| [joint_probability(&state, m, &bob.e0), joint_probability(&state, m, &bob.e1)])
                .sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn local_unitaries_leave_the_value_unchanged(
        class in class(),
        seed: u64,
        ratio in 0.05..2.0f64,
        c in 0.1..50.0f64,
    ) {
        let mut rng = start_rng(seed, 0);
        let x = draw_parameters(class, &mut rng);
        let s = scenario_of(c, &make_state(ratio).unwrap(), class, &x).unwrap();
        let (ua, ub) = (haar_unitary(&mut rng), haar_unitary(&mut rng));
        prop_assert!((ich3_value(&s) - ich3_value(&s.conjugated(&ua, &ub))).abs() <= 1e-10);
    }

    #[test]
    fn global_phase_is_irrelevant(class in class(), seed: u64, phase in 0.0..TAU) {
        let mut rng = start_rng(seed, 1);
        let x = draw_parameters(class, &mut rng);
        let s = scenario_of(3.0, &make_state(0.7).unwrap(), class, &x).unwrap();
        let mut shifted = s;
        shifted.state = s.state.with_global_phase(phase);
        prop_assert!((ich3_value(&s) - ich3_value(&shifted)).abs() <= 1e-12);
    }

    #[test]
    fn projective_classes_give_valid_measurements(seed: u64) {
        let mut rng = start_rng(seed, 2);
        for class in RankClass::PROJECTIVE {
            let x = draw_parameters(class, &mut rng);
            let s = scenario_of(2.0, &make_state(1.0).unwrap(), class, &x).unwrap();
            prop_assert!(s.alice2.is_feasible(1e-9));
        }
    }

    #[test]
    fn deterministic_strategies_stay_at_one(c in 1e-3..1e4f64) {
        let v = lhv_max(c);
        prop_assert!(v <= 1.0 + 1e-9);
        prop_assert!(v >= 1.0 - 1e-9);
    }

    #[test]
    fn advantage_is_affine_in_delta(c in 0.1..20.0f64, p in 0.5..3.0f64, q in 0.5..3.0f64, d in 0.0..0.1f64) {
        let records = ToleranceRecords {
            state: StateSpec::PhiPlus,
            entries: vec![ToleranceInput { c, povm_value: p, projective_value: q }],
        };
        let a0 = povm_advantage(c, 0.0, &records).unwrap();
        let a = povm_advantage(c, d, &records).unwrap();
        prop_assert!((a - (a0 - (c + 1.0) * d)).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn residual_signs_match_eigenvalues(a in angles()) {
        let angles = PovmAngles::from_slice(&a);
        let eig = povm_from_angles(&angles).min_eigenvalues();
        for (r, e) in positivity_residuals(&angles).iter().zip(eig) {
            if *r > 1e-9 {
                prop_assert!(e >= -1e-12, "residual {r} but eigenvalue {e}");
            } else if *r < -1e-9 {
                prop_assert!(e < 0.0, "residual {r} but eigenvalue {e}");
            }
        }
    }
}
