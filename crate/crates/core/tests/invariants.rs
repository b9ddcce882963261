use proptest::prelude::*;
use teleswitch::analysis::{switched_fidelity, SwitchParams};
use teleswitch::linalg::{partial_trace, Subsystem};
use teleswitch::pauli::{general_fidelity, qubit_fidelity, P_MAX};
use teleswitch::switch::{post_select, switch_n, switch_two, ControlState, Sign};
use teleswitch::{ComplexMatrix, DepolarizingChannel, PureStateVector, C64};

fn qubit() -> impl Strategy<Value = PureStateVector> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("non-zero", |a| a.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|a| PureStateVector::new(vec![C64::new(a[0], a[1]), C64::new(a[2], a[3])]).unwrap())
}

fn mixed() -> impl Strategy<Value = ComplexMatrix> {
    (qubit(), qubit(), 0.0f64..1.0).prop_map(|(a, b, t)| &a.projector().scale_real(t) + &b.projector().scale_real(1.0 - t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mixed_product_identity(a in mixed(), b in mixed(), c in mixed(), d in mixed()) {
        let lhs = &a.tensor(&b) * &c.tensor(&d);
        let rhs = (&a * &c).tensor(&(&b * &d));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn channel_preserves_trace_and_positivity(rho in mixed(), p in 0.0..=P_MAX) {
        let out = DepolarizingChannel::isotropic(p).unwrap().apply(&rho).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(out.validate_density().is_ok());
    }

    #[test]
    fn fidelities_agree_and_are_symmetric(a in mixed(), b in mixed()) {
        let f = qubit_fidelity(&a, &b).unwrap();
        prop_assert!((f - qubit_fidelity(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!((f - general_fidelity(&a, &b).unwrap()).abs() < 1e-9);
        prop_assert!((-1e-10..=1.0 + 1e-10).contains(&f));
    }

    #[test]
    fn switch_output_is_a_state_with_consistent_marginal(psi in qubit(), p in 0.0..=P_MAX, q in 0.0..=1.0f64) {
        let ch = DepolarizingChannel::isotropic(p).unwrap();
        let control = ControlState::two_path(q).unwrap();
        let joint = switch_two(&ch, &ch, &psi.projector(), &control).unwrap();
        prop_assert!(joint.matrix().validate_density().is_ok());
        // every ordering applies the same channel twice, so the system alone sees the composition
        let sequential = ch.apply_repeated(&psi.projector(), 2).unwrap();
        let marginal = partial_trace(joint.matrix(), 2, 2, Subsystem::A).unwrap();
        prop_assert!(marginal.max_abs_diff(&sequential) < 1e-12);
    }

    #[test]
    fn switched_fidelity_matches_pipeline(psi in qubit(), p in 0.0..=P_MAX, q in 0.0..=1.0f64) {
        let ch = DepolarizingChannel::isotropic(p).unwrap();
        let rho = psi.projector();
        let joint = switch_two(&ch, &ch, &rho, &ControlState::two_path(q).unwrap()).unwrap();
        let f = qubit_fidelity(&rho, &post_select(&joint, &Sign::Plus.outcome()).unwrap().state).unwrap();
        prop_assert!((f - switched_fidelity(&SwitchParams::new(p, q).unwrap())).abs() < 1e-10);
    }

    #[test]
    fn three_path_marginal_is_threefold_composition(psi in qubit(), p in 0.0..=P_MAX) {
        let ch = DepolarizingChannel::isotropic(p).unwrap();
        let joint = switch_n(&ch, 3, &psi.projector(), &ControlState::uniform(3).unwrap()).unwrap();
        let sequential = ch.apply_repeated(&psi.projector(), 3).unwrap();
        prop_assert!(joint.system_marginal().max_abs_diff(&sequential) < 1e-12);
    }
}
