use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use proptest::prelude::*;

use super::*;
use crate::automaton::{AgentId, Policy, QuantumSystem};
use crate::catalog;
use crate::error::Error;
use crate::random;
use crate::security::insecurity_bounded;

fn alice_to_bob() -> Policy {
    let ids = ["Alice", "Bob"].map(AgentId::from);
    Policy::new(ids.clone(), [(ids[0].clone(), ids[1].clone())]).unwrap()
}

#[test]
fn total_relation_on_identity_system() {
    let s = catalog::idle(vec![2, 2], &["Alice", "Bob"], &["noop"]);
    let r = check_unwinding_one(&s, &alice_to_bob(), &Total, 3).unwrap();
    assert!(r.conditions.iter().all(|c| c.holds));
    assert_eq!(r.bound, Some(0.0));
    assert_eq!(r.verdict, "secure (certified at depth 3)");
    assert_eq!(r.states, 1);
}

#[test]
fn local_rotations_are_certified_secure() {
    let s = catalog::rotations_only(FRAC_PI_2);
    let oracle = ReducedState::observed_factors(&s).unwrap();
    let r = check_unwinding_one(&s, &alice_to_bob(), &oracle, 3).unwrap();
    assert!(r.conditions.iter().all(|c| c.holds), "{:?}", r.conditions);
    assert_eq!(r.bound, Some(0.0));
    assert!(r.measured_kt <= 1e-9);
    assert_eq!(r.bound_trend.len(), 4);

    let two = check_unwinding_two(&s, &alice_to_bob(), &oracle, EpsMode::Fit, 3).unwrap();
    assert!(two.bound.unwrap() <= 1e-9);
}

#[test]
fn cnot_breaks_local_respect() {
    let s = catalog::one_way_cnot(FRAC_PI_2);
    let oracle = ReducedState::observed_factors(&s).unwrap();
    let r = check_unwinding_one(&s, &alice_to_bob(), &oracle, 3).unwrap();
    let local = r.condition(LOCAL).unwrap();
    assert!(!local.holds);
    let w = local.witness.as_ref().unwrap();
    assert_eq!(w.agent.as_str(), "Alice");
    assert_eq!(w.action.as_ref().unwrap().agent.as_str(), "Bob");
    assert_eq!(r.bound, None);
    assert_eq!(r.verdict, "not certified");
    assert!(r.measured_kt >= 0.5 - 1e-9);
}

#[test]
fn canonical_distance_at_depth_zero() {
    // With nothing left to apply, δ is just Alice's observation gap.
    let s = catalog::one_way_cnot(FRAC_PI_2);
    let rho = s.initial().clone();
    let alice = s.agent_index(&"Alice".into()).unwrap();
    let bob_rx = s.channel(&"Bob".into(), &"Rx".into()).unwrap().apply_state(&rho);
    let d0 = canonical_pseudodistance(0).delta(&s, alice, &rho, &bob_rx).unwrap();
    assert!(d0.abs() <= 1e-12);
    let alice_rx = s.channel(&"Alice".into(), &"Rx".into()).unwrap().apply_state(&rho);
    let d = canonical_pseudodistance(0).delta(&s, alice, &rho, &alice_rx).unwrap();
    assert!((d - 0.5).abs() <= 1e-12, "{d}");
}

#[test]
fn canonical_relations_certify_themselves() {
    let s = catalog::one_way_cnot(FRAC_PI_4);
    let p = alice_to_bob();
    let r = check_unwinding_two(&s, &p, &canonical_pseudodistance(3), EpsMode::Fit, 2).unwrap();
    assert!(r.bound.is_some());
    assert!(r.measured_kt <= r.bound.unwrap() + 1e-9);
}

#[test]
fn lower_bound_from_cnot_chain() {
    let s = catalog::one_way_cnot(FRAC_PI_2);
    let p = alice_to_bob();
    let lb = lower_bound_from_unwinding(&s, &p, 3).unwrap();
    assert!(lb.value >= 0.25 - 1e-9, "{}", lb.value);
    assert_eq!(lb.kind, "LOWER BOUND");
    assert!(lb.value <= insecurity_bounded(&s, &p, 4).unwrap().value + 1e-9);
}

#[test]
fn given_constants_are_checked() {
    let s = catalog::one_way_cnot(FRAC_PI_2);
    let oracle = ReducedState::observed_factors(&s).unwrap();
    let r = check_unwinding_two(&s, &alice_to_bob(), &oracle, EpsMode::Given(Eps::ZERO), 2).unwrap();
    assert!(!r.condition(LOCAL).unwrap().holds);
    assert_eq!(r.bound, None);
    let bad = Eps {
        step: -1.0,
        ..Eps::ZERO
    };
    assert!(check_unwinding_two(&s, &alice_to_bob(), &oracle, EpsMode::Given(bad), 2).is_err());
}

struct Lying;

impl PseudoDistance for Lying {
    fn name(&self) -> String {
        "zero-claims".into()
    }
    fn delta(&self, _: &QuantumSystem, _: usize, _: &crate::linalg::DensityOperator, _: &crate::linalg::DensityOperator) -> crate::Result<f64> {
        Ok(0.0)
    }
}

#[test]
fn unsound_constants_are_caught() {
    // Zero distance passes every fitted check except observation, so the fitted bound stays honest.
    let s = catalog::one_way_cnot(FRAC_PI_2);
    let r = check_unwinding_two(&s, &alice_to_bob(), &Lying, EpsMode::Fit, 2).unwrap();
    assert!(r.bound.unwrap() >= r.measured_kt - 1e-9);
    // A given bound that is too small fails observation consistency rather than certifying.
    let r = check_unwinding_two(&s, &alice_to_bob(), &Lying, EpsMode::Given(Eps::ZERO), 2).unwrap();
    assert!(!r.condition(OBSERVATION).unwrap().holds);
}

#[test]
fn non_transitive_relation_is_rejected() {
    struct Near;
    impl Equivalence for Near {
        fn name(&self) -> String {
            "near".into()
        }
        fn equivalent(
            &self,
            _: &QuantumSystem,
            _: usize,
            rho: &crate::linalg::DensityOperator,
            sigma: &crate::linalg::DensityOperator,
        ) -> crate::Result<bool> {
            Ok(crate::linalg::trace_distance(rho, sigma)? < 0.6)
        }
    }
    let s = catalog::rotations_only(FRAC_PI_4);
    let err = check_unwinding_one(&s, &alice_to_bob(), &Near, 4).unwrap_err();
    assert!(matches!(err, Error::Oracle(_)), "{err:?}");
}

fn random_case(seed: u64) -> (QuantumSystem, Policy) {
    let mut r = random::rng(seed);
    let s = random::system(
        &mut r,
        &random::SystemShape {
            dims: vec![2, 2],
            agents: 2,
            commands: 2,
        },
    );
    let ids: Vec<AgentId> = s.agents().to_vec();
    (s, Policy::new(ids.clone(), [(ids[0].clone(), ids[1].clone())]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fitted_bound_dominates_measured(seed in any::<u64>()) {
        let (s, p) = random_case(seed);
        let r = check_unwinding_two(&s, &p, &Trace, EpsMode::Fit, 2).unwrap();
        let b = r.bound.unwrap();
        prop_assert!(r.measured_kt <= b + 1e-9);
    }

    #[test]
    fn lower_bound_is_below_next_depth(seed in any::<u64>(), depth in 0usize..3) {
        let (s, p) = random_case(seed);
        let lb = lower_bound_from_unwinding(&s, &p, depth).unwrap();
        let k = insecurity_bounded(&s, &p, depth + 1).unwrap().value;
        prop_assert!(lb.value <= k + 1e-9, "{} > {}", lb.value, k);
    }
}
