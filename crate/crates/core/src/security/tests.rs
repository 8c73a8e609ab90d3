use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use proptest::prelude::*;

use super::*;
use crate::automaton::Action;
use crate::catalog;
use crate::linalg::{distribution_distance, states, DensityOperator};
use crate::random;

fn seq(items: &[(&str, &str)]) -> ActionSequence {
    items.iter().map(|(a, c)| Action::new(*a, *c)).collect()
}

#[test]
fn bob_rotation_never_reaches_alice() {
    for theta in [FRAC_PI_4, FRAC_PI_2, 1.0] {
        let s = catalog::one_way_cnot(theta);
        let r = interference_degree(&s, &InterferenceQuery::new(["Bob"], ["Rx"], ["Alice"], 5)).unwrap();
        assert!(r.value <= 1e-9, "theta {theta}: {}", r.value);
        assert_eq!(r.per_depth.len(), 5);
    }
}

#[test]
fn alice_rotation_reaches_bob() {
    for theta in [FRAC_PI_4, FRAC_PI_2] {
        let s = catalog::one_way_cnot(theta);
        let r = interference_degree(&s, &InterferenceQuery::new(["Alice"], ["Rx"], ["Bob"], 2)).unwrap();
        assert!(r.value >= (theta / 2.0).sin().powi(2) - 1e-9);
    }
}

#[test]
fn bob_cnot_reaches_alice() {
    for theta in [FRAC_PI_4, FRAC_PI_2] {
        let s = catalog::one_way_cnot(theta);
        let r = interference_degree(&s, &InterferenceQuery::new(["Bob"], ["CNOT"], ["Alice"], 4)).unwrap();
        assert!(r.value >= 0.5 * theta.sin().powi(2) - 1e-9);
        // The four-step sequence from the hand analysis.
        let alpha = seq(&[("Alice", "Rx"), ("Alice", "CNOT"), ("Bob", "CNOT"), ("Alice", "Rx")]);
        let purged = seq(&[("Alice", "Rx"), ("Alice", "CNOT"), ("Alice", "Rx")]);
        let m = &s.capability(&"Alice".into()).unwrap().povms()[0].1;
        let p = m.measure(&s.run(&alpha).unwrap()).unwrap();
        let q = m.measure(&s.run(&purged).unwrap()).unwrap();
        let (sh, ch) = (theta / 2.0).sin_cos();
        assert!((p.get("0") - theta.cos().powi(2)).abs() < 1e-9);
        assert!((q.get("0") - (ch.powi(4) + sh.powi(4))).abs() < 1e-9);
        assert!((distribution_distance(&p, &q) - 0.5 * theta.sin().powi(2)).abs() < 1e-9);
    }
}

#[test]
fn chain_examples() {
    let p = catalog::chain_policy();
    let r = insecurity_bounded(&catalog::chain_rotations(FRAC_PI_2), &p, 4).unwrap();
    assert!(r.per_depth.iter().all(|&v| v <= 1e-9));
    let r = insecurity_bounded(&catalog::chain_cnot(FRAC_PI_2), &p, 4).unwrap();
    assert!(r.value >= 0.5 - 1e-9);
    assert_eq!(r.witness.agent.as_str(), "Charles");
}

#[test]
fn complete_policy_is_secure() {
    let s = catalog::one_way_cnot(1.0);
    let p = Policy::complete(s.agents().iter().cloned());
    let r = insecurity_bounded(&s, &p, 3).unwrap();
    assert_eq!(r.value, 0.0);
    assert_eq!(r.per_depth, vec![0.0; 3]);
}

#[test]
fn estimate_labels_and_stalls() {
    let idle = catalog::idle(vec![2, 2], &["A", "B"], &["x"]);
    let p = Policy::reflexive(idle.agents().iter().cloned());
    let e = insecurity_estimate(&idle, &p, 6, 1).unwrap();
    assert_eq!(e.kind, LOWER_BOUND);
    assert!(e.stalled);
    assert_eq!(e.depth_reached, 1);
    assert_eq!(e.value, 0.0);
    let s = catalog::one_way_cnot(FRAC_PI_2);
    let p = Policy::reflexive(s.agents().iter().cloned());
    let e = insecurity_estimate(&s, &p, 4, 0).unwrap();
    assert_eq!(e.depth_reached, 4);
    assert!(e.value >= 0.5 - 1e-9);
    assert!(e.per_depth.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn strong_degree_over_mixed_start() {
    let base = catalog::one_way_cnot(FRAC_PI_2);
    let zero0 = DensityOperator::basis(4, 0);
    let plus0 = states::plus().tensor(&states::zero());
    let rho0 = crate::linalg::mix(vec![(0.5, zero0.clone()), (0.5, plus0.clone())]).unwrap();
    let s = base.with_initial(rho0).unwrap();
    let p = Policy::reflexive(s.agents().iter().cloned());
    let e = Ensemble::new(vec![(0.5, zero0.clone()), (0.5, plus0.clone())]).unwrap();
    let r = strong_insecurity_bounded(&s, &p, &[e], 2).unwrap();
    let k0 = insecurity_bounded(&base.with_initial(zero0).unwrap(), &p, 2).unwrap().value;
    let k1 = insecurity_bounded(&base.with_initial(plus0).unwrap(), &p, 2).unwrap().value;
    assert!((r.decompositions[1].weighted - 0.5 * (k0 + k1)).abs() < 1e-12);
    assert!(r.value >= insecurity_bounded(&s, &p, 2).unwrap().value - 1e-9);
    assert_eq!(r.trivial_value(), insecurity_bounded(&s, &p, 2).unwrap().value);

    let wrong = Ensemble::new(vec![(1.0, states::bell())]).unwrap();
    assert!(matches!(strong_insecurity_bounded(&s, &p, &[wrong], 2), Err(Error::Ensemble(_))));
}

#[test]
fn pure_start_strong_equals_plain() {
    let s = catalog::one_way_cnot(1.1);
    let p = Policy::reflexive(s.agents().iter().cloned());
    let r = strong_insecurity_bounded(&s, &p, &[], 3).unwrap();
    assert_eq!(r.value, insecurity_bounded(&s, &p, 3).unwrap().value);
}

#[test]
fn unknown_ids_are_rejected() {
    let s = catalog::one_way_cnot(1.0);
    assert!(interference_degree(&s, &InterferenceQuery::new(["Eve"], ["Rx"], ["Bob"], 1)).is_err());
    assert!(interference_degree(&s, &InterferenceQuery::new(["Alice"], ["H"], ["Bob"], 1)).is_err());
    assert!(interference_degree(&s, &InterferenceQuery::new([], ["Rx"], ["Bob"], 1)).is_err());
    let p = Policy::reflexive(["Alice".into()]);
    assert!(insecurity_bounded(&s, &p, 1).is_err());
}

#[test]
fn depth_cap_enforced() {
    let s = catalog::one_way_cnot(1.0);
    let p = Policy::reflexive(s.agents().iter().cloned());
    assert!(matches!(insecurity_bounded(&s, &p, 9), Err(Error::Limit(_))));
}

#[test]
fn rotation_by_pi_is_a_classical_flip() {
    let s = catalog::one_way_cnot(PI);
    let r = interference_degree(&s, &InterferenceQuery::new(["Alice"], ["Rx"], ["Bob"], 2)).unwrap();
    assert!((r.value - 1.0).abs() < 1e-9);
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
    let p = if seed % 2 == 0 {
        Policy::reflexive(ids)
    } else {
        Policy::new(ids.clone(), [(ids[0].clone(), ids[1].clone())]).unwrap()
    };
    (s, p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn per_depth_is_monotone_and_witness_reproduces(seed in any::<u64>()) {
        let (s, p) = random_case(seed);
        let r = insecurity_bounded(&s, &p, 3).unwrap();
        prop_assert!(r.per_depth.windows(2).all(|w| w[0] <= w[1] + 1e-9));
        prop_assert_eq!(*r.per_depth.last().unwrap(), r.value);
        let rho = s.run(&r.witness.sequence).unwrap();
        let sigma = s.run(&r.witness.purged).unwrap();
        let again = s.observation_distance(&r.witness.agent, &rho, &sigma).unwrap();
        prop_assert!((again - r.value).abs() <= 1e-12);
        let shorter = insecurity_bounded(&s, &p, 2).unwrap();
        prop_assert!(shorter.value <= r.value + 1e-9);
    }

    #[test]
    fn unpurged_sequences_contribute_nothing(seed in any::<u64>(), raw in prop::collection::vec(0usize..4, 0..4)) {
        let (s, p) = random_case(seed);
        let alpha = s.sequence(&raw);
        for a in s.agents() {
            let purged = purge_agents(&alpha, &p.nabla(a).unwrap());
            if purged == alpha {
                let rho = s.run(&alpha).unwrap();
                prop_assert_eq!(s.observation_distance(a, &rho, &s.run(&purged).unwrap()).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn unrestricted_dominates_listed_family(seed in any::<u64>()) {
        let (s, p) = random_case(seed);
        let dims = s.dims().to_vec();
        let mut b = QuantumSystem::builder(dims.clone(), s.initial().clone());
        for (i, e) in s.channels().iter().enumerate() {
            let x = s.action(i);
            b = b.channel(x.agent.as_str(), x.command.as_str(), e.clone());
        }
        for a in s.agents() {
            let cap = crate::automaton::Capability::new()
                .with_povm("basis[0]", crate::linalg::Povm::computational_basis(&dims, 0).unwrap());
            b = b.capability(a.as_str(), cap.clone().with_unrestricted(&dims));
        }
        let with_trace = b.build().unwrap();
        let mut b = QuantumSystem::builder(dims.clone(), s.initial().clone());
        for (i, e) in s.channels().iter().enumerate() {
            let x = s.action(i);
            b = b.channel(x.agent.as_str(), x.command.as_str(), e.clone());
        }
        for a in s.agents() {
            b = b.capability(a.as_str(), crate::automaton::Capability::new()
                .with_povm("basis[0]", crate::linalg::Povm::computational_basis(&dims, 0).unwrap()));
        }
        let listed = b.build().unwrap();
        let hi = insecurity_bounded(&with_trace, &p, 2).unwrap().value;
        let lo = insecurity_bounded(&listed, &p, 2).unwrap().value;
        prop_assert!(hi >= lo - 1e-12);
    }

    #[test]
    fn strong_dominates_plain(seed in any::<u64>()) {
        let (s, p) = random_case(seed);
        let mut r = random::rng(seed ^ 0x5eed);
        let a = random::state(&mut r, s.dim());
        let b = random::state(&mut r, s.dim());
        let rho0 = crate::linalg::mix(vec![(0.3, a.clone()), (0.7, b.clone())]).unwrap();
        let s = s.with_initial(rho0).unwrap();
        let e = Ensemble::new(vec![(0.3, a), (0.7, b)]).unwrap();
        let strong = strong_insecurity_bounded(&s, &p, &[e], 2).unwrap();
        prop_assert!(strong.value >= insecurity_bounded(&s, &p, 2).unwrap().value - 1e-9);
    }
}
