use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::catalog;
use crate::linalg::{c, trace_distance, DensityOperator};
use crate::random;

fn seq(items: &[(&str, &str)]) -> ActionSequence {
    items.iter().map(|(a, c)| Action::new(*a, *c)).collect()
}

fn ket(amps: &[(f64, f64)]) -> DensityOperator {
    let v: Vec<_> = amps.iter().map(|&(re, im)| c(re, im)).collect();
    DensityOperator::pure(&v).unwrap()
}

#[test]
fn rotation_then_cnot_entangles() {
    for theta in [0.3, std::f64::consts::FRAC_PI_2, 2.0] {
        let s = catalog::one_way_cnot(theta);
        let out = s.run(&seq(&[("Alice", "Rx"), ("Alice", "CNOT")])).unwrap();
        let (sh, ch) = (theta / 2.0).sin_cos();
        let expected = ket(&[(ch, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, -sh)]);
        assert!(out.approx_eq(&expected, 1e-12));
    }
}

#[test]
fn four_step_sequence_disentangles() {
    let theta = 0.7;
    let s = catalog::one_way_cnot(theta);
    let alpha = seq(&[("Alice", "Rx"), ("Alice", "CNOT"), ("Bob", "CNOT"), ("Alice", "Rx")]);
    let out = s.run(&alpha).unwrap();
    let expected = ket(&[(theta.cos(), 0.0), (0.0, 0.0), (0.0, -theta.sin()), (0.0, 0.0)]);
    assert!(out.approx_eq(&expected, 1e-12));
    assert_eq!(s.run(&ActionSequence::empty()).unwrap(), *s.initial());
}

#[test]
fn unknown_names_are_model_errors() {
    let s = catalog::rotations_only(1.0);
    assert!(s.run(&seq(&[("Eve", "Rx")])).is_err());
    assert!(s.run(&seq(&[("Alice", "CNOT")])).is_err());
}

#[test]
fn reachable_base_cases() {
    let s = catalog::one_way_cnot(std::f64::consts::PI);
    let r0 = s.reachable(0).unwrap();
    assert_eq!(r0.len(), 1);
    assert!(r0[0].sequence.is_empty());
    let r1 = s.reachable(1).unwrap();
    let target = DensityOperator::basis(4, 2);
    let hit = r1.iter().find(|r| trace_distance(&r.state, &target).unwrap() < 1e-9).unwrap();
    assert_eq!(hit.sequence.to_string(), "(Alice,Rx)");
    let idle = catalog::idle(vec![2], &["A", "B"], &["x", "y"]);
    assert_eq!(idle.reachable(4).unwrap().len(), 1);
    assert_eq!(idle.defaulted().len(), 4);
}

#[test]
fn with_initial_replaces_only_the_state() {
    let s = catalog::one_way_cnot(1.0);
    assert_eq!(s.with_initial(s.initial().clone()).unwrap(), s);
    let t = s.with_initial(crate::linalg::states::bell()).unwrap();
    assert_eq!(t.initial(), &crate::linalg::states::bell());
    assert_eq!(t.commands(), s.commands());
    assert!(s.with_initial(DensityOperator::basis(2, 0)).is_err());
}

#[test]
fn validate_reports_every_component() {
    let s = catalog::one_way_cnot(1.0);
    let reports = s.validate(1e-9);
    assert_eq!(reports.len(), 1 + 4 + 2);
    assert!(reports.iter().all(|r| r.passed()));
}

#[test]
fn builder_rejects_mismatched_channels() {
    let b = QuantumSystem::builder(vec![2, 2], DensityOperator::basis(4, 0))
        .channel("A", "x", crate::linalg::KrausChannel::identity(2));
    assert!(b.build().is_err());
    let b = QuantumSystem::builder(vec![2, 2], DensityOperator::basis(2, 0)).agent("A");
    assert!(b.build().is_err());
}

fn small_system(seed: u64) -> QuantumSystem {
    let mut r = random::rng(seed);
    let shape = random::SystemShape {
        dims: vec![2, 2],
        agents: 2,
        commands: 2,
    };
    random::system(&mut r, &shape)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn purge_is_idempotent(raw in prop::collection::vec((0usize..3, 0usize..3), 0..8), g in 0usize..8, d in 0usize..8) {
        let alpha: ActionSequence = raw.iter().map(|(a, c)| Action::new(format!("a{a}"), format!("c{c}"))).collect();
        let gs: BTreeSet<AgentId> = (0..3).filter(|i| g >> i & 1 == 1).map(|i| AgentId::new(format!("a{i}"))).collect();
        let ds: BTreeSet<CommandId> = (0..3).filter(|i| d >> i & 1 == 1).map(|i| CommandId::new(format!("c{i}"))).collect();
        let once = purge(&alpha, &gs, &ds);
        prop_assert_eq!(purge(&once, &gs, &ds), once.clone());
        prop_assert!(once.len() <= alpha.len());
    }

    #[test]
    fn run_is_compositional(seed in any::<u64>(), a in prop::collection::vec(0usize..4, 0..4), b in prop::collection::vec(0usize..4, 0..4)) {
        let s = small_system(seed);
        let alpha = s.sequence(&a);
        let beta = s.sequence(&b);
        let whole = s.run(&alpha.concat(&beta)).unwrap();
        let mid = s.run(&alpha).unwrap();
        let split = s.run_from(&mid, &beta).unwrap();
        prop_assert!(whole.matrix().max_abs_diff(split.matrix()) <= 1e-12);
        prop_assert!(whole.validate(1e-9).passed());
    }

    #[test]
    fn reachable_is_bounded_and_valid(seed in any::<u64>(), depth in 0usize..4) {
        let s = small_system(seed);
        let r = s.reachable(depth).unwrap();
        let n = s.action_count();
        let bound: usize = (0..=depth).map(|k| n.pow(k as u32)).sum();
        prop_assert!(r.len() <= bound);
        for x in &r {
            prop_assert!(x.state.validate(1e-9).passed());
            prop_assert!(x.sequence.len() <= depth);
        }
    }

    #[test]
    fn nabla_excludes_self(edges in prop::collection::vec((0usize..4, 0usize..4), 0..10)) {
        let ids: Vec<AgentId> = (0..4).map(|i| AgentId::new(format!("p{i}"))).collect();
        let p = Policy::new(ids.clone(), edges.iter().map(|&(a, b)| (ids[a].clone(), ids[b].clone()))).unwrap();
        for a in &ids {
            prop_assert!(!p.nabla(a).unwrap().contains(a));
        }
    }
}
