use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;

use super::*;
use crate::automaton::{AgentId, Policy};
use crate::catalog;
use crate::error::Error;
use crate::linalg::{states, trace_distance, DensityOperator};
use crate::random;

fn set(names: &[&str]) -> LocationSet {
    names.iter().map(|n| n.to_string()).collect()
}

fn agents(names: &[&str]) -> Vec<AgentId> {
    names.iter().map(|n| AgentId::from(*n)).collect()
}

#[test]
fn families_are_below_closed() {
    let f = LocationFamily::from_lists(&[&["n1", "n2"]]);
    assert_eq!(f.sets().len(), 4);
    assert!(f.contains(&set(&["n2"])));
    assert!(f.contains(&set(&[])));
    assert_eq!(f.maximal(), vec![&set(&["n1", "n2"])]);
    let g = LocationFamily::from_lists(&[&["n1"], &["n2"]]);
    assert_eq!(g.maximal().len(), 2);
    assert!(g.is_subfamily_of(&f) && !f.is_subfamily_of(&g));
}

#[test]
fn policy_satisfaction() {
    let loc = LocationSpace::per_factor(&[2, 2]);
    let fx = catalog::rm_local();
    assert!(matrix_satisfies_policy(&fx.matrix, &loc, &fx.policy).unwrap().satisfied);

    let flows = Policy::new(agents(&["Alice", "Bob"]), [("Alice".into(), "Bob".into())]).unwrap();
    let m = AccessMatrix::new().with_read("Alice", LocationFamily::from_lists(&[&["n1"]]));
    let r = matrix_satisfies_policy(&m, &loc, &flows).unwrap();
    assert_eq!(r.violations.len(), 1);
    assert_eq!(r.violations[0].condition, 1);

    let m = AccessMatrix::new()
        .with_read("Alice", LocationFamily::from_lists(&[&["n1"]]))
        .with_alter("Bob", LocationFamily::from_lists(&[&["n1"]]));
    let r = matrix_satisfies_policy(&m, &loc, &Policy::reflexive(agents(&["Alice", "Bob"]))).unwrap();
    assert!(!r.satisfied);
    let v = &r.violations[0];
    assert_eq!((v.condition, v.a.as_str(), v.b.as_str()), (2, "Alice", "Bob"));
    assert_eq!(v.k.as_ref().unwrap(), &set(&["n1"]));

    let m = AccessMatrix::new().with_read("Alice", LocationFamily::from_lists(&[&["n9"]]));
    assert!(matches!(matrix_satisfies_policy(&m, &loc, &flows), Err(Error::Model(_))));
}

#[test]
fn delta_read_on_correlated_pair() {
    // Equal one-location marginals, different joint states.
    let loc = LocationSpace::per_factor(&[2, 2]);
    let (rho, sigma) = (states::classical_correlated(), states::bell());
    let a = AgentId::from("a");
    let singles = AccessMatrix::new().with_read("a", LocationFamily::from_lists(&[&["n1"], &["n2"]]));
    assert!(delta_read(&singles, &loc, &a, &rho, &sigma).unwrap().abs() <= 1e-12);
    let joint = AccessMatrix::new().with_read("a", LocationFamily::from_lists(&[&["n1", "n2"]]));
    assert!((delta_read(&joint, &loc, &a, &rho, &sigma).unwrap() - 0.5).abs() <= 1e-12);
    assert_eq!(delta_read(&AccessMatrix::new(), &loc, &a, &rho, &sigma).unwrap(), 0.0);
    assert_eq!(delta_read(&joint, &loc, &a, &rho, &rho).unwrap(), 0.0);
    assert!(matches!(
        delta_read(&joint, &loc, &a, &states::zero(), &states::one()),
        Err(Error::Dimension(_))
    ));

    assert!(!discriminable(&loc, &rho, &rho, 0.0, &set(&["n1"])).unwrap());
    assert!(!discriminable(&loc, &rho, &sigma, 0.0, &set(&["n1"])).unwrap());
    assert!(discriminable(&loc, &rho, &sigma, 0.4, &set(&["n1", "n2"])).unwrap());
    assert!(!discriminable(&loc, &rho, &sigma, 0.5, &set(&["n1", "n2"])).unwrap());
}

#[test]
fn local_fixture_certifies_zero() {
    let fx = catalog::rm_local();
    let r = audit_rm(&fx.system, &fx.locations, &fx.matrix, &fx.policy, 0.0, 0.0, 3).unwrap();
    assert!(r.policy_ok && r.rm1.holds && r.rm2.holds && r.rm3.holds, "{r:?}");
    assert_eq!(r.bound, Some(0.0));
    assert!(r.measured_kt <= 1e-9);
    assert_eq!(r.k_range, KRange::ReadSets);

    let r = audit_rm(&fx.system, &fx.locations, &fx.matrix, &fx.policy, 0.1, 0.05, 3).unwrap();
    assert!((r.bound.unwrap() - 0.4).abs() <= 1e-15);

    let fit = fit_rm_constants(&fx.system, &fx.locations, &fx.matrix, &fx.policy, 3).unwrap();
    assert_eq!((fit.theta, fit.eps), (0.0, Some(0.0)));
}

#[test]
fn literal_subset_range_rejects_local_fixture() {
    // With K = N, any action that moves its own location triggers RM2's antecedent,
    // while δ of the acting agent ignores the other location.
    let fx = catalog::rm_local();
    let r = audit_rm_with(
        &fx.system,
        &fx.locations,
        &fx.matrix,
        &fx.policy,
        0.0,
        0.0,
        3,
        KRange::AllSubsets,
        &crate::Config::default(),
    )
    .unwrap();
    assert_eq!(r.k_sets, 3);
    assert!(r.rm3.holds && !r.rm2.holds);
    assert_eq!(r.rm2.witness.as_ref().unwrap().k.as_ref().unwrap(), &set(&["n1", "n2"]));
}

#[test]
fn noisy_fixture_fits_theta() {
    for eta in [0.02, 0.1] {
        let fx = catalog::rm_noisy(eta);
        let fit = fit_rm_constants(&fx.system, &fx.locations, &fx.matrix, &fx.policy, 3).unwrap();
        assert!((fit.theta - eta).abs() <= 1e-12, "{}", fit.theta);
        assert_eq!(fit.eps, Some(0.0));
        for t in 1..=3 {
            let r = audit_rm(&fx.system, &fx.locations, &fx.matrix, &fx.policy, fit.theta, 0.0, t).unwrap();
            let b = r.bound.unwrap();
            assert!(r.measured_kt <= b + 1e-9);
        }
        let r = audit_rm(&fx.system, &fx.locations, &fx.matrix, &fx.policy, eta, 0.0, 3).unwrap();
        assert!((r.measured_kt - eta).abs() <= 1e-9, "{}", r.measured_kt);
        let r = audit_rm(&fx.system, &fx.locations, &fx.matrix, &fx.policy, eta / 2.0, 0.0, 3).unwrap();
        assert!(!r.rm1.holds && r.bound.is_none());
    }
}

#[test]
fn cnot_fixture_fails_rm3() {
    let fx = catalog::rm_cnot(FRAC_PI_2);
    let r = audit_rm(&fx.system, &fx.locations, &fx.matrix, &fx.policy, 0.0, 0.0, 3).unwrap();
    assert!(r.policy_ok);
    assert!(!r.rm3.holds);
    let w = r.rm3.witness.as_ref().unwrap();
    assert_eq!(w.agent.as_str(), "Alice");
    assert_eq!(w.command.as_ref().unwrap().as_str(), "CNOT");
    assert_eq!(w.k.as_ref().unwrap(), &set(&["n2"]));
    assert!(r.bound.is_none());
    // Witness reproduces: the command moves n2.
    let rho = fx.system.run(&w.rho).unwrap();
    let moved = fx.system.channel(&w.agent, w.command.as_ref().unwrap()).unwrap().apply(&rho).unwrap();
    assert!(discriminable(&fx.locations, &rho, &moved, 0.0, &set(&["n2"])).unwrap());

    let fit = fit_rm_constants(&fx.system, &fx.locations, &fx.matrix, &fx.policy, 3).unwrap();
    assert!(!fit.feasible && fit.eps.is_none());
    assert_eq!(fit.witness.unwrap().command.unwrap().as_str(), "CNOT");
}

#[test]
fn subset_cap_is_enforced() {
    let loc = LocationSpace::per_factor(&[2; 9]);
    assert_eq!(loc.all_subsets().len(), 512);
    let fx = catalog::rm_local();
    let mut cfg = crate::Config::default();
    cfg.limits.max_locations = 1;
    let err = audit_rm_with(&fx.system, &fx.locations, &fx.matrix, &fx.policy, 0.0, 0.0, 1, KRange::AllSubsets, &cfg);
    assert!(matches!(err, Err(Error::Limit(_))));
}

#[test]
fn read_oracle_certifies_local_fixture() {
    let fx = catalog::rm_local();
    let oracle = fx.matrix.read_oracle(&fx.locations, &fx.system).unwrap();
    let r = crate::unwinding::check_unwinding_one(&fx.system, &fx.policy, &oracle, 3).unwrap();
    assert_eq!(r.bound, Some(0.0));
}

fn random_family(rng: &mut impl rand::Rng) -> LocationFamily {
    let options: [&[&str]; 4] = [&[], &["n1"], &["n2"], &["n1", "n2"]];
    LocationFamily::from_lists(&[options[rng.random_range(0..4)], options[rng.random_range(0..4)]])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn delta_read_is_a_contractive_pseudo_distance(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let loc = LocationSpace::per_factor(&[2, 2]);
        let m = AccessMatrix::new().with_read("a", random_family(&mut rng));
        let a = AgentId::from("a");
        let xs: Vec<DensityOperator> = (0..3).map(|_| random::state(&mut rng, 4)).collect();
        let d = |i: usize, j: usize| delta_read(&m, &loc, &a, &xs[i], &xs[j]).unwrap();
        prop_assert!(d(0, 0).abs() <= 1e-9);
        prop_assert!((d(0, 1) - d(1, 0)).abs() <= 1e-9);
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
        prop_assert!(d(0, 1) <= trace_distance(&xs[0], &xs[1]).unwrap() + 1e-9);
        // Maximal sets suffice.
        let mut full: f64 = 0.0;
        for k in m.read(&a).sets() {
            let sel = loc.selection(k).unwrap();
            full = full.max(crate::linalg::trace_distance_matrices(
                &crate::linalg::partial_trace_matrix(xs[0].matrix(), &sel),
                &crate::linalg::partial_trace_matrix(xs[1].matrix(), &sel),
            ));
        }
        prop_assert!((full - d(0, 1)).abs() <= 1e-12);
    }

    #[test]
    fn fitted_audit_is_sound(seed in any::<u64>(), depth in 1usize..3) {
        let mut rng = random::rng(seed);
        let s = random::system(&mut rng, &random::SystemShape { dims: vec![2, 2], agents: 2, commands: 2 });
        let loc = LocationSpace::per_factor(&[2, 2]);
        let names: Vec<String> = s.agents().iter().map(|a| a.0.clone()).collect();
        let mut m = AccessMatrix::new();
        for a in &names {
            m = m.with_read(a.as_str(), random_family(&mut rng)).with_alter(a.as_str(), random_family(&mut rng));
        }
        let p = random::policy(&mut rng, &names, 0.5);
        let fit = fit_rm_constants(&s, &loc, &m, &p, depth).unwrap();
        let eps = fit.eps.unwrap_or(fit.needed_eps);
        // Errors with SoundnessError if a certified bound is beaten.
        let r = audit_rm(&s, &loc, &m, &p, fit.theta, eps, depth).unwrap();
        if fit.feasible {
            prop_assert!(r.rm1.holds && r.rm2.holds && r.rm3.holds);
        }
        if let Some(b) = r.bound {
            prop_assert!(r.measured_kt <= b + 1e-9);
        }
    }
}
