//! Small reference systems: two qubits with local rotations and CNOTs, their
//! three-qubit chain extension, and idle systems whose commands do nothing.

use crate::access::{AccessMatrix, LocationFamily, LocationSpace};
use crate::automaton::{AgentId, Capability, Policy, QuantumSystem};
use crate::linalg::{gates, DensityOperator, KrausChannel, Povm};

fn basis_on(dims: &[usize], factor: usize) -> Capability {
    Capability::new()
        .with_povm(format!("basis[{factor}]"), Povm::computational_basis(dims, factor).expect("factor in range"))
        .with_factors([factor])
}

fn local(u: &crate::linalg::ComplexMatrix, dims: &[usize], targets: &[usize]) -> KrausChannel {
    KrausChannel::unitary(u.clone())
        .and_then(|e| e.embed(dims, targets))
        .expect("gate matches its targets")
}

/// Alice and Bob each rotate their own qubit by `Rx(θ)` and measure it in the computational basis.
pub fn rotations_only(theta: f64) -> QuantumSystem {
    let dims = vec![2, 2];
    let rx = gates::rx(theta);
    QuantumSystem::builder(dims.clone(), DensityOperator::basis(4, 0))
        .channel("Alice", "Rx", local(&rx, &dims, &[0]))
        .channel("Bob", "Rx", local(&rx, &dims, &[1]))
        .capability("Alice", basis_on(&dims, 0))
        .capability("Bob", basis_on(&dims, 1))
        .build()
        .expect("well-formed system")
}

/// [`rotations_only`] plus a CNOT that both agents execute with qubit 1 as control.
pub fn one_way_cnot(theta: f64) -> QuantumSystem {
    let dims = vec![2, 2];
    let rx = gates::rx(theta);
    let cx = local(&gates::cnot(), &dims, &[0, 1]);
    QuantumSystem::builder(dims.clone(), DensityOperator::basis(4, 0))
        .channel("Alice", "Rx", local(&rx, &dims, &[0]))
        .channel("Bob", "Rx", local(&rx, &dims, &[1]))
        .channel("Alice", "CNOT", cx.clone())
        .channel("Bob", "CNOT", cx)
        .capability("Alice", basis_on(&dims, 0))
        .capability("Bob", basis_on(&dims, 1))
        .build()
        .expect("well-formed system")
}

/// Like [`one_way_cnot`] but Bob's CNOT uses qubit 2 as control.
pub fn two_way_cnot(theta: f64) -> QuantumSystem {
    let dims = vec![2, 2];
    let rx = gates::rx(theta);
    QuantumSystem::builder(dims.clone(), DensityOperator::basis(4, 0))
        .channel("Alice", "Rx", local(&rx, &dims, &[0]))
        .channel("Bob", "Rx", local(&rx, &dims, &[1]))
        .channel("Alice", "CNOT", local(&gates::cnot(), &dims, &[0, 1]))
        .channel("Bob", "CNOT", local(&gates::cnot(), &dims, &[1, 0]))
        .capability("Alice", basis_on(&dims, 0))
        .capability("Bob", basis_on(&dims, 1))
        .build()
        .expect("well-formed system")
}

/// Three qubits, one per agent (Alice, Bob, Charles), rotations only.
pub fn chain_rotations(theta: f64) -> QuantumSystem {
    let dims = vec![2, 2, 2];
    let rx = gates::rx(theta);
    QuantumSystem::builder(dims.clone(), DensityOperator::basis(8, 0))
        .channel("Alice", "Rx", local(&rx, &dims, &[0]))
        .channel("Bob", "Rx", local(&rx, &dims, &[1]))
        .channel("Charles", "Rx", local(&rx, &dims, &[2]))
        .capability("Alice", basis_on(&dims, 0))
        .capability("Bob", basis_on(&dims, 1))
        .capability("Charles", basis_on(&dims, 2))
        .build()
        .expect("well-formed system")
}

/// [`chain_rotations`] plus CNOT: Alice's acts 1→2, Bob's 2→3, Charles's does nothing.
pub fn chain_cnot(theta: f64) -> QuantumSystem {
    let dims = vec![2, 2, 2];
    let rx = gates::rx(theta);
    QuantumSystem::builder(dims.clone(), DensityOperator::basis(8, 0))
        .channel("Alice", "Rx", local(&rx, &dims, &[0]))
        .channel("Bob", "Rx", local(&rx, &dims, &[1]))
        .channel("Charles", "Rx", local(&rx, &dims, &[2]))
        .channel("Alice", "CNOT", local(&gates::cnot(), &dims, &[0, 1]))
        .channel("Bob", "CNOT", local(&gates::cnot(), &dims, &[1, 2]))
        .capability("Alice", basis_on(&dims, 0))
        .capability("Bob", basis_on(&dims, 1))
        .capability("Charles", basis_on(&dims, 2))
        .build()
        .expect("well-formed system")
}

/// `Alice ⤳ Bob ⤳ Charles` (reflexive closure only).
pub fn chain_policy() -> Policy {
    let ids = ["Alice", "Bob", "Charles"].map(AgentId::from);
    Policy::new(
        ids.clone(),
        [(ids[0].clone(), ids[1].clone()), (ids[1].clone(), ids[2].clone())],
    )
    .expect("agents exist")
}

/// Agents that only observe each other: every command is the identity.
pub fn idle(dims: Vec<usize>, agents: &[&str], commands: &[&str]) -> QuantumSystem {
    let dim: usize = dims.iter().product();
    let mut b = QuantumSystem::builder(dims.clone(), DensityOperator::basis(dim, 0));
    for (i, a) in agents.iter().enumerate() {
        let f = i % dims.len();
        b = b.agent(*a).capability(*a, basis_on(&dims, f));
    }
    for c in commands {
        b = b.command(*c);
    }
    b.build().expect("well-formed system")
}

/// A system over named locations with an access matrix and a policy.
#[derive(Debug, Clone)]
pub struct AccessFixture {
    pub system: QuantumSystem,
    pub locations: LocationSpace,
    pub matrix: AccessMatrix,
    pub policy: Policy,
}

fn own_location(i: usize) -> LocationFamily {
    LocationFamily::from_lists(&[&[format!("n{}", i + 1)]])
}

fn local_pair(alice_cap: Capability) -> QuantumSystem {
    let dims = vec![2, 2];
    let rx = gates::rx(std::f64::consts::FRAC_PI_2);
    let h = gates::hadamard();
    QuantumSystem::builder(dims.clone(), DensityOperator::basis(4, 0))
        .channel("Alice", "Rx", local(&rx, &dims, &[0]))
        .channel("Bob", "Rx", local(&rx, &dims, &[1]))
        .channel("Alice", "H", local(&h, &dims, &[0]))
        .channel("Bob", "H", local(&h, &dims, &[1]))
        .capability("Alice", alice_cap)
        .capability("Bob", basis_on(&dims, 1))
        .build()
        .expect("well-formed system")
}

fn local_matrix() -> AccessMatrix {
    AccessMatrix::new()
        .with_read("Alice", own_location(0))
        .with_alter("Alice", own_location(0))
        .with_read("Bob", own_location(1))
        .with_alter("Bob", own_location(1))
}

/// Two qubits as locations `n1`, `n2`; each agent acts on, reads and alters only its own.
pub fn rm_local() -> AccessFixture {
    AccessFixture {
        system: local_pair(basis_on(&[2, 2], 0)),
        locations: LocationSpace::per_factor(&[2, 2]),
        matrix: local_matrix(),
        policy: Policy::reflexive(["Alice", "Bob"].map(AgentId::from)),
    }
}

/// [`rm_local`] where Alice's measurement leaks: `E_λ = (1−η) P_λ ⊗ I + η I ⊗ P_λ`.
pub fn rm_noisy(eta: f64) -> AccessFixture {
    let dims = [2, 2];
    let own = Povm::computational_basis(&dims, 0).expect("factor 0");
    let other = Povm::computational_basis(&dims, 1).expect("factor 1");
    let effects = own
        .outcomes()
        .iter()
        .zip(other.outcomes())
        .map(|((l, e), (_, f))| (l.clone(), &e.scale_real(1.0 - eta) + &f.scale_real(eta)))
        .collect();
    let leaky = Povm::new(effects).expect("mixture of complete POVMs");
    AccessFixture {
        system: local_pair(Capability::new().with_povm("leaky", leaky).with_factors([0, 1])),
        ..rm_local()
    }
}

/// [`one_way_cnot`] with local alter rights: Alice's CNOT changes `n2` without the right to.
/// Bob may also read `n1`, so the matrix satisfies Alice ⤳ Bob.
pub fn rm_cnot(theta: f64) -> AccessFixture {
    let ids = ["Alice", "Bob"].map(AgentId::from);
    AccessFixture {
        system: one_way_cnot(theta),
        locations: LocationSpace::per_factor(&[2, 2]),
        matrix: AccessMatrix::new()
            .with_read("Alice", own_location(0))
            .with_alter("Alice", own_location(0))
            .with_read("Bob", LocationFamily::from_lists(&[&["n1"], &["n2"]]))
            .with_alter("Bob", own_location(1)),
        policy: Policy::new(ids.clone(), [(ids[0].clone(), ids[1].clone())]).expect("agents exist"),
    }
}
