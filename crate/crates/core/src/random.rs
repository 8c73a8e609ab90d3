//! Seeded random states, unitaries, channels, measurements and small systems,
//! used by the property tests and the soundness harnesses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use std::collections::{BTreeMap, BTreeSet};

use crate::automaton::{AgentId, Capability, Policy, QuantumSystem};
use crate::composition::{CompositionKind, CompositionSpec, ExtensionChannel, GeneralisedSpec, SeparableComponent};
use crate::linalg::{ComplexMatrix, DensityOperator, KrausChannel, Povm, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| gaussian(rng)).collect();
    ComplexMatrix::new(rows, cols, data).expect("shape matches")
}

/// `G G† / tr(G G†)` with `G` of shape `dim × rank`.
pub fn state_of_rank(rng: &mut impl Rng, dim: usize, rank: usize) -> DensityOperator {
    let g = ginibre(rng, dim, rank.max(1));
    let m = &g * &g.adjoint();
    let t = m.trace().re;
    DensityOperator::new(m.scale_real(1.0 / t)).expect("Ginibre state is valid")
}

pub fn state(rng: &mut impl Rng, dim: usize) -> DensityOperator {
    let rank = rng.random_range(1..=dim);
    state_of_rank(rng, dim, rank)
}

pub fn pure_state(rng: &mut impl Rng, dim: usize) -> DensityOperator {
    state_of_rank(rng, dim, 1)
}

/// Haar-distributed unitary by Gram–Schmidt on a Ginibre matrix.
pub fn unitary(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    isometry(rng, dim, dim)
}

/// A `rows × cols` isometry (`V†V = I`), `rows ≥ cols`.
pub fn isometry(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(rows >= cols);
    let g = ginibre(rng, rows, cols);
    let mut cols_v: Vec<Vec<C64>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v: Vec<C64> = (0..rows).map(|i| g[(i, j)]).collect();
        for u in &cols_v {
            let overlap: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= overlap * ui;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        cols_v.push(v.into_iter().map(|x| x / norm).collect());
    }
    let data = (0..rows).flat_map(|i| cols_v.iter().map(move |c| c[i])).collect::<Vec<_>>();
    ComplexMatrix::new(rows, cols, data).expect("shape matches")
}

/// A channel with `k` Kraus operators, cut from a random Stinespring isometry.
pub fn channel(rng: &mut impl Rng, dim: usize, k: usize) -> KrausChannel {
    let v = isometry(rng, dim * k, dim);
    let kraus = (0..k)
        .map(|b| {
            let data = (0..dim).flat_map(|i| (0..dim).map(move |j| (b * dim + i, j))).map(|(i, j)| v[(i, j)]);
            ComplexMatrix::new(dim, dim, data.collect()).expect("shape matches")
        })
        .collect();
    KrausChannel::new(kraus).expect("isometry blocks are trace preserving")
}

/// A POVM with `n` outcomes, `E_i = K_i†K_i` from a random isometry.
pub fn povm(rng: &mut impl Rng, dim: usize, n: usize) -> Povm {
    let v = isometry(rng, dim * n, dim);
    let effects = (0..n)
        .map(|b| {
            let data = (0..dim).flat_map(|i| (0..dim).map(move |j| (b * dim + i, j))).map(|(i, j)| v[(i, j)]);
            let k = ComplexMatrix::new(dim, dim, data.collect()).expect("shape matches");
            (b.to_string(), &k.adjoint() * &k)
        })
        .collect();
    Povm::new(effects).expect("random effects are complete")
}

/// Random probability vector of length `n`.
pub fn distribution(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(2)).collect();
    let total: f64 = raw.iter().sum();
    if total == 0.0 {
        let mut v = vec![0.0; n];
        v[0] = 1.0;
        return v;
    }
    raw.into_iter().map(|x| x / total).collect()
}

/// Shape of a random system.
#[derive(Debug, Clone)]
pub struct SystemShape {
    pub dims: Vec<usize>,
    pub agents: usize,
    pub commands: usize,
}

/// A small random system. Each command is either a random channel on the
/// whole space, a local unitary on one factor, or left as the identity;
/// each agent measures either one factor in its computational basis, a
/// random POVM, or (rarely) everything.
pub fn system(rng: &mut impl Rng, shape: &SystemShape) -> QuantumSystem {
    let dim: usize = shape.dims.iter().product();
    let initial = if rng.random_bool(0.5) {
        pure_state(rng, dim)
    } else {
        state(rng, dim)
    };
    let agents: Vec<String> = (0..shape.agents).map(|i| format!("a{i}")).collect();
    let commands: Vec<String> = (0..shape.commands).map(|i| format!("c{i}")).collect();
    named_system(rng, &shape.dims, &agents, &commands, initial, false)
}

/// A channel whose Kraus operators are all diagonal, hence pairwise commuting.
pub fn commuting_channel(rng: &mut impl Rng, dim: usize, k: usize) -> KrausChannel {
    let columns: Vec<ComplexMatrix> = (0..dim).map(|_| isometry(rng, k, 1)).collect();
    let kraus = (0..k)
        .map(|i| {
            let mut m = ComplexMatrix::zeros(dim, dim);
            for (j, v) in columns.iter().enumerate() {
                m[(j, j)] = v[(i, 0)];
            }
            m
        })
        .collect();
    KrausChannel::new(kraus).expect("diagonal blocks of an isometry are trace preserving")
}

/// Like [`system`], with caller-chosen names and initial state. With
/// `commuting`, every channel's Kraus operators pairwise commute.
pub fn named_system(
    rng: &mut impl Rng,
    dims: &[usize],
    agents: &[String],
    commands: &[String],
    initial: DensityOperator,
    commuting: bool,
) -> QuantumSystem {
    let dim: usize = dims.iter().product();
    let mut b = QuantumSystem::builder(dims.to_vec(), initial);
    for c in commands {
        b = b.command(c.as_str());
    }
    for a in agents {
        for c in commands {
            let roll: f64 = rng.random();
            let e = if roll < 0.15 {
                continue;
            } else if roll < 0.55 {
                let f = rng.random_range(0..dims.len());
                KrausChannel::unitary(unitary(rng, dims[f]))
                    .and_then(|u| u.embed(dims, &[f]))
                    .expect("local unitary embeds")
            } else if roll < 0.8 {
                KrausChannel::unitary(unitary(rng, dim)).expect("unitary")
            } else if commuting {
                let k = rng.random_range(2..=3);
                commuting_channel(rng, dim, k)
            } else {
                let k = rng.random_range(2..=3);
                channel(rng, dim, k)
            };
            b = b.channel(a.as_str(), c.as_str(), e);
        }
        b = b.agent(a.as_str());
        let roll: f64 = rng.random();
        let cap = if roll < 0.6 {
            let f = rng.random_range(0..dims.len());
            Capability::new()
                .with_povm(format!("basis[{f}]"), Povm::computational_basis(dims, f).expect("factor"))
                .with_factors([f])
        } else if roll < 0.9 {
            let n = rng.random_range(2..=3);
            Capability::new().with_povm("random", povm(rng, dim, n))
        } else {
            Capability::new().with_unrestricted(dims)
        };
        b = b.capability(a.as_str(), cap);
    }
    b.build().expect("random system is well formed")
}

/// A reflexive policy over `agents` keeping each other edge with probability `p`.
pub fn policy(rng: &mut impl Rng, agents: &[String], p: f64) -> Policy {
    let ids: Vec<AgentId> = agents.iter().map(|a| AgentId::new(a.as_str())).collect();
    let mut edges = Vec::new();
    for a in &ids {
        for b in &ids {
            if a != b && rng.random_bool(p) {
                edges.push((a.clone(), b.clone()));
            }
        }
    }
    Policy::new(ids, edges).expect("edges use listed agents")
}

/// `Σ p_i ρ_i ⊗ ρ′_i` with `n` terms.
pub fn separable(rng: &mut impl Rng, d: usize, dp: usize, n: usize) -> Vec<SeparableComponent> {
    distribution(rng, n)
        .into_iter()
        .map(|weight| SeparableComponent {
            weight,
            left: state(rng, d),
            right: state(rng, dp),
        })
        .collect()
}

/// A generalised composition of two commuting random systems sharing at most
/// one agent, with a separable correlated initial state, some extensions
/// presented in a remixed product Kraus form, and compatible policies.
pub fn generalised_case(rng: &mut impl Rng, left_dims: &[usize], right_dims: &[usize]) -> (CompositionSpec, Policy, Policy) {
    let (d, dp): (usize, usize) = (left_dims.iter().product(), right_dims.iter().product());
    let terms = rng.random_range(1..=3);
    let parts = separable(rng, d, dp, terms);
    let mix = |f: &dyn Fn(&SeparableComponent) -> &DensityOperator, n: usize| {
        let comps = parts.iter().map(|c| (c.weight, f(c).clone())).collect();
        let rho = crate::linalg::mix(comps).expect("weights sum to one");
        debug_assert_eq!(rho.dim(), n);
        rho
    };
    let rho0 = mix(&|c| &c.left, d);
    let rho0p = mix(&|c| &c.right, dp);
    let mut sigma = ComplexMatrix::zeros(d * dp, d * dp);
    for c in &parts {
        sigma.add_assign_scaled(c.left.tensor(&c.right).matrix(), c.weight);
    }
    let sigma0 = DensityOperator::from_matrix_unchecked(sigma);

    let shared = rng.random_bool(0.5);
    let left_agents: Vec<String> = vec!["a0".into(), "a1".into()];
    let right_agents: Vec<String> = if shared {
        vec!["a1".into(), "b0".into()]
    } else {
        vec!["b0".into(), "b1".into()]
    };
    let mut all = left_agents.clone();
    all.extend(right_agents.iter().filter(|a| !left_agents.contains(a)).cloned());
    let joint = policy(rng, &all, 0.3);
    let restrict = |names: &[String]| {
        let ids: BTreeSet<AgentId> = names.iter().map(|a| AgentId::new(a.as_str())).collect();
        Policy::new(ids.iter().cloned(), joint.restrict(&ids)).expect("restricted edges use kept agents")
    };
    let (p, q) = (restrict(&left_agents), restrict(&right_agents));

    let nl = rng.random_range(1..=2);
    let nr = 1;
    let left_cmds: Vec<String> = (0..nl).map(|i| format!("c{i}")).collect();
    let right_cmds: Vec<String> = (0..nr).map(|i| format!("d{i}")).collect();
    let left = named_system(rng, left_dims, &left_agents, &left_cmds, rho0, true);
    let right = named_system(rng, right_dims, &right_agents, &right_cmds, rho0p, true);

    let mut extensions = BTreeMap::new();
    for (sys, is_left) in [(&left, true), (&right, false)] {
        for a in sys.agents() {
            for c in sys.commands() {
                if !rng.random_bool(0.5) {
                    continue;
                }
                let kraus = sys.channel(a, c).expect("pair exists").kraus();
                let u = unitary(rng, kraus.len());
                let remixed: Vec<(ComplexMatrix, ComplexMatrix)> = (0..kraus.len())
                    .map(|j| {
                        let mut k = ComplexMatrix::zeros(kraus[0].rows(), kraus[0].cols());
                        for (i, ki) in kraus.iter().enumerate() {
                            k = &k + &ki.scale(u[(j, i)]);
                        }
                        if is_left {
                            (k, ComplexMatrix::identity(dp))
                        } else {
                            (ComplexMatrix::identity(d), k)
                        }
                    })
                    .collect();
                extensions.insert((a.clone(), c.clone()), ExtensionChannel::Product(remixed));
            }
        }
    }
    let spec = CompositionSpec {
        left,
        right,
        kind: CompositionKind::Generalised(GeneralisedSpec {
            sigma0,
            decomposition: Some(parts),
            extensions,
            commutativity_declared: true,
        }),
    };
    (spec, p, q)
}
