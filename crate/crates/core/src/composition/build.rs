use std::collections::{BTreeMap, BTreeSet};

use crate::automaton::{AgentId, Capability, CommandId, Policy, QuantumSystem};
use crate::config::TOL_VALIDATION;
use crate::error::{Error, Result};
use crate::linalg::{c, partial_trace, ComplexMatrix, DensityOperator, KrausChannel};

/// Kraus operators of a joint-space channel, optionally in product form `F_i ⊗ F′_i`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtensionChannel {
    Product(Vec<(ComplexMatrix, ComplexMatrix)>),
    General(KrausChannel),
}

/// `p · ρ ⊗ ρ′`, one term of a declared separable decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableComponent {
    pub weight: f64,
    pub left: DensityOperator,
    pub right: DensityOperator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralisedSpec {
    pub sigma0: DensityOperator,
    pub decomposition: Option<Vec<SeparableComponent>>,
    /// Pairs without an entry use the plain lift `E ⊗ I` (or `I ⊗ E′`).
    pub extensions: BTreeMap<(AgentId, CommandId), ExtensionChannel>,
    pub commutativity_declared: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CompositionKind {
    Direct,
    Generalised(GeneralisedSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionSpec {
    pub left: QuantumSystem,
    pub right: QuantumSystem,
    pub kind: CompositionKind,
}

pub fn compose(spec: &CompositionSpec) -> Result<QuantumSystem> {
    match spec.kind {
        CompositionKind::Direct => compose_direct(&spec.left, &spec.right),
        CompositionKind::Generalised(_) => compose_generalised(spec),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
    Cross,
}

struct Frame<'a> {
    left: &'a QuantumSystem,
    right: &'a QuantumSystem,
    dims: Vec<usize>,
    agents: Vec<AgentId>,
    commands: Vec<CommandId>,
}

impl<'a> Frame<'a> {
    fn new(left: &'a QuantumSystem, right: &'a QuantumSystem) -> Result<Self> {
        let lc: BTreeSet<_> = left.commands().iter().collect();
        let clash: Vec<String> = right.commands().iter().filter(|c| lc.contains(c)).map(|c| c.0.clone()).collect();
        if !clash.is_empty() {
            return Err(Error::CommandClash(clash));
        }
        let agents: BTreeSet<AgentId> = left.agents().iter().chain(right.agents()).cloned().collect();
        let commands: BTreeSet<CommandId> = left.commands().iter().chain(right.commands()).cloned().collect();
        let mut dims = left.dims().to_vec();
        dims.extend_from_slice(right.dims());
        Ok(Self {
            left,
            right,
            dims,
            agents: agents.into_iter().collect(),
            commands: commands.into_iter().collect(),
        })
    }

    fn side(&self, a: &AgentId, c: &CommandId) -> Side {
        if self.left.agent_index(a).is_ok() && self.left.command_index(c).is_ok() {
            Side::Left
        } else if self.right.agent_index(a).is_ok() && self.right.command_index(c).is_ok() {
            Side::Right
        } else {
            Side::Cross
        }
    }

    fn pairs(&self) -> impl Iterator<Item = (&AgentId, &CommandId)> {
        self.agents.iter().flat_map(move |a| self.commands.iter().map(move |c| (a, c)))
    }

    /// `E ⊗ I`, `I ⊗ E′` or `I ⊗ I`, as product Kraus factors.
    fn lift(&self, a: &AgentId, c: &CommandId) -> Vec<(ComplexMatrix, ComplexMatrix)> {
        let (d, dp) = (self.left.dim(), self.right.dim());
        match self.side(a, c) {
            Side::Left => {
                let e = self.left.channel(a, c).expect("left pair");
                e.kraus().iter().map(|k| (k.clone(), ComplexMatrix::identity(dp))).collect()
            }
            Side::Right => {
                let e = self.right.channel(a, c).expect("right pair");
                e.kraus().iter().map(|k| (ComplexMatrix::identity(d), k.clone())).collect()
            }
            Side::Cross => vec![(ComplexMatrix::identity(d), ComplexMatrix::identity(dp))],
        }
    }

    /// `N_a`: each side's measurements tensored with the identity on the other side.
    fn capabilities(&self) -> Result<Vec<Capability>> {
        let (ld, rd) = (self.left.dims(), self.right.dims());
        self.agents
            .iter()
            .map(|a| {
                let l = self.left.capability(a).ok().map(|cap| cap.embed(&[], ld, rd)).transpose()?;
                let r = self.right.capability(a).ok().map(|cap| cap.embed(ld, rd, &[])).transpose()?;
                Ok(match (l, r) {
                    (Some(l), Some(r)) => l.union(r),
                    (Some(x), None) | (None, Some(x)) => x,
                    (None, None) => unreachable!("agent comes from one side"),
                })
            })
            .collect()
    }

    fn assemble(&self, initial: DensityOperator, channels: Vec<KrausChannel>) -> Result<QuantumSystem> {
        Ok(QuantumSystem::from_parts(
            self.dims.clone(),
            initial,
            self.agents.clone(),
            self.commands.clone(),
            channels,
            self.capabilities()?,
        ))
    }
}

fn product_channel(factors: &[(ComplexMatrix, ComplexMatrix)]) -> KrausChannel {
    KrausChannel::from_kraus_unchecked(factors.iter().map(|(f, g)| f.kron(g)).collect())
}

/// The product system on `H ⊗ H′` with initial state `ρ0 ⊗ ρ0′`.
pub fn compose_direct(left: &QuantumSystem, right: &QuantumSystem) -> Result<QuantumSystem> {
    let frame = Frame::new(left, right)?;
    let channels = frame.pairs().map(|(a, c)| product_channel(&frame.lift(a, c))).collect();
    frame.assemble(left.initial().tensor(right.initial()), channels)
}

/// `true` iff both policies agree on the shared agents.
pub fn policies_compatible(p: &Policy, q: &Policy) -> bool {
    let shared: BTreeSet<AgentId> = p.agents().intersection(q.agents()).cloned().collect();
    p.restrict(&shared) == q.restrict(&shared)
}

pub fn union_policy(p: &Policy, q: &Policy) -> Result<Policy> {
    if !policies_compatible(p, q) {
        let shared: BTreeSet<AgentId> = p.agents().intersection(q.agents()).cloned().collect();
        let diff: Vec<String> = p
            .restrict(&shared)
            .symmetric_difference(&q.restrict(&shared))
            .map(|(a, b)| format!("{a}->{b}"))
            .collect();
        return Err(Error::IncompatiblePolicies(diff.join(", ")));
    }
    Ok(Policy::from_parts(
        p.agents().union(q.agents()).cloned().collect(),
        p.edges().union(q.edges()).cloned().collect(),
    ))
}

/// Hermitian operators spanning all `n × n` matrices.
fn hermitian_basis(n: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in j..n {
            let mut m = ComplexMatrix::zeros(n, n);
            if j == k {
                m[(j, j)] = c(1.0, 0.0);
                out.push(m);
                continue;
            }
            m[(j, k)] = c(1.0, 0.0);
            m[(k, j)] = c(1.0, 0.0);
            out.push(m);
            let mut m = ComplexMatrix::zeros(n, n);
            m[(j, k)] = c(0.0, 1.0);
            m[(k, j)] = c(0.0, -1.0);
            out.push(m);
        }
    }
    out
}

fn extension_error(condition: &'static str, detail: String, residual: f64) -> Error {
    Error::Extension {
        condition,
        detail,
        residual,
    }
}

pub(crate) struct Validated {
    pub system: QuantumSystem,
    /// Product factors of every joint channel, when all of them are in product form.
    pub product: Option<Vec<Vec<(ComplexMatrix, ComplexMatrix)>>>,
}

fn check_cylindrical(frame: &Frame, side: Side, e: &KrausChannel, f: &KrausChannel, label: &str) -> Result<()> {
    let (d, dp) = (frame.left.dim(), frame.right.dim());
    let dims = [d, dp];
    let mut worst: f64 = 0.0;
    let mixed_left = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
    let mixed_right = ComplexMatrix::identity(dp).scale_real(1.0 / dp as f64);
    for x in hermitian_basis(d) {
        let out = partial_trace(&f.apply_operator(&x.kron(&mixed_right)), &dims, &[0])?;
        let want = match side {
            Side::Left => e.apply_operator(&x),
            _ => x,
        };
        worst = worst.max(out.max_abs_diff(&want));
    }
    for y in hermitian_basis(dp) {
        let out = partial_trace(&f.apply_operator(&mixed_left.kron(&y)), &dims, &[1])?;
        let want = match side {
            Side::Right => e.apply_operator(&y),
            _ => y,
        };
        worst = worst.max(out.max_abs_diff(&want));
    }
    if worst > TOL_VALIDATION {
        return Err(extension_error(
            "(b) cylindrical extension",
            format!("channel for {label} does not reproduce its marginals"),
            worst,
        ));
    }
    Ok(())
}

fn commutation_residual(ops: &[&ComplexMatrix]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..ops.len() {
        for j in i + 1..ops.len() {
            let ab = ops[i].mul_unchecked(ops[j]);
            let ba = ops[j].mul_unchecked(ops[i]);
            worst = worst.max(ab.max_abs_diff(&ba));
        }
    }
    worst
}

pub(crate) fn validate_generalised(spec: &CompositionSpec) -> Result<Validated> {
    let CompositionKind::Generalised(g) = &spec.kind else {
        return Err(Error::model("expected a generalised composition spec"));
    };
    let frame = Frame::new(&spec.left, &spec.right)?;
    let (d, dp) = (spec.left.dim(), spec.right.dim());
    if g.sigma0.dim() != d * dp {
        return Err(Error::dim(format!("sigma0 has dimension {}, expected {}", g.sigma0.dim(), d * dp)));
    }

    let dims = [d, dp];
    let l = partial_trace(g.sigma0.matrix(), &dims, &[0])?;
    let r = partial_trace(g.sigma0.matrix(), &dims, &[1])?;
    let residual = l
        .max_abs_diff(spec.left.initial().matrix())
        .max(r.max_abs_diff(spec.right.initial().matrix()));
    if residual > TOL_VALIDATION {
        return Err(extension_error(
            "(a) extension of both initial states",
            "partial traces of sigma0 differ from the component initial states".into(),
            residual,
        ));
    }

    if let Some(parts) = &g.decomposition {
        let mut mix = ComplexMatrix::zeros(d * dp, d * dp);
        let mut total = 0.0;
        for p in parts {
            if p.weight < 0.0 || p.left.dim() != d || p.right.dim() != dp {
                return Err(Error::Ensemble("separable decomposition term is malformed".into()));
            }
            mix.add_assign_scaled(p.left.tensor(&p.right).matrix(), p.weight);
            total += p.weight;
        }
        let residual = mix.max_abs_diff(g.sigma0.matrix()).max((total - 1.0).abs());
        if residual > TOL_VALIDATION {
            return Err(extension_error(
                "(c) separable initial state",
                "declared decomposition does not mix to sigma0".into(),
                residual,
            ));
        }
    }

    for (a, cmd) in g.extensions.keys() {
        if !frame.agents.contains(a) || !frame.commands.contains(cmd) {
            return Err(Error::model(format!("extension for unknown pair ({a},{cmd})")));
        }
        if frame.side(a, cmd) == Side::Cross {
            return Err(extension_error(
                "identity on cross pairs",
                format!("({a},{cmd}) must be the identity"),
                f64::NAN,
            ));
        }
    }

    let mut channels = Vec::new();
    let mut product = Some(Vec::new());
    for (a, cmd) in frame.pairs() {
        let (f, factors) = match g.extensions.get(&(a.clone(), cmd.clone())) {
            None => {
                let factors = frame.lift(a, cmd);
                (product_channel(&factors), Some(factors))
            }
            Some(ExtensionChannel::Product(factors)) => {
                if factors.iter().any(|(x, y)| x.rows() != d || !x.is_square() || y.rows() != dp || !y.is_square()) {
                    return Err(Error::dim(format!("product Kraus factors for ({a},{cmd}) have the wrong shape")));
                }
                let f = KrausChannel::new(factors.iter().map(|(x, y)| x.kron(y)).collect())?;
                (f, Some(factors.clone()))
            }
            Some(ExtensionChannel::General(f)) => {
                if f.dim_in() != d * dp {
                    return Err(Error::dim(format!("extension for ({a},{cmd}) has the wrong dimension")));
                }
                (f.clone(), None)
            }
        };
        let side = frame.side(a, cmd);
        let component = match side {
            Side::Left => Some(spec.left.channel(a, cmd)?),
            Side::Right => Some(spec.right.channel(a, cmd)?),
            Side::Cross => None,
        };
        if let Some(e) = component {
            check_cylindrical(&frame, side, e, &f, &format!("({a},{cmd})"))?;
        }
        if g.commutativity_declared {
            let Some(factors) = &factors else {
                return Err(extension_error(
                    "(d) commutativity",
                    format!("({a},{cmd}) is not given in product form"),
                    f64::NAN,
                ));
            };
            let lefts: Vec<_> = factors.iter().map(|(x, _)| x).collect();
            let rights: Vec<_> = factors.iter().map(|(_, y)| y).collect();
            let residual = commutation_residual(&lefts).max(commutation_residual(&rights));
            if residual > TOL_VALIDATION {
                return Err(extension_error(
                    "(d) commutativity",
                    format!("Kraus factors of ({a},{cmd}) do not commute"),
                    residual,
                ));
            }
        }
        match (&mut product, factors) {
            (Some(v), Some(fs)) => v.push(fs),
            _ => product = None,
        }
        channels.push(f);
    }
    Ok(Validated {
        system: frame.assemble(g.sigma0.clone(), channels)?,
        product,
    })
}

/// Validates the extension conditions and builds the joint system.
pub fn compose_generalised(spec: &CompositionSpec) -> Result<QuantumSystem> {
    Ok(validate_generalised(spec)?.system)
}
