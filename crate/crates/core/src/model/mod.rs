//! JSON model files: systems (`.qsys`), oracle tables and composition extras.
//!
//! Matrices are nested arrays whose entries are real numbers or `[re, im]` pairs.

mod raw;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::access::{AccessMatrix, LocationFamily, LocationSpace};
use crate::automaton::{ActionSequence, AgentId, Capability, CommandId, Policy, QuantumSystem};
use crate::composition::{CompositionKind, CompositionSpec, ExtensionChannel, GeneralisedSpec, SeparableComponent};
use crate::config::TOL_VALIDATION;
use crate::error::{Error, Result};
use crate::linalg::{
    c, density_checks, gates, kraus_checks, povm_checks, ComplexMatrix, DensityOperator, Ensemble, KrausChannel, Povm,
    Subsystems, ValidationReport,
};
use crate::unwinding::{TableDistance, TableEquivalence};

pub use raw::CompositionExtras;

/// A loaded system with the optional sections of its file.
#[derive(Debug, Clone)]
pub struct Model {
    pub name: Option<String>,
    pub system: QuantumSystem,
    pub policy: Option<Policy>,
    pub locations: Option<LocationSpace>,
    pub access: Option<AccessMatrix>,
    pub decompositions: Vec<Ensemble>,
    pub warnings: Vec<String>,
}

impl Model {
    pub fn policy(&self) -> Result<&Policy> {
        self.policy.as_ref().ok_or_else(|| Error::model("model has no policy section"))
    }
}

/// Outcome of checking a model file without giving up at the first problem.
#[derive(Debug, Clone, Serialize)]
pub struct ModelValidation {
    pub ok: bool,
    pub reports: Vec<ValidationReport>,
    pub problems: Vec<String>,
    pub warnings: Vec<String>,
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub(crate) fn parse<T: DeserializeOwned>(text: &str, path: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: path.to_string(),
        detail: format!("field `{}`: {}", e.path(), e.inner()),
    })
}

pub fn load_model(path: &Path) -> Result<Model> {
    model_from_str(&read_file(path)?, &path.display().to_string(), TOL_VALIDATION)
}

pub fn model_from_str(text: &str, path: &str, tol: f64) -> Result<Model> {
    let raw: raw::Model = parse(text, path)?;
    Builder::new(&raw.dims, tol)?.model(&raw)
}

/// Parses, then lists every failed numerical check with its residual; only parse errors are `Err`.
pub fn validate_model_str(text: &str, path: &str, tol: f64) -> Result<ModelValidation> {
    let raw: raw::Model = parse(text, path)?;
    let mut reports = Vec::new();
    let mut problems = Vec::new();
    match Builder::new(&raw.dims, tol) {
        Err(e) => problems.push(e.to_string()),
        Ok(b) => {
            b.raw_checks(&raw, &mut reports, &mut problems);
            if problems.is_empty() && reports.iter().all(ValidationReport::passed) {
                match b.model(&raw) {
                    Ok(m) => {
                        return Ok(ModelValidation {
                            ok: true,
                            reports: m.system.validate(tol),
                            problems,
                            warnings: m.warnings,
                        })
                    }
                    Err(e) => problems.push(e.to_string()),
                }
            }
        }
    }
    Ok(ModelValidation {
        ok: false,
        reports: reports.into_iter().filter(|r| !r.passed()).collect(),
        problems,
        warnings: Vec::new(),
    })
}

struct Builder {
    dims: Vec<usize>,
    dim: usize,
    tol: f64,
}

fn matrix(m: &raw::Matrix, field: &str) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<_>> = m
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| match *e {
                    raw::Entry::Real(x) => c(x, 0.0),
                    raw::Entry::Complex([re, im]) => c(re, im),
                })
                .collect()
        })
        .collect();
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::model(format!("{field}: empty matrix")));
    }
    ComplexMatrix::from_rows(rows).map_err(|e| Error::model(format!("{field}: {e}")))
}

fn entries(v: &[raw::Entry]) -> Vec<crate::linalg::C64> {
    v.iter()
        .map(|e| match *e {
            raw::Entry::Real(x) => c(x, 0.0),
            raw::Entry::Complex([re, im]) => c(re, im),
        })
        .collect()
}

fn context(field: String) -> impl FnOnce(Error) -> Error {
    move |e| match e {
        Error::Dimension(d) => Error::Dimension(format!("{field}: {d}")),
        Error::Model(d) => Error::Model(format!("{field}: {d}")),
        Error::Ensemble(d) => Error::Ensemble(format!("{field}: {d}")),
        other => other,
    }
}

impl Builder {
    fn new(dims: &[usize], tol: f64) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::dim(format!("dims: invalid factor dims {dims:?}")));
        }
        Ok(Self {
            dims: dims.to_vec(),
            dim: dims.iter().product(),
            tol,
        })
    }

    fn state_on(&self, s: &raw::State, dim: usize, field: &str) -> Result<DensityOperator> {
        let rho = match s {
            raw::State::Matrix(m) => DensityOperator::with_tolerance(matrix(m, field)?, self.tol),
            raw::State::Pure { pure } => DensityOperator::pure(&entries(pure)),
            raw::State::Basis { basis } => {
                if *basis >= dim {
                    return Err(Error::dim(format!("{field}: basis index {basis} out of range")));
                }
                Ok(DensityOperator::basis(dim, *basis))
            }
            raw::State::Mixed { maximally_mixed: true } => Ok(DensityOperator::maximally_mixed(dim)),
            raw::State::Mixed { .. } => Err(Error::model(format!("{field}: maximally_mixed must be true"))),
            raw::State::Ensemble { ensemble } => Ok(self.ensemble_on(ensemble, dim, field)?.mix()),
        }
        .map_err(context(field.to_string()))?;
        if rho.dim() != dim {
            return Err(Error::dim(format!("{field}: state has dimension {}, expected {dim}", rho.dim())));
        }
        Ok(rho)
    }

    fn ensemble_on(&self, parts: &[raw::Weighted], dim: usize, field: &str) -> Result<Ensemble> {
        let comps = parts
            .iter()
            .enumerate()
            .map(|(i, w)| Ok((w.weight, self.state_on(&w.state, dim, &format!("{field}[{i}].state"))?)))
            .collect::<Result<Vec<_>>>()?;
        Ensemble::with_tolerance(comps, self.tol).map_err(context(field.to_string()))
    }

    fn operators(&self, a: &raw::Action, field: &str) -> Result<Vec<ComplexMatrix>> {
        let given = [a.kraus.is_some(), a.unitary.is_some(), a.gate.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(Error::model(format!("{field}: give exactly one of kraus, unitary, gate")));
        }
        if a.theta.is_some() && a.gate.is_none() {
            return Err(Error::model(format!("{field}: theta only applies to gates")));
        }
        if let Some(ks) = &a.kraus {
            return ks
                .iter()
                .enumerate()
                .map(|(i, k)| matrix(k, &format!("{field}.kraus[{i}]")))
                .collect();
        }
        if let Some(u) = &a.unitary {
            return Ok(vec![matrix(u, &format!("{field}.unitary"))?]);
        }
        let name = a.gate.as_deref().unwrap_or_default();
        gates::named(name, a.theta)
            .map(|u| vec![u])
            .ok_or_else(|| Error::model(format!("{field}: unknown gate {name:?} (theta given: {})", a.theta.is_some())))
    }

    fn channel(&self, a: &raw::Action, field: &str) -> Result<KrausChannel> {
        let e = KrausChannel::with_tolerance(self.operators(a, field)?, self.tol).map_err(context(field.to_string()))?;
        match &a.targets {
            Some(t) => e.embed(&self.dims, t).map_err(context(field.to_string())),
            None => Ok(e),
        }
    }

    fn povm(&self, p: &raw::PovmSpec, index: usize, field: &str) -> Result<(String, Povm, Option<usize>)> {
        let effects = |map: &BTreeMap<String, raw::Matrix>| {
            map.iter()
                .map(|(l, m)| Ok((l.clone(), matrix(m, &format!("{field}.{l}"))?)))
                .collect::<Result<Vec<_>>>()
        };
        match p {
            raw::PovmSpec::Basis { basis } => Ok((
                format!("basis[{basis}]"),
                Povm::computational_basis(&self.dims, *basis).map_err(context(field.to_string()))?,
                Some(*basis),
            )),
            raw::PovmSpec::Plain(map) => {
                let povm = Povm::with_tolerance(effects(map)?, self.tol).map_err(context(field.to_string()))?;
                Ok((format!("povm{index}"), povm, None))
            }
            raw::PovmSpec::Named { name, effects: map, targets } => {
                let povm = Povm::with_tolerance(effects(map)?, self.tol).map_err(context(field.to_string()))?;
                let povm = match targets {
                    Some(t) => povm.embed(&self.dims, t).map_err(context(field.to_string()))?,
                    None => povm,
                };
                Ok((name.clone(), povm, None))
            }
        }
    }

    fn capability(&self, m: &raw::Measure, field: &str) -> Result<Capability> {
        let mut cap = Capability::new();
        for (i, p) in m.povms.iter().enumerate() {
            let (name, povm, factor) = self.povm(p, i, &format!("{field}.povms[{i}]"))?;
            cap = cap.with_povm(name, povm);
            if let Some(f) = factor {
                cap = cap.with_factors([f]);
            }
        }
        for (i, v) in m.views.iter().enumerate() {
            let sel = Subsystems::new(self.dims.clone(), v.clone()).map_err(context(format!("{field}.views[{i}]")))?;
            cap = cap.with_view(format!("view{v:?}"), sel);
        }
        if m.unrestricted {
            cap = cap.with_unrestricted(&self.dims);
        }
        if let Some(f) = &m.factors {
            cap = cap.with_factors(f.iter().copied());
        }
        Ok(cap)
    }

    fn model(&self, raw: &raw::Model) -> Result<Model> {
        let agents: BTreeSet<&str> = raw.agents.iter().map(String::as_str).collect();
        let commands: BTreeSet<&str> = raw.commands.iter().map(String::as_str).collect();
        if agents.len() != raw.agents.len() || commands.len() != raw.commands.len() {
            return Err(Error::model("agents and commands must be listed without repeats"));
        }
        let initial = self.state_on(&raw.initial, self.dim, "initial")?;
        let mut b = QuantumSystem::builder(self.dims.clone(), initial);
        for a in &raw.agents {
            b = b.agent(a.as_str());
        }
        for c in &raw.commands {
            b = b.command(c.as_str());
        }
        let mut seen = BTreeSet::new();
        for (i, a) in raw.actions.iter().enumerate() {
            let field = format!("do[{i}]");
            if !agents.contains(a.agent.as_str()) || !commands.contains(a.command.as_str()) {
                return Err(Error::model(format!("{field}: unknown agent or command ({},{})", a.agent, a.command)));
            }
            if !seen.insert((a.agent.as_str(), a.command.as_str())) {
                return Err(Error::model(format!("{field}: ({},{}) is given twice", a.agent, a.command)));
            }
            b = b.channel(a.agent.as_str(), a.command.as_str(), self.channel(a, &field)?);
        }
        let mut measured = BTreeSet::new();
        for (i, m) in raw.measure.iter().enumerate() {
            let field = format!("measure[{i}]");
            if !agents.contains(m.agent.as_str()) || !measured.insert(m.agent.as_str()) {
                return Err(Error::model(format!("{field}: unknown or repeated agent {}", m.agent)));
            }
            b = b.capability(m.agent.as_str(), self.capability(m, &field)?);
        }
        let system = b.build()?;

        let mut warnings: Vec<String> = system
            .defaulted()
            .iter()
            .map(|x| format!("{x} defaulted to identity"))
            .collect();
        for a in system.agents() {
            if !measured.contains(a.as_str()) {
                warnings.push(format!("agent {a} has no measurements"));
            }
        }
        let policy = match &raw.policy {
            None => None,
            Some(edges) => {
                let (p, added) = Policy::with_closure_report(
                    system.agents().iter().cloned(),
                    edges.iter().map(|(a, b)| (AgentId::new(a.as_str()), AgentId::new(b.as_str()))),
                )
                .map_err(context("policy".into()))?;
                warnings.extend(added.iter().map(|a| format!("policy: added reflexive edge {a}->{a}")));
                Some(p)
            }
        };
        let locations = raw
            .locations
            .as_ref()
            .map(|ls| {
                let loc = LocationSpace::new(ls.iter().map(|l| (l.name.clone(), l.dim)).collect())
                    .map_err(context("locations".into()))?;
                loc.check_system(&system).map_err(context("locations".into()))?;
                Ok::<_, Error>(loc)
            })
            .transpose()?;
        let access = match (&raw.access, &locations) {
            (None, _) => None,
            (Some(_), None) => return Err(Error::model("access: needs a locations section")),
            (Some(acc), Some(loc)) => {
                let family = |m: &BTreeMap<String, Vec<Vec<String>>>| {
                    m.iter()
                        .map(|(a, sets)| {
                            (
                                AgentId::new(a.as_str()),
                                LocationFamily::below_closure(sets.iter().map(|s| s.iter().cloned().collect())),
                            )
                        })
                        .collect()
                };
                let m = AccessMatrix {
                    read: family(&acc.read),
                    alter: family(&acc.alter),
                };
                m.validate(loc, &system.agents().iter().cloned().collect())
                    .map_err(context("access".into()))?;
                Some(m)
            }
        };
        let decompositions = raw
            .decompositions
            .iter()
            .enumerate()
            .map(|(i, d)| self.ensemble_on(d, self.dim, &format!("decompositions[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Model {
            name: raw.name.clone(),
            system,
            policy,
            locations,
            access,
            decompositions,
            warnings,
        })
    }

    /// Checks on raw matrices that report residuals rather than stopping.
    fn raw_checks(&self, raw: &raw::Model, reports: &mut Vec<ValidationReport>, problems: &mut Vec<String>) {
        let state = |s: &raw::State, field: String, reports: &mut Vec<ValidationReport>, problems: &mut Vec<String>| {
            if let raw::State::Matrix(m) = s {
                match matrix(m, &field) {
                    Ok(m) => reports.push(density_checks(&field, &m, self.tol)),
                    Err(e) => problems.push(e.to_string()),
                }
            }
        };
        match &raw.initial {
            raw::State::Ensemble { ensemble } => {
                for (i, w) in ensemble.iter().enumerate() {
                    state(&w.state, format!("initial.ensemble[{i}]"), reports, problems);
                }
            }
            s => state(s, "initial".into(), reports, problems),
        }
        for (i, a) in raw.actions.iter().enumerate() {
            let field = format!("do[{i}] ({},{})", a.agent, a.command);
            match self.operators(a, &field) {
                Ok(ks) => {
                    let mut r = kraus_checks(&ks, self.tol);
                    r.subject = field;
                    reports.push(r);
                }
                Err(e) => problems.push(e.to_string()),
            }
        }
        for (i, m) in raw.measure.iter().enumerate() {
            for (j, p) in m.povms.iter().enumerate() {
                let effects = match p {
                    raw::PovmSpec::Named { effects, .. } | raw::PovmSpec::Plain(effects) => effects,
                    raw::PovmSpec::Basis { .. } => continue,
                };
                let field = format!("measure[{i}].povms[{j}] of {}", m.agent);
                let parsed: Result<Vec<_>> = effects.iter().map(|(l, x)| Ok((l.clone(), matrix(x, &field)?))).collect();
                match parsed {
                    Ok(outcomes) => {
                        let mut r = povm_checks(&outcomes, self.tol);
                        r.subject = field;
                        reports.push(r);
                    }
                    Err(e) => problems.push(e.to_string()),
                }
            }
        }
    }
}

fn sequence(s: &raw::Sequence) -> ActionSequence {
    s.iter()
        .map(|(a, c)| crate::automaton::Action::new(a.as_str(), c.as_str()))
        .collect()
}

/// A table-backed unwinding oracle.
#[derive(Debug, Clone)]
pub enum OracleTable {
    Equivalence(TableEquivalence),
    Distance(TableDistance),
}

/// Reads an oracle table whose entries are action sequences run on `system`.
pub fn oracle_from_str(text: &str, path: &str, system: &QuantumSystem) -> Result<OracleTable> {
    let raw: raw::OracleTable = parse(text, path)?;
    let known = |names: Vec<&String>| -> Result<()> {
        for n in names {
            system.agent_index(&AgentId::new(n.as_str()))?;
        }
        Ok(())
    };
    let missing = |a: &AgentId| Error::Oracle(format!("{path}: table has no entry for agent {a}"));
    match raw {
        raw::OracleTable::Equivalence { label, agents } => {
            known(agents.keys().collect())?;
            let classes = system
                .agents()
                .iter()
                .map(|a| {
                    let t = agents.get(a.as_str()).ok_or_else(|| missing(a))?;
                    let mut out = Vec::new();
                    for (k, class) in t.classes.iter().enumerate() {
                        for seq in class {
                            out.push((system.run(&sequence(seq))?, k));
                        }
                    }
                    Ok(out)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(OracleTable::Equivalence(TableEquivalence::new(
                label.unwrap_or_else(|| format!("table:{path}")),
                classes,
            )))
        }
        raw::OracleTable::Distance { label, agents } => {
            known(agents.keys().collect())?;
            let tables = system
                .agents()
                .iter()
                .map(|a| {
                    let t = agents.get(a.as_str()).ok_or_else(|| missing(a))?;
                    let states = t.states.iter().map(|s| system.run(&sequence(s))).collect::<Result<Vec<_>>>()?;
                    Ok((states, t.table.clone()))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(OracleTable::Distance(TableDistance::new(
                label.unwrap_or_else(|| format!("table:{path}")),
                tables,
            )?))
        }
    }
}

/// A generalised composition spec with the caller-supplied decompositions of each side.
#[derive(Debug, Clone)]
pub struct GeneralisedInput {
    pub spec: CompositionSpec,
    pub left_decompositions: Vec<Ensemble>,
    pub right_decompositions: Vec<Ensemble>,
}

pub fn extras_from_str(text: &str, path: &str) -> Result<CompositionExtras> {
    parse(text, path)
}

pub fn generalised_input(left: &Model, right: &Model, extras: &CompositionExtras, tol: f64) -> Result<GeneralisedInput> {
    let (l, r) = (&left.system, &right.system);
    let mut dims = l.dims().to_vec();
    dims.extend_from_slice(r.dims());
    let joint = Builder::new(&dims, tol)?;
    let lb = Builder::new(l.dims(), tol)?;
    let rb = Builder::new(r.dims(), tol)?;
    let sigma0 = joint.state_on(&extras.sigma0, l.dim() * r.dim(), "sigma0")?;
    let decomposition = extras
        .decomposition
        .as_ref()
        .map(|terms| {
            terms
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    Ok(SeparableComponent {
                        weight: t.weight,
                        left: lb.state_on(&t.left, l.dim(), &format!("decomposition[{i}].left"))?,
                        right: rb.state_on(&t.right, r.dim(), &format!("decomposition[{i}].right"))?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    let mut extensions = BTreeMap::new();
    for (i, x) in extras.extensions.iter().enumerate() {
        let field = format!("extensions[{i}]");
        let ext = match (&x.product, &x.kraus) {
            (Some(pairs), None) => ExtensionChannel::Product(
                pairs
                    .iter()
                    .enumerate()
                    .map(|(j, (f, g))| Ok((matrix(f, &format!("{field}.product[{j}][0]"))?, matrix(g, &format!("{field}.product[{j}][1]"))?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
            (None, Some(ks)) => {
                let ks = ks
                    .iter()
                    .enumerate()
                    .map(|(j, k)| matrix(k, &format!("{field}.kraus[{j}]")))
                    .collect::<Result<Vec<_>>>()?;
                ExtensionChannel::General(KrausChannel::with_tolerance(ks, tol).map_err(context(field.clone()))?)
            }
            _ => return Err(Error::model(format!("{field}: give exactly one of product, kraus"))),
        };
        let key = (AgentId::new(x.agent.as_str()), CommandId::new(x.command.as_str()));
        if extensions.insert(key, ext).is_some() {
            return Err(Error::model(format!("{field}: pair given twice")));
        }
    }
    let decomps = |b: &Builder, ds: &[Vec<raw::Weighted>], dim: usize, side: &str| {
        ds.iter()
            .enumerate()
            .map(|(i, d)| b.ensemble_on(d, dim, &format!("{side}_decompositions[{i}]")))
            .collect::<Result<Vec<_>>>()
    };
    let mut left_decompositions = left.decompositions.clone();
    left_decompositions.extend(decomps(&lb, &extras.left_decompositions, l.dim(), "left")?);
    let mut right_decompositions = right.decompositions.clone();
    right_decompositions.extend(decomps(&rb, &extras.right_decompositions, r.dim(), "right")?);
    Ok(GeneralisedInput {
        spec: CompositionSpec {
            left: l.clone(),
            right: r.clone(),
            kind: CompositionKind::Generalised(GeneralisedSpec {
                sigma0,
                decomposition,
                extensions,
                commutativity_declared: extras.commutative,
            }),
        },
        left_decompositions,
        right_decompositions,
    })
}
