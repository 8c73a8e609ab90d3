use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use qflowsec::access::{audit_rm_with, fit_rm_constants_with, KRange, RmReport};
use qflowsec::automaton::{Action, ActionSequence, AgentId, Policy, SystemSummary};
use qflowsec::composition::{
    check_composition_bound_with, check_generalised_bound_with, compose_direct, compose_generalised, union_policy,
};
use qflowsec::config::Tolerances;
use qflowsec::linalg::{Distribution, C64};
use qflowsec::model::{self, generalised_input, Model, OracleTable};
use qflowsec::regression::{published_suite, Relation};
use qflowsec::security::{insecurity_bounded_with, interference_degree_with, strong_insecurity_bounded_with, InterferenceQuery};
use qflowsec::unwinding::{
    canonical_equivalence, canonical_pseudodistance, check_unwinding_one_with, check_unwinding_two_with, Eps, EpsMode,
    Equivalence, PseudoDistance, ReducedState, Total, Trace, UnwindingReport, Zero,
};
use qflowsec::{Config, Error, Result};

use crate::report::{f, Outcome, EXIT_OK, EXIT_VIOLATION};
use crate::{Command, Global, KRangeArg, Kind, Mode};

fn config(g: &Global) -> Config {
    Config {
        tol: Tolerances {
            validation: g.tol,
            ..Tolerances::default()
        },
        ..Config::default()
    }
}

fn load(path: &Path, g: &Global) -> Result<Model> {
    model::model_from_str(&model::read_file(path)?, &path.display().to_string(), g.tol)
}

fn policy_of(m: &Model) -> Result<&Policy> {
    m.policy()
}

fn bad(detail: impl Into<String>) -> Error {
    Error::Model(detail.into())
}

pub fn run(cmd: Command, g: &Global) -> Result<Outcome> {
    let cfg = config(g);
    match cmd {
        Command::Validate { model } => validate(&model, g),
        Command::Run { model, seq } => run_sequence(&model, &seq, g),
        Command::Analyze {
            model,
            depth,
            policy_from_model,
            query,
        } => analyze(&model, depth, policy_from_model, query.as_deref(), g, &cfg),
        Command::Unwind {
            model,
            mode,
            oracle,
            depth,
            eps_s,
            eps_o,
            eps_l,
            fit_eps,
        } => {
            let eps = if fit_eps {
                EpsMode::Fit
            } else {
                EpsMode::Given(Eps {
                    step: eps_s.unwrap_or(0.0),
                    observation: eps_o.unwrap_or(0.0),
                    local: eps_l.unwrap_or(0.0),
                })
            };
            unwind(&model, mode, &oracle, depth, eps, g, &cfg)
        }
        Command::Compose {
            left,
            right,
            kind,
            spec,
            check_bound,
            depth,
        } => compose(&left, &right, kind, spec.as_deref(), check_bound, depth, g, &cfg),
        Command::AccessCheck {
            model,
            theta,
            eps,
            fit,
            depth,
            k_range,
        } => access(&model, theta, eps, fit, depth, k_range, g, &cfg),
        Command::Examples => examples(),
    }
}

fn validate(path: &Path, g: &Global) -> Result<Outcome> {
    let text = model::read_file(path)?;
    let v = model::validate_model_str(&text, &path.display().to_string(), g.tol)?;
    let exit = if v.ok { EXIT_OK } else { EXIT_VIOLATION };
    let mut out = Outcome::new("validate", json!({ "model": path, "tol": g.tol }), &v, exit);
    out = out.line(format!("{}: {}", path.display(), if v.ok { "valid" } else { "INVALID" }));
    for p in &v.problems {
        out = out.line(format!("  problem: {p}"));
    }
    for r in &v.reports {
        for c in r.failures() {
            out = out.line(format!("  {}: {} failed, residual {}", r.subject, c.name, f(c.residual)));
        }
    }
    for w in &v.warnings {
        out = out.line(format!("  note: {w}"));
    }
    Ok(out)
}

fn parse_sequence(text: &str) -> Result<ActionSequence> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (a, c) = pair
                .split_once(':')
                .ok_or_else(|| bad(format!("sequence entry {pair:?} is not agent:command")))?;
            Ok(Action::new(a.trim(), c.trim()))
        })
        .collect()
}

#[derive(Serialize)]
struct Observation {
    agent: AgentId,
    povm: String,
    distribution: Distribution,
}

#[derive(Serialize)]
struct RunReport {
    system: SystemSummary,
    sequence: ActionSequence,
    /// Rows of `[re, im]` entries.
    state: Vec<Vec<[f64; 2]>>,
    observations: Vec<Observation>,
}

fn run_sequence(path: &Path, seq: &str, g: &Global) -> Result<Outcome> {
    let m = load(path, g)?;
    let alpha = parse_sequence(seq)?;
    let rho = m.system.run(&alpha)?;
    let state = rho
        .matrix()
        .to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(|z: C64| [z.re, z.im]).collect())
        .collect();
    let mut observations = Vec::new();
    for a in m.system.agents() {
        for (name, povm) in m.system.capability(a)?.povms() {
            observations.push(Observation {
                agent: a.clone(),
                povm: name.clone(),
                distribution: povm.measure(&rho)?,
            });
        }
    }
    let mut out = Outcome::new("run", json!({ "model": path, "seq": seq }), &RunReport {
        system: (&m.system).into(),
        sequence: alpha.clone(),
        state,
        observations,
    }, EXIT_OK)
    .line(format!("ran {} action(s): {alpha}", alpha.len()));
    for a in m.system.agents() {
        for (name, povm) in m.system.capability(a)?.povms() {
            let d = povm.measure(&rho)?;
            let probs: Vec<String> = d.probs().iter().map(|(l, p)| format!("{l}={}", f(*p))).collect();
            out = out.line(format!("  {a} {name}: {}", probs.join(" ")));
        }
    }
    Ok(out)
}

fn names(part: &str) -> Vec<&str> {
    part.split('+').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn analyze(path: &Path, depth: usize, from_model: bool, query: Option<&str>, g: &Global, cfg: &Config) -> Result<Outcome> {
    let m = load(path, g)?;
    let inputs = json!({ "model": path, "depth": depth, "query": query, "policy_from_model": from_model });
    if let Some(q) = query {
        if from_model {
            return Err(bad("--query and --policy-from-model are exclusive"));
        }
        let parts: Vec<&str> = q.split(',').collect();
        let [g1, d, g2] = parts[..] else {
            return Err(bad(format!("query {q:?} must have the form G1,D,G2")));
        };
        let query = InterferenceQuery::new(names(g1), names(d), names(g2), depth);
        let r = interference_degree_with(&m.system, &query, cfg)?;
        let line = format!("Int({g1}, {d} | {g2}) at depth {depth} = {}", f(r.value));
        let witness = format!("  witness: {} observing {} vs {}", r.witness.agent, r.witness.sequence, r.witness.purged);
        return Ok(Outcome::new("analyze", inputs, &json!({ "kind": "interference", "report": r }), EXIT_OK)
            .line(line)
            .line(witness));
    }
    let p = policy_of(&m)?;
    let r = insecurity_bounded_with(&m.system, p, depth, cfg)?;
    let strong = if m.decompositions.is_empty() {
        None
    } else {
        Some(strong_insecurity_bounded_with(&m.system, p, &m.decompositions, depth, cfg)?)
    };
    let mut out = Outcome::new(
        "analyze",
        inputs,
        &json!({ "kind": "insecurity", "report": r, "strong": strong, "warnings": m.warnings }),
        EXIT_OK,
    )
    .line(format!("K_{depth} = {}", f(r.value)))
    .line(format!(
        "  per depth: {}",
        r.per_depth.iter().map(|v| f(*v)).collect::<Vec<_>>().join(" ")
    ))
    .line(format!("  witness: {} observing {} vs {}", r.witness.agent, r.witness.sequence, r.witness.purged));
    if let Some(s) = &strong {
        out = out.line(format!("  SK_{depth} >= {} over {} decomposition(s)", f(s.value), s.decompositions.len()));
    }
    Ok(out)
}

enum Oracle {
    Eq(Box<dyn Equivalence>),
    Dist(Box<dyn PseudoDistance>),
}

fn oracle(spec: &str, mode: Mode, m: &Model, depth: usize) -> Result<Oracle> {
    if let Some(file) = spec.strip_prefix("table:") {
        let t = model::oracle_from_str(&model::read_file(Path::new(file))?, file, &m.system)?;
        return match (t, mode) {
            (OracleTable::Equivalence(e), Mode::One) => Ok(Oracle::Eq(Box::new(e))),
            (OracleTable::Distance(d), Mode::Two) => Ok(Oracle::Dist(Box::new(d))),
            _ => Err(bad(format!("table {file} does not match the unwinding mode"))),
        };
    }
    let Some(name) = spec.strip_prefix("builtin:") else {
        return Err(bad(format!("oracle {spec:?} must start with builtin: or table:")));
    };
    let (name, k) = match name.split_once(':') {
        Some((n, k)) => (n, k.parse::<usize>().map_err(|_| bad(format!("bad canonical depth {k:?}")))?),
        None => (name, depth),
    };
    Ok(match (name, mode) {
        ("total", Mode::One) => Oracle::Eq(Box::new(Total)),
        ("zero", Mode::Two) => Oracle::Dist(Box::new(Zero)),
        ("trace", Mode::One) => Oracle::Eq(Box::new(Trace)),
        ("trace", Mode::Two) => Oracle::Dist(Box::new(Trace)),
        ("reduced", Mode::One) => Oracle::Eq(Box::new(ReducedState::observed_factors(&m.system)?)),
        ("reduced", Mode::Two) => Oracle::Dist(Box::new(ReducedState::observed_factors(&m.system)?)),
        ("canonical", Mode::One) => Oracle::Eq(Box::new(canonical_equivalence(k))),
        ("canonical", Mode::Two) => Oracle::Dist(Box::new(canonical_pseudodistance(k))),
        _ => return Err(bad(format!("unknown builtin oracle {name:?} for this mode"))),
    })
}

fn unwind(path: &Path, mode: Mode, spec: &str, depth: usize, eps: EpsMode, g: &Global, cfg: &Config) -> Result<Outcome> {
    let m = load(path, g)?;
    let p = policy_of(&m)?;
    let r: UnwindingReport = match oracle(spec, mode, &m, depth)? {
        Oracle::Eq(eq) => check_unwinding_one_with(&m.system, p, eq.as_ref(), depth, cfg)?,
        Oracle::Dist(d) => check_unwinding_two_with(&m.system, p, d.as_ref(), eps, depth, cfg)?,
    };
    let given = match eps {
        EpsMode::Given(e) => Some(e),
        EpsMode::Fit => None,
    };
    let inputs = json!({
        "model": path, "mode": format!("{mode:?}").to_lowercase(), "oracle": spec, "depth": depth,
        "eps": given, "fit_eps": given.is_none(),
    });
    let exit = if r.bound.is_some() { EXIT_OK } else { EXIT_VIOLATION };
    let mut out = Outcome::new("unwind", inputs, &r, exit).line(format!("{}: {}", r.oracle, r.verdict));
    for c in &r.conditions {
        let mut line = format!("  {}: {}", c.name, if c.holds { "holds" } else { "fails" });
        if !c.holds {
            line += &format!(" ({} violation(s), worst excess {})", c.violations, f(c.worst));
            if let Some(w) = &c.witness {
                line += &format!("; agent {} at {}", w.agent, w.rho);
                if let Some(s) = &w.sigma {
                    line += &format!(" vs {s}");
                }
                if let Some(a) = &w.action {
                    line += &format!(" under {a}");
                }
            }
        }
        out = out.line(line);
    }
    Ok(out.line(format!("  measured K_{depth} = {}", f(r.measured_kt))))
}

#[allow(clippy::too_many_arguments)]
fn compose(
    left: &Path,
    right: &Path,
    kind: Kind,
    spec: Option<&Path>,
    check: bool,
    depth: usize,
    g: &Global,
    cfg: &Config,
) -> Result<Outcome> {
    let (l, r) = (load(left, g)?, load(right, g)?);
    let inputs = json!({
        "left": left, "right": right, "kind": format!("{kind:?}").to_lowercase(), "spec": spec,
        "check_bound": check, "depth": depth,
    });
    if kind == Kind::Direct && spec.is_some() {
        return Err(bad("--spec applies only to --kind generalised"));
    }
    match kind {
        Kind::Direct if check => {
            let b = check_composition_bound_with(&l.system, policy_of(&l)?, &r.system, policy_of(&r)?, depth, cfg)?;
            let exit = if b.holds { EXIT_OK } else { EXIT_VIOLATION };
            Ok(Outcome::new("compose", inputs, &b, exit).line(format!(
                "K_{depth}(joint) = {} {} K_{depth}(left) + K_{depth}(right) = {} + {}",
                f(b.composed),
                if b.holds { "<=" } else { ">" },
                f(b.left),
                f(b.right)
            )))
        }
        Kind::Direct => {
            let joint = compose_direct(&l.system, &r.system)?;
            let policy = match (&l.policy, &r.policy) {
                (Some(p), Some(q)) => Some(edges(&union_policy(p, q)?)),
                _ => None,
            };
            summary_outcome(inputs, &joint, policy)
        }
        Kind::Generalised => {
            let spec = spec.ok_or_else(|| bad("--kind generalised needs --spec"))?;
            let extras = model::extras_from_str(&model::read_file(spec)?, &spec.display().to_string())?;
            let input = generalised_input(&l, &r, &extras, g.tol)?;
            if !check {
                let joint = compose_generalised(&input.spec)?;
                let policy = match (&l.policy, &r.policy) {
                    (Some(p), Some(q)) => Some(edges(&union_policy(p, q)?)),
                    _ => None,
                };
                return summary_outcome(inputs, &joint, policy);
            }
            let b = check_generalised_bound_with(
                &input.spec,
                policy_of(&l)?,
                policy_of(&r)?,
                &input.left_decompositions,
                &input.right_decompositions,
                depth,
                cfg,
            )?;
            let exit = if b.holds { EXIT_OK } else { EXIT_VIOLATION };
            let mut out = Outcome::new("compose", inputs, &b, exit).line(format!(
                "K_{depth}(T) = {} {} SK-lower(left) + SK-lower(right) = {} + {}",
                f(b.composed),
                if b.holds { "<=" } else { ">" },
                f(b.left.value),
                f(b.right.value)
            ));
            if b.trivial_exceeded {
                out = out.line(format!("  note: exceeds the trivial-decomposition sum {} (not a violation)", f(b.trivial)));
            }
            Ok(out)
        }
    }
}

fn edges(p: &Policy) -> Vec<(String, String)> {
    p.edges().iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

fn summary_outcome(
    inputs: serde_json::Value,
    joint: &qflowsec::automaton::QuantumSystem,
    policy: Option<Vec<(String, String)>>,
) -> Result<Outcome> {
    let s = SystemSummary::from(joint);
    let line = format!(
        "composed system: dims {:?}, {} agent(s), {} command(s)",
        s.dims,
        s.agents.len(),
        s.commands.len()
    );
    Ok(Outcome::new("compose", inputs, &json!({ "system": s, "policy": policy }), EXIT_OK).line(line))
}

#[derive(Serialize)]
struct AccessOutcome {
    fit: Option<qflowsec::access::RmFit>,
    audit: Option<RmReport>,
}

#[allow(clippy::too_many_arguments)]
fn access(
    path: &Path,
    theta: Option<f64>,
    eps: Option<f64>,
    fit: bool,
    depth: usize,
    range: KRangeArg,
    g: &Global,
    cfg: &Config,
) -> Result<Outcome> {
    let m = load(path, g)?;
    let loc = m.locations.as_ref().ok_or_else(|| bad("model has no locations section"))?;
    let matrix = m.access.as_ref().ok_or_else(|| bad("model has no access section"))?;
    let p = policy_of(&m)?;
    let range = match range {
        KRangeArg::ReadSets => KRange::ReadSets,
        KRangeArg::AllSubsets => KRange::AllSubsets,
    };
    let inputs = json!({ "model": path, "theta": theta, "eps": eps, "fit": fit, "depth": depth, "k_range": range });
    let (fitted, constants) = if fit {
        let r = fit_rm_constants_with(&m.system, loc, matrix, p, depth, range, cfg)?;
        let c = r.eps.map(|e| (r.theta, e));
        (Some(r), c)
    } else {
        (None, Some((theta.unwrap_or(0.0), eps.unwrap_or(0.0))))
    };
    let audit = match constants {
        Some((t, e)) => Some(audit_rm_with(&m.system, loc, matrix, p, t, e, depth, range, cfg)?),
        None => None,
    };
    let exit = match &audit {
        Some(a) if a.bound.is_some() => EXIT_OK,
        _ => EXIT_VIOLATION,
    };
    let mut out = Outcome::new("access-check", inputs, &AccessOutcome { fit: fitted.clone(), audit: audit.clone() }, exit);
    if let Some(r) = &fitted {
        out = out.line(match r.eps {
            Some(e) => format!("fitted theta = {}, eps = {}", f(r.theta), f(e)),
            None => format!("no eps < 1 satisfies RM2 and RM3 (needed {})", f(r.needed_eps)),
        });
    }
    if let Some(a) = &audit {
        out = out.line(a.verdict.clone());
        for (name, c) in [("RM1", &a.rm1), ("RM2", &a.rm2), ("RM3", &a.rm3)] {
            let mut line = format!("  {name}: {}", if c.holds { "holds" } else { "fails" });
            if let (false, Some(w)) = (c.holds, &c.witness) {
                line += &format!("; agent {}", w.agent);
                if let Some(cmd) = &w.command {
                    line += &format!(", command {cmd}");
                }
                if let Some(k) = &w.k {
                    line += &format!(", K = {{{}}}", k.iter().cloned().collect::<Vec<_>>().join(", "));
                }
            }
            out = out.line(line);
        }
        if !a.policy_ok {
            out = out.line(format!("  policy not satisfied: {} violation(s)", a.policy.violations.len()));
        }
        out = out.line(format!("  measured K_{depth} = {}", f(a.measured_kt)));
    }
    Ok(out)
}

fn examples() -> Result<Outcome> {
    let checks = published_suite()?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    let exit = if failed == 0 { EXIT_OK } else { EXIT_VIOLATION };
    let groups: BTreeSet<&str> = checks.iter().map(|c| c.group.as_str()).collect();
    let mut out = Outcome::new(
        "examples",
        json!({}),
        &json!({ "checks": checks, "passed": checks.len() - failed, "failed": failed }),
        exit,
    );
    out = out.line(format!("{:<6} {:<72} {:>16} {:>3} {:>16} {:>8}", "", "check", "measured", "", "expected", "tol"));
    for c in &checks {
        let rel = match c.relation {
            Relation::Equal => "==",
            Relation::AtLeast => ">=",
        };
        out = out.line(format!(
            "{:<6} {:<72} {:>16} {:>3} {:>16} {:>8}",
            if c.passed { "pass" } else { "FAIL" },
            format!("{}: {}", c.group, c.name),
            f(c.measured),
            rel,
            f(c.expected),
            f(c.tol)
        ));
    }
    Ok(out.line(format!(
        "{} of {} checks passed across {} groups",
        checks.len() - failed,
        checks.len(),
        groups.len()
    )))
}
