//! The chase for implication of an EMVD by EMVDs and FDs over ordinary relations.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dependency::Dependency;
use crate::error::{Error, Result};
use crate::relation::{Schema, Tuple};

pub const DEFAULT_MAX_STEPS: usize = 10_000;

/// One applied chase step. Tuple indices refer to the tuple list at the time
/// the step was applied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceEntry {
    /// The EMVD at `dependency` (index into Σ) forced `added` from the pair.
    Emvd {
        dependency: usize,
        pair: (usize, usize),
        added: Tuple,
    },
    /// The FD at `dependency` forced `replaced` to be renamed `by` everywhere.
    Fd {
        dependency: usize,
        pair: (usize, usize),
        replaced: String,
        by: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChaseState {
    pub schema: Schema,
    pub tuples: Vec<Tuple>,
    /// Next fresh index per variable.
    pub fresh: BTreeMap<String, usize>,
    pub trace: Vec<TraceEntry>,
}

impl ChaseState {
    /// Two tuples agreeing exactly on `agree`: `t0 = (A_0, B_0, …)` and `t1`
    /// with `_1` tokens outside `agree`.
    pub fn initial(schema: &Schema, agree: &Schema) -> ChaseState {
        let t0 = Tuple(schema.iter().map(|v| token(v, 0)).collect());
        let t1 = Tuple(
            schema
                .iter()
                .map(|v| token(v, if agree.contains(v) { 0 } else { 1 }))
                .collect(),
        );
        let fresh = schema
            .iter()
            .map(|v| (v.clone(), if agree.contains(v) { 1 } else { 2 }))
            .collect();
        ChaseState {
            schema: schema.clone(),
            tuples: vec![t0, t1],
            fresh,
            trace: Vec::new(),
        }
    }

    fn next_token(&mut self, var: &str) -> String {
        let n = self.fresh.get_mut(var).expect("variable in schema");
        let t = token(var, *n);
        *n += 1;
        t
    }

    fn contains(&self, t: &Tuple) -> bool {
        self.tuples.iter().any(|s| s == t)
    }

    fn rename(&mut self, col: usize, from: &str, to: &str) {
        for t in &mut self.tuples {
            if t.0[col] == from {
                t.0[col] = to.to_string();
            }
        }
        let mut seen = Vec::new();
        self.tuples.retain(|t| {
            if seen.contains(t) {
                false
            } else {
                seen.push(t.clone());
                true
            }
        });
    }
}

fn token(var: &str, n: usize) -> String {
    format!("{var}_{n}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChaseOutcome {
    Implied(ChaseState),
    /// The final state satisfies Σ and violates τ.
    NotImplied(ChaseState),
    Unknown(ChaseState),
}

impl ChaseOutcome {
    pub fn state(&self) -> &ChaseState {
        match self {
            ChaseOutcome::Implied(s) | ChaseOutcome::NotImplied(s) | ChaseOutcome::Unknown(s) => s,
        }
    }

    pub fn verdict(&self) -> &'static str {
        match self {
            ChaseOutcome::Implied(_) => "implied",
            ChaseOutcome::NotImplied(_) => "not_implied",
            ChaseOutcome::Unknown(_) => "unknown",
        }
    }
}

/// EMVD `X ↠ Y | Z` as position lists: `(X, XY, Z∖XY)`.
struct Exchange {
    x: Vec<usize>,
    xy: Vec<usize>,
    rest: Vec<usize>,
}

impl Exchange {
    fn new(schema: &Schema, x: &Schema, y: &Schema, z: &Schema) -> Result<Exchange> {
        let xy = x.union(y);
        Ok(Exchange {
            x: schema.positions(x)?,
            xy: schema.positions(&xy)?,
            rest: schema.positions(&z.difference(&xy))?,
        })
    }

    fn agree(&self, a: &Tuple, b: &Tuple) -> bool {
        self.x.iter().all(|&i| a.0[i] == b.0[i])
    }

    fn witnessed(&self, tuples: &[Tuple], a: &Tuple, b: &Tuple) -> bool {
        tuples.iter().any(|t| {
            self.xy.iter().all(|&i| t.0[i] == a.0[i]) && self.rest.iter().all(|&i| t.0[i] == b.0[i])
        })
    }
}

enum Constraint {
    Emvd(usize, Exchange),
    Fd(usize, Vec<usize>, Vec<usize>),
}

fn constraints(schema: &Schema, sigma: &[Dependency]) -> Result<Vec<Constraint>> {
    let mut emvds = Vec::new();
    let mut fds = Vec::new();
    for (i, d) in sigma.iter().enumerate() {
        match d {
            Dependency::Emvd { x, y, z } | Dependency::Ci { x, y, z } => {
                emvds.push(Constraint::Emvd(i, Exchange::new(schema, x, y, z)?))
            }
            Dependency::Mvd { x, y } => {
                let z = schema.difference(&x.union(y));
                emvds.push(Constraint::Emvd(i, Exchange::new(schema, x, y, &z)?))
            }
            Dependency::Fd { x, y } => {
                fds.push(Constraint::Fd(i, schema.positions(x)?, schema.positions(y)?))
            }
            Dependency::Mid { .. } => {
                return Err(Error::Precondition(format!("{d} cannot be chased")))
            }
        }
    }
    emvds.extend(fds);
    Ok(emvds)
}

fn goal_parts(tau: &Dependency) -> Result<(&Schema, &Schema, &Schema)> {
    match tau {
        Dependency::Emvd { x, y, z } => Ok((x, y, z)),
        _ => Err(Error::Precondition(format!("chase goal {tau} must be an EMVD"))),
    }
}

/// Applies one step: the first violated constraint under the fixed order.
/// Returns `false` at a fixpoint.
fn step(state: &mut ChaseState, cs: &[Constraint]) -> bool {
    for c in cs {
        let n = state.tuples.len();
        match c {
            Constraint::Emvd(idx, ex) => {
                for i in 0..n {
                    for j in 0..n {
                        let (a, b) = (&state.tuples[i], &state.tuples[j]);
                        if i == j || !ex.agree(a, b) || ex.witnessed(&state.tuples, a, b) {
                            continue;
                        }
                        let (a, b) = (a.clone(), b.clone());
                        let vars: Vec<String> = state.schema.iter().cloned().collect();
                        let mut new = Vec::with_capacity(vars.len());
                        for (p, var) in vars.iter().enumerate() {
                            if ex.xy.contains(&p) {
                                new.push(a.0[p].clone());
                            } else if ex.rest.contains(&p) {
                                new.push(b.0[p].clone());
                            } else {
                                new.push(state.next_token(var));
                            }
                        }
                        let added = Tuple(new);
                        state.tuples.push(added.clone());
                        state.trace.push(TraceEntry::Emvd {
                            dependency: *idx,
                            pair: (i, j),
                            added,
                        });
                        return true;
                    }
                }
            }
            Constraint::Fd(idx, x, y) => {
                for i in 0..n {
                    for j in i + 1..n {
                        let (a, b) = (&state.tuples[i], &state.tuples[j]);
                        if !x.iter().all(|&p| a.0[p] == b.0[p]) {
                            continue;
                        }
                        if let Some(&p) = y.iter().find(|&&p| a.0[p] != b.0[p]) {
                            let by = a.0[p].clone();
                            let replaced = b.0[p].clone();
                            state.rename(p, &replaced, &by);
                            state.trace.push(TraceEntry::Fd {
                                dependency: *idx,
                                pair: (i, j),
                                replaced,
                                by,
                            });
                            return true;
                        }
                    }
                }
            }
        }
    }
    false
}

/// Chases `tau = X ↠ Y | Z` with `sigma`, whose members may be EMVDs, CIs
/// (read as EMVDs), MVDs over the joint schema, or FDs.
pub fn chase_emvd(sigma: &[Dependency], tau: &Dependency, max_steps: usize) -> Result<ChaseOutcome> {
    let (x, y, z) = goal_parts(tau)?;
    let schema = sigma.iter().fold(tau.vars(), |acc, d| acc.union(&d.vars()));
    let mut state = ChaseState::initial(&schema, x);
    let xy = x.union(y);
    if y.is_subset(x) || z.is_subset(&xy) {
        return Ok(ChaseOutcome::Implied(state));
    }
    let cs = constraints(&schema, sigma)?;
    let goal = Exchange::new(&schema, x, y, z)?;
    // t0 and t1 are tracked through FD renamings.
    let mut t0 = state.tuples[0].clone();
    let mut t1 = state.tuples[1].clone();
    loop {
        if goal.witnessed(&state.tuples, &t0, &t1) {
            return Ok(ChaseOutcome::Implied(state));
        }
        if state.trace.len() >= max_steps {
            return Ok(ChaseOutcome::Unknown(state));
        }
        if !step(&mut state, &cs) {
            return Ok(ChaseOutcome::NotImplied(state));
        }
        if let Some(TraceEntry::Fd { replaced, by, .. }) = state.trace.last() {
            for t in [&mut t0, &mut t1] {
                for v in &mut t.0 {
                    if v == replaced {
                        *v = by.clone();
                    }
                }
            }
        }
    }
}

/// Re-executes `trace` from `state0` against `sigma`, checking each entry.
pub fn replay_trace(
    sigma: &[Dependency],
    state0: &ChaseState,
    trace: &[TraceEntry],
) -> Result<ChaseState> {
    let cs = constraints(&state0.schema, sigma)?;
    let mut state = state0.clone();
    for (n, entry) in trace.iter().enumerate() {
        let fail = |msg: String| Error::Integrity(format!("trace entry {}: {msg}", n + 1));
        let (dep, (i, j)) = match entry {
            TraceEntry::Emvd { dependency, pair, .. } | TraceEntry::Fd { dependency, pair, .. } => {
                (*dependency, *pair)
            }
        };
        let c = cs
            .iter()
            .find(|c| matches!(c, Constraint::Emvd(k, _) | Constraint::Fd(k, _, _) if *k == dep))
            .ok_or_else(|| fail(format!("no dependency at index {dep}")))?;
        if i >= state.tuples.len() || j >= state.tuples.len() || i == j {
            return Err(fail(format!("tuple pair ({i},{j}) is out of range")));
        }
        let (a, b) = (state.tuples[i].clone(), state.tuples[j].clone());
        match (entry, c) {
            (TraceEntry::Emvd { added, .. }, Constraint::Emvd(_, ex)) => {
                if !ex.agree(&a, &b) {
                    return Err(fail("pair does not agree on the left side".into()));
                }
                let ok = added.0.len() == a.0.len()
                    && added.0.iter().enumerate().all(|(p, v)| {
                        if ex.xy.contains(&p) {
                            *v == a.0[p]
                        } else if ex.rest.contains(&p) {
                            *v == b.0[p]
                        } else {
                            !state.tuples.iter().any(|t| t.0[p] == *v)
                        }
                    });
                if !ok || state.contains(added) {
                    return Err(fail(format!("tuple {added} is not the exchange tuple")));
                }
                for (p, var) in state.schema.clone().iter().enumerate() {
                    if !ex.xy.contains(&p) && !ex.rest.contains(&p) {
                        let fresh = state.next_token(var);
                        if fresh != added.0[p] {
                            return Err(fail(format!("expected fresh token {fresh}, found {}", added.0[p])));
                        }
                    }
                }
                state.tuples.push(added.clone());
            }
            (TraceEntry::Fd { replaced, by, .. }, Constraint::Fd(_, x, y)) => {
                if !x.iter().all(|&p| a.0[p] == b.0[p]) {
                    return Err(fail("pair does not agree on the left side".into()));
                }
                let Some(&p) = y.iter().find(|&&p| a.0[p] == *by && b.0[p] == *replaced) else {
                    return Err(fail(format!("no column renames {replaced} to {by}")));
                };
                state.rename(p, replaced, by);
            }
            _ => return Err(fail("entry kind does not match the dependency".into())),
        }
        state.trace.push(entry.clone());
    }
    Ok(state)
}
