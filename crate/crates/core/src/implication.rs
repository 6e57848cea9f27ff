//! Implication of saturated CIs and FDs, and checking of rule-by-rule derivations.
//!
//! Over positive multiplicatively cancellative semirings a set of SCIs and FDs
//! implies a CI or FD exactly when it does so over two-tuple relations. The
//! decision procedure enumerates the agreement set of the two tuples.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dependency::Dependency;
use crate::error::{Error, Result};
use crate::relation::Schema;

/// Largest variable set the agreement-set enumeration accepts.
pub const MAX_VARS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Implication {
    Implied,
    /// Two tuples agreeing exactly on this set satisfy Σ but not τ.
    NotImplied(Schema),
}

impl Implication {
    pub fn is_implied(&self) -> bool {
        matches!(self, Implication::Implied)
    }
}

/// Variable sets of `V` as bitmasks.
#[derive(Debug, Clone)]
pub(crate) struct Universe {
    vars: Schema,
}

impl Universe {
    pub(crate) fn new(vars: &Schema) -> Result<Self> {
        if vars.len() > MAX_VARS {
            return Err(Error::SizeGuard(format!(
                "{} variables, at most {MAX_VARS} are supported",
                vars.len()
            )));
        }
        Ok(Universe { vars: vars.clone() })
    }

    pub(crate) fn full(&self) -> u64 {
        (1u64 << self.vars.len()) - 1
    }

    pub(crate) fn mask(&self, s: &Schema) -> Result<u64> {
        let mut m = 0;
        for v in s.iter() {
            let i = self.vars.index_of(v).ok_or_else(|| {
                Error::Schema(format!("variable `{v}` is not in {}", self.vars))
            })?;
            m |= 1 << i;
        }
        Ok(m)
    }

    pub(crate) fn schema(&self, mask: u64) -> Schema {
        Schema::new(
            self.vars
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, v)| v.clone()),
        )
    }
}

/// A dependency read as a constraint on two-tuple relations.
#[derive(Debug, Clone, Copy)]
enum TwoTuple {
    Fd { x: u64, y: u64 },
    Exchange { x: u64, y: u64, z: u64 },
}

impl TwoTuple {
    fn holds(self, agree: u64) -> bool {
        let inside = |s: u64| s & !agree == 0;
        match self {
            TwoTuple::Fd { x, y } => !inside(x) || inside(y),
            TwoTuple::Exchange { x, y, z } => !inside(x) || inside(y) || inside(z),
        }
    }

    fn of(u: &Universe, d: &Dependency, saturated_only: bool) -> Result<TwoTuple> {
        let full = u.full();
        Ok(match d {
            Dependency::Fd { x, y } => TwoTuple::Fd {
                x: u.mask(x)?,
                y: u.mask(y)?,
            },
            Dependency::Ci { x, y, z } => {
                d.validate()?;
                let (x, y, z) = (u.mask(x)?, u.mask(y)?, u.mask(z)?);
                if saturated_only && x | y | z != full {
                    return Err(Error::Precondition(format!(
                        "{d} is not saturated over {}",
                        u.vars
                    )));
                }
                TwoTuple::Exchange { x, y, z }
            }
            Dependency::Mvd { x, y } => {
                let (x, y) = (u.mask(x)?, u.mask(y)?);
                TwoTuple::Exchange {
                    x,
                    y: y & !x,
                    z: full & !(x | y),
                }
            }
            Dependency::Emvd { x, y, z } => {
                let (x, y, z) = (u.mask(x)?, u.mask(y)?, u.mask(z)?);
                if saturated_only && x | y | z != full {
                    return Err(Error::Precondition(format!(
                        "{d} is not saturated over {}",
                        u.vars
                    )));
                }
                TwoTuple::Exchange {
                    x,
                    y: y & !x,
                    z: z & !(x | y),
                }
            }
            Dependency::Mid { .. } => {
                return Err(Error::Precondition(format!(
                    "{d}: marginal identities are outside SCI+FD implication"
                )))
            }
        })
    }
}

/// Decides whether `sigma` implies `tau` over every positive multiplicatively
/// cancellative semiring. `sigma` may hold saturated CIs, MVDs and FDs;
/// `tau` may be any CI, MVD, EMVD or FD over `v`.
pub fn implies_scifd(v: &Schema, sigma: &[Dependency], tau: &Dependency) -> Result<Implication> {
    let u = Universe::new(v)?;
    let premises = sigma
        .iter()
        .map(|d| TwoTuple::of(&u, d, true))
        .collect::<Result<Vec<_>>>()?;
    let goal = TwoTuple::of(&u, tau, false)?;
    for agree in 0..=u.full() {
        if premises.iter().all(|p| p.holds(agree)) && !goal.holds(agree) {
            return Ok(Implication::NotImplied(u.schema(agree)));
        }
    }
    Ok(Implication::Implied)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Premise,
    S1,
    S2,
    S3,
    S4,
    S5,
    G,
    Fd1,
    Fd2,
    Fd3,
    Fdci1,
    Fdci2,
    Mid1,
    Mid2,
    Mid3,
    Mid4,
    Mvd0,
    Mvd1,
    Mvd2,
    Mvd3,
    Mvdfd1,
    Mvdfd2,
}

impl Rule {
    pub const ALL: [Rule; 22] = [
        Rule::Premise,
        Rule::S1,
        Rule::S2,
        Rule::S3,
        Rule::S4,
        Rule::S5,
        Rule::G,
        Rule::Fd1,
        Rule::Fd2,
        Rule::Fd3,
        Rule::Fdci1,
        Rule::Fdci2,
        Rule::Mid1,
        Rule::Mid2,
        Rule::Mid3,
        Rule::Mid4,
        Rule::Mvd0,
        Rule::Mvd1,
        Rule::Mvd2,
        Rule::Mvd3,
        Rule::Mvdfd1,
        Rule::Mvdfd2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Premise => "premise",
            Rule::S1 => "s1",
            Rule::S2 => "s2",
            Rule::S3 => "s3",
            Rule::S4 => "s4",
            Rule::S5 => "s5",
            Rule::G => "g",
            Rule::Fd1 => "fd1",
            Rule::Fd2 => "fd2",
            Rule::Fd3 => "fd3",
            Rule::Fdci1 => "fdci1",
            Rule::Fdci2 => "fdci2",
            Rule::Mid1 => "mid1",
            Rule::Mid2 => "mid2",
            Rule::Mid3 => "mid3",
            Rule::Mid4 => "mid4",
            Rule::Mvd0 => "mvd0",
            Rule::Mvd1 => "mvd1",
            Rule::Mvd2 => "mvd2",
            Rule::Mvd3 => "mvd3",
            Rule::Mvdfd1 => "mvdfd1",
            Rule::Mvdfd2 => "mvdfd2",
        }
    }

    pub fn from_name(name: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.name() == name)
    }

    /// Number of premises the rule consumes.
    pub fn arity(self) -> usize {
        match self {
            Rule::Premise | Rule::S1 | Rule::Fd1 | Rule::Mid1 | Rule::Mvd1 => 0,
            Rule::S2
            | Rule::S3
            | Rule::S4
            | Rule::Fd2
            | Rule::Fdci1
            | Rule::Mid2
            | Rule::Mid3
            | Rule::Mvd0
            | Rule::Mvd2
            | Rule::Mvdfd1 => 1,
            Rule::S5
            | Rule::G
            | Rule::Fd3
            | Rule::Fdci2
            | Rule::Mid4
            | Rule::Mvd3
            | Rule::Mvdfd2 => 2,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One line of a derivation. Premise indices are 1-based step numbers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationStep {
    pub formula: Dependency,
    pub rule: Rule,
    #[serde(default)]
    pub premises: Vec<usize>,
    /// Optional explicit bindings of the rule's set variables, each checked
    /// against the values inferred from the formulas.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub instantiation: BTreeMap<String, Schema>,
}

impl DerivationStep {
    pub fn new(formula: Dependency, rule: Rule, premises: Vec<usize>) -> Self {
        DerivationStep {
            formula,
            rule,
            premises,
            instantiation: BTreeMap::new(),
        }
    }
}

/// Why a derivation was rejected; `step` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub step: usize,
    pub reason: String,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {}", self.step, self.reason)
    }
}

/// Checks that every step is a premise from `sigma` or an exact application
/// of its rule to earlier steps.
pub fn check_derivation(
    v: &Schema,
    sigma: &[Dependency],
    steps: &[DerivationStep],
) -> std::result::Result<(), Rejection> {
    for (i, step) in steps.iter().enumerate() {
        let reject = |reason: String| Rejection { step: i + 1, reason };
        if !step.formula.vars().is_subset(v) {
            return Err(reject(format!("{} mentions variables outside {v}", step.formula)));
        }
        if step.rule == Rule::Premise {
            if !step.premises.is_empty() || !sigma.contains(&step.formula) {
                return Err(reject(format!("{} is not a premise", step.formula)));
            }
            continue;
        }
        let mut prem = Vec::new();
        for &p in &step.premises {
            if p == 0 || p > i {
                return Err(reject(format!("premise index {p} does not name an earlier step")));
            }
            prem.push(&steps[p - 1].formula);
        }
        let bindings = check_rule(step.rule, &prem, &step.formula, v).map_err(reject)?;
        for (name, value) in &step.instantiation {
            match bindings.get(name.as_str()) {
                Some(inferred) if inferred == value => {}
                Some(inferred) => {
                    return Err(reject(format!(
                        "binding {name}={value} disagrees with the formulas, which give {inferred}"
                    )))
                }
                None => return Err(reject(format!("rule {} has no variable {name}", step.rule))),
            }
        }
    }
    Ok(())
}

/// Set variables of a rule schema and what they were matched to.
pub type Bindings = BTreeMap<&'static str, Schema>;

fn ci(d: &Dependency) -> std::result::Result<(&Schema, &Schema, &Schema), String> {
    match d {
        Dependency::Ci { x, y, z } => Ok((x, y, z)),
        _ => Err(format!("expected a CI, found {d}")),
    }
}

fn fd(d: &Dependency) -> std::result::Result<(&Schema, &Schema), String> {
    match d {
        Dependency::Fd { x, y } => Ok((x, y)),
        _ => Err(format!("expected an FD, found {d}")),
    }
}

fn mvd(d: &Dependency) -> std::result::Result<(&Schema, &Schema), String> {
    match d {
        Dependency::Mvd { x, y } => Ok((x, y)),
        _ => Err(format!("expected an MVD, found {d}")),
    }
}

fn mid(d: &Dependency) -> std::result::Result<(&[String], &[String]), String> {
    match d {
        Dependency::Mid { x, y } => Ok((x, y)),
        _ => Err(format!("expected an MID, found {d}")),
    }
}

fn need(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bind(pairs: &[(&'static str, &Schema)]) -> Bindings {
    pairs.iter().map(|(k, v)| (*k, (*v).clone())).collect()
}

/// Checks one rule application and returns the inferred set bindings.
pub fn check_rule(
    rule: Rule,
    prem: &[&Dependency],
    c: &Dependency,
    v: &Schema,
) -> std::result::Result<Bindings, String> {
    if prem.len() != rule.arity() {
        return Err(format!(
            "rule {rule} takes {} premises, {} given",
            rule.arity(),
            prem.len()
        ));
    }
    c.validate().map_err(|e| e.to_string())?;
    let bad = |what: &str| format!("{c} is not {what}");
    match rule {
        Rule::Premise => Err("premises are checked against Σ".into()),
        Rule::S1 => {
            let (x, y, z) = ci(c)?;
            need(z.is_empty(), || bad("of the form ⟂(X)(Y|∅)"))?;
            Ok(bind(&[("X", x), ("Y", y)]))
        }
        Rule::S2 => {
            let (px, py, pz) = ci(prem[0])?;
            let (x, y, z) = ci(c)?;
            need(x == px && y == pz && z == py, || bad("the symmetric form of the premise"))?;
            Ok(bind(&[("X", x), ("Y", py), ("Z", pz)]))
        }
        Rule::S3 => {
            let (px, py, pz) = ci(prem[0])?;
            let (x, y, z) = ci(c)?;
            need(x == px && y == py && z.is_subset(pz), || {
                bad("a decomposition of the premise")
            })?;
            Ok(bind(&[("X", x), ("Y", y), ("Z", z), ("W", &pz.difference(z))]))
        }
        Rule::S4 => {
            let (px, py, pz) = ci(prem[0])?;
            let (x, y, w) = ci(c)?;
            let zz = x.difference(px);
            need(
                px.is_subset(x) && y == py && zz.union(w) == *pz && zz.is_disjoint(w),
                || bad("a weak union of the premise"),
            )?;
            Ok(bind(&[("X", px), ("Y", y), ("Z", &zz), ("W", w)]))
        }
        Rule::S5 => {
            let (x1, y1, z1) = ci(prem[0])?;
            let (x2, y2, w) = ci(prem[1])?;
            let (x, y, zw) = ci(c)?;
            need(
                x1 == x && y1 == y && y2 == y && *x2 == x.union(z1) && *zw == z1.union(w),
                || bad("the contraction of the premises ⟂(X)(Y|Z), ⟂(XZ)(Y|W)"),
            )?;
            Ok(bind(&[("X", x), ("Y", y), ("Z", z1), ("W", w)]))
        }
        Rule::G => {
            let (x1, y1, z1) = ci(prem[0])?;
            let (x2, y2, w2) = ci(prem[1])?;
            let (x, y, zw) = ci(c)?;
            let w = x1.difference(x);
            let z = x2.difference(x);
            need(
                y1 == y
                    && y2 == y
                    && x.is_subset(x1)
                    && x.is_subset(x2)
                    && z1 == &z
                    && w2 == &w
                    && *zw == z.union(&w),
                || bad("the intersection of the premises ⟂(XW)(Y|Z), ⟂(XZ)(Y|W)"),
            )?;
            Ok(bind(&[("X", x), ("Y", y), ("Z", &z), ("W", &w)]))
        }
        Rule::Fd1 => {
            let (x, y) = fd(c)?;
            need(y.is_subset(x), || bad("a trivial FD"))?;
            Ok(bind(&[("X", x), ("Y", y)]))
        }
        Rule::Fd2 => {
            let (px, py) = fd(prem[0])?;
            let (x, y) = fd(c)?;
            let z = x.difference(px).union(&y.difference(py));
            need(
                px.is_subset(x) && py.is_subset(y) && *x == px.union(&z) && *y == py.union(&z),
                || bad("an augmentation of the premise"),
            )?;
            Ok(bind(&[("X", px), ("Y", py), ("Z", &z)]))
        }
        Rule::Fd3 => {
            let (x1, y1) = fd(prem[0])?;
            let (x2, z2) = fd(prem[1])?;
            let (x, z) = fd(c)?;
            need(x1 == x && y1 == x2 && z2 == z, || {
                bad("the transitive closure of X→Y and Y→Z")
            })?;
            Ok(bind(&[("X", x), ("Y", y1), ("Z", z)]))
        }
        Rule::Fdci1 => {
            let (px, py) = fd(prem[0])?;
            let (x, y, z) = ci(c)?;
            need(px == x && py == y, || bad("introduced by the premise FD"))?;
            Ok(bind(&[("X", x), ("Y", y), ("Z", z)]))
        }
        Rule::Fdci2 => {
            let (x, y, z) = ci(prem[0])?;
            let (fx, fy) = fd(prem[1])?;
            let (cx, cz) = fd(c)?;
            need(*fx == x.union(y) && fy == z && cx == x && cz == z, || {
                bad("the FD contraction of ⟂(X)(Y|Z) and XY→Z")
            })?;
            Ok(bind(&[("X", x), ("Y", y), ("Z", z)]))
        }
        Rule::Mid1 => {
            let (x, y) = mid(c)?;
            need(x == y, || bad("a reflexive MID"))?;
            Ok(Bindings::new())
        }
        Rule::Mid2 => {
            let (px, py) = mid(prem[0])?;
            let (x, y) = mid(c)?;
            need(x == py && y == px, || bad("the symmetric MID"))?;
            Ok(Bindings::new())
        }
        Rule::Mid3 => {
            let (px, py) = mid(prem[0])?;
            let (x, y) = mid(c)?;
            for (a, b) in x.iter().zip(y) {
                let i = px.iter().position(|p| p == a);
                need(i.is_some_and(|i| py[i] == *b), || {
                    bad("a projection and permutation of the premise")
                })?;
            }
            Ok(Bindings::new())
        }
        Rule::Mid4 => {
            let (a, b1) = mid(prem[0])?;
            let (b2, cc) = mid(prem[1])?;
            let (x, y) = mid(c)?;
            need(b1 == b2 && x == a && y == cc, || bad("the transitive MID"))?;
            Ok(Bindings::new())
        }
        Rule::Mvd0 => {
            let (px, py) = mvd(prem[0])?;
            let (x, z) = mvd(c)?;
            need(
                px == x && px.union(py).union(z) == *v && py.intersection(z).is_subset(x),
                || bad("the complement of the premise"),
            )?;
            Ok(bind(&[("X", x), ("Y", py), ("Z", z)]))
        }
        Rule::Mvd1 => {
            let (x, y) = mvd(c)?;
            need(y.is_subset(x), || bad("a reflexive MVD"))?;
            Ok(bind(&[("X", x), ("Y", y)]))
        }
        Rule::Mvd2 => {
            let (px, py) = mvd(prem[0])?;
            let (x, y) = mvd(c)?;
            let z = y.difference(py);
            need(px.is_subset(x) && py.is_subset(y) && z.is_subset(x), || {
                bad("an augmentation of the premise")
            })?;
            Ok(bind(&[("X", px), ("Y", py), ("Z", &z), ("W", &x.difference(px))]))
        }
        Rule::Mvd3 => {
            let (x1, y1) = mvd(prem[0])?;
            let (y2, z2) = mvd(prem[1])?;
            let (x, r) = mvd(c)?;
            need(x1 == x && y1 == y2 && *r == z2.difference(y1), || {
                bad("the transitive MVD X↠Z∖Y")
            })?;
            Ok(bind(&[("X", x), ("Y", y1), ("Z", z2)]))
        }
        Rule::Mvdfd1 => {
            let (px, py) = fd(prem[0])?;
            let (x, y) = mvd(c)?;
            need(px == x && py == y, || bad("the MVD of the premise FD"))?;
            Ok(bind(&[("X", x), ("Y", y)]))
        }
        Rule::Mvdfd2 => {
            let (x, z) = mvd(prem[0])?;
            let (y, z1) = fd(prem[1])?;
            let (cx, cz) = fd(c)?;
            need(
                cx == x && cz == z1 && z1.is_subset(z) && y.is_disjoint(z),
                || bad("derived by MVD-FD2 from X↠Z and Y→Z'"),
            )?;
            Ok(bind(&[("X", x), ("Y", y), ("Z", z)]))
        }
    }
}

/// Breadth-first forward search for a derivation of `tau` using the SCI+FD
/// rules (S1-S5, FD1-FD3, FD-CI1, FD-CI2). Gives up once `budget` distinct
/// statements have been derived.
pub fn derive_scifd(
    v: &Schema,
    sigma: &[Dependency],
    tau: &Dependency,
    budget: usize,
) -> Result<Option<Vec<DerivationStep>>> {
    let u = Universe::new(v)?;
    for d in sigma.iter().chain([tau]) {
        if !d.vars().is_subset(v) {
            return Err(Error::Schema(format!("{d} mentions variables outside {v}")));
        }
        if !matches!(d, Dependency::Ci { .. } | Dependency::Fd { .. }) {
            return Err(Error::Precondition(format!("{d} is neither a CI nor an FD")));
        }
    }
    // Zero-premise conclusions.
    for rule in [Rule::S1, Rule::Fd1] {
        if check_rule(rule, &[], tau, v).is_ok() {
            return Ok(Some(vec![DerivationStep::new(tau.clone(), rule, vec![])]));
        }
    }

    let mut search = Search {
        universe: u.clone(),
        nodes: Vec::new(),
        index: HashMap::new(),
        queue: VecDeque::new(),
        ci_by_xy: HashMap::new(),
        ci_by_y: HashMap::new(),
        ci_by_xy_union_z: HashMap::new(),
        fd_index: HashMap::new(),
        fd_by_x: HashMap::new(),
        fd_by_y: HashMap::new(),
    };
    for d in sigma {
        search.add(d.clone(), Rule::Premise, vec![]);
    }
    let full = u.full();
    while let Some(i) = search.queue.pop_front() {
        if search.index.contains_key(tau) {
            break;
        }
        if search.nodes.len() >= budget {
            return Ok(None);
        }
        let d = search.nodes[i].0.clone();
        match &d {
            Dependency::Ci { x, y, z } => {
                let (mx, my, mz) = (u.mask(x)?, u.mask(y)?, u.mask(z)?);
                search.add(Dependency::Ci { x: x.clone(), y: z.clone(), z: y.clone() }, Rule::S2, vec![i]);
                for sub in submasks(mz) {
                    if sub != mz && sub != 0 {
                        search.add(
                            Dependency::Ci { x: x.clone(), y: y.clone(), z: u.schema(sub) },
                            Rule::S3,
                            vec![i],
                        );
                    }
                    if sub != 0 && sub != mz {
                        search.add(
                            Dependency::Ci {
                                x: u.schema(mx | sub),
                                y: y.clone(),
                                z: u.schema(mz & !sub),
                            },
                            Rule::S4,
                            vec![i],
                        );
                    }
                }
                // Contraction with this statement in either position.
                let partners: Vec<usize> = search
                    .ci_by_xy
                    .get(&(mx | mz, my))
                    .cloned()
                    .unwrap_or_default();
                for j in partners {
                    let (_, _, w) = ci(&search.nodes[j].0).expect("indexed CI");
                    let c = Dependency::Ci { x: x.clone(), y: y.clone(), z: z.union(w) };
                    search.add(c, Rule::S5, vec![i, j]);
                }
                let candidates: Vec<usize> = search.ci_by_y.get(&my).cloned().unwrap_or_default();
                for j in candidates {
                    let (x1, _, z1) = ci(&search.nodes[j].0).expect("indexed CI");
                    let (m1x, m1z) = (u.mask(x1)?, u.mask(z1)?);
                    if m1x & !m1z == m1x && m1x | m1z == mx && m1z & mx == m1z && m1z != 0 {
                        let c = Dependency::Ci { x: x1.clone(), y: y.clone(), z: z1.union(z) };
                        search.add(c, Rule::S5, vec![j, i]);
                    }
                }
                if let Some(&j) = search.fd_index.get(&(mx | my, mz)) {
                    search.add(Dependency::Fd { x: x.clone(), y: z.clone() }, Rule::Fdci2, vec![i, j]);
                }
            }
            Dependency::Fd { x, y } => {
                let (mx, my) = (u.mask(x)?, u.mask(y)?);
                if mx & my == 0 && my != 0 {
                    let rest = full & !(mx | my);
                    for z in submasks(rest) {
                        search.add(
                            Dependency::Ci { x: x.clone(), y: y.clone(), z: u.schema(z) },
                            Rule::Fdci1,
                            vec![i],
                        );
                    }
                }
                // Trivial FDs Y → Y' feed transitivity, which yields X → Y'.
                for sub in submasks(my) {
                    if sub != 0 && sub != my {
                        search.add(Dependency::Fd { x: y.clone(), y: u.schema(sub) }, Rule::Fd1, vec![]);
                    }
                }
                for a in 0..v.len() {
                    let bit = 1u64 << a;
                    if mx & my & bit == 0 {
                        search.add(
                            Dependency::Fd { x: u.schema(mx | bit), y: u.schema(my | bit) },
                            Rule::Fd2,
                            vec![i],
                        );
                    }
                }
                // Transitivity in both positions.
                let next: Vec<usize> = search.fd_by_x.get(&my).cloned().unwrap_or_default();
                for j in next {
                    let (_, z) = fd(&search.nodes[j].0).expect("indexed FD");
                    search.add(Dependency::Fd { x: x.clone(), y: z.clone() }, Rule::Fd3, vec![i, j]);
                }
                let prev: Vec<usize> = search.fd_by_y.get(&mx).cloned().unwrap_or_default();
                for j in prev {
                    let (w, _) = fd(&search.nodes[j].0).expect("indexed FD");
                    search.add(Dependency::Fd { x: w.clone(), y: y.clone() }, Rule::Fd3, vec![j, i]);
                }
                // FD contraction with a CI ⟂(X')(Y'|Z) where X'Y' = X and Z = Y.
                let cis: Vec<usize> = search.ci_by_xy_union_z.get(&(mx, my)).cloned().unwrap_or_default();
                for j in cis {
                    let (cx, _, cz) = ci(&search.nodes[j].0).expect("indexed CI");
                    search.add(Dependency::Fd { x: cx.clone(), y: cz.clone() }, Rule::Fdci2, vec![j, i]);
                }
            }
            _ => {}
        }
    }
    let Some(&goal) = search.index.get(tau) else {
        return Ok(None);
    };
    Ok(Some(search.extract(goal)))
}

struct Search {
    universe: Universe,
    nodes: Vec<(Dependency, Rule, Vec<usize>)>,
    index: HashMap<Dependency, usize>,
    queue: VecDeque<usize>,
    ci_by_xy: HashMap<(u64, u64), Vec<usize>>,
    ci_by_y: HashMap<u64, Vec<usize>>,
    ci_by_xy_union_z: HashMap<(u64, u64), Vec<usize>>,
    fd_index: HashMap<(u64, u64), usize>,
    fd_by_x: HashMap<u64, Vec<usize>>,
    fd_by_y: HashMap<u64, Vec<usize>>,
}

impl Search {
    fn add(&mut self, d: Dependency, rule: Rule, prem: Vec<usize>) {
        if self.index.contains_key(&d) || d.validate().is_err() {
            return;
        }
        let i = self.nodes.len();
        let key = |s: &Schema| self.universe.mask(s).expect("checked against V");
        match &d {
            Dependency::Ci { x, y, z } => {
                self.ci_by_xy.entry((key(x), key(y))).or_default().push(i);
                self.ci_by_y.entry(key(y)).or_default().push(i);
                self.ci_by_xy_union_z
                    .entry((key(x) | key(y), key(z)))
                    .or_default()
                    .push(i);
            }
            Dependency::Fd { x, y } => {
                self.fd_index.insert((key(x), key(y)), i);
                self.fd_by_x.entry(key(x)).or_default().push(i);
                self.fd_by_y.entry(key(y)).or_default().push(i);
            }
            _ => {}
        }
        self.index.insert(d.clone(), i);
        self.nodes.push((d, rule, prem));
        self.queue.push_back(i);
    }

    /// Steps needed for node `goal`, premises first, renumbered from 1.
    fn extract(&self, goal: usize) -> Vec<DerivationStep> {
        let mut order = Vec::new();
        let mut seen = HashMap::new();
        let mut stack = vec![(goal, false)];
        while let Some((n, expanded)) = stack.pop() {
            if seen.contains_key(&n) {
                continue;
            }
            if expanded {
                seen.insert(n, order.len() + 1);
                order.push(n);
            } else {
                stack.push((n, true));
                for &p in self.nodes[n].2.iter().rev() {
                    if !seen.contains_key(&p) {
                        stack.push((p, false));
                    }
                }
            }
        }
        order
            .into_iter()
            .map(|n| {
                let (d, rule, prem) = &self.nodes[n];
                DerivationStep::new(d.clone(), *rule, prem.iter().map(|p| seen[p]).collect())
            })
            .collect()
    }
}

/// All submasks of `m`, including `0` and `m`.
pub(crate) fn submasks(m: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(m);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & m) };
        Some(cur)
    })
}
