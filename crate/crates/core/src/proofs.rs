//! The Copy Lemma for K-relations and a checker for proofs that use it,
//! covering both dependency statements and entropic information inequalities.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num::{BigRational, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::dependency::Dependency;
use crate::error::{Error, Result};
use crate::implication::{check_rule, Rule};
use crate::relation::{KRelation, Schema, Tuple};
use crate::semiring::{fmt_rational, parse_rational, Value};

/// A linear combination `Σ c_S h(S)` with exact rational coefficients.
/// The coordinate of the empty set is always dropped.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct EntropicExpr {
    coeffs: BTreeMap<Schema, BigRational>,
}

impl EntropicExpr {
    pub fn zero() -> Self {
        EntropicExpr::default()
    }

    /// `h(S)`.
    pub fn h(s: &Schema) -> Self {
        let mut e = EntropicExpr::zero();
        e.add_term(s, &BigRational::from_integer(1.into()));
        e
    }

    pub fn add_term(&mut self, s: &Schema, c: &BigRational) {
        if s.is_empty() || c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(s.clone()).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(s);
        }
    }

    pub fn coeffs(&self) -> &BTreeMap<Schema, BigRational> {
        &self.coeffs
    }

    pub fn coeff(&self, s: &Schema) -> BigRational {
        self.coeffs.get(s).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn plus(&self, other: &EntropicExpr) -> EntropicExpr {
        let mut e = self.clone();
        for (s, c) in &other.coeffs {
            e.add_term(s, c);
        }
        e
    }

    pub fn scaled(&self, d: &BigRational) -> EntropicExpr {
        let mut e = EntropicExpr::zero();
        for (s, c) in &self.coeffs {
            e.add_term(s, &(c * d));
        }
        e
    }

    pub fn neg(&self) -> EntropicExpr {
        self.scaled(&BigRational::from_integer((-1).into()))
    }

    /// Variables with a non-zero coordinate somewhere.
    pub fn vars(&self) -> Schema {
        self.coeffs
            .keys()
            .fold(Schema::empty(), |acc, s| acc.union(s))
    }

    pub fn to_terms(&self) -> Vec<Term> {
        self.coeffs
            .iter()
            .map(|(s, c)| Term {
                coef: fmt_rational(c),
                h: Some(s.vars().to_vec()),
                cmi: None,
            })
            .collect()
    }

    pub fn from_terms(terms: &[Term]) -> Result<EntropicExpr> {
        let mut e = EntropicExpr::zero();
        for t in terms {
            let c = parse_rational(&t.coef)?;
            let part = match (&t.h, &t.cmi) {
                (Some(h), None) => EntropicExpr::h(&Schema::new(h.iter().cloned())),
                (None, Some(m)) => expand_cmi(&m.y, &m.z, &m.x),
                _ => {
                    return Err(Error::Parse(
                        "a term needs exactly one of `h` and `cmi`".into(),
                    ))
                }
            };
            e = e.plus(&part.scaled(&c));
        }
        Ok(e)
    }
}

impl fmt::Display for EntropicExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        for (i, (s, c)) in self.coeffs.iter().enumerate() {
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if i == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if mag != BigRational::from_integer(1.into()) {
                f.write_str(&fmt_rational(&mag))?;
            }
            write!(f, "h({s})")?;
        }
        Ok(())
    }
}

/// `I(Y;Z|X) = h(XY) + h(XZ) − h(X) − h(XYZ)`.
pub fn expand_cmi(y: &Schema, z: &Schema, x: &Schema) -> EntropicExpr {
    let one = BigRational::from_integer(1.into());
    let minus = -one.clone();
    let mut e = EntropicExpr::zero();
    e.add_term(&x.union(y), &one);
    e.add_term(&x.union(z), &one);
    e.add_term(x, &minus);
    e.add_term(&x.union(y).union(z), &minus);
    e
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CmiTerm {
    #[serde(default)]
    pub x: Schema,
    pub y: Schema,
    pub z: Schema,
}

/// One summand of an expression in JSON: `coef` times `h(S)` or `I(Y;Z|X)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub coef: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cmi: Option<CmiTerm>,
}

/// A proof line: a dependency, or the information inequality `expr ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    Dep(Dependency),
    Ineq(EntropicExpr),
}

impl Statement {
    pub fn vars(&self) -> Schema {
        match self {
            Statement::Dep(d) => d.vars(),
            Statement::Ineq(e) => e.vars(),
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Dep(d) => write!(f, "{d}"),
            Statement::Ineq(e) => write!(f, "{e} ≥ 0"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum StatementJson {
    Ineq { ineq: Vec<Term> },
    Dep(Dependency),
}

impl Serialize for Statement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Statement::Dep(d) => StatementJson::Dep(d.clone()).serialize(s),
            Statement::Ineq(e) => StatementJson::Ineq { ineq: e.to_terms() }.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Statement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match StatementJson::deserialize(d)? {
            StatementJson::Dep(dep) => Ok(Statement::Dep(dep)),
            StatementJson::Ineq { ineq } => EntropicExpr::from_terms(&ineq)
                .map(Statement::Ineq)
                .map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofStep {
    pub stmt: Statement,
    pub rule: String,
    #[serde(default)]
    pub prem: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cert: Option<Json>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofScript {
    pub universe: Schema,
    #[serde(default)]
    pub premises: Vec<Statement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim: Option<Statement>,
    pub steps: Vec<ProofStep>,
}

impl ProofScript {
    pub fn from_json(text: &str) -> Result<ProofScript> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("proof script: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Rejection of a proof; `step` is 1-based, 0 for the script as a whole.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProofError {
    pub step: usize,
    pub reason: String,
}

impl fmt::Display for ProofError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {}", self.step, self.reason)
    }
}

impl std::error::Error for ProofError {}

/// What an accepted proof establishes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verified {
    pub conclusion: Statement,
    pub existential: BTreeSet<String>,
}

#[derive(Deserialize)]
struct CopyCert {
    x: Vec<String>,
    y: Vec<String>,
    fresh: Vec<String>,
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum Instance {
    Mono { x: Schema, y: Schema },
    Sub { x: Schema, y: Schema },
    Cmi(CmiTerm),
}

#[derive(Deserialize)]
struct PolyInstance {
    coef: String,
    #[serde(flatten)]
    kind: Instance,
}

#[derive(Deserialize)]
struct PolyCert {
    instances: Vec<PolyInstance>,
}

#[derive(Deserialize)]
struct ScaleCert {
    factor: String,
}

impl Instance {
    fn expand(&self) -> EntropicExpr {
        match self {
            Instance::Mono { x, y } => EntropicExpr::h(&x.union(y)).plus(&EntropicExpr::h(x).neg()),
            Instance::Sub { x, y } => EntropicExpr::h(x)
                .plus(&EntropicExpr::h(y))
                .plus(&EntropicExpr::h(&x.intersection(y)).neg())
                .plus(&EntropicExpr::h(&x.union(y)).neg()),
            Instance::Cmi(m) => expand_cmi(&m.y, &m.z, &m.x),
        }
    }
}

fn cert<T: for<'de> Deserialize<'de>>(step: &ProofStep) -> std::result::Result<T, String> {
    let c = step.cert.as_ref().ok_or("missing certificate")?;
    serde_json::from_value(c.clone()).map_err(|e| format!("malformed certificate: {e}"))
}

fn positive(q: &str) -> std::result::Result<BigRational, String> {
    let v = parse_rational(q).map_err(|e| e.to_string())?;
    if v.is_positive() {
        Ok(v)
    } else {
        Err(format!("coefficient {q} is not positive"))
    }
}

/// The pair of statements emitted by a copy step.
fn copy_pair(c: &CopyCert) -> (Statement, Statement) {
    let ci = Dependency::Ci {
        x: Schema::new(c.x.iter().cloned()),
        y: Schema::new(c.y.iter().cloned()),
        z: Schema::new(c.fresh.iter().cloned()),
    };
    let mid = Dependency::Mid {
        x: c.x.iter().chain(&c.y).cloned().collect(),
        y: c.x.iter().chain(&c.fresh).cloned().collect(),
    };
    (Statement::Dep(ci), Statement::Dep(mid))
}

/// Checks a proof script step by step.
pub fn check_proof(script: &ProofScript) -> std::result::Result<Verified, ProofError> {
    let mut known: BTreeSet<String> = script.universe.iter().cloned().collect();
    for p in &script.premises {
        known.extend(p.vars().iter().cloned());
    }
    let mut fresh: BTreeSet<String> = BTreeSet::new();
    let mut done: Vec<Statement> = Vec::new();
    // A copy step waiting for its partner: (expected statement, certificate).
    let mut pending: Option<(Statement, Json)> = None;

    for (i, step) in script.steps.iter().enumerate() {
        let n = i + 1;
        let fail = |reason: String| ProofError { step: n, reason };
        if pending.is_some() && step.rule != "copy" {
            return Err(fail("a copy step must be followed by its partner statement".into()));
        }
        let mut prem = Vec::new();
        for &p in &step.prem {
            if p == 0 || p >= n {
                return Err(fail(format!("premise index {p} does not name an earlier step")));
            }
            prem.push(&done[p - 1]);
        }

        match step.rule.as_str() {
            "copy" => {
                if let Some((expected, c)) = pending.take() {
                    if step.cert.as_ref().is_some_and(|own| *own != c) {
                        return Err(fail("certificate differs from the opening copy step".into()));
                    }
                    if step.stmt != expected {
                        return Err(fail(format!("expected the copy partner {expected}")));
                    }
                } else {
                    let c: CopyCert = cert(step).map_err(fail)?;
                    let ys: BTreeSet<&String> = c.y.iter().collect();
                    let xs: BTreeSet<&String> = c.x.iter().collect();
                    let fs: BTreeSet<&String> = c.fresh.iter().collect();
                    if c.y.is_empty() || ys.len() != c.y.len() || xs.len() != c.x.len() {
                        return Err(fail("copied variables must be distinct and non-empty".into()));
                    }
                    if !xs.is_disjoint(&ys) {
                        return Err(fail("copy sides must be disjoint".into()));
                    }
                    if fs.len() != c.fresh.len() || c.fresh.len() != c.y.len() {
                        return Err(fail("fresh copy must list one new name per copied variable".into()));
                    }
                    if let Some(v) = c.x.iter().chain(&c.y).find(|v| !known.contains(*v)) {
                        return Err(fail(format!("copy mentions unknown variable {v}")));
                    }
                    if let Some(v) = c.fresh.iter().find(|v| known.contains(*v)) {
                        return Err(fail(format!("{v} is not fresh")));
                    }
                    let (ci, mid) = copy_pair(&c);
                    let other = if step.stmt == ci {
                        mid
                    } else if step.stmt == mid {
                        ci
                    } else {
                        return Err(fail(format!("{} is not emitted by this copy step", step.stmt)));
                    };
                    known.extend(c.fresh.iter().cloned());
                    fresh.extend(c.fresh.iter().cloned());
                    pending = Some((other, step.cert.clone().expect("parsed above")));
                }
            }
            "premise" => {
                if !step.prem.is_empty() || !script.premises.contains(&step.stmt) {
                    return Err(fail(format!("{} is not a premise", step.stmt)));
                }
            }
            "polymatroid" => {
                let Statement::Ineq(target) = &step.stmt else {
                    return Err(fail("polymatroid steps state inequalities".into()));
                };
                if !step.prem.is_empty() {
                    return Err(fail("polymatroid steps take no premises".into()));
                }
                let c: PolyCert = cert(step).map_err(fail)?;
                let mut sum = EntropicExpr::zero();
                for inst in &c.instances {
                    let k = positive(&inst.coef).map_err(fail)?;
                    sum = sum.plus(&inst.kind.expand().scaled(&k));
                }
                if sum != *target {
                    return Err(fail(format!(
                        "certificate sums to {sum}, not the stated expression"
                    )));
                }
            }
            "interaction" => {
                let [Statement::Dep(Dependency::Mid { x, y })] = prem[..] else {
                    return Err(fail("interaction needs one MID premise".into()));
                };
                let e = EntropicExpr::h(&Schema::new(x.iter().cloned()))
                    .plus(&EntropicExpr::h(&Schema::new(y.iter().cloned())).neg());
                if step.stmt != Statement::Ineq(e.clone()) {
                    return Err(fail(format!("interaction yields {e} ≥ 0")));
                }
            }
            "ci_to_ineq" => {
                let [Statement::Dep(Dependency::Ci { x, y, z })] = prem[..] else {
                    return Err(fail("ci_to_ineq needs one CI premise".into()));
                };
                let e = expand_cmi(y, z, x).neg();
                if step.stmt != Statement::Ineq(e.clone()) {
                    return Err(fail(format!("the CI reads {e} ≥ 0")));
                }
            }
            "scale" => {
                let [Statement::Ineq(p)] = prem[..] else {
                    return Err(fail("scale needs one inequality premise".into()));
                };
                let c: ScaleCert = cert(step).map_err(fail)?;
                let d = positive(&c.factor).map_err(fail)?;
                let e = p.scaled(&d);
                if step.stmt != Statement::Ineq(e.clone()) {
                    return Err(fail(format!("scaling yields {e} ≥ 0")));
                }
            }
            "add" => {
                if prem.is_empty() {
                    return Err(fail("add needs premises".into()));
                }
                let mut sum = EntropicExpr::zero();
                for p in &prem {
                    let Statement::Ineq(e) = p else {
                        return Err(fail("add combines inequalities only".into()));
                    };
                    sum = sum.plus(e);
                }
                if step.stmt != Statement::Ineq(sum.clone()) {
                    return Err(fail(format!("the sum is {sum} ≥ 0")));
                }
            }
            "rewrite" => {
                let [p] = prem[..] else {
                    return Err(fail("rewrite needs one premise".into()));
                };
                if !matches!(p, Statement::Ineq(_)) || step.stmt != *p {
                    return Err(fail("rewritten expression differs from its premise".into()));
                }
            }
            name => {
                let rule = Rule::from_name(name)
                    .filter(|r| *r != Rule::Premise)
                    .ok_or_else(|| fail(format!("unknown rule `{name}`")))?;
                let Statement::Dep(c) = &step.stmt else {
                    return Err(fail(format!("rule {rule} concludes a dependency")));
                };
                let mut deps = Vec::new();
                for p in &prem {
                    match p {
                        Statement::Dep(d) => deps.push(d),
                        Statement::Ineq(_) => {
                            return Err(fail(format!("rule {rule} takes dependency premises")))
                        }
                    }
                }
                let v = Schema::new(known.iter().cloned());
                check_rule(rule, &deps, c, &v).map_err(fail)?;
            }
        }
        if let Some(v) = step.stmt.vars().iter().find(|v| !known.contains(*v)) {
            return Err(fail(format!("{v} is not a known variable")));
        }
        done.push(step.stmt.clone());
    }

    let last = script.steps.len();
    let fail = |reason: String| ProofError { step: last, reason };
    if pending.is_some() {
        return Err(fail("copy step without its partner".into()));
    }
    let Some(conclusion) = done.pop() else {
        return Err(ProofError {
            step: 0,
            reason: "empty proof".into(),
        });
    };
    if let Some(v) = conclusion.vars().iter().find(|v| fresh.contains(*v)) {
        return Err(fail(format!("conclusion mentions existential variable {v}")));
    }
    if let Some(claim) = &script.claim {
        if *claim != conclusion {
            return Err(fail(format!("conclusion {conclusion} is not the claim {claim}")));
        }
    }
    Ok(Verified {
        conclusion,
        existential: fresh,
    })
}

/// Checks a proof whose statements are all dependencies, from premises `sigma` over `v`.
pub fn check_dependency_proof(
    v: &Schema,
    sigma: &[Dependency],
    script: &ProofScript,
) -> std::result::Result<Verified, ProofError> {
    let whole = |reason: String| ProofError { step: 0, reason };
    if script.universe != *v {
        return Err(whole(format!("script is over {}, expected {v}", script.universe)));
    }
    let premises: Vec<Statement> = sigma.iter().cloned().map(Statement::Dep).collect();
    if script.premises != premises {
        return Err(whole("script premises differ from Σ".into()));
    }
    if let Some(n) = script.steps.iter().position(|s| matches!(s.stmt, Statement::Ineq(_))) {
        return Err(ProofError {
            step: n + 1,
            reason: "dependency proofs contain no inequalities".into(),
        });
    }
    check_proof(script)
}

/// Checks a proof of an information inequality over `vars`.
pub fn check_entropic_proof(
    vars: &Schema,
    script: &ProofScript,
) -> std::result::Result<Verified, ProofError> {
    if script.universe != *vars {
        return Err(ProofError {
            step: 0,
            reason: format!("script is over {}, expected {vars}", script.universe),
        });
    }
    let verified = check_proof(script)?;
    if !matches!(verified.conclusion, Statement::Ineq(_)) {
        return Err(ProofError {
            step: script.steps.len(),
            reason: "conclusion is not an inequality".into(),
        });
    }
    Ok(verified)
}

/// Result of [`copy_extend`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopyExtension {
    pub relation: KRelation,
    /// Names of the copies, aligned with the sorted variables of `Y`.
    pub fresh: Vec<String>,
}

/// Name for the copy of `var` that avoids `taken`.
fn copy_name(var: &str, taken: &Schema) -> String {
    let mut name = format!("{var}'");
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

/// The relation `R'(XYY')` of the Copy Lemma:
/// `R'(t) = R(t[XY]) ⊗ R(π(t[XY'])) ⊗ c_R(t[X])`.
pub fn copy_extend(r: &KRelation, x: &Schema, y: &Schema) -> Result<CopyExtension> {
    let k = r.semiring();
    if !k.flags().no_zero_divisors {
        return Err(Error::Capability(format!("{k} has divisors of zero")));
    }
    if !x.is_disjoint(y) || x.union(y) != *r.schema() {
        return Err(Error::Schema(format!(
            "{x} and {y} must partition the schema {}",
            r.schema()
        )));
    }
    let mut taken = r.schema().clone();
    let mut fresh = Vec::new();
    for v in y.iter() {
        let name = copy_name(v, &taken);
        taken = taken.union(&Schema::new([name.clone()]));
        fresh.push(name);
    }
    let schema = taken;
    let px = r.schema().positions(x)?;
    let py = r.schema().positions(y)?;
    let mut groups: HashMap<Tuple, Vec<&Tuple>> = HashMap::new();
    for t in r.entries().keys() {
        groups.entry(t.project(&px)).or_default().push(t);
    }
    // Where each output column comes from: the first tuple's column, or the
    // second tuple's column for a copy.
    let source: Vec<(bool, usize)> = schema
        .iter()
        .map(|v| match r.schema().index_of(v) {
            Some(i) => (true, i),
            None => {
                let j = fresh.iter().position(|f| f == v).expect("fresh name");
                (false, py[j])
            }
        })
        .collect();
    // c_R(u) for every u in the X-marginal, via prefix and suffix products.
    let marginal = r.marginal_map(x)?;
    let vals: Vec<&Value> = marginal.values().collect();
    let mut prefix = vec![k.one()];
    for v in &vals {
        prefix.push(k.mul_unchecked(prefix.last().unwrap(), v));
    }
    let mut suffix = vec![k.one(); vals.len() + 1];
    for i in (0..vals.len()).rev() {
        suffix[i] = k.mul_unchecked(vals[i], &suffix[i + 1]);
    }
    let mut map = BTreeMap::new();
    for (i, key) in marginal.keys().enumerate() {
        let c = k.mul_unchecked(&prefix[i], &suffix[i + 1]);
        let ts = &groups[key];
        for a in ts {
            for b in ts {
                let t = Tuple(
                    source
                        .iter()
                        .map(|&(first, i)| if first { a.0[i].clone() } else { b.0[i].clone() })
                        .collect(),
                );
                let v = k.mul_unchecked(&k.mul_unchecked(&r.get(a), &r.get(b)), &c);
                if !k.is_zero(&v) {
                    map.insert(t, v);
                }
            }
        }
    }
    Ok(CopyExtension {
        relation: KRelation::new(schema, k, map)?,
        fresh,
    })
}
