//! Conditional independence, functional, multivalued and embedded multivalued
//! dependencies, and marginal identities, with their satisfaction checks.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relation::{is_short_name, KRelation, Schema, Tuple};
use crate::semiring::Value;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dependency {
    /// `⟂(X)(Y|Z)`
    Ci { x: Schema, y: Schema, z: Schema },
    /// `X → Y`
    Fd { x: Schema, y: Schema },
    /// `X ↠ Y`, read against the full schema of the relation.
    Mvd { x: Schema, y: Schema },
    /// `X ↠ Y | Z`
    Emvd { x: Schema, y: Schema, z: Schema },
    /// `X ≈ Y`, positional.
    Mid { x: Vec<String>, y: Vec<String> },
}

impl Dependency {
    pub fn ci(x: &str, y: &str, z: &str) -> Dependency {
        Dependency::Ci {
            x: Schema::parse(x),
            y: Schema::parse(y),
            z: Schema::parse(z),
        }
    }

    pub fn fd(x: &str, y: &str) -> Dependency {
        Dependency::Fd {
            x: Schema::parse(x),
            y: Schema::parse(y),
        }
    }

    pub fn mvd(x: &str, y: &str) -> Dependency {
        Dependency::Mvd {
            x: Schema::parse(x),
            y: Schema::parse(y),
        }
    }

    pub fn emvd(x: &str, y: &str, z: &str) -> Dependency {
        Dependency::Emvd {
            x: Schema::parse(x),
            y: Schema::parse(y),
            z: Schema::parse(z),
        }
    }

    /// MID over single-character variable names, or comma separated ones.
    pub fn mid(x: &str, y: &str) -> Dependency {
        Dependency::Mid {
            x: split_sequence(x),
            y: split_sequence(y),
        }
    }

    /// Every variable mentioned.
    pub fn vars(&self) -> Schema {
        match self {
            Dependency::Ci { x, y, z } | Dependency::Emvd { x, y, z } => x.union(y).union(z),
            Dependency::Fd { x, y } | Dependency::Mvd { x, y } => x.union(y),
            Dependency::Mid { x, y } => Schema::new(x.iter().chain(y.iter()).cloned()),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Dependency::Ci { .. } => "ci",
            Dependency::Fd { .. } => "fd",
            Dependency::Mvd { .. } => "mvd",
            Dependency::Emvd { .. } => "emvd",
            Dependency::Mid { .. } => "mid",
        }
    }

    /// Structural invariants: disjoint CI components, MID sides of equal
    /// length without repetitions.
    pub fn validate(&self) -> Result<()> {
        match self {
            Dependency::Ci { x, y, z } => {
                if !(x.is_disjoint(y) && x.is_disjoint(z) && y.is_disjoint(z)) {
                    return Err(Error::Schema(format!("{self}: components must be disjoint")));
                }
            }
            Dependency::Mid { x, y } => {
                if x.len() != y.len() {
                    return Err(Error::Schema(format!("{self}: sides differ in length")));
                }
                for side in [x, y] {
                    if Schema::new(side.iter().cloned()).len() != side.len() {
                        return Err(Error::Schema(format!("{self}: repeated variable")));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Parses one JSON object such as `{"fd":{"x":["A"],"y":["B"]}}`.
    pub fn from_json(text: &str) -> Result<Dependency> {
        let d: Dependency = serde_json::from_str(text.trim())
            .map_err(|e| Error::Parse(format!("dependency: {e}")))?;
        d.validate()?;
        Ok(d)
    }

    /// One dependency per non-empty line.
    pub fn parse_jsonl(text: &str) -> Result<Vec<Dependency>> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(Dependency::from_json)
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    /// A CI is saturated over `v` when it mentions every variable of `v`.
    pub fn is_saturated_over(&self, v: &Schema) -> bool {
        match self {
            Dependency::Ci { .. } => self.vars() == *v,
            _ => false,
        }
    }
}

fn split_sequence(s: &str) -> Vec<String> {
    let s = s.trim();
    if s.contains(',') {
        s.split(',').map(|v| v.trim().to_string()).collect()
    } else {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(String::from)
            .collect()
    }
}

fn seq(v: &[String]) -> String {
    if v.iter().all(|s| is_short_name(s)) {
        v.concat()
    } else {
        v.join(",")
    }
}

impl fmt::Display for Dependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dependency::Ci { x, y, z } => write!(f, "⟂({x})({y}|{z})"),
            Dependency::Fd { x, y } => write!(f, "{x}→{y}"),
            Dependency::Mvd { x, y } => write!(f, "{x}↠{y}"),
            Dependency::Emvd { x, y, z } => write!(f, "{x}↠{y}|{z}"),
            Dependency::Mid { x, y } => write!(f, "{}≈{}", seq(x), seq(y)),
        }
    }
}

/// `X ↠ Y` over `v` as the saturated CI `⟂(X)(Y∖X | V∖XY)`.
pub fn sci_of_mvd(x: &Schema, y: &Schema, v: &Schema) -> Dependency {
    Dependency::Ci {
        x: x.clone(),
        y: y.difference(x),
        z: v.difference(&x.union(y)),
    }
}

/// `⟂(X)(Y|Z)` as the MVD `X ↠ Y`, meaningful over `XYZ`.
pub fn mvd_of_sci(ci: &Dependency) -> Option<Dependency> {
    match ci {
        Dependency::Ci { x, y, .. } => Some(Dependency::Mvd {
            x: x.clone(),
            y: y.clone(),
        }),
        _ => None,
    }
}

/// `⟂(X)(Y|Z)` as the EMVD `X ↠ Y | Z`.
pub fn emvd_of_ci(ci: &Dependency) -> Option<Dependency> {
    match ci {
        Dependency::Ci { x, y, z } => Some(Dependency::Emvd {
            x: x.clone(),
            y: y.clone(),
            z: z.clone(),
        }),
        _ => None,
    }
}

/// `X ↠ Y | Z` as the CI `⟂(X)(Y∖X | Z∖XY)`.
pub fn ci_of_emvd(emvd: &Dependency) -> Option<Dependency> {
    match emvd {
        Dependency::Emvd { x, y, z } => Some(Dependency::Ci {
            x: x.clone(),
            y: y.difference(x),
            z: z.difference(&x.union(y)),
        }),
        _ => None,
    }
}

/// A violation, given as variable assignments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub dependency: Dependency,
    pub tuples: Vec<BTreeMap<String, String>>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Satisfaction {
    Holds,
    Violated(Box<Witness>),
}

impl Satisfaction {
    pub fn holds(&self) -> bool {
        matches!(self, Satisfaction::Holds)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Satisfaction::Holds => None,
            Satisfaction::Violated(w) => Some(w),
        }
    }
}

fn assignment(schema: &Schema, t: &Tuple) -> BTreeMap<String, String> {
    schema
        .iter()
        .cloned()
        .zip(t.values().iter().cloned())
        .collect()
}

fn violated(d: &Dependency, schema: &Schema, tuples: &[&Tuple], detail: String) -> Satisfaction {
    Satisfaction::Violated(Box::new(Witness {
        dependency: d.clone(),
        tuples: tuples.iter().map(|t| assignment(schema, t)).collect(),
        detail,
    }))
}

fn require_within(r: &KRelation, d: &Dependency) -> Result<()> {
    d.validate()?;
    let vars = d.vars();
    if !vars.is_subset(r.schema()) {
        return Err(Error::Schema(format!(
            "{d} mentions {} outside the schema {}",
            vars.difference(r.schema()),
            r.schema()
        )));
    }
    Ok(())
}

/// Checks any dependency against `r`.
pub fn satisfies(r: &KRelation, d: &Dependency) -> Result<Satisfaction> {
    require_within(r, d)?;
    match d {
        Dependency::Ci { x, y, z } => ci_check(r, d, x, y, z),
        Dependency::Fd { x, y } => Ok(fd_check(r, d, x, y)),
        Dependency::Mvd { x, y } => {
            let rest = r.schema().difference(&x.union(y));
            Ok(exchange_check(r, d, x, y, &rest))
        }
        Dependency::Emvd { x, y, z } => Ok(exchange_check(r, d, x, y, z)),
        Dependency::Mid { x, y } => mid_check(r, d, x, y),
    }
}

pub fn satisfies_ci(r: &KRelation, d: &Dependency) -> Result<bool> {
    expect_kind(d, "ci")?;
    satisfies(r, d).map(|s| s.holds())
}

pub fn satisfies_fd(r: &KRelation, d: &Dependency) -> Result<bool> {
    expect_kind(d, "fd")?;
    satisfies(r, d).map(|s| s.holds())
}

pub fn satisfies_mvd(r: &KRelation, d: &Dependency) -> Result<bool> {
    expect_kind(d, "mvd")?;
    satisfies(r, d).map(|s| s.holds())
}

pub fn satisfies_emvd(r: &KRelation, d: &Dependency) -> Result<bool> {
    expect_kind(d, "emvd")?;
    satisfies(r, d).map(|s| s.holds())
}

pub fn satisfies_mid(r: &KRelation, d: &Dependency) -> Result<bool> {
    expect_kind(d, "mid")?;
    satisfies(r, d).map(|s| s.holds())
}

/// Checks every dependency in order and stops at the first violation.
pub fn satisfies_all(r: &KRelation, sigma: &[Dependency]) -> Result<Satisfaction> {
    for d in sigma {
        let s = satisfies(r, d)?;
        if !s.holds() {
            return Ok(s);
        }
    }
    Ok(Satisfaction::Holds)
}

fn expect_kind(d: &Dependency, kind: &str) -> Result<()> {
    if d.kind_name() == kind {
        Ok(())
    } else {
        Err(Error::Precondition(format!("expected a {kind} dependency, got {d}")))
    }
}

fn ci_check(
    r: &KRelation,
    d: &Dependency,
    x: &Schema,
    y: &Schema,
    z: &Schema,
) -> Result<Satisfaction> {
    let k = r.semiring();
    if !k.flags().plus_positive {
        return Err(Error::Capability(format!(
            "conditional independence needs a plus-positive semiring, {k} is not"
        )));
    }
    let xy = x.union(y);
    let xz = x.union(z);
    let xyz = xy.union(z);
    let m_xy = r.marginal_map(&xy)?;
    let m_xz = r.marginal_map(&xz)?;
    let m_xyz = r.marginal_map(&xyz)?;
    let m_x = r.marginal_map(x)?;
    let xy_in_xyz = xyz.positions(&xy)?;
    let xz_in_xyz = xyz.positions(&xz)?;
    let x_in_xyz = xyz.positions(x)?;
    let x_in_xy = xy.positions(x)?;
    let x_in_xz = xz.positions(x)?;

    // Both sides vanish unless the XY and XZ parts join, or the XYZ part is in
    // the support of the marginal.
    let mut by_x: HashMap<Tuple, Vec<&Tuple>> = HashMap::new();
    for b in m_xz.keys() {
        by_x.entry(b.project(&x_in_xz)).or_default().push(b);
    }
    let mut candidates: BTreeSet<Tuple> = m_xyz.keys().cloned().collect();
    for a in m_xy.keys() {
        let Some(bs) = by_x.get(&a.project(&x_in_xy)) else {
            continue;
        };
        for b in bs {
            let vals = xyz
                .iter()
                .map(|v| match xy.index_of(v) {
                    Some(i) => a.values()[i].clone(),
                    None => b.values()[xz.index_of(v).expect("in XZ")].clone(),
                })
                .collect();
            candidates.insert(Tuple(vals));
        }
    }
    let zero = k.zero();
    let get = |m: &BTreeMap<Tuple, Value>, t: &Tuple| m.get(t).unwrap_or(&zero).clone();
    for t in &candidates {
        let l = k.mul_unchecked(&get(&m_xy, &t.project(&xy_in_xyz)), &get(&m_xz, &t.project(&xz_in_xyz)));
        let rr = k.mul_unchecked(&get(&m_xyz, t), &get(&m_x, &t.project(&x_in_xyz)));
        if l != rr {
            return Ok(violated(
                d,
                &xyz,
                &[t],
                format!("R[XY]⊗R[XZ] = {l} but R[XYZ]⊗R[X] = {rr}"),
            ));
        }
    }
    Ok(Satisfaction::Holds)
}

fn fd_check(r: &KRelation, d: &Dependency, x: &Schema, y: &Schema) -> Satisfaction {
    let schema = r.schema();
    let px = schema.positions(x).expect("checked");
    let py = schema.positions(y).expect("checked");
    let mut seen: HashMap<Tuple, &Tuple> = HashMap::new();
    for t in r.entries().keys() {
        match seen.get(&t.project(&px)) {
            Some(s) if s.project(&py) != t.project(&py) => {
                return violated(d, schema, &[s, t], "tuples agree on X but not on Y".into());
            }
            Some(_) => {}
            None => {
                seen.insert(t.project(&px), t);
            }
        }
    }
    Satisfaction::Holds
}

/// Exchange condition on the projection of the support onto `XYZ`: any two
/// tuples agreeing on `X` have a third taking `XY` from the first and
/// `Z∖XY` from the second.
fn exchange_check(
    r: &KRelation,
    d: &Dependency,
    x: &Schema,
    y: &Schema,
    z: &Schema,
) -> Satisfaction {
    let xy = x.union(y);
    let w = xy.union(z);
    let tuples = r.project_support(&w).expect("checked");
    let px = w.positions(x).expect("subset");
    let from_first: Vec<bool> = w.iter().map(|v| xy.contains(v)).collect();
    let mut groups: HashMap<Tuple, Vec<&Tuple>> = HashMap::new();
    for t in &tuples {
        groups.entry(t.project(&px)).or_default().push(t);
    }
    let mut keys: Vec<&Tuple> = groups.keys().collect();
    keys.sort();
    for key in keys {
        let group = &groups[key];
        for t1 in group {
            for t2 in group {
                let t3 = Tuple(
                    from_first
                        .iter()
                        .enumerate()
                        .map(|(i, &first)| {
                            if first {
                                t1.values()[i].clone()
                            } else {
                                t2.values()[i].clone()
                            }
                        })
                        .collect(),
                );
                if !tuples.contains(&t3) {
                    return violated(
                        d,
                        &w,
                        &[t1, t2, &t3],
                        "exchange tuple (third) is missing".into(),
                    );
                }
            }
        }
    }
    Satisfaction::Holds
}

fn mid_check(r: &KRelation, d: &Dependency, x: &[String], y: &[String]) -> Result<Satisfaction> {
    let side = |vars: &[String]| -> Result<BTreeMap<Vec<String>, Value>> {
        let s = Schema::new(vars.iter().cloned());
        let m = r.marginal_map(&s)?;
        let pos: Vec<usize> = vars.iter().map(|v| s.index_of(v).expect("in s")).collect();
        Ok(m.into_iter()
            .map(|(t, v)| (pos.iter().map(|&i| t.values()[i].clone()).collect(), v))
            .collect())
    };
    let mx = side(x)?;
    let my = side(y)?;
    let zero = r.semiring().zero();
    let keys: BTreeSet<&Vec<String>> = mx.keys().chain(my.keys()).collect();
    for key in keys {
        let a = mx.get(key).unwrap_or(&zero);
        let b = my.get(key).unwrap_or(&zero);
        if a != b {
            let named = |vars: &[String]| -> BTreeMap<String, String> {
                vars.iter().cloned().zip(key.iter().cloned()).collect()
            };
            return Ok(Satisfaction::Violated(Box::new(Witness {
                dependency: d.clone(),
                tuples: vec![named(x), named(y)],
                detail: format!("marginals differ: {a} vs {b}"),
            })));
        }
    }
    Ok(Satisfaction::Holds)
}
