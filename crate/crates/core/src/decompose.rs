//! Joins of K-relations, lossless-join checks and 4NF normalization.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::dependency::Dependency;
use crate::error::{Error, Result};
use crate::implication::{implies_scifd, submasks, Universe};
use crate::relation::{Equivalence, KRelation, Schema, Tuple};
use crate::semiring::Value;

/// `c*_{R,Z}`: the product of all non-zero annotations of `R[Z]`.
pub fn c_star(r: &KRelation, z: &Schema) -> Result<Value> {
    let m = r.marginal_map(z)?;
    Ok(r.semiring().product(m.values()))
}

/// `c_R(u)`: the product of the annotations of `R[Z]` at tuples other than `u`.
pub fn c_excl(r: &KRelation, z: &Schema, u: &Tuple) -> Result<Value> {
    let m = r.marginal_map(z)?;
    Ok(r
        .semiring()
        .product(m.iter().filter(|(t, _)| *t != u).map(|(_, v)| v)))
}

fn same_semiring(r: &KRelation, s: &KRelation) -> Result<()> {
    if r.semiring() != s.semiring() {
        return Err(Error::Carrier(format!(
            "cannot join relations over {} and {}",
            r.semiring(),
            s.semiring()
        )));
    }
    Ok(())
}

/// A combined tuple over the union schema with the two tuples it came from.
type Match<'a> = (Tuple, &'a Tuple, &'a Tuple);

/// Pairs of support tuples that agree on the shared variables, combined into
/// tuples over the union schema.
fn joinable<'a>(r: &'a KRelation, s: &'a KRelation) -> Result<(Schema, Schema, Vec<Match<'a>>)> {
    let xs = r.schema();
    let ys = s.schema();
    let overlap = xs.intersection(ys);
    let all = xs.union(ys);
    let o_in_x = xs.positions(&overlap)?;
    let o_in_y = ys.positions(&overlap)?;
    let mut by_key: HashMap<Tuple, Vec<&Tuple>> = HashMap::new();
    for b in s.entries().keys() {
        by_key.entry(b.project(&o_in_y)).or_default().push(b);
    }
    let source: Vec<(bool, usize)> = all
        .iter()
        .map(|v| match xs.index_of(v) {
            Some(i) => (true, i),
            None => (false, ys.index_of(v).expect("in union")),
        })
        .collect();
    let mut out = Vec::new();
    for a in r.entries().keys() {
        let Some(bs) = by_key.get(&a.project(&o_in_x)) else {
            continue;
        };
        for b in bs {
            let t = Tuple(
                source
                    .iter()
                    .map(|&(left, i)| if left { a.0[i].clone() } else { b.0[i].clone() })
                    .collect(),
            );
            out.push((t, a, *b));
        }
    }
    Ok((all, overlap, out))
}

/// `(R * S)(t) = R(t[X]) ⊗ S(t[Y])`.
pub fn multiplicative_join(r: &KRelation, s: &KRelation) -> Result<KRelation> {
    same_semiring(r, s)?;
    let k = r.semiring();
    let (all, _, pairs) = joinable(r, s)?;
    let mut map = BTreeMap::new();
    for (t, a, b) in pairs {
        let v = k.mul_unchecked(&r.get(a), &s.get(b));
        if !k.is_zero(&v) {
            map.insert(t, v);
        }
    }
    KRelation::from_map(all, k, map)
}

/// `(R ⋈ S)(t) = R(t[X]) ⊗ S(t[Y]) ⊗ c_S(t[X∩Y])`.
pub fn join(r: &KRelation, s: &KRelation) -> Result<KRelation> {
    same_semiring(r, s)?;
    let k = r.semiring();
    let (all, overlap, pairs) = joinable(r, s)?;
    let marg = s.marginal_map(&overlap)?;
    let o_in_all = all.positions(&overlap)?;
    let mut coeff: HashMap<Tuple, Value> = HashMap::new();
    let mut map = BTreeMap::new();
    for (t, a, b) in pairs {
        let key = t.project(&o_in_all);
        let c = coeff
            .entry(key.clone())
            .or_insert_with(|| k.product(marg.iter().filter(|(u, _)| **u != key).map(|(_, v)| v)))
            .clone();
        let v = k.mul_unchecked(&k.mul_unchecked(&r.get(a), &s.get(b)), &c);
        if !k.is_zero(&v) {
            map.insert(t, v);
        }
    }
    KRelation::from_map(all, k, map)
}

/// Verdict of [`is_lossless`]; the scalars satisfy `a ⊗ R = b ⊗ (R[left] ⋈ R[right])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Losslessness {
    Lossless { a: Value, b: Value },
    NotLossless,
    Unknown,
}

impl Losslessness {
    pub fn is_lossless(&self) -> bool {
        matches!(self, Losslessness::Lossless { .. })
    }
}

/// Whether `R ≡ R[left] ⋈ R[right]`.
pub fn is_lossless(r: &KRelation, left: &Schema, right: &Schema) -> Result<Losslessness> {
    if left.union(right) != *r.schema() {
        return Err(Error::Schema(format!(
            "{left} and {right} do not cover {}",
            r.schema()
        )));
    }
    let j = join(&r.marginal(left)?, &r.marginal(right)?)?;
    Ok(match r.equivalent(&j)? {
        Equivalence::Equivalent { a, b } => Losslessness::Lossless { a, b },
        Equivalence::NotEquivalent => Losslessness::NotLossless,
        Equivalence::Unknown => Losslessness::Unknown,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitStep {
    pub split: Schema,
    /// The MVD `X ↠ Y` on `split`; the parts are `XY` and `split ∖ (Y∖X)`.
    pub mvd: Dependency,
}

impl SplitStep {
    pub fn parts(&self) -> (Schema, Schema) {
        let Dependency::Mvd { x, y } = &self.mvd else {
            unreachable!("split steps carry MVDs")
        };
        (x.union(y), self.split.difference(&y.difference(x)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionPlan {
    pub schemas: Vec<Schema>,
    pub steps: Vec<SplitStep>,
}

impl DecompositionPlan {
    /// Rebuilds a relation over the original schema by joining the parts of
    /// each split, innermost splits first.
    pub fn reconstruct(&self, r: &KRelation) -> Result<KRelation> {
        self.rebuild(r, r.schema())
    }

    fn rebuild(&self, r: &KRelation, s: &Schema) -> Result<KRelation> {
        match self.steps.iter().find(|st| st.split == *s) {
            None => r.marginal(s),
            Some(step) => {
                let (left, right) = step.parts();
                join(&self.rebuild(r, &left)?, &self.rebuild(r, &right)?)
            }
        }
    }
}

/// Σ restricted to a subschema: the CIs over exactly `s`, and FDs cut down to `s`.
fn restrict(sigma: &[Dependency], s: &Schema) -> Vec<Dependency> {
    let mut out = Vec::new();
    for d in sigma {
        match d {
            Dependency::Ci { .. } if d.vars() == *s => out.push(d.clone()),
            Dependency::Mvd { x, y } if x.union(y).is_subset(s) && d.vars() == *s => {
                out.push(d.clone())
            }
            Dependency::Fd { x, y } if x.is_subset(s) => out.push(Dependency::Fd {
                x: x.clone(),
                y: y.intersection(s),
            }),
            _ => {}
        }
    }
    out
}

/// Masks ordered by size, then by their sorted variable names.
fn shortlex(u: &Universe, masks: impl Iterator<Item = u64>) -> Vec<u64> {
    let mut v: Vec<u64> = masks.collect();
    v.sort_by_key(|&m| (m.count_ones(), u.schema(m)));
    v
}

/// The least nontrivial MVD on `s` implied by `sigma_s` whose left side is
/// not a superkey of `s`.
fn violating_mvd(s: &Schema, sigma_s: &[Dependency]) -> Result<Option<Dependency>> {
    let u = Universe::new(s)?;
    let full = u.full();
    for x in shortlex(&u, submasks(full)) {
        let xs = u.schema(x);
        let superkey = implies_scifd(
            s,
            sigma_s,
            &Dependency::Fd {
                x: xs.clone(),
                y: s.clone(),
            },
        )?
        .is_implied();
        if superkey {
            continue;
        }
        let rest = full & !x;
        for y in shortlex(&u, submasks(rest)) {
            if y == 0 || y == rest {
                continue;
            }
            let ci = Dependency::Ci {
                x: xs.clone(),
                y: u.schema(y),
                z: u.schema(rest & !y),
            };
            if implies_scifd(s, sigma_s, &ci)?.is_implied() {
                return Ok(Some(Dependency::Mvd {
                    x: xs,
                    y: u.schema(y),
                }));
            }
        }
    }
    Ok(None)
}

/// Splits `schema` along implied MVDs until every part is in 4NF with
/// respect to `sigma`. Parts are visited in lexicographic order, and within a
/// part the MVD `X ↠ Y` is chosen by the shortlex order of `X`, then `Y`.
pub fn normalize_4nf(schema: &Schema, sigma: &[Dependency]) -> Result<DecompositionPlan> {
    for d in sigma {
        if !matches!(d, Dependency::Ci { .. } | Dependency::Fd { .. } | Dependency::Mvd { .. }) {
            return Err(Error::Precondition(format!(
                "{d}: only CIs, MVDs and FDs can drive normalization"
            )));
        }
        d.validate()?;
    }
    let mut done: Vec<Schema> = Vec::new();
    let mut todo: Vec<Schema> = vec![schema.clone()];
    let mut steps = Vec::new();
    while !todo.is_empty() {
        todo.sort();
        let s = todo.remove(0);
        match violating_mvd(&s, &restrict(sigma, &s))? {
            None => done.push(s),
            Some(mvd) => {
                let step = SplitStep { split: s, mvd };
                let (left, right) = step.parts();
                steps.push(step);
                for part in [left, right] {
                    if !todo.contains(&part) && !done.contains(&part) {
                        todo.push(part);
                    }
                }
            }
        }
    }
    done.sort();
    Ok(DecompositionPlan {
        schemas: done,
        steps,
    })
}
