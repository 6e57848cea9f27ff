//! Shannon entropy of probability distributions given as relations over the
//! non-negative rationals.

use std::collections::HashMap;

use num::ToPrimitive;

use crate::dependency::Dependency;
use crate::error::{Error, Result};
use crate::relation::{KRelation, Schema};
use crate::semiring::{SemiringKind, Value};

/// Largest schema for which the full entropic vector is computed.
pub const MAX_ENTROPIC_VARS: usize = 16;

/// Normalized probabilities of the support, aligned with `r.entries()`.
fn probabilities(r: &KRelation) -> Result<Vec<f64>> {
    if r.semiring().kind() != SemiringKind::NonNegRationals {
        return Err(Error::Capability(format!(
            "entropy needs annotations in qnn, not {}",
            r.semiring()
        )));
    }
    let weights: Vec<f64> = r
        .entries()
        .values()
        .map(|v| match v {
            Value::Rational(q) => q.to_f64().unwrap_or(f64::NAN),
            _ => unreachable!("checked carrier"),
        })
        .collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

fn entropy_of(r: &KRelation, p: &[f64], positions: &[usize]) -> f64 {
    let mut marginal: HashMap<Vec<&str>, f64> = HashMap::new();
    for (t, pt) in r.entries().keys().zip(p) {
        let key = positions.iter().map(|&i| t.0[i].as_str()).collect();
        *marginal.entry(key).or_default() += pt;
    }
    marginal
        .values()
        .filter(|q| **q > 0.0)
        .map(|q| -q * q.log2())
        .sum::<f64>()
        + 0.0
}

/// `H(Y)` in bits.
pub fn entropy(r: &KRelation, y: &Schema) -> Result<f64> {
    let p = probabilities(r)?;
    let pos = r.schema().positions(y)?;
    Ok(entropy_of(r, &p, &pos))
}

/// The entropies of every subset of a schema, indexed by bitmask over the
/// sorted variables.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropicVector {
    schema: Schema,
    values: Vec<f64>,
}

impl EntropicVector {
    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn mask(&self, s: &Schema) -> Result<usize> {
        let mut m = 0;
        for v in s.iter() {
            let i = self.schema.index_of(v).ok_or_else(|| {
                Error::Schema(format!("{v} is not in {}", self.schema))
            })?;
            m |= 1 << i;
        }
        Ok(m)
    }

    /// `h(S)`.
    pub fn get(&self, s: &Schema) -> Result<f64> {
        Ok(self.values[self.mask(s)?])
    }
}

pub fn entropic_vector(r: &KRelation) -> Result<EntropicVector> {
    let n = r.schema().len();
    if n > MAX_ENTROPIC_VARS {
        return Err(Error::SizeGuard(format!(
            "entropic vector over {n} variables exceeds {MAX_ENTROPIC_VARS}"
        )));
    }
    let p = probabilities(r)?;
    let values = (0..1usize << n)
        .map(|m| {
            let pos: Vec<usize> = (0..n).filter(|i| m >> i & 1 == 1).collect();
            entropy_of(r, &p, &pos)
        })
        .collect();
    Ok(EntropicVector {
        schema: r.schema().clone(),
        values,
    })
}

/// `I(Y;Z|X) = h(XY) + h(XZ) − h(X) − h(XYZ)`.
pub fn cmi(h: &EntropicVector, y: &Schema, z: &Schema, x: &Schema) -> Result<f64> {
    let xy = x.union(y);
    let xz = x.union(z);
    Ok(h.get(&xy)? + h.get(&xz)? - h.get(x)? - h.get(&xy.union(z))?)
}

/// Decides a CI numerically: `I(Y;Z|X) ≤ tol`.
pub fn ci_via_cmi(r: &KRelation, d: &Dependency, tol: f64) -> Result<bool> {
    let Dependency::Ci { x, y, z } = d else {
        return Err(Error::Precondition(format!("{d} is not a CI")));
    };
    let p = probabilities(r)?;
    let s = r.schema();
    let h = |set: &Schema| -> Result<f64> { Ok(entropy_of(r, &p, &s.positions(set)?)) };
    let xy = x.union(y);
    let xz = x.union(z);
    let i = h(&xy)? + h(&xz)? - h(x)? - h(&xy.union(z))?;
    Ok(i <= tol)
}
