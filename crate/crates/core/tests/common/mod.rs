#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use semiring_ci::dependency::Dependency;
use semiring_ci::{KRelation, Schema, Semiring, Tuple, Value};

pub fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// `A, B, C, …`
pub fn letters(n: usize) -> Vec<String> {
    (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
}

/// Three non-zero annotations per semiring; Boolean has only one.
pub fn samples(k: Semiring) -> Vec<Value> {
    use semiring_ci::SemiringKind::*;
    match k.kind() {
        Boolean => vec![Value::Boolean(true)],
        Naturals => vec![Value::nat(1), Value::nat(2), Value::nat(3)],
        NonNegRationals => vec![Value::rational(1, 2), Value::rational(1, 1), Value::rational(3, 1)],
        Tropical => vec![Value::tropical(0, 1), Value::tropical(1, 1), Value::tropical(5, 2)],
        PairNZ2 => vec![Value::pair(1, false), Value::pair(1, true), Value::pair(2, false)],
        _ => k.default_samples().into_iter().filter(|v| !k.is_zero(v)).take(3).collect(),
    }
}

fn binary_tuples(n: usize) -> Vec<Vec<String>> {
    (0..1usize << n)
        .map(|m| (0..n).map(|i| (m >> i & 1).to_string()).collect())
        .collect()
}

/// Every relation over `n` binary variables with between 1 and `max_support`
/// support tuples, each annotated from `annotations`.
pub fn relations(k: Semiring, n: usize, max_support: usize, annotations: &[Value]) -> Vec<KRelation> {
    let vars = letters(n);
    let tuples = binary_tuples(n);
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    fn subsets(
        from: usize,
        tuples: &[Vec<String>],
        max: usize,
        chosen: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if !chosen.is_empty() {
            visit(chosen);
        }
        if chosen.len() == max {
            return;
        }
        for i in from..tuples.len() {
            chosen.push(i);
            subsets(i + 1, tuples, max, chosen, visit);
            chosen.pop();
        }
    }
    subsets(0, &tuples, max_support, &mut chosen, &mut |support| {
        let count = annotations.len().pow(support.len() as u32);
        for mut code in 0..count {
            let rows = support.iter().map(|&i| {
                let v = annotations[code % annotations.len()].clone();
                code /= annotations.len();
                (tuples[i].clone(), v)
            });
            let rows: Vec<_> = rows.collect();
            out.push(KRelation::from_rows(&vars, k, rows).expect("valid relation"));
        }
    });
    out
}

/// Every total relation over `n` binary variables with annotations from `annotations`.
pub fn total_relations(k: Semiring, n: usize, annotations: &[Value]) -> Vec<KRelation> {
    let vars = letters(n);
    let tuples = binary_tuples(n);
    let count = annotations.len().pow(tuples.len() as u32);
    (0..count)
        .map(|mut code| {
            let rows = tuples.iter().map(|t| {
                let v = annotations[code % annotations.len()].clone();
                code /= annotations.len();
                (t.clone(), v)
            });
            KRelation::from_rows(&vars, k, rows.collect::<Vec<_>>()).unwrap()
        })
        .collect()
}

pub fn subsets(v: &Schema) -> Vec<Schema> {
    let vars = v.vars();
    (0..1usize << vars.len())
        .map(|m| {
            Schema::new(
                vars.iter()
                    .enumerate()
                    .filter(|(i, _)| m >> i & 1 == 1)
                    .map(|(_, s)| s.clone()),
            )
        })
        .collect()
}

/// Every CI `⟂(X)(Y|Z)` with pairwise disjoint components inside `v`.
pub fn all_cis(v: &Schema) -> Vec<Dependency> {
    let vars = v.vars();
    let n = vars.len();
    let mut out = Vec::new();
    for code in 0..4usize.pow(n as u32) {
        let mut parts = [Vec::new(), Vec::new(), Vec::new()];
        let mut c = code;
        for var in vars {
            if c % 4 < 3 {
                parts[c % 4].push(var.clone());
            }
            c /= 4;
        }
        let [x, y, z] = parts;
        out.push(Dependency::Ci {
            x: Schema::new(x),
            y: Schema::new(y),
            z: Schema::new(z),
        });
    }
    out
}

/// Saturated CIs over `v` with both sides non-empty.
pub fn saturated_cis(v: &Schema) -> Vec<Dependency> {
    all_cis(v)
        .into_iter()
        .filter(|d| match d {
            Dependency::Ci { x, y, z } => !y.is_empty() && !z.is_empty() && x.union(y).union(z) == *v,
            _ => false,
        })
        .collect()
}

pub fn all_fds(v: &Schema) -> Vec<Dependency> {
    let subs = subsets(v);
    let mut out = Vec::new();
    for x in &subs {
        for y in &subs {
            out.push(Dependency::Fd {
                x: x.clone(),
                y: y.clone(),
            });
        }
    }
    out
}

/// Marginal of `r` on `vars`, computed directly from the entries.
pub fn marginal(r: &KRelation, vars: &Schema) -> BTreeMap<Vec<String>, Value> {
    let k = r.semiring();
    let pos: Vec<usize> = vars
        .iter()
        .map(|v| r.schema().index_of(v).expect("variable in schema"))
        .collect();
    let mut m: BTreeMap<Vec<String>, Value> = BTreeMap::new();
    for (t, v) in r.entries() {
        let key: Vec<String> = pos.iter().map(|&i| t.values()[i].clone()).collect();
        let cur = m.remove(&key).unwrap_or_else(|| k.zero());
        m.insert(key, k.add(&cur, v).unwrap());
    }
    m
}

/// Plain evaluation of `R(xy) ⊗ R(xz) = R(xyz) ⊗ R(x)` over the support of
/// the `XYZ` marginal and the product of its `XY` and `XZ` marginals.
pub fn ci_oracle(r: &KRelation, x: &Schema, y: &Schema, z: &Schema) -> bool {
    let k = r.semiring();
    let xy = x.union(y);
    let xz = x.union(z);
    let xyz = xy.union(z);
    let (mx, mxy, mxz, mxyz) = (marginal(r, x), marginal(r, &xy), marginal(r, &xz), marginal(r, &xyz));
    let pick = |t: &BTreeMap<&str, &str>, s: &Schema| -> Vec<String> {
        s.iter().map(|v| t[v.as_str()].to_string()).collect()
    };
    let get = |m: &BTreeMap<Vec<String>, Value>, key: Vec<String>| m.get(&key).cloned().unwrap_or_else(|| k.zero());
    // Candidate tuples: combinations of an XY tuple and an XZ tuple agreeing on X.
    let xy_vars: Vec<&str> = xy.iter().map(String::as_str).collect();
    let xz_vars: Vec<&str> = xz.iter().map(String::as_str).collect();
    for a in mxy.keys() {
        for b in mxz.keys() {
            let mut t: BTreeMap<&str, &str> = BTreeMap::new();
            let mut ok = true;
            for (v, val) in xy_vars.iter().zip(a) {
                t.insert(v, val);
            }
            for (v, val) in xz_vars.iter().zip(b) {
                if let Some(prev) = t.insert(v, val) {
                    ok &= prev == val;
                }
            }
            if !ok {
                continue;
            }
            let lhs = k.mul(&get(&mxy, pick(&t, &xy)), &get(&mxz, pick(&t, &xz))).unwrap();
            let rhs = k.mul(&get(&mxyz, pick(&t, &xyz)), &get(&mx, pick(&t, x))).unwrap();
            if lhs != rhs {
                return false;
            }
        }
    }
    // Over positive semirings both sides vanish off these candidates.
    true
}

/// Two tuples over `v` agreeing exactly on `agree`, annotated with one.
pub fn two_tuple(k: Semiring, v: &Schema, agree: &Schema) -> KRelation {
    let t0 = Tuple::new(v.iter().map(|_| "0"));
    let t1 = Tuple::new(v.iter().map(|x| if agree.contains(x) { "0" } else { "1" }));
    let mut rows = vec![(t0.clone(), k.one())];
    if t1 != t0 {
        rows.push((t1, k.one()));
    }
    KRelation::new(v.clone(), k, rows).unwrap()
}
