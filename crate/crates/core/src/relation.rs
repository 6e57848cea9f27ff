//! Schemas, tuples and K-relations with finite support.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semiring::{Semiring, Value};

/// A finite set of variable names, kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Schema(Vec<String>);

impl From<Vec<String>> for Schema {
    fn from(v: Vec<String>) -> Self {
        Schema::new(v)
    }
}

impl From<Schema> for Vec<String> {
    fn from(s: Schema) -> Self {
        s.0
    }
}

impl Schema {
    pub fn new<I, S>(vars: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = vars.into_iter().map(Into::into).collect();
        Schema(set.into_iter().collect())
    }

    pub fn empty() -> Self {
        Schema(Vec::new())
    }

    /// Parses `A,B,C`. Single-letter names may also be run together: `ABC`.
    pub fn parse(s: &str) -> Self {
        let s = s.trim();
        if s.contains(',') {
            Schema::new(s.split(',').map(str::trim).filter(|v| !v.is_empty()))
        } else if s.chars().all(|c| c.is_ascii_uppercase()) {
            Schema::new(s.chars().map(String::from))
        } else if s.is_empty() {
            Schema::empty()
        } else {
            Schema::new([s])
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &String> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, var: &str) -> bool {
        self.index_of(var).is_some()
    }

    pub fn index_of(&self, var: &str) -> Option<usize> {
        self.0.binary_search_by(|v| v.as_str().cmp(var)).ok()
    }

    pub fn is_subset(&self, other: &Schema) -> bool {
        self.0.iter().all(|v| other.contains(v))
    }

    pub fn is_disjoint(&self, other: &Schema) -> bool {
        self.0.iter().all(|v| !other.contains(v))
    }

    pub fn union(&self, other: &Schema) -> Schema {
        Schema::new(self.0.iter().chain(other.0.iter()).cloned())
    }

    pub fn intersection(&self, other: &Schema) -> Schema {
        Schema(self.0.iter().filter(|v| other.contains(v)).cloned().collect())
    }

    pub fn difference(&self, other: &Schema) -> Schema {
        Schema(self.0.iter().filter(|v| !other.contains(v)).cloned().collect())
    }

    /// Positions of `sub`'s variables inside `self`.
    pub(crate) fn positions(&self, sub: &Schema) -> Result<Vec<usize>> {
        sub.0
            .iter()
            .map(|v| {
                self.index_of(v).ok_or_else(|| {
                    Error::Schema(format!("variable `{v}` is not in schema {self}"))
                })
            })
            .collect()
    }
}

/// Single-character names, possibly primed, print run together.
pub(crate) fn is_short_name(v: &str) -> bool {
    let mut chars = v.chars();
    chars.next().is_some_and(|c| c != '\'') && chars.all(|c| c == '\'')
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|v| is_short_name(v)) {
            write!(f, "{}", self.0.concat())
        } else {
            write!(f, "{{{}}}", self.0.join(","))
        }
    }
}

impl<S: Into<String>> FromIterator<S> for Schema {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Schema::new(iter)
    }
}

/// Values of a tuple, aligned positionally with the sorted variables of its schema.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tuple(pub Vec<String>);

impl Tuple {
    pub fn new<I, S>(values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Tuple(values.into_iter().map(Into::into).collect())
    }

    pub fn empty() -> Self {
        Tuple(Vec::new())
    }

    pub fn values(&self) -> &[String] {
        &self.0
    }

    pub(crate) fn project(&self, positions: &[usize]) -> Tuple {
        Tuple(positions.iter().map(|&i| self.0[i].clone()).collect())
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.join(","))
    }
}

/// Verdict of [`KRelation::equivalent`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    /// `a ⊗ R = b ⊗ S` with both scalars non-zero.
    Equivalent { a: Value, b: Value },
    NotEquivalent,
    Unknown,
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent { .. })
    }
}

/// A function from tuples over a schema to a semiring, stored by its support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KRelation {
    schema: Schema,
    semiring: Semiring,
    entries: BTreeMap<Tuple, Value>,
}

impl KRelation {
    /// Builds a relation from tuples aligned with the sorted schema.
    /// Zero annotations are dropped; repeated tuples are rejected.
    pub fn new(
        schema: Schema,
        semiring: Semiring,
        entries: impl IntoIterator<Item = (Tuple, Value)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (t, v) in entries {
            semiring.check(&v)?;
            if t.0.len() != schema.len() {
                return Err(Error::Schema(format!(
                    "tuple {t} has {} values but schema {schema} has {} variables",
                    t.0.len(),
                    schema.len()
                )));
            }
            if map.contains_key(&t) {
                return Err(Error::Schema(format!("tuple {t} listed twice")));
            }
            if !semiring.is_zero(&v) {
                map.insert(t, v);
            }
        }
        Self::from_map(schema, semiring, map)
    }

    pub(crate) fn from_map(
        schema: Schema,
        semiring: Semiring,
        entries: BTreeMap<Tuple, Value>,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptySupport(format!("relation over {schema}")));
        }
        Ok(KRelation {
            schema,
            semiring,
            entries,
        })
    }

    /// Builds a relation from rows whose values follow the order of `vars`,
    /// which need not be sorted.
    pub fn from_rows<S: AsRef<str>>(
        vars: &[S],
        semiring: Semiring,
        rows: impl IntoIterator<Item = (Vec<String>, Value)>,
    ) -> Result<Self> {
        let schema = Schema::new(vars.iter().map(|v| v.as_ref().to_string()));
        if schema.len() != vars.len() {
            return Err(Error::Schema("repeated variable name".into()));
        }
        let order: Vec<usize> = schema
            .iter()
            .map(|v| vars.iter().position(|w| w.as_ref() == v).expect("present"))
            .collect();
        let mut entries = Vec::new();
        for (row, v) in rows {
            if row.len() != vars.len() {
                return Err(Error::Schema(format!(
                    "row has {} values, expected {}",
                    row.len(),
                    vars.len()
                )));
            }
            entries.push((Tuple(order.iter().map(|&i| row[i].clone()).collect()), v));
        }
        KRelation::new(schema, semiring, entries)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn semiring(&self) -> Semiring {
        self.semiring
    }

    pub fn entries(&self) -> &BTreeMap<Tuple, Value> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Annotation of `t`; zero outside the support.
    pub fn get(&self, t: &Tuple) -> Value {
        self.entries
            .get(t)
            .cloned()
            .unwrap_or_else(|| self.semiring.zero())
    }

    pub fn support(&self) -> BTreeSet<Tuple> {
        self.entries.keys().cloned().collect()
    }

    /// Marginal as a plain map, possibly empty when annotations cancel.
    pub(crate) fn marginal_map(&self, y: &Schema) -> Result<BTreeMap<Tuple, Value>> {
        let pos = self.schema.positions(y)?;
        let k = self.semiring;
        let mut out: BTreeMap<Tuple, Value> = BTreeMap::new();
        for (t, v) in &self.entries {
            let key = t.project(&pos);
            let acc = out.remove(&key).unwrap_or_else(|| k.zero());
            out.insert(key, k.add_unchecked(&acc, v));
        }
        out.retain(|_, v| !k.is_zero(v));
        Ok(out)
    }

    /// `R[Y]`.
    pub fn marginal(&self, y: &Schema) -> Result<KRelation> {
        let map = self.marginal_map(y)?;
        if map.is_empty() {
            return Err(Error::EmptySupport(format!(
                "marginal of {} on {y} sums to zero",
                self.schema
            )));
        }
        KRelation::from_map(y.clone(), self.semiring, map)
    }

    /// Projection of the support onto `y`, ignoring annotations.
    pub fn project_support(&self, y: &Schema) -> Result<BTreeSet<Tuple>> {
        let pos = self.schema.positions(y)?;
        Ok(self.entries.keys().map(|t| t.project(&pos)).collect())
    }

    /// `aR`.
    pub fn scale(&self, a: &Value) -> Result<KRelation> {
        let k = self.semiring;
        k.check(a)?;
        if k.is_zero(a) {
            return Err(Error::DegenerateScale);
        }
        let map: BTreeMap<Tuple, Value> = self
            .entries
            .iter()
            .map(|(t, v)| (t.clone(), k.mul_unchecked(a, v)))
            .filter(|(_, v)| !k.is_zero(v))
            .collect();
        if map.is_empty() {
            return Err(Error::EmptySupport("scaling annihilated every tuple".into()));
        }
        KRelation::from_map(self.schema.clone(), k, map)
    }

    pub fn active_domain(&self, var: &str) -> Result<BTreeSet<String>> {
        let i = self
            .schema
            .index_of(var)
            .ok_or_else(|| Error::Schema(format!("variable `{var}` is not in {}", self.schema)))?;
        Ok(self.entries.keys().map(|t| t.0[i].clone()).collect())
    }

    fn same_shape(&self, other: &KRelation) -> Result<()> {
        if self.semiring != other.semiring {
            return Err(Error::Carrier(format!(
                "relations over {} and {}",
                self.semiring, other.semiring
            )));
        }
        if self.schema != other.schema {
            return Err(Error::Schema(format!(
                "relations over {} and {}",
                self.schema, other.schema
            )));
        }
        Ok(())
    }

    /// Decides whether `a ⊗ self = b ⊗ other` for some non-zero `a`, `b`.
    ///
    /// The search tries `(1,1)`, then `(S(t0), R(t0))` for the first support
    /// tuple `t0` of `self`, then that pair multiplied through by each distinct
    /// annotation of `self`. Over positive multiplicatively cancellative
    /// semirings the second candidate is the only one that can work, so a
    /// failure is a definite no. Elsewhere a failure is reported as unknown.
    pub fn equivalent(&self, other: &KRelation) -> Result<Equivalence> {
        self.same_shape(other)?;
        let k = self.semiring;
        let complete = k.positive() && k.flags().mult_cancellative;
        if complete && self.entries.keys().ne(other.entries.keys()) {
            return Ok(Equivalence::NotEquivalent);
        }
        let t0 = self.entries.keys().next().expect("non-empty support");
        let r0 = self.get(t0);
        let s0 = other.get(t0);
        let mut candidates = vec![(k.one(), k.one()), (s0.clone(), r0.clone())];
        let mut scalars: Vec<&Value> = vec![&r0];
        for v in self.entries.values() {
            if !scalars.contains(&v) {
                scalars.push(v);
            }
        }
        for c in scalars {
            candidates.push((k.mul_unchecked(c, &s0), k.mul_unchecked(c, &r0)));
        }
        for (a, b) in candidates {
            if k.is_zero(&a) || k.is_zero(&b) {
                continue;
            }
            let keys: BTreeSet<&Tuple> =
                self.entries.keys().chain(other.entries.keys()).collect();
            let ok = keys
                .into_iter()
                .all(|t| k.mul_unchecked(&a, &self.get(t)) == k.mul_unchecked(&b, &other.get(t)));
            if ok {
                return Ok(Equivalence::Equivalent { a, b });
            }
        }
        Ok(if complete {
            Equivalence::NotEquivalent
        } else {
            Equivalence::Unknown
        })
    }

    /// Renames variables; `map` must be injective on the schema.
    pub fn rename(&self, map: &BTreeMap<String, String>) -> Result<KRelation> {
        let new_names: Vec<String> = self
            .schema
            .iter()
            .map(|v| map.get(v).cloned().unwrap_or_else(|| v.clone()))
            .collect();
        let rows = self
            .entries
            .iter()
            .map(|(t, v)| (t.0.clone(), v.clone()));
        KRelation::from_rows(&new_names, self.semiring, rows)
    }

    /// Parses the tab-separated format described in the crate docs.
    pub fn from_tsv(text: &str) -> Result<KRelation> {
        let mut lines = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .filter(|l| !l.trim().is_empty());
        let head = lines
            .next()
            .ok_or_else(|| Error::Parse("empty relation file".into()))?;
        let tag = head
            .strip_prefix("#semiring:")
            .ok_or_else(|| Error::Parse("first line must be `#semiring: <tag>`".into()))?;
        let semiring = Semiring::from_tag(tag)?;
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing header line".into()))?;
        let mut cols: Vec<&str> = header.split('\t').map(str::trim).collect();
        if cols.last() != Some(&"@") {
            return Err(Error::Parse("header must end with the `@` column".into()));
        }
        cols.pop();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            if line.starts_with('#') {
                continue;
            }
            let mut fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() != cols.len() + 1 {
                return Err(Error::Parse(format!(
                    "row {} has {} fields, expected {}",
                    n + 1,
                    fields.len(),
                    cols.len() + 1
                )));
            }
            let value = semiring.parse_value(fields.pop().expect("annotation"))?;
            rows.push((fields.into_iter().map(String::from).collect(), value));
        }
        KRelation::from_rows(&cols, semiring, rows)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("#semiring: {}\n", self.semiring.tag());
        for v in self.schema.iter() {
            out.push_str(v);
            out.push('\t');
        }
        out.push_str("@\n");
        for (t, v) in &self.entries {
            for x in &t.0 {
                out.push_str(x);
                out.push('\t');
            }
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for KRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_tsv())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(vars: &[&str], k: Semiring, rows: &[(&[&str], Value)]) -> KRelation {
        KRelation::from_rows(
            vars,
            k,
            rows.iter()
                .map(|(r, v)| (r.iter().map(|s| s.to_string()).collect(), v.clone())),
        )
        .unwrap()
    }

    #[test]
    fn schema_is_sorted_and_parsed() {
        assert_eq!(Schema::parse("C,A,B"), Schema::parse("ABC"));
        assert_eq!(Schema::parse("Room").vars(), ["Room"]);
        let s = Schema::parse("ABC");
        assert_eq!(s.difference(&Schema::parse("B")).to_string(), "AC");
        assert!(Schema::parse("").is_empty());
    }

    #[test]
    fn zeros_are_dropped_and_empty_rejected() {
        let k = Semiring::NATURALS;
        let r = rel(&["A"], k, &[(&["0"], Value::nat(0)), (&["1"], Value::nat(2))]);
        assert_eq!(r.len(), 1);
        let e = KRelation::from_rows(&["A"], k, vec![(vec!["0".to_string()], Value::nat(0))]);
        assert!(matches!(e, Err(Error::EmptySupport(_))));
    }

    #[test]
    fn marginal_on_empty_schema_is_total() {
        let k = Semiring::NATURALS;
        let r = rel(&["A", "B"], k, &[(&["0", "1"], Value::nat(2)), (&["1", "1"], Value::nat(3))]);
        let m = r.marginal(&Schema::empty()).unwrap();
        assert_eq!(m.get(&Tuple::empty()), Value::nat(5));
        assert!(r.marginal(&Schema::parse("C")).is_err());
    }

    #[test]
    fn mod2_marginal_can_vanish() {
        let k = Semiring::MOD2;
        let r = rel(&["A"], k, &[(&["0"], Value::Mod2(true)), (&["1"], Value::Mod2(true))]);
        assert!(matches!(r.marginal(&Schema::empty()), Err(Error::EmptySupport(_))));
    }

    #[test]
    fn scale_by_zero_is_degenerate() {
        let r = rel(&["A"], Semiring::NATURALS, &[(&["0"], Value::nat(1))]);
        assert_eq!(r.scale(&Value::nat(0)), Err(Error::DegenerateScale));
        assert_eq!(r.scale(&Value::nat(1)).unwrap(), r);
    }

    #[test]
    fn rational_scaling_is_equivalent() {
        let k = Semiring::RATIONALS;
        let r = rel(
            &["A"],
            k,
            &[(&["0"], Value::rational(1, 3)), (&["1"], Value::rational(2, 1))],
        );
        let s = r.scale(&Value::rational(3, 2)).unwrap();
        assert!(r.equivalent(&s).unwrap().is_equivalent());
        assert_eq!(
            r.equivalent(&r).unwrap(),
            Equivalence::Equivalent { a: k.one(), b: k.one() }
        );
        let other = rel(
            &["A"],
            k,
            &[(&["0"], Value::rational(1, 3)), (&["1"], Value::rational(1, 1))],
        );
        assert_eq!(r.equivalent(&other).unwrap(), Equivalence::NotEquivalent);
    }

    #[test]
    fn tsv_round_trip() {
        let text = "#semiring: tropical\nB\tA\t@\nx\t1\t3/2\ny\t2\tinf\nz\t2\t-4\n";
        let r = KRelation::from_tsv(text).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r.schema().vars(), ["A", "B"]);
        let again = KRelation::from_tsv(&r.to_tsv()).unwrap();
        assert_eq!(again, r);
        assert!(KRelation::from_tsv("A\t@\n1\t1\n").is_err());
        assert!(KRelation::from_tsv("#semiring: nat\nA\t@\n1\t1\t1\n").is_err());
    }

    #[test]
    fn active_domain_lists_values() {
        let r = rel(
            &["A", "B"],
            Semiring::BOOLEAN,
            &[(&["0", "a"], Value::Boolean(true)), (&["1", "a"], Value::Boolean(true))],
        );
        assert_eq!(r.active_domain("B").unwrap().len(), 1);
        assert_eq!(r.active_domain("A").unwrap().len(), 2);
        assert!(r.active_domain("C").is_err());
    }
}
