//! Commutative semirings with exact arithmetic.
//!
//! Every instance shipped here is backed by arbitrary-precision integers or
//! rationals, so the identities used by the dependency checks are decided
//! exactly. [`Semiring`] carries the instance kind and its capability flags,
//! [`Value`] is a carrier element tagged with the instance it belongs to.

use std::fmt;

use num::{BigInt, BigRational, BigUint, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemiringKind {
    /// ({0,1}, ∨, ∧, 0, 1)
    Boolean,
    /// (ℕ, +, ·, 0, 1)
    Naturals,
    /// (ℚ≥0, +, ·, 0, 1), the exact stand-in for the probability semiring.
    NonNegRationals,
    /// (ℚ ∪ {+∞}, min, +, +∞, 0)
    Tropical,
    /// ([0,1] ∩ ℚ, max, ·, 0, 1)
    Viterbi,
    /// ([0,1] ∩ ℚ, max, max(0, a+b−1), 0, 1)
    Lukasiewicz,
    /// (ℕ>0 × ℤ₂) ∪ {(0,0)} with pointwise operations.
    PairNZ2,
    /// ℤ₂
    Mod2,
}

impl SemiringKind {
    pub const ALL: [SemiringKind; 8] = [
        SemiringKind::Boolean,
        SemiringKind::Naturals,
        SemiringKind::NonNegRationals,
        SemiringKind::Tropical,
        SemiringKind::Viterbi,
        SemiringKind::Lukasiewicz,
        SemiringKind::PairNZ2,
        SemiringKind::Mod2,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            SemiringKind::Boolean => "bool",
            SemiringKind::Naturals => "nat",
            SemiringKind::NonNegRationals => "qnn",
            SemiringKind::Tropical => "tropical",
            SemiringKind::Viterbi => "viterbi",
            SemiringKind::Lukasiewicz => "lukasiewicz",
            SemiringKind::PairNZ2 => "pairnz2",
            SemiringKind::Mod2 => "mod2",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        SemiringKind::ALL
            .into_iter()
            .find(|k| k.tag() == tag.trim())
            .ok_or_else(|| Error::Parse(format!("unknown semiring tag `{tag}`")))
    }
}

impl fmt::Display for SemiringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Capability flags of a semiring instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub plus_positive: bool,
    pub no_zero_divisors: bool,
    pub mult_cancellative: bool,
    pub add_cancellative: bool,
    pub add_idempotent: bool,
    pub naturally_totally_ordered: bool,
}

impl Flags {
    pub fn positive(&self) -> bool {
        self.plus_positive && self.no_zero_divisors
    }

    pub fn get(&self, flag: Flag) -> bool {
        match flag {
            Flag::PlusPositive => self.plus_positive,
            Flag::NoZeroDivisors => self.no_zero_divisors,
            Flag::MultCancellative => self.mult_cancellative,
            Flag::AddCancellative => self.add_cancellative,
            Flag::AddIdempotent => self.add_idempotent,
            Flag::NaturallyTotallyOrdered => self.naturally_totally_ordered,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    PlusPositive,
    NoZeroDivisors,
    MultCancellative,
    AddCancellative,
    AddIdempotent,
    NaturallyTotallyOrdered,
}

impl Flag {
    pub const ALL: [Flag; 6] = [
        Flag::PlusPositive,
        Flag::NoZeroDivisors,
        Flag::MultCancellative,
        Flag::AddCancellative,
        Flag::AddIdempotent,
        Flag::NaturallyTotallyOrdered,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Flag::PlusPositive => "plus_positive",
            Flag::NoZeroDivisors => "no_zero_divisors",
            Flag::MultCancellative => "mult_cancellative",
            Flag::AddCancellative => "add_cancellative",
            Flag::AddIdempotent => "add_idempotent",
            Flag::NaturallyTotallyOrdered => "naturally_totally_ordered",
        }
    }
}

/// A carrier element. The variant records which instance it belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Boolean(bool),
    Natural(BigUint),
    Rational(BigRational),
    /// `None` is +∞.
    Tropical(Option<BigRational>),
    Viterbi(BigRational),
    Lukasiewicz(BigRational),
    /// `(n, b)` with `n > 0`, or `(0, false)`.
    Pair(BigUint, bool),
    Mod2(bool),
}

impl Value {
    pub fn kind(&self) -> SemiringKind {
        match self {
            Value::Boolean(_) => SemiringKind::Boolean,
            Value::Natural(_) => SemiringKind::Naturals,
            Value::Rational(_) => SemiringKind::NonNegRationals,
            Value::Tropical(_) => SemiringKind::Tropical,
            Value::Viterbi(_) => SemiringKind::Viterbi,
            Value::Lukasiewicz(_) => SemiringKind::Lukasiewicz,
            Value::Pair(..) => SemiringKind::PairNZ2,
            Value::Mod2(_) => SemiringKind::Mod2,
        }
    }

    pub fn nat(n: u64) -> Value {
        Value::Natural(BigUint::from(n))
    }

    pub fn rational(numer: i64, denom: i64) -> Value {
        Value::Rational(ratio(numer, denom))
    }

    pub fn tropical(numer: i64, denom: i64) -> Value {
        Value::Tropical(Some(ratio(numer, denom)))
    }

    pub fn tropical_inf() -> Value {
        Value::Tropical(None)
    }

    pub fn pair(n: u64, b: bool) -> Value {
        if n == 0 {
            Value::Pair(BigUint::zero(), false)
        } else {
            Value::Pair(BigUint::from(n), b)
        }
    }

    /// Exact rational view of numeric carriers, used by the entropy module.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            Value::Natural(n) => Some(BigRational::from_integer(BigInt::from(n.clone()))),
            Value::Rational(q) | Value::Viterbi(q) | Value::Lukasiewicz(q) => Some(q.clone()),
            _ => None,
        }
    }
}

pub(crate) fn ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub(crate) fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub(crate) fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational literal `{s}`"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(p))
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Boolean(b) | Value::Mod2(b) => write!(f, "{}", u8::from(*b)),
            Value::Natural(n) => write!(f, "{n}"),
            Value::Rational(q) | Value::Viterbi(q) | Value::Lukasiewicz(q) => {
                f.write_str(&fmt_rational(q))
            }
            Value::Tropical(None) => f.write_str("inf"),
            Value::Tropical(Some(q)) => f.write_str(&fmt_rational(q)),
            Value::Pair(n, b) => write!(f, "({},{})", n, u8::from(*b)),
        }
    }
}

/// A concrete semiring instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Semiring {
    kind: SemiringKind,
}

impl Semiring {
    pub const fn new(kind: SemiringKind) -> Self {
        Semiring { kind }
    }

    pub const BOOLEAN: Semiring = Semiring::new(SemiringKind::Boolean);
    pub const NATURALS: Semiring = Semiring::new(SemiringKind::Naturals);
    pub const RATIONALS: Semiring = Semiring::new(SemiringKind::NonNegRationals);
    pub const TROPICAL: Semiring = Semiring::new(SemiringKind::Tropical);
    pub const VITERBI: Semiring = Semiring::new(SemiringKind::Viterbi);
    pub const LUKASIEWICZ: Semiring = Semiring::new(SemiringKind::Lukasiewicz);
    pub const PAIR_NZ2: Semiring = Semiring::new(SemiringKind::PairNZ2);
    pub const MOD2: Semiring = Semiring::new(SemiringKind::Mod2);

    pub fn from_tag(tag: &str) -> Result<Self> {
        SemiringKind::from_tag(tag).map(Semiring::new)
    }

    pub fn kind(&self) -> SemiringKind {
        self.kind
    }

    pub fn tag(&self) -> &'static str {
        self.kind.tag()
    }

    pub fn flags(&self) -> Flags {
        let f = |pp, nzd, mc, ac, ai, nto| Flags {
            plus_positive: pp,
            no_zero_divisors: nzd,
            mult_cancellative: mc,
            add_cancellative: ac,
            add_idempotent: ai,
            naturally_totally_ordered: nto,
        };
        match self.kind {
            SemiringKind::Boolean => f(true, true, true, false, true, true),
            SemiringKind::Naturals => f(true, true, true, true, false, true),
            SemiringKind::NonNegRationals => f(true, true, true, true, false, true),
            SemiringKind::Tropical => f(true, true, true, false, true, true),
            SemiringKind::Viterbi => f(true, true, true, false, true, true),
            SemiringKind::Lukasiewicz => f(true, false, false, false, true, true),
            SemiringKind::PairNZ2 => f(true, true, false, true, false, false),
            SemiringKind::Mod2 => f(false, true, true, true, false, false),
        }
    }

    pub fn positive(&self) -> bool {
        self.flags().positive()
    }

    pub fn zero(&self) -> Value {
        match self.kind {
            SemiringKind::Boolean => Value::Boolean(false),
            SemiringKind::Naturals => Value::Natural(BigUint::zero()),
            SemiringKind::NonNegRationals => Value::Rational(BigRational::zero()),
            SemiringKind::Tropical => Value::Tropical(None),
            SemiringKind::Viterbi => Value::Viterbi(BigRational::zero()),
            SemiringKind::Lukasiewicz => Value::Lukasiewicz(BigRational::zero()),
            SemiringKind::PairNZ2 => Value::Pair(BigUint::zero(), false),
            SemiringKind::Mod2 => Value::Mod2(false),
        }
    }

    pub fn one(&self) -> Value {
        match self.kind {
            SemiringKind::Boolean => Value::Boolean(true),
            SemiringKind::Naturals => Value::Natural(BigUint::one()),
            SemiringKind::NonNegRationals => Value::Rational(BigRational::one()),
            SemiringKind::Tropical => Value::Tropical(Some(BigRational::zero())),
            SemiringKind::Viterbi => Value::Viterbi(BigRational::one()),
            SemiringKind::Lukasiewicz => Value::Lukasiewicz(BigRational::one()),
            SemiringKind::PairNZ2 => Value::Pair(BigUint::one(), true),
            SemiringKind::Mod2 => Value::Mod2(true),
        }
    }

    pub fn is_zero(&self, v: &Value) -> bool {
        *v == self.zero()
    }

    /// Checks that `v` lies in this instance's carrier.
    pub fn check(&self, v: &Value) -> Result<()> {
        if v.kind() != self.kind {
            return Err(Error::Carrier(format!(
                "value {v} of kind {} used with semiring {}",
                v.kind(),
                self.kind
            )));
        }
        let in_unit = |q: &BigRational| !q.is_negative() && *q <= BigRational::one();
        let ok = match v {
            Value::Rational(q) => !q.is_negative(),
            Value::Viterbi(q) | Value::Lukasiewicz(q) => in_unit(q),
            Value::Pair(n, b) => !(n.is_zero() && *b),
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Carrier(format!("{v} is outside the carrier of {}", self.kind)))
        }
    }

    pub fn add(&self, a: &Value, b: &Value) -> Result<Value> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add_unchecked(a, b))
    }

    pub fn mul(&self, a: &Value, b: &Value) -> Result<Value> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    /// ⊕ without carrier validation; callers guarantee membership.
    pub(crate) fn add_unchecked(&self, a: &Value, b: &Value) -> Value {
        match (a, b) {
            (Value::Boolean(x), Value::Boolean(y)) => Value::Boolean(*x || *y),
            (Value::Natural(x), Value::Natural(y)) => Value::Natural(x + y),
            (Value::Rational(x), Value::Rational(y)) => Value::Rational(x + y),
            (Value::Tropical(x), Value::Tropical(y)) => Value::Tropical(match (x, y) {
                (None, o) | (o, None) => o.clone(),
                (Some(x), Some(y)) => Some(x.min(y).clone()),
            }),
            (Value::Viterbi(x), Value::Viterbi(y)) => Value::Viterbi(x.max(y).clone()),
            (Value::Lukasiewicz(x), Value::Lukasiewicz(y)) => {
                Value::Lukasiewicz(x.max(y).clone())
            }
            (Value::Pair(n, b), Value::Pair(m, c)) => collapse(n + m, b ^ c),
            (Value::Mod2(x), Value::Mod2(y)) => Value::Mod2(x ^ y),
            _ => unreachable!("carrier mismatch in add: {a} vs {b}"),
        }
    }

    pub(crate) fn mul_unchecked(&self, a: &Value, b: &Value) -> Value {
        match (a, b) {
            (Value::Boolean(x), Value::Boolean(y)) => Value::Boolean(*x && *y),
            (Value::Natural(x), Value::Natural(y)) => Value::Natural(x * y),
            (Value::Rational(x), Value::Rational(y)) => Value::Rational(x * y),
            (Value::Tropical(x), Value::Tropical(y)) => Value::Tropical(match (x, y) {
                (Some(x), Some(y)) => Some(x + y),
                _ => None,
            }),
            (Value::Viterbi(x), Value::Viterbi(y)) => Value::Viterbi(x * y),
            (Value::Lukasiewicz(x), Value::Lukasiewicz(y)) => {
                let s = x + y - BigRational::one();
                Value::Lukasiewicz(if s.is_negative() { BigRational::zero() } else { s })
            }
            (Value::Pair(n, b), Value::Pair(m, c)) => collapse(n * m, *b && *c),
            (Value::Mod2(x), Value::Mod2(y)) => Value::Mod2(*x && *y),
            _ => unreachable!("carrier mismatch in mul: {a} vs {b}"),
        }
    }

    /// Sum of an iterator; the empty sum is zero.
    pub fn sum<'a>(&self, values: impl IntoIterator<Item = &'a Value>) -> Value {
        values
            .into_iter()
            .fold(self.zero(), |acc, v| self.add_unchecked(&acc, v))
    }

    /// Product of an iterator; the empty product is one.
    pub fn product<'a>(&self, values: impl IntoIterator<Item = &'a Value>) -> Value {
        values
            .into_iter()
            .fold(self.one(), |acc, v| self.mul_unchecked(&acc, v))
    }

    /// Decides `a ≤ b` in the natural order (`∃c: a ⊕ c = b`) by closed form.
    pub fn natural_leq(&self, a: &Value, b: &Value) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        if !self.flags().naturally_totally_ordered {
            return Err(Error::Capability(format!(
                "{} is not naturally totally ordered",
                self.kind
            )));
        }
        Ok(match (a, b) {
            (Value::Boolean(x), Value::Boolean(y)) => x <= y,
            (Value::Natural(x), Value::Natural(y)) => x <= y,
            (Value::Rational(x), Value::Rational(y)) => x <= y,
            // min(a, c) = b has a solution iff b ≤ a numerically, with +∞ on top.
            (Value::Tropical(x), Value::Tropical(y)) => match (x, y) {
                (None, _) => true,
                (Some(_), None) => false,
                (Some(x), Some(y)) => y <= x,
            },
            (Value::Viterbi(x), Value::Viterbi(y)) => x <= y,
            (Value::Lukasiewicz(x), Value::Lukasiewicz(y)) => x <= y,
            _ => unreachable!(),
        })
    }

    /// Parses a value literal for this instance.
    pub fn parse_value(&self, s: &str) -> Result<Value> {
        let s = s.trim();
        let bit = |s: &str| match s {
            "0" | "false" => Ok(false),
            "1" | "true" => Ok(true),
            _ => Err(Error::Parse(format!("invalid bit literal `{s}`"))),
        };
        let v = match self.kind {
            SemiringKind::Boolean => Value::Boolean(bit(s)?),
            SemiringKind::Mod2 => Value::Mod2(bit(s)?),
            SemiringKind::Naturals => Value::Natural(
                s.parse()
                    .map_err(|_| Error::Parse(format!("invalid natural literal `{s}`")))?,
            ),
            SemiringKind::NonNegRationals => Value::Rational(parse_rational(s)?),
            SemiringKind::Tropical => {
                if s == "inf" {
                    Value::Tropical(None)
                } else {
                    Value::Tropical(Some(parse_rational(s)?))
                }
            }
            SemiringKind::Viterbi => Value::Viterbi(parse_rational(s)?),
            SemiringKind::Lukasiewicz => Value::Lukasiewicz(parse_rational(s)?),
            SemiringKind::PairNZ2 => {
                let inner = s
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::Parse(format!("invalid pair literal `{s}`")))?;
                let (n, b) = inner
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("invalid pair literal `{s}`")))?;
                let n: BigUint = n
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("invalid pair literal `{s}`")))?;
                Value::Pair(n, bit(b.trim())?)
            }
        };
        self.check(&v)?;
        Ok(v)
    }

    /// A small fixed sample of carrier elements, used by exhaustive harnesses.
    pub fn default_samples(&self) -> Vec<Value> {
        match self.kind {
            SemiringKind::Boolean => vec![Value::Boolean(false), Value::Boolean(true)],
            SemiringKind::Mod2 => vec![Value::Mod2(false), Value::Mod2(true)],
            SemiringKind::Naturals => (0..4).map(Value::nat).collect(),
            SemiringKind::NonNegRationals => vec![
                Value::rational(0, 1),
                Value::rational(1, 3),
                Value::rational(1, 1),
                Value::rational(5, 2),
            ],
            SemiringKind::Tropical => vec![
                Value::tropical_inf(),
                Value::tropical(0, 1),
                Value::tropical(-3, 2),
                Value::tropical(4, 1),
            ],
            SemiringKind::Viterbi => [(0, 1), (1, 4), (1, 2), (1, 1)]
                .into_iter()
                .map(|(p, q)| Value::Viterbi(ratio(p, q)))
                .collect(),
            SemiringKind::Lukasiewicz => [(0, 1), (1, 4), (1, 2), (1, 1)]
                .into_iter()
                .map(|(p, q)| Value::Lukasiewicz(ratio(p, q)))
                .collect(),
            SemiringKind::PairNZ2 => vec![
                Value::pair(0, false),
                Value::pair(1, false),
                Value::pair(1, true),
                Value::pair(2, true),
            ],
        }
    }
}

impl fmt::Display for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

fn collapse(n: BigUint, b: bool) -> Value {
    if n.is_zero() {
        Value::Pair(n, false)
    } else {
        Value::Pair(n, b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawViolation {
    pub law: String,
    pub witness: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlagObservation {
    pub flag: Flag,
    pub claimed: bool,
    pub holds_on_samples: bool,
    pub witness: Option<Vec<String>>,
}

/// Outcome of [`check_semiring_laws`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawReport {
    pub semiring: SemiringKind,
    /// Axiom failures and claimed flags refuted by the samples.
    pub violations: Vec<LawViolation>,
    /// What each flag looks like on the samples, whatever was claimed.
    pub flags: Vec<FlagObservation>,
}

impl LawReport {
    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn flag(&self, flag: Flag) -> &FlagObservation {
        self.flags
            .iter()
            .find(|o| o.flag == flag)
            .expect("every flag is observed")
    }
}

/// Checks the semiring axioms and the claimed capability flags on every
/// pair and triple drawn from `samples`.
pub fn check_semiring_laws(semiring: &Semiring, samples: &[Value]) -> LawReport {
    let mut violations = Vec::new();
    let mut foreign = false;
    for v in samples {
        if let Err(e) = semiring.check(v) {
            foreign = true;
            violations.push(LawViolation {
                law: "carrier".into(),
                witness: vec![e.to_string()],
            });
        }
    }
    let k = semiring;
    let zero = k.zero();
    let one = k.one();
    let show = |vs: &[&Value]| vs.iter().map(|v| v.to_string()).collect::<Vec<_>>();
    let mut fail = |law: &str, vs: &[&Value]| {
        if !violations.iter().any(|v: &LawViolation| v.law == law) {
            violations.push(LawViolation {
                law: law.into(),
                witness: show(vs),
            });
        }
    };
    if foreign {
        return LawReport {
            semiring: k.kind(),
            violations,
            flags: Vec::new(),
        };
    }

    for a in samples {
        if k.add_unchecked(&zero, a) != *a {
            fail("additive identity", &[a]);
        }
        if k.mul_unchecked(&one, a) != *a || k.mul_unchecked(a, &one) != *a {
            fail("multiplicative identity", &[a]);
        }
        if !k.is_zero(&k.mul_unchecked(&zero, a)) || !k.is_zero(&k.mul_unchecked(a, &zero)) {
            fail("absorption", &[a]);
        }
        for b in samples {
            if k.add_unchecked(a, b) != k.add_unchecked(b, a) {
                fail("additive commutativity", &[a, b]);
            }
            if k.mul_unchecked(a, b) != k.mul_unchecked(b, a) {
                fail("multiplicative commutativity", &[a, b]);
            }
            for c in samples {
                let l = k.add_unchecked(&k.add_unchecked(a, b), c);
                let r = k.add_unchecked(a, &k.add_unchecked(b, c));
                if l != r {
                    fail("additive associativity", &[a, b, c]);
                }
                let l = k.mul_unchecked(&k.mul_unchecked(a, b), c);
                let r = k.mul_unchecked(a, &k.mul_unchecked(b, c));
                if l != r {
                    fail("multiplicative associativity", &[a, b, c]);
                }
                let l = k.mul_unchecked(a, &k.add_unchecked(b, c));
                let r = k.add_unchecked(&k.mul_unchecked(a, b), &k.mul_unchecked(a, c));
                if l != r {
                    fail("distributivity", &[a, b, c]);
                }
            }
        }
    }

    let flags = k.flags();
    let mut observations = Vec::new();
    for flag in Flag::ALL {
        let witness = flag_counterexample(k, flag, samples);
        let holds = witness.is_none();
        if flags.get(flag) && !holds {
            fail(
                &format!("flag {}", flag.name()),
                &witness.as_ref().map(|w| w.iter().collect::<Vec<_>>()).unwrap_or_default(),
            );
        }
        observations.push(FlagObservation {
            flag,
            claimed: flags.get(flag),
            holds_on_samples: holds,
            witness: witness.map(|w| w.iter().map(Value::to_string).collect()),
        });
    }
    if flags.mult_cancellative && !flags.no_zero_divisors {
        fail("flag consistency: mult_cancellative implies no_zero_divisors", &[]);
    }
    if flags.positive() != (flags.plus_positive && flags.no_zero_divisors) {
        fail("flag consistency: positive", &[]);
    }

    LawReport {
        semiring: k.kind(),
        violations,
        flags: observations,
    }
}

fn flag_counterexample(k: &Semiring, flag: Flag, samples: &[Value]) -> Option<Vec<Value>> {
    let zero = k.zero();
    let pairs = || samples.iter().flat_map(|a| samples.iter().map(move |b| (a, b)));
    match flag {
        Flag::PlusPositive => pairs()
            .find(|(a, b)| k.is_zero(&k.add_unchecked(a, b)) && !(k.is_zero(a) && k.is_zero(b)))
            .map(|(a, b)| vec![a.clone(), b.clone()]),
        Flag::NoZeroDivisors => pairs()
            .find(|(a, b)| k.is_zero(&k.mul_unchecked(a, b)) && !k.is_zero(a) && !k.is_zero(b))
            .map(|(a, b)| vec![a.clone(), b.clone()]),
        Flag::MultCancellative => {
            for a in samples.iter().filter(|a| **a != zero) {
                for (b, c) in pairs() {
                    if b != c && k.mul_unchecked(a, b) == k.mul_unchecked(a, c) {
                        return Some(vec![a.clone(), b.clone(), c.clone()]);
                    }
                }
            }
            None
        }
        Flag::AddCancellative => {
            for a in samples {
                for (b, c) in pairs() {
                    if b != c && k.add_unchecked(a, b) == k.add_unchecked(a, c) {
                        return Some(vec![a.clone(), b.clone(), c.clone()]);
                    }
                }
            }
            None
        }
        Flag::AddIdempotent => samples
            .iter()
            .find(|a| k.add_unchecked(a, a) != **a)
            .map(|a| vec![a.clone()]),
        Flag::NaturallyTotallyOrdered => natural_order_counterexample(k, samples),
    }
}

/// Looks for a failure of reflexivity, antisymmetry, transitivity, totality, or
/// agreement of `natural_leq` with the defining equation restricted to the
/// samples. Instances without a closed form are refuted through the samples.
fn natural_order_counterexample(k: &Semiring, samples: &[Value]) -> Option<Vec<Value>> {
    let witnessed = |a: &Value, b: &Value| {
        samples.iter().any(|c| k.add_unchecked(a, c) == *b)
    };
    if !k.flags().naturally_totally_ordered {
        // Without a closed form, look for a cycle a ≤ b ≤ a with a ≠ b, or an
        // incomparable pair whose order can be read off the samples.
        for a in samples {
            for b in samples {
                if a != b && witnessed(a, b) && witnessed(b, a) {
                    return Some(vec![a.clone(), b.clone()]);
                }
            }
        }
        return None;
    }
    let leq = |a: &Value, b: &Value| k.natural_leq(a, b).unwrap_or(false);
    for a in samples {
        if !leq(a, a) {
            return Some(vec![a.clone()]);
        }
        for b in samples {
            if a != b && leq(a, b) && leq(b, a) {
                return Some(vec![a.clone(), b.clone()]);
            }
            if !leq(a, b) && !leq(b, a) {
                return Some(vec![a.clone(), b.clone()]);
            }
            if witnessed(a, b) && !leq(a, b) {
                return Some(vec![a.clone(), b.clone()]);
            }
            for c in samples {
                if leq(a, b) && leq(b, c) && !leq(a, c) {
                    return Some(vec![a.clone(), b.clone(), c.clone()]);
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tropical_add_is_min() {
        let t = Semiring::TROPICAL;
        assert_eq!(
            t.add(&Value::tropical(3, 1), &Value::tropical(5, 1)).unwrap(),
            Value::tropical(3, 1)
        );
        assert_eq!(
            t.mul(&Value::tropical(100, 1), &Value::tropical(110, 1)).unwrap(),
            Value::tropical(210, 1)
        );
        assert_eq!(t.mul(&t.zero(), &Value::tropical(7, 1)).unwrap(), t.zero());
        assert_eq!(t.one(), Value::tropical(0, 1));
    }

    #[test]
    fn pair_arithmetic() {
        let k = Semiring::PAIR_NZ2;
        assert_eq!(
            k.add(&Value::pair(2, true), &Value::pair(2, true)).unwrap(),
            Value::pair(4, false)
        );
        assert_eq!(
            k.mul(&Value::pair(1, true), &Value::pair(1, false)).unwrap(),
            Value::pair(1, false)
        );
        assert_eq!(
            k.mul(&Value::pair(1, false), &Value::pair(1, false)).unwrap(),
            Value::pair(1, false)
        );
        assert!(k.check(&Value::Pair(BigUint::zero(), true)).is_err());
    }

    #[test]
    fn rational_identity_and_absorption() {
        let q = Semiring::RATIONALS;
        let third = Value::rational(1, 3);
        assert_eq!(q.add(&third, &q.zero()).unwrap(), third);
        for k in SemiringKind::ALL.map(Semiring::new) {
            for x in k.default_samples() {
                assert!(k.is_zero(&k.mul(&k.zero(), &x).unwrap()), "{k}: 0*{x}");
            }
        }
    }

    #[test]
    fn carrier_mismatch_is_an_error() {
        let err = Semiring::NATURALS.add(&Value::nat(1), &Value::tropical(1, 1));
        assert!(matches!(err, Err(Error::Carrier(_))));
        assert!(Semiring::RATIONALS.check(&Value::rational(-1, 2)).is_err());
        assert!(Semiring::VITERBI.check(&Value::Viterbi(ratio(3, 2))).is_err());
    }

    #[test]
    fn natural_order_closed_forms() {
        let n = Semiring::NATURALS;
        assert!(n.natural_leq(&Value::nat(2), &Value::nat(5)).unwrap());
        assert!(!n.natural_leq(&Value::nat(5), &Value::nat(2)).unwrap());
        let t = Semiring::TROPICAL;
        assert!(t.natural_leq(&Value::tropical(5, 1), &Value::tropical(3, 1)).unwrap());
        assert!(!t.natural_leq(&Value::tropical(3, 1), &Value::tropical(5, 1)).unwrap());
        assert!(t.natural_leq(&t.zero(), &Value::tropical(-4, 1)).unwrap());
        assert!(matches!(
            Semiring::PAIR_NZ2.natural_leq(&Value::pair(1, false), &Value::pair(2, true)),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn literals_round_trip() {
        for k in SemiringKind::ALL.map(Semiring::new) {
            for v in k.default_samples() {
                assert_eq!(k.parse_value(&v.to_string()).unwrap(), v);
            }
        }
        assert_eq!(
            Semiring::TROPICAL.parse_value("inf").unwrap(),
            Value::tropical_inf()
        );
        assert_eq!(
            Semiring::RATIONALS.parse_value("6/4").unwrap(),
            Value::rational(3, 2)
        );
        assert!(Semiring::PAIR_NZ2.parse_value("(0,1)").is_err());
        assert!(Semiring::NATURALS.parse_value("-1").is_err());
    }

    #[test]
    fn mod2_is_not_positive() {
        let report = check_semiring_laws(&Semiring::MOD2, &Semiring::MOD2.default_samples());
        assert!(report.is_consistent(), "{:?}", report.violations);
        let obs = report.flag(Flag::PlusPositive);
        assert!(!obs.holds_on_samples);
        assert_eq!(obs.witness.as_deref(), Some(&["1".to_string(), "1".to_string()][..]));
    }

    #[test]
    fn lukasiewicz_has_zero_divisors() {
        let k = Semiring::LUKASIEWICZ;
        let samples = k.default_samples();
        let report = check_semiring_laws(&k, &samples);
        assert!(report.is_consistent(), "{:?}", report.violations);
        let obs = report.flag(Flag::NoZeroDivisors);
        assert!(!obs.claimed);
        assert!(!obs.holds_on_samples);
        assert_eq!(
            k.mul(&Value::Lukasiewicz(ratio(1, 4)), &Value::Lukasiewicz(ratio(1, 2))).unwrap(),
            k.zero()
        );
    }

    #[test]
    fn shipped_instances_pass_their_laws() {
        for k in SemiringKind::ALL.map(Semiring::new) {
            let report = check_semiring_laws(&k, &k.default_samples());
            assert!(report.is_consistent(), "{k}: {:?}", report.violations);
        }
        let naturals = (0..4).map(Value::nat).collect::<Vec<_>>();
        assert!(check_semiring_laws(&Semiring::NATURALS, &naturals).violations.is_empty());
    }

    #[test]
    fn pair_is_not_cancellative() {
        let k = Semiring::PAIR_NZ2;
        let report = check_semiring_laws(&k, &k.default_samples());
        assert!(!report.flag(Flag::MultCancellative).holds_on_samples);
        assert!(!report.flag(Flag::NaturallyTotallyOrdered).holds_on_samples
            || report.flag(Flag::NaturallyTotallyOrdered).witness.is_none());
    }
}
