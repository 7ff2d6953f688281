//! Exact model of a prescribed diagonal: a finite rational prefix followed by
//! a closed-form tail.
//!
//! Indices are 1-based throughout, matching the usual `f_1, f_2, ...`
//! convention. Tail position `j` (1-based) sits at sequence index `p + j`
//! where `p` is the prefix length.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{Affine, IndexMap};
use crate::rational::{
    format_rational, half, in_unit_interval, serde_rational, serde_rational_vec, to_f64,
    ExtRational, Rational,
};

/// Upper bound on explicit prefix entries accepted as input.
pub const MAX_PREFIX: usize = 4096;

/// Upper bound on tail entries that may precede the point where a geometric
/// tail stays on one side of 1/2.
pub const MAX_SETTLE: usize = 4000;

/// Upper bound on the prefix length produced by [`DiagonalSpec::materialize`].
pub const MAX_MATERIALIZE: usize = 1 << 16;

/// Closed-form rule for the entries after the prefix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailRule {
    Zero,
    #[serde(rename = "constant")]
    ConstantValue {
        #[serde(with = "serde_rational", alias = "v")]
        c: Rational,
    },
    /// Entry `j` is `c * r^(j-1)`.
    Geometric {
        #[serde(with = "serde_rational")]
        c: Rational,
        #[serde(with = "serde_rational")]
        r: Rational,
    },
    /// Entry `j` is `1 - c * r^(j-1)`.
    OneMinusGeometric {
        #[serde(with = "serde_rational")]
        c: Rational,
        #[serde(with = "serde_rational")]
        r: Rational,
    },
}

impl TailRule {
    pub fn constant(v: Rational) -> Self {
        TailRule::ConstantValue { c: v }
    }

    pub fn geometric(c: Rational, r: Rational) -> Self {
        TailRule::Geometric { c, r }
    }

    pub fn one_minus_geometric(c: Rational, r: Rational) -> Self {
        TailRule::OneMinusGeometric { c, r }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TailRule::Zero => Ok(()),
            TailRule::ConstantValue { c } => {
                if in_unit_interval(c) {
                    Ok(())
                } else {
                    Err(Error::invalid(format!(
                        "constant tail value {} outside [0,1]",
                        format_rational(c)
                    )))
                }
            }
            TailRule::Geometric { c, r } | TailRule::OneMinusGeometric { c, r } => {
                if !(r.is_positive() && *r < Rational::one()) {
                    return Err(Error::invalid(format!(
                        "geometric ratio {} must lie in (0,1)",
                        format_rational(r)
                    )));
                }
                if !(c.is_positive() && *c <= Rational::one()) {
                    return Err(Error::invalid(format!(
                        "geometric coefficient {} must lie in (0,1]",
                        format_rational(c)
                    )));
                }
                // c r^s must drop below 1/2 within MAX_SETTLE steps
                let steps = (2.0 * to_f64(c)).ln() / (1.0 / to_f64(r)).ln();
                if !(steps <= MAX_SETTLE as f64) {
                    return Err(Error::invalid(format!(
                        "geometric tail needs about {steps:.0} entries to fall below 1/2 (limit {MAX_SETTLE})"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Value at tail position `j >= 1`.
    pub fn value(&self, j: usize) -> Rational {
        assert!(j >= 1, "tail positions are 1-based");
        match self {
            TailRule::Zero => Rational::zero(),
            TailRule::ConstantValue { c } => c.clone(),
            TailRule::Geometric { c, r } => c * pow(r, j - 1),
            TailRule::OneMinusGeometric { c, r } => Rational::one() - c * pow(r, j - 1),
        }
    }

    /// The same rule started `k` positions later.
    pub fn shifted(&self, k: usize) -> TailRule {
        match self {
            TailRule::Zero | TailRule::ConstantValue { .. } => self.clone(),
            TailRule::Geometric { c, r } => TailRule::Geometric {
                c: c * pow(r, k),
                r: r.clone(),
            },
            TailRule::OneMinusGeometric { c, r } => TailRule::OneMinusGeometric {
                c: c * pow(r, k),
                r: r.clone(),
            },
        }
    }

    /// Rule for `1 - value`.
    pub fn complement(&self) -> TailRule {
        match self {
            TailRule::Zero => TailRule::ConstantValue { c: Rational::one() },
            TailRule::ConstantValue { c } => {
                let v = Rational::one() - c;
                if v.is_zero() {
                    TailRule::Zero
                } else {
                    TailRule::ConstantValue { c: v }
                }
            }
            TailRule::Geometric { c, r } => TailRule::OneMinusGeometric {
                c: c.clone(),
                r: r.clone(),
            },
            TailRule::OneMinusGeometric { c, r } => TailRule::Geometric {
                c: c.clone(),
                r: r.clone(),
            },
        }
    }

    /// Sum of tail positions `j >= from`.
    pub fn sum_from(&self, from: usize) -> ExtRational {
        assert!(from >= 1);
        match self {
            TailRule::Zero => ExtRational::zero(),
            TailRule::ConstantValue { c } if c.is_zero() => ExtRational::zero(),
            TailRule::ConstantValue { .. } | TailRule::OneMinusGeometric { .. } => {
                ExtRational::Infinite
            }
            TailRule::Geometric { c, r } => {
                ExtRational::Finite(c * pow(r, from - 1) / (Rational::one() - r))
            }
        }
    }

    /// True when every entry of the rule is zero.
    pub fn is_zero(&self) -> bool {
        match self {
            TailRule::Zero => true,
            TailRule::ConstantValue { c } => c.is_zero(),
            _ => false,
        }
    }

    /// Class shared by all entries, provided the rule is homogeneous
    /// (see [`DiagonalSpec::normalized`]).
    pub fn homogeneous_class(&self) -> Option<EntryClass> {
        match self {
            TailRule::Zero => Some(EntryClass::Zero),
            TailRule::ConstantValue { c } => Some(EntryClass::of(c)),
            TailRule::Geometric { c, .. } => (*c <= half()).then_some(EntryClass::Small),
            TailRule::OneMinusGeometric { c, .. } => (*c < half()).then_some(EntryClass::Large),
        }
    }
}

pub(crate) fn pow(r: &Rational, k: usize) -> Rational {
    num_traits::pow(r.clone(), k)
}

/// Position of a value in [0,1] relative to the thresholds the constructions use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntryClass {
    Zero,
    /// In (0, 1/2].
    Small,
    /// In (1/2, 1).
    Large,
    One,
}

impl EntryClass {
    pub fn of(x: &Rational) -> EntryClass {
        if x.is_zero() {
            EntryClass::Zero
        } else if x.is_one() {
            EntryClass::One
        } else if *x <= half() {
            EntryClass::Small
        } else {
            EntryClass::Large
        }
    }

    /// `<= 1/2`, the class summed into `a`.
    pub fn at_most_half(self) -> bool {
        matches!(self, EntryClass::Zero | EntryClass::Small)
    }

    /// In the open interval (0,1).
    pub fn is_proper(self) -> bool {
        matches!(self, EntryClass::Small | EntryClass::Large)
    }
}

/// A prescribed diagonal `(f_i)`: explicit prefix plus closed-form tail.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct DiagonalSpec {
    #[serde(with = "serde_rational_vec")]
    prefix: Vec<Rational>,
    tail: TailRule,
}

#[derive(Deserialize)]
struct RawSpec {
    #[serde(with = "serde_rational_vec", default)]
    prefix: Vec<Rational>,
    #[serde(default = "zero_tail")]
    tail: TailRule,
}

fn zero_tail() -> TailRule {
    TailRule::Zero
}

impl TryFrom<RawSpec> for DiagonalSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        DiagonalSpec::new(raw.prefix, raw.tail)
    }
}

impl DiagonalSpec {
    pub fn new(prefix: Vec<Rational>, tail: TailRule) -> Result<Self> {
        if prefix.len() > MAX_PREFIX {
            return Err(Error::invalid(format!(
                "prefix longer than {MAX_PREFIX} entries"
            )));
        }
        if let Some((i, x)) = prefix.iter().enumerate().find(|(_, x)| !in_unit_interval(x)) {
            return Err(Error::invalid(format!(
                "entry {} = {} outside [0,1]",
                i + 1,
                format_rational(x)
            )));
        }
        tail.validate()?;
        Ok(DiagonalSpec { prefix, tail })
    }

    /// Finite sequence padded with zeros.
    pub fn finite(prefix: Vec<Rational>) -> Result<Self> {
        Self::new(prefix, TailRule::Zero)
    }

    pub fn prefix(&self) -> &[Rational] {
        &self.prefix
    }

    pub fn tail(&self) -> &TailRule {
        &self.tail
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(e.to_string()))
    }

    /// `f_i`, exactly.
    pub fn entry(&self, i: usize) -> Rational {
        assert!(i >= 1, "sequence indices are 1-based");
        if i <= self.prefix.len() {
            self.prefix[i - 1].clone()
        } else {
            self.tail.value(i - self.prefix.len())
        }
    }

    /// Sequential iterator over `f_1, f_2, ...` (infinite).
    pub fn iter(&self) -> Entries<'_> {
        Entries {
            spec: self,
            next: 1,
            power: None,
        }
    }

    /// First `n` entries.
    pub fn take(&self, n: usize) -> Vec<Rational> {
        self.iter().take(n).collect()
    }

    /// `S_i = f_1 + ... + f_i` (with `S_0 = 0`).
    pub fn partial_sum(&self, i: usize) -> Rational {
        self.iter().take(i).fold(Rational::zero(), |acc, x| acc + x)
    }

    /// `sum_{i >= from} f_i`, exactly or `+inf`.
    pub fn tail_sum(&self, from: usize) -> ExtRational {
        assert!(from >= 1, "sequence indices are 1-based");
        let p = self.prefix.len();
        if from > p {
            return self.tail.sum_from(from - p);
        }
        let head: Rational = self.prefix[from - 1..].iter().sum();
        ExtRational::Finite(head) + self.tail.sum_from(1)
    }

    pub fn total(&self) -> ExtRational {
        self.tail_sum(1)
    }

    /// Sequence with index `s` removed. Only prefix indices (or indices in a
    /// zero tail) can be dropped.
    pub fn drop_at(&self, s: usize) -> Result<Self> {
        if s == 0 {
            return Err(Error::invalid("index 0 does not exist"));
        }
        if s <= self.prefix.len() {
            let mut prefix = self.prefix.clone();
            prefix.remove(s - 1);
            return Ok(DiagonalSpec {
                prefix,
                tail: self.tail.clone(),
            });
        }
        if matches!(self.tail, TailRule::Zero) {
            return Ok(self.clone());
        }
        Err(Error::Unsupported(format!(
            "cannot drop index {s} inside a structured tail (prefix length {})",
            self.prefix.len()
        )))
    }

    /// The sequence `f_s, f_{s+1}, ...`.
    pub fn from_index(&self, s: usize) -> Result<Self> {
        if s == 0 {
            return Err(Error::invalid("index 0 does not exist"));
        }
        let p = self.prefix.len();
        if s <= p + 1 {
            Ok(DiagonalSpec {
                prefix: self.prefix[s - 1..].to_vec(),
                tail: self.tail.clone(),
            })
        } else {
            Ok(DiagonalSpec {
                prefix: Vec::new(),
                tail: self.tail.shifted(s - p - 1),
            })
        }
    }

    /// Same sequence with at least `len` explicit prefix entries.
    pub fn materialize(&self, len: usize) -> Result<Self> {
        let p = self.prefix.len();
        if len <= p {
            return Ok(self.clone());
        }
        if len > MAX_MATERIALIZE {
            return Err(Error::Unsupported(format!(
                "materializing {len} entries exceeds the limit of {MAX_MATERIALIZE}"
            )));
        }
        let extra = len - p;
        let mut prefix = self.prefix.clone();
        prefix.extend(self.iter().skip(p).take(extra));
        Ok(DiagonalSpec {
            prefix,
            tail: self.tail.shifted(extra),
        })
    }

    /// The sequence `(1 - f_i)`.
    pub fn complement(&self) -> Self {
        DiagonalSpec {
            prefix: self.prefix.iter().map(|x| Rational::one() - x).collect(),
            tail: self.tail.complement(),
        }
    }

    /// Extends the prefix until every tail entry falls in one [`EntryClass`].
    /// Validation bounds the number of extra entries by about [`MAX_SETTLE`].
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        let mut steps = 0;
        while out.tail.homogeneous_class().is_none() {
            steps += 1;
            assert!(
                steps <= 2 * MAX_SETTLE,
                "validated tails settle within MAX_SETTLE entries"
            );
            let first = out.tail.value(1);
            out.prefix.push(first);
            out.tail = out.tail.shifted(1);
        }
        out
    }

    /// Index of the `n`-th entry (1-based) whose class satisfies `pred`.
    pub fn nth_where(&self, n: usize, pred: impl Fn(EntryClass) -> bool) -> Result<usize> {
        if n == 0 {
            return Err(Error::invalid("ranks are 1-based"));
        }
        let spec = self.normalized();
        let mut seen = 0;
        for (i, x) in spec.prefix.iter().enumerate() {
            if pred(EntryClass::of(x)) {
                seen += 1;
                if seen == n {
                    return Ok(i + 1);
                }
            }
        }
        match spec.tail_class() {
            Some(c) if pred(c) => Ok(spec.prefix.len() + n - seen),
            _ => Err(Error::OutOfRange(format!(
                "only {seen} entries of the requested class, asked for the {n}-th"
            ))),
        }
    }

    /// The entries whose class satisfies `pred`, in order, together with the
    /// map sending their rank to their index here. When the class is finite
    /// the subsequence is padded with a zero tail and the map is finite.
    pub fn subsequence(&self, pred: impl Fn(EntryClass) -> bool) -> (DiagonalSpec, IndexMap) {
        let spec = self.normalized();
        let mut prefix = Vec::new();
        let mut head = Vec::new();
        for (i, x) in spec.prefix.iter().enumerate() {
            if pred(EntryClass::of(x)) {
                prefix.push(x.clone());
                head.push(i + 1);
            }
        }
        let infinite = spec.tail_class().is_some_and(&pred);
        let tail = if infinite { spec.tail.clone() } else { TailRule::Zero };
        let map_tail = infinite.then_some(Affine {
            first: spec.prefix.len() + 1,
            stride: 1,
        });
        let map = IndexMap::new(head, map_tail).expect("increasing indices are injective");
        (DiagonalSpec { prefix, tail }, map)
    }

    pub fn is_normalized(&self) -> bool {
        self.tail.homogeneous_class().is_some()
    }

    /// Class of every tail entry; requires a normalized spec.
    pub fn tail_class(&self) -> Option<EntryClass> {
        self.tail.homogeneous_class()
    }

    /// Number of entries of `class`; `None` when there are infinitely many.
    /// Requires a normalized spec.
    pub fn count_class(&self, class: EntryClass) -> Option<usize> {
        let in_prefix = self
            .prefix
            .iter()
            .filter(|x| EntryClass::of(x) == class)
            .count();
        match self.tail.homogeneous_class() {
            Some(c) if c == class => None,
            Some(_) => Some(in_prefix),
            None => None,
        }
    }
}

impl fmt::Display for DiagonalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.prefix.iter().map(format_rational).collect();
        let tail = match &self.tail {
            TailRule::Zero => "Zero".to_string(),
            TailRule::ConstantValue { c } => format!("Constant({})", format_rational(c)),
            TailRule::Geometric { c, r } => {
                format!("Geometric({}, {})", format_rational(c), format_rational(r))
            }
            TailRule::OneMinusGeometric { c, r } => format!(
                "OneMinusGeometric({}, {})",
                format_rational(c),
                format_rational(r)
            ),
        };
        write!(f, "({} | {tail})", items.join(", "))
    }
}

/// Iterator returned by [`DiagonalSpec::iter`].
pub struct Entries<'a> {
    spec: &'a DiagonalSpec,
    next: usize,
    /// `c * r^(j-1)` for the next geometric tail position.
    power: Option<Rational>,
}

impl Iterator for Entries<'_> {
    type Item = Rational;

    fn next(&mut self) -> Option<Rational> {
        let i = self.next;
        self.next += 1;
        let p = self.spec.prefix.len();
        if i <= p {
            return Some(self.spec.prefix[i - 1].clone());
        }
        let value = match &self.spec.tail {
            TailRule::Zero => Rational::zero(),
            TailRule::ConstantValue { c } => c.clone(),
            TailRule::Geometric { c, r } | TailRule::OneMinusGeometric { c, r } => {
                let term = match self.power.take() {
                    Some(prev) => prev * r,
                    None => c * pow(r, i - p - 1),
                };
                self.power = Some(term.clone());
                if matches!(self.spec.tail, TailRule::Geometric { .. }) {
                    term
                } else {
                    Rational::one() - term
                }
            }
        };
        Some(value)
    }
}
