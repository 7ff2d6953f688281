//! Exact realizability test for a prescribed projection diagonal and the
//! deterministic route plan that the constructions follow.
//!
//! With `a = sum_{f_i <= 1/2} f_i` and `b = sum_{f_i > 1/2} (1 - f_i)`, a
//! projection with diagonal `f` exists iff `a = inf`, `b = inf`, or `a - b`
//! is an integer.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::CellField;
use crate::rational::{half, ExtRational, Rational};
use crate::seq::{DiagonalSpec, EntryClass, TailRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FeasibilityCase {
    /// `a = inf`.
    NonsummableA,
    /// `a < inf`, `b = inf`.
    NonsummableB,
    /// Both finite and `a - b` is the integer `diff`.
    Summable {
        #[serde(with = "bigint_string")]
        diff: BigInt,
    },
    /// Both finite with a fractional difference; no projection exists.
    Fractional {
        #[serde(with = "crate::rational::serde_rational")]
        diff: Rational,
    },
}

mod bigint_string {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub a: ExtRational,
    pub b: ExtRational,
    pub verdict: Verdict,
    pub case: FeasibilityCase,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.verdict == Verdict::Feasible
    }

    /// The error to raise when a construction is requested for this report.
    pub fn infeasible_error(&self, cell: Option<String>) -> Error {
        Error::Infeasible {
            cell,
            a: self.a.to_string(),
            b: self.b.to_string(),
        }
    }
}

/// Exact `(a, b)`. Entries equal to 1/2 count towards `a`.
pub fn kadison_ab(spec: &DiagonalSpec) -> (ExtRational, ExtRational) {
    let spec = spec.normalized();
    let mut a = Rational::zero();
    let mut b = Rational::zero();
    for x in spec.prefix() {
        if *x <= half() {
            a += x;
        } else {
            b += Rational::one() - x;
        }
    }
    let (a, b) = (ExtRational::Finite(a), ExtRational::Finite(b));
    match spec.tail() {
        TailRule::Zero => (a, b),
        TailRule::ConstantValue { c } => match EntryClass::of(c) {
            EntryClass::Zero | EntryClass::One => (a, b),
            EntryClass::Small => (ExtRational::Infinite, b),
            EntryClass::Large => (a, ExtRational::Infinite),
        },
        // normalized: every geometric entry is <= 1/2
        TailRule::Geometric { .. } => (a + spec.tail().sum_from(1), b),
        // normalized: every entry is > 1/2 and 1 - f is geometric
        TailRule::OneMinusGeometric { .. } => (a, b + spec.tail().complement().sum_from(1)),
    }
}

pub fn classify(spec: &DiagonalSpec) -> FeasibilityReport {
    let (a, b) = kadison_ab(spec);
    let case = match (&a, &b) {
        (ExtRational::Infinite, _) => FeasibilityCase::NonsummableA,
        (_, ExtRational::Infinite) => FeasibilityCase::NonsummableB,
        (ExtRational::Finite(x), ExtRational::Finite(y)) => {
            let diff = x - y;
            if diff.is_integer() {
                FeasibilityCase::Summable {
                    diff: diff.to_integer(),
                }
            } else {
                FeasibilityCase::Fractional { diff }
            }
        }
    };
    let verdict = if matches!(case, FeasibilityCase::Fractional { .. }) {
        Verdict::Infeasible
    } else {
        Verdict::Feasible
    };
    FeasibilityReport { a, b, verdict, case }
}

/// Decision path through the partition sets visited by the selector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BranchLabel {
    pub path: Vec<String>,
}

impl fmt::Display for BranchLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.path.join(" > "))
    }
}

/// Construction used on the sequence (or its complement) once the case is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Route {
    /// Divergent small mass; `complement` when it is `1 - f` that diverges
    /// below 1/2. `large` counts entries in (1/2,1) of the sequence actually
    /// built; entries equal to 1 are split off first.
    Nonsummable { complement: bool, large: usize },
    /// Finitely many entries in (0,1).
    FiniteProper { proper: usize, ones_tail: bool },
    /// Infinitely many entries in (0,1). `complement` when the proper part has
    /// only finitely many entries above 1/2 and is handled through `1 - h`;
    /// `small` counts entries `<= 1/2` of the sequence actually decoupled.
    InfiniteProper { complement: bool, small: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub report: FeasibilityReport,
    pub route: Route,
    pub label: BranchLabel,
}

/// Decides the route for a feasible spec without building anything.
pub fn plan(spec: &DiagonalSpec) -> Result<Plan> {
    let report = classify(spec);
    let spec = spec.normalized();
    let (route, mut path) = match &report.case {
        FeasibilityCase::Fractional { .. } => return Err(report.infeasible_error(None)),
        FeasibilityCase::NonsummableA | FeasibilityCase::NonsummableB => {
            let complement = report.case == FeasibilityCase::NonsummableB;
            let work = if complement { spec.complement() } else { spec };
            let large = work.count_class(EntryClass::Large).ok_or_else(|| {
                Error::Unsupported(
                    "infinitely many entries on both sides of 1/2 with divergent sums".into(),
                )
            })?;
            let mut path = vec![
                if complement { "NonsummableB" } else { "NonsummableA" }.to_string(),
                "S_infty".to_string(),
            ];
            if complement {
                path.push("complement".to_string());
            }
            path.push(format!("X_k(k={large})"));
            path.push(if large == 0 {
                "sorted-tetris".to_string()
            } else {
                format!("split-residue(k={large})")
            });
            (Route::Nonsummable { complement, large }, path)
        }
        FeasibilityCase::Summable { diff } => {
            let head = format!("Summable(diff={diff})");
            match spec
                .count_class(EntryClass::Small)
                .zip(spec.count_class(EntryClass::Large))
            {
                Some((small, large)) => {
                    let proper = small + large;
                    let ones_tail = spec.tail_class() == Some(EntryClass::One);
                    let mut path = vec![
                        head,
                        "Case1".to_string(),
                        format!("X_{{k1..kn}}(n={proper})"),
                    ];
                    if ones_tail {
                        path.push("ones-tail".to_string());
                    }
                    (Route::FiniteProper { proper, ones_tail }, path)
                }
                None => {
                    let complement = spec.tail_class() != Some(EntryClass::Large);
                    let small = if complement {
                        spec.prefix()
                            .iter()
                            .filter(|x| EntryClass::of(x).is_proper() && **x >= half())
                            .count()
                    } else {
                        spec.prefix()
                            .iter()
                            .filter(|x| EntryClass::of(x) == EntryClass::Small)
                            .count()
                    };
                    let path = vec![
                        head,
                        "Case2".to_string(),
                        if complement { "X\\X'" } else { "X'" }.to_string(),
                        format!("X_N(N={small})"),
                        if small >= 2 {
                            "decouple"
                        } else {
                            "sorted-tetris-complement"
                        }
                        .to_string(),
                    ];
                    (Route::InfiniteProper { complement, small }, path)
                }
            }
        }
    };
    path.shrink_to_fit();
    Ok(Plan {
        report,
        route,
        label: BranchLabel { path },
    })
}

/// Labels every cell with the decision path the selector takes on it.
pub fn branch_partition(field: &CellField) -> Result<BTreeMap<String, BranchLabel>> {
    field
        .cells()
        .iter()
        .map(|c| match plan(&c.spec) {
            Ok(p) => Ok((c.cell.clone(), p.label)),
            Err(Error::Infeasible { a, b, .. }) => Err(Error::Infeasible {
                cell: Some(c.cell.clone()),
                a,
                b,
            }),
            Err(e) => Err(e),
        })
        .collect()
}
