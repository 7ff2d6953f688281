//! Sparse real vectors on `l2(N)` with an optional square-root geometric tail.
//!
//! A tail `(start, Geometric(c, r))` means entry `k >= start` equals
//! `sqrt(c * r^(k - start))`. Norms and inner products involving tails are
//! evaluated in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{to_f64, Rational};
use crate::seq::TailRule;

/// Square-root tail: entries `sqrt(rule.value(k - start + 1))` for `k >= start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqrtTail {
    pub start: usize,
    pub rule: TailRule,
}

impl SqrtTail {
    fn coeffs(&self) -> Option<(f64, f64)> {
        match &self.rule {
            TailRule::Geometric { c, r } => Some((to_f64(c), to_f64(r))),
            _ => None,
        }
    }

    /// Squared entry at absolute index `k`.
    fn sq_at(&self, k: usize) -> f64 {
        if k < self.start {
            return 0.0;
        }
        match self.coeffs() {
            Some((c, r)) => c * r.powf((k - self.start) as f64),
            None => 0.0,
        }
    }

    /// Exact sum of squared entries from absolute index `from` on.
    pub fn mass_from(&self, from: usize) -> Rational {
        let j = from.max(self.start) - self.start + 1;
        self.rule
            .sum_from(j)
            .finite()
            .cloned()
            .unwrap_or_else(|| unreachable!("sqrt tails are summable by construction"))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawSparse")]
pub struct SparseVector {
    pub(crate) support: Vec<(usize, f64)>,
    #[serde(rename = "sqrtTail", default)]
    pub(crate) sqrt_tail: Option<SqrtTail>,
}

#[derive(Deserialize)]
struct RawSparse {
    support: Vec<(usize, f64)>,
    #[serde(rename = "sqrtTail", default)]
    sqrt_tail: Option<SqrtTail>,
}

impl TryFrom<RawSparse> for SparseVector {
    type Error = Error;

    fn try_from(raw: RawSparse) -> Result<Self> {
        SparseVector::new(raw.support, raw.sqrt_tail)
    }
}

impl SparseVector {
    /// Builds a vector from strictly increasing 1-based support entries and an
    /// optional geometric tail starting after the last explicit index.
    pub fn new(support: Vec<(usize, f64)>, sqrt_tail: Option<SqrtTail>) -> Result<Self> {
        if support.iter().any(|&(k, x)| k == 0 || !x.is_finite()) {
            return Err(Error::invalid(
                "support indices are 1-based and values must be finite",
            ));
        }
        if support.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::invalid("support indices must be strictly increasing"));
        }
        let sqrt_tail = match sqrt_tail {
            Some(t) if t.rule.is_zero() => None,
            Some(t) => {
                if !matches!(t.rule, TailRule::Geometric { .. }) {
                    return Err(Error::invalid("sqrt tails must be geometric"));
                }
                t.rule.validate()?;
                if t.start == 0 || support.last().is_some_and(|&(k, _)| k >= t.start) {
                    return Err(Error::invalid(
                        "sqrt tail must start after the explicit support",
                    ));
                }
                Some(t)
            }
            None => None,
        };
        Ok(SparseVector { support, sqrt_tail })
    }

    /// Builds from unsorted `(index, value)` pairs, dropping exact zeros.
    pub fn from_entries(mut entries: Vec<(usize, f64)>) -> Result<Self> {
        entries.retain(|&(_, x)| x != 0.0);
        entries.sort_by_key(|&(k, _)| k);
        Self::new(entries, None)
    }

    pub fn unit(k: usize) -> Self {
        SparseVector {
            support: vec![(k, 1.0)],
            sqrt_tail: None,
        }
    }

    pub fn support(&self) -> &[(usize, f64)] {
        &self.support
    }

    pub fn sqrt_tail(&self) -> Option<&SqrtTail> {
        self.sqrt_tail.as_ref()
    }

    /// Largest explicit support index (0 when the support is empty).
    pub fn max_index(&self) -> usize {
        self.support.last().map_or(0, |&(k, _)| k)
    }

    pub fn get(&self, k: usize) -> f64 {
        if let Ok(pos) = self.support.binary_search_by_key(&k, |&(i, _)| i) {
            return self.support[pos].1;
        }
        self.sqrt_tail.as_ref().map_or(0.0, |t| t.sq_at(k).sqrt())
    }

    /// Squared entry, evaluated without a square root for tail positions.
    pub fn sq(&self, k: usize) -> f64 {
        if let Ok(pos) = self.support.binary_search_by_key(&k, |&(i, _)| i) {
            let x = self.support[pos].1;
            return x * x;
        }
        self.sqrt_tail.as_ref().map_or(0.0, |t| t.sq_at(k))
    }

    pub fn norm_sq(&self) -> f64 {
        let head: f64 = self.support.iter().map(|&(_, x)| x * x).sum();
        head + self
            .sqrt_tail
            .as_ref()
            .map_or(0.0, |t| to_f64(&t.mass_from(t.start)))
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let mut sum = 0.0;
        let (a, b) = (&self.support, &other.support);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        if let Some(t) = &other.sqrt_tail {
            sum += a
                .iter()
                .filter(|&&(k, _)| k >= t.start)
                .map(|&(k, x)| x * t.sq_at(k).sqrt())
                .sum::<f64>();
        }
        if let Some(t) = &self.sqrt_tail {
            sum += b
                .iter()
                .filter(|&&(k, _)| k >= t.start)
                .map(|&(k, x)| x * t.sq_at(k).sqrt())
                .sum::<f64>();
        }
        if let (Some(s), Some(t)) = (&self.sqrt_tail, &other.sqrt_tail) {
            sum += tail_overlap(s, t);
        }
        sum
    }

    /// Entries at indices `1..=n` as a dense array (index `k` at slot `k-1`).
    pub fn dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for &(k, x) in self.support.iter().take_while(|&&(k, _)| k <= n) {
            out[k - 1] = x;
        }
        if let Some(t) = &self.sqrt_tail {
            for k in t.start..=n {
                out[k - 1] = t.sq_at(k).sqrt();
            }
        }
        out
    }

    /// Tail mass beyond index `n`, i.e. `sum_{k > n} |v_k|^2`.
    pub fn mass_beyond(&self, n: usize) -> f64 {
        let head: f64 = self
            .support
            .iter()
            .filter(|&&(k, _)| k > n)
            .map(|&(_, x)| x * x)
            .sum();
        head + self
            .sqrt_tail
            .as_ref()
            .map_or(0.0, |t| to_f64(&t.mass_from(n + 1)))
    }

    /// `sum_{k > n} v_k w_k`.
    pub fn dot_beyond(&self, other: &SparseVector, n: usize) -> f64 {
        let full = self.dot(other);
        let head: f64 = (1..=n.min(self.reach().min(other.reach())))
            .map(|k| self.get(k) * other.get(k))
            .sum();
        full - head
    }

    /// Last index that can be nonzero, or `usize::MAX` with a tail.
    pub fn reach(&self) -> usize {
        if self.sqrt_tail.is_some() {
            usize::MAX
        } else {
            self.max_index()
        }
    }

    pub fn neg(&self) -> SparseVector {
        SparseVector {
            support: self.support.iter().map(|&(k, x)| (k, -x)).collect(),
            sqrt_tail: self.sqrt_tail.clone(),
        }
    }

    /// Same vector with tail entries up to index `upto` moved into the
    /// explicit support.
    pub fn materialize_tail(&self, upto: usize) -> SparseVector {
        let Some(t) = &self.sqrt_tail else {
            return self.clone();
        };
        if upto < t.start {
            return self.clone();
        }
        let mut support = self.support.clone();
        support.extend((t.start..=upto).map(|k| (k, t.sq_at(k).sqrt())));
        SparseVector {
            support,
            sqrt_tail: Some(SqrtTail {
                start: upto + 1,
                rule: t.rule.shifted(upto + 1 - t.start),
            }),
        }
    }
}

/// `sum_{k >= max(s,t)} sqrt(s_k) sqrt(t_k)` for two geometric sqrt tails.
fn tail_overlap(s: &SqrtTail, t: &SqrtTail) -> f64 {
    let (Some((c1, r1)), Some((c2, r2))) = (s.coeffs(), t.coeffs()) else {
        return 0.0;
    };
    let start = s.start.max(t.start);
    let first = (c1 * r1.powf((start - s.start) as f64) * c2 * r2.powf((start - t.start) as f64))
        .sqrt();
    first / (1.0 - (r1 * r2).sqrt())
}
