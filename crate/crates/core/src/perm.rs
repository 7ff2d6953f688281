//! Permutations of `N` that move only a finite window, and injective index
//! maps used to embed a subspace `l2(N)` into the ambient coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bijection of `N` that is the identity beyond `{1..M}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "RawWindow")]
pub struct PermutationWindow {
    /// `window[i-1] = pi(i)`.
    window: Vec<usize>,
}

#[derive(Deserialize)]
struct RawWindow {
    window: Vec<usize>,
}

impl TryFrom<RawWindow> for PermutationWindow {
    type Error = Error;

    fn try_from(raw: RawWindow) -> Result<Self> {
        PermutationWindow::from_vec(raw.window)
    }
}

impl PermutationWindow {
    pub fn identity(m: usize) -> Self {
        PermutationWindow {
            window: (1..=m).collect(),
        }
    }

    /// Validates that `images` is a bijection of `{1..images.len()}`.
    pub fn from_vec(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        let mut seen = vec![false; m];
        for &x in &images {
            if x == 0 || x > m || std::mem::replace(&mut seen[x - 1], true) {
                return Err(Error::invalid(format!(
                    "window {images:?} is not a permutation of 1..={m}"
                )));
            }
        }
        Ok(PermutationWindow { window: images })
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.window
    }

    pub fn apply(&self, i: usize) -> usize {
        assert!(i >= 1, "indices are 1-based");
        if i <= self.window.len() {
            self.window[i - 1]
        } else {
            i
        }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.window.len()];
        for (i, &x) in self.window.iter().enumerate() {
            inv[x - 1] = i + 1;
        }
        PermutationWindow { window: inv }
    }

    /// `self ∘ other`, i.e. `i -> self(other(i))`.
    pub fn compose(&self, other: &Self) -> Self {
        let m = self.len().max(other.len());
        PermutationWindow {
            window: (1..=m).map(|i| self.apply(other.apply(i))).collect(),
        }
    }

    /// Same permutation with the window extended to at least `m`.
    pub fn extended(&self, m: usize) -> Self {
        let mut window = self.window.clone();
        window.extend(self.window.len() + 1..=m);
        PermutationWindow { window }
    }

    pub fn is_identity(&self) -> bool {
        self.window.iter().enumerate().all(|(i, &x)| x == i + 1)
    }

    /// Drops trailing fixed points.
    pub fn trimmed(&self) -> Self {
        let mut window = self.window.clone();
        while window.last().is_some_and(|&x| x == window.len()) {
            window.pop();
        }
        PermutationWindow { window }
    }
}

/// Arithmetic progression `first, first + stride, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Affine {
    pub first: usize,
    pub stride: usize,
}

/// Injective map from local indices `1, 2, ...` into ambient indices:
/// explicit images for the head, then an arithmetic progression.
/// Without a tail the domain is `{1..head.len()}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexMap {
    head: Vec<usize>,
    tail: Option<Affine>,
}

impl IndexMap {
    pub fn new(head: Vec<usize>, tail: Option<Affine>) -> Result<Self> {
        if head.contains(&0) || tail.is_some_and(|t| t.first == 0 || t.stride == 0) {
            return Err(Error::invalid("index maps are 1-based with positive stride"));
        }
        let mut sorted = head.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("index map head is not injective"));
        }
        if let Some(t) = tail {
            if head
                .iter()
                .any(|&x| x >= t.first && (x - t.first) % t.stride == 0)
            {
                return Err(Error::invalid("index map head collides with its tail"));
            }
        }
        Ok(IndexMap { head, tail })
    }

    pub fn identity() -> Self {
        IndexMap {
            head: Vec::new(),
            tail: Some(Affine { first: 1, stride: 1 }),
        }
    }

    /// Local `i` goes to `i + offset`.
    pub fn shift(offset: usize) -> Self {
        IndexMap {
            head: Vec::new(),
            tail: Some(Affine {
                first: 1 + offset,
                stride: 1,
            }),
        }
    }

    pub fn finite(head: Vec<usize>) -> Result<Self> {
        Self::new(head, None)
    }

    pub fn head(&self) -> &[usize] {
        &self.head
    }

    pub fn tail(&self) -> Option<Affine> {
        self.tail
    }

    /// Number of local indices, `None` when infinite.
    pub fn domain_len(&self) -> Option<usize> {
        self.tail.is_none().then_some(self.head.len())
    }

    pub fn apply(&self, i: usize) -> Result<usize> {
        if i == 0 {
            return Err(Error::invalid("index 0 does not exist"));
        }
        if i <= self.head.len() {
            return Ok(self.head[i - 1]);
        }
        match self.tail {
            Some(t) => Ok(t.first + t.stride * (i - self.head.len() - 1)),
            None => Err(Error::OutOfRange(format!(
                "index {i} beyond finite map of length {}",
                self.head.len()
            ))),
        }
    }

    /// Same map with `len` explicit head entries.
    pub fn materialized(&self, len: usize) -> Result<Self> {
        if len <= self.head.len() {
            return Ok(self.clone());
        }
        let Some(t) = self.tail else {
            return Err(Error::OutOfRange(format!(
                "cannot extend finite map of length {} to {len}",
                self.head.len()
            )));
        };
        let extra = len - self.head.len();
        let mut head = self.head.clone();
        head.extend((0..extra).map(|j| t.first + t.stride * j));
        Ok(IndexMap {
            head,
            tail: Some(Affine {
                first: t.first + t.stride * extra,
                stride: t.stride,
            }),
        })
    }

    /// `outer ∘ self`: first apply `self`, then `outer`.
    /// Smallest image of a local index `> s`, or `usize::MAX` when there is none.
    pub fn first_image_beyond(&self, s: usize) -> usize {
        let from_head = self.head.iter().skip(s).copied().min();
        let from_tail = self.tail.map(|t| {
            if s < self.head.len() {
                t.first
            } else {
                t.first + t.stride * (s - self.head.len())
            }
        });
        match (from_head, from_tail) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => usize::MAX,
        }
    }

    pub fn then(&self, outer: &IndexMap) -> Result<IndexMap> {
        let head = self
            .head
            .iter()
            .map(|&x| outer.apply(x))
            .collect::<Result<Vec<_>>>()?;
        let tail = match self.tail {
            None => None,
            Some(t) => {
                let skip = outer.head.len();
                if t.first <= skip {
                    // move tail entries that land in outer's head into our head
                    let k = (skip - t.first) / t.stride + 1;
                    return self.materialized(self.head.len() + k)?.then(outer);
                }
                let ot = outer.tail.ok_or_else(|| {
                    Error::OutOfRange("infinite map composed with a finite one".into())
                })?;
                Some(Affine {
                    first: ot.first + ot.stride * (t.first - skip - 1),
                    stride: ot.stride * t.stride,
                })
            }
        };
        IndexMap::new(head, tail)
    }
}
