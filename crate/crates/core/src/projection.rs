//! Orthogonal projections on `l2(N)` stored as orthonormal frames.
//!
//! `Frame(v)` is `P = sum_n v_n v_n^T`; `CoFrame(v)` is `P = I - sum_n v_n v_n^T`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::IndexMap;
use crate::sparse::{SparseVector, SqrtTail};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Form {
    Frame,
    CoFrame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRep {
    pub form: Form,
    pub vectors: Vec<SparseVector>,
    /// Diagonal entries `1..=settled` are final; `None` means every entry is.
    #[serde(default)]
    pub settled: Option<usize>,
}

impl ProjectionRep {
    pub fn frame(vectors: Vec<SparseVector>) -> Self {
        ProjectionRep {
            form: Form::Frame,
            vectors,
            settled: None,
        }
    }

    pub fn coframe(vectors: Vec<SparseVector>) -> Self {
        ProjectionRep {
            form: Form::CoFrame,
            vectors,
            settled: None,
        }
    }

    pub fn zero() -> Self {
        Self::frame(Vec::new())
    }

    pub fn with_settled(mut self, settled: Option<usize>) -> Self {
        self.settled = settled;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(e.to_string()))
    }

    /// `I - P`, sharing the same vectors.
    pub fn complement(&self) -> Self {
        ProjectionRep {
            form: match self.form {
                Form::Frame => Form::CoFrame,
                Form::CoFrame => Form::Frame,
            },
            vectors: self.vectors.clone(),
            settled: self.settled,
        }
    }

    /// Diagonal entry `<P e_k, e_k>`.
    pub fn diag_of(&self, k: usize) -> f64 {
        assert!(k >= 1, "indices are 1-based");
        let s: f64 = self.vectors.iter().map(|v| v.sq(k)).sum();
        match self.form {
            Form::Frame => s,
            Form::CoFrame => 1.0 - s,
        }
    }

    pub fn diagonal(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|k| self.diag_of(k)).collect()
    }

    /// Matrix entry `<P e_j, e_i>`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let s: f64 = self.vectors.iter().map(|v| v.get(i) * v.get(j)).sum();
        match self.form {
            Form::Frame => s,
            Form::CoFrame => f64::from(u8::from(i == j)) - s,
        }
    }

    /// Compression of `P` to coordinates `1..=n`.
    pub fn dense(&self, n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        for v in &self.vectors {
            let d = v.dense(n);
            for i in 0..n {
                if d[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    m[(i, j)] += d[i] * d[j];
                }
            }
        }
        if self.form == Form::CoFrame {
            m = DMatrix::identity(n, n) - m;
        }
        m
    }

    /// `max |<v_i, v_j> - delta_ij|`, tails included analytically.
    pub fn gram_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for (i, v) in self.vectors.iter().enumerate() {
            err = err.max((v.norm_sq() - 1.0).abs());
            for w in &self.vectors[i + 1..] {
                err = err.max(v.dot(w).abs());
            }
        }
        err
    }

    /// Largest explicit support index over all vectors.
    pub fn max_index(&self) -> usize {
        self.vectors.iter().map(SparseVector::max_index).max().unwrap_or(0)
    }

    pub fn has_tail(&self) -> bool {
        self.vectors.iter().any(|v| v.sqrt_tail().is_some())
    }
}

/// Pushes a vector of a local space `l2(N)` into the ambient space along `map`.
pub fn embed_vector(v: &SparseVector, map: &IndexMap) -> Result<SparseVector> {
    let h = map.head().len();
    let v = v.materialize_tail(h);
    let mut support = v
        .support()
        .iter()
        .map(|&(k, x)| map.apply(k).map(|g| (g, x)))
        .collect::<Result<Vec<_>>>()?;
    support.sort_by_key(|&(k, _)| k);
    let tail = match v.sqrt_tail() {
        None => None,
        Some(t) => {
            let a = map.tail().ok_or_else(|| {
                Error::OutOfRange("vector tail does not fit a finite index map".into())
            })?;
            if a.stride != 1 {
                return Err(Error::Unsupported(
                    "tails can only be embedded along stride-1 maps".into(),
                ));
            }
            Some(SqrtTail {
                start: a.first + (t.start - h - 1),
                rule: t.rule.clone(),
            })
        }
    };
    SparseVector::new(support, tail).map_err(|_| {
        Error::Unsupported("embedded tail overlaps explicit support".into())
    })
}

/// Orthonormal basis (as dense columns) of the orthogonal complement of the
/// span of orthonormal `cols` in `R^d`, via a full Householder QR.
pub fn complement_basis(cols: &[Vec<f64>], d: usize) -> Vec<Vec<f64>> {
    let r = cols.len();
    if r >= d {
        return Vec::new();
    }
    let mut m = DMatrix::zeros(d, d);
    for (j, c) in cols.iter().enumerate() {
        for i in 0..d {
            m[(i, j)] = c[i];
        }
    }
    let q = m.qr().q();
    (r..d).map(|j| q.column(j).iter().copied().collect()).collect()
}

/// One summand of a direct sum: a projection on a local space and the map
/// placing that space in the ambient coordinates.
pub struct Part {
    pub rep: ProjectionRep,
    pub map: IndexMap,
}

/// Direct sum of projections on mutually disjoint coordinate sets.
///
/// The result is a `Frame` when every part is; otherwise it is a `CoFrame`
/// and the parts must together cover every ambient coordinate, with each
/// `Frame` part living on a finite coordinate set (its complement basis is
/// used).
pub fn direct_sum(parts: Vec<Part>) -> Result<ProjectionRep> {
    let co = parts.iter().any(|p| p.rep.form == Form::CoFrame);
    let mut vectors = Vec::new();
    let mut first_unsettled: Option<usize> = None;
    for Part { rep, map } in &parts {
        if let Some(s) = rep.settled {
            let g = map.first_image_beyond(s);
            if g != usize::MAX {
                first_unsettled = Some(first_unsettled.map_or(g, |x: usize| x.min(g)));
            }
        }
        let local: Vec<SparseVector> = if co && rep.form == Form::Frame {
            let d = map.domain_len().ok_or_else(|| {
                Error::Unsupported(
                    "a frame on an infinite coordinate set cannot join a co-frame sum".into(),
                )
            })?;
            let cols: Vec<Vec<f64>> = rep.vectors.iter().map(|v| v.dense(d)).collect();
            complement_basis(&cols, d)
                .into_iter()
                .map(|c| SparseVector::from_entries(c.into_iter().enumerate().map(|(i, x)| (i + 1, x)).collect()))
                .collect::<Result<_>>()?
        } else {
            rep.vectors.clone()
        };
        for v in &local {
            vectors.push(embed_vector(v, map)?);
        }
    }
    let settled = first_unsettled.map(|g| g - 1);
    Ok(ProjectionRep {
        form: if co { Form::CoFrame } else { Form::Frame },
        vectors,
        settled,
    })
}
