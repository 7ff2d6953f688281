//! Spectral-tetris frames for diagonals with divergent small mass (or finite
//! integer mass), block sorting, and the splittings used when some entries
//! exceed 1/2.
//!
//! Notation: `S_i` is the `i`-th partial sum and `minS(n)` the least `i` with
//! `S_i >= n`. Vector `v_n` lives on the indices `minS(n-1)-1 ..= minS(n)`
//! and couples the last two of them through [`coupling_exact`].

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::feasibility::{classify, FeasibilityCase};
use crate::perm::{Affine, IndexMap, PermutationWindow};
use crate::projection::{direct_sum, embed_vector, Part, ProjectionRep};
use crate::rational::{half, int, serde_rational_vec, to_f64, ExtRational, Rational};
use crate::seq::{DiagonalSpec, EntryClass, TailRule};
use crate::sparse::{SparseVector, SqrtTail};

/// `minS(n)`: least `i` with `S_i >= n` (`minS(0) = 0`).
pub fn min_s(spec: &DiagonalSpec, n: usize) -> Result<usize> {
    if n == 0 {
        return Ok(0);
    }
    let target = int(n as i64);
    if let ExtRational::Finite(total) = spec.total() {
        let reachable = total > target || (total == target && spec.tail().is_zero());
        if !reachable {
            return Err(Error::OutOfRange(format!(
                "partial sums never reach {n} (total {})",
                ExtRational::Finite(total)
            )));
        }
    }
    let mut s = Rational::zero();
    for (i, x) in spec.iter().enumerate() {
        s += x;
        if s >= target {
            return Ok(i + 1);
        }
    }
    unreachable!("the entry iterator is infinite")
}

/// Solves `a (d1 - a) = (sigma - a)(d2 - sigma + a)` for `a` exactly.
pub fn coupling_exact(d1: &Rational, d2: &Rational, sigma: &Rational) -> Result<Rational> {
    let in_unit = |x: &Rational| !x.is_negative() && *x <= Rational::one();
    if !in_unit(d1) || !in_unit(d2) {
        return Err(Error::Domain("d1 and d2 must lie in [0,1]".into()));
    }
    if sigma < d1.max(d2) || *sigma > d1 + d2 {
        return Err(Error::Domain("need max(d1,d2) <= sigma <= d1 + d2".into()));
    }
    let denom = int(2) * sigma - d1 - d2;
    if !denom.is_positive() {
        return Err(Error::Domain("need 2 sigma > d1 + d2".into()));
    }
    Ok(sigma * (sigma - d2) / denom)
}

/// Floating-point form of [`coupling_exact`].
pub fn coupling(d1: f64, d2: f64, sigma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&d1) || !(0.0..=1.0).contains(&d2) {
        return Err(Error::Domain("d1 and d2 must lie in [0,1]".into()));
    }
    if !(sigma >= d1.max(d2) && sigma <= d1 + d2) {
        return Err(Error::Domain("need max(d1,d2) <= sigma <= d1 + d2".into()));
    }
    let denom = 2.0 * sigma - d1 - d2;
    if !(denom > 0.0) {
        return Err(Error::Domain("need 2 sigma > d1 + d2".into()));
    }
    Ok(sigma * (sigma - d2) / denom)
}

/// A frame vector with exactly known squared entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactVector {
    /// `(index, square, negative)`, increasing indices, no zero squares.
    pub entries: Vec<(usize, Rational, bool)>,
    /// Squares follow `rule` from `start` on.
    pub tail: Option<(usize, TailRule)>,
}

impl ExactVector {
    pub fn square_at(&self, k: usize) -> Rational {
        if let Ok(p) = self.entries.binary_search_by_key(&k, |e| e.0) {
            return self.entries[p].1.clone();
        }
        match &self.tail {
            Some((start, rule)) if k >= *start => rule.value(k - start + 1),
            _ => Rational::zero(),
        }
    }

    pub fn to_sparse(&self) -> SparseVector {
        let support = self
            .entries
            .iter()
            .map(|(k, sq, neg)| {
                let x = to_f64(sq).sqrt();
                (*k, if *neg { -x } else { x })
            })
            .collect();
        let tail = self.tail.as_ref().map(|(start, rule)| SqrtTail {
            start: *start,
            rule: rule.clone(),
        });
        SparseVector::new(support, tail).expect("tetris supports are increasing")
    }

    fn relabel(&self, map: &IndexMap) -> Result<ExactVector> {
        let mut entries = self
            .entries
            .iter()
            .map(|(k, s, n)| map.apply(*k).map(|g| (g, s.clone(), *n)))
            .collect::<Result<Vec<_>>>()?;
        entries.sort_by_key(|e| e.0);
        let tail = match &self.tail {
            None => None,
            Some(_) => {
                return Err(Error::Unsupported(
                    "exact tails are only tracked in local coordinates".into(),
                ))
            }
        };
        Ok(ExactVector { entries, tail })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TetrisOutput {
    pub vectors: Vec<SparseVector>,
    pub exact: Vec<ExactVector>,
    /// `sigma[n-1] = sigma_n` for the coupled vectors.
    pub sigma: Vec<Rational>,
    /// `a_coef[n-1] = a_n`.
    pub a_coef: Vec<Rational>,
    /// `min_s[n-1] = minS(n)` for the coupled vectors.
    pub min_s: Vec<usize>,
    /// Total mass `N` of the sequence the frame was built for.
    pub total: ExtRational,
    /// Diagonal entries `1..=s` are final; `None` when the frame is complete.
    pub settled: Option<usize>,
}

impl TetrisOutput {
    /// `sum_n v_n[k]^2` computed from the exact squares.
    pub fn exact_diagonal(&self, k: usize) -> Rational {
        self.exact.iter().map(|v| v.square_at(k)).sum()
    }

    pub fn rep(&self) -> ProjectionRep {
        ProjectionRep::frame(self.vectors.clone()).with_settled(self.settled)
    }

    pub fn trace(&self) -> TetrisTrace {
        TetrisTrace {
            min_s: self.min_s.clone(),
            sigma: self.sigma.clone(),
            a_coef: self.a_coef.clone(),
            total: self.total.clone(),
            vectors: self.vectors.len(),
            settled: self.settled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TetrisTrace {
    #[serde(rename = "minS")]
    pub min_s: Vec<usize>,
    #[serde(with = "serde_rational_vec")]
    pub sigma: Vec<Rational>,
    #[serde(rename = "aCoef", with = "serde_rational_vec")]
    pub a_coef: Vec<Rational>,
    pub total: ExtRational,
    pub vectors: usize,
    pub settled: Option<usize>,
}

/// Integer total mass, `None` for `+inf`.
fn integer_total(spec: &DiagonalSpec) -> Result<Option<usize>> {
    match spec.total() {
        ExtRational::Infinite => Ok(None),
        ExtRational::Finite(t) if t.is_integer() => t
            .to_integer()
            .to_usize()
            .map(Some)
            .ok_or_else(|| Error::invalid("total mass too large")),
        ExtRational::Finite(t) => Err(Error::hypothesis(
            0,
            format!("total mass {} is not an integer", ExtRational::Finite(t)),
        )),
    }
}

/// Checks `f_i <= 1/2` for every `i > 1` of a normalized spec.
fn check_small_after_first(spec: &DiagonalSpec) -> Result<()> {
    if let Some(i) = spec.prefix().iter().skip(1).position(|x| *x > half()) {
        return Err(Error::hypothesis(
            0,
            format!("entry {} exceeds 1/2", i + 2),
        ));
    }
    let tail_ok = spec
        .tail_class()
        .is_some_and(|c| c.at_most_half());
    if !tail_ok && !(spec.prefix().is_empty() && spec.tail().value(1) <= half()) {
        return Err(Error::hypothesis(0, "tail entries exceed 1/2"));
    }
    Ok(())
}

/// Running table of entries, partial sums and `minS` values.
struct Scan<'a> {
    iter: crate::seq::Entries<'a>,
    f: Vec<Rational>,
    s: Vec<Rational>,
}

impl<'a> Scan<'a> {
    fn new(spec: &'a DiagonalSpec) -> Self {
        Scan {
            iter: spec.iter(),
            f: Vec::new(),
            s: vec![Rational::zero()],
        }
    }

    fn extend_to(&mut self, i: usize) {
        while self.f.len() < i {
            let x = self.iter.next().expect("infinite iterator");
            let last = self.s.last().expect("S_0").clone();
            self.s.push(last + &x);
            self.f.push(x);
        }
    }

    /// `f_i`, 1-based.
    fn f(&mut self, i: usize) -> Rational {
        self.extend_to(i);
        self.f[i - 1].clone()
    }

    /// `S_i`.
    fn s(&mut self, i: usize) -> Rational {
        self.extend_to(i);
        self.s[i].clone()
    }

    /// `minS(n)`, assuming it is finite.
    fn min_s(&mut self, n: usize, from: usize) -> usize {
        let target = int(n as i64);
        let mut i = from.max(1);
        loop {
            if self.s(i) >= target {
                return i;
            }
            i += 1;
        }
    }
}

/// First `m` vectors of the spectral-tetris frame of a sequence without
/// entries equal to 1.
fn tetris_core(g: &DiagonalSpec, m: usize) -> Result<TetrisOutput> {
    let g = g.normalized();
    check_small_after_first(&g)?;
    let n_total = integer_total(&g)?;
    let total = g.total();
    let m = n_total.map_or(m, |n| m.min(n));
    let coupled = match n_total {
        Some(n) => m.min(n.saturating_sub(1)),
        None => m,
    };
    let mut scan = Scan::new(&g);
    let mut min_table = vec![0usize];
    let mut sigma = vec![Rational::zero()];
    let mut a_coef = vec![Rational::zero()];
    let mut exact = Vec::new();

    for n in 1..=coupled {
        let prev = min_table[n - 1];
        let mn = scan.min_s(n, prev + 1);
        if mn < prev + 2 {
            return Err(Error::hypothesis(
                n,
                format!("minS({n}) = {mn} is not at least minS({}) + 2", n - 1),
            ));
        }
        let d1 = scan.f(mn - 1);
        let d2 = scan.f(mn);
        if d1 < d2 {
            return Err(Error::hypothesis(
                n,
                format!("f_{} < f_{} at the coupling position", mn - 1, mn),
            ));
        }
        let sig = int(n as i64) - scan.s(mn - 2);
        let a = coupling_exact(&d1, &d2, &sig).map_err(|e| Error::hypothesis(n, e.to_string()))?;
        let mut entries = head_remainders(&mut scan, prev, &sigma[n - 1], &a_coef[n - 1]);
        for k in prev + 1..mn - 1 {
            entries.push((k, scan.f(k), false));
        }
        entries.push((mn - 1, a.clone(), false));
        entries.push((mn, &sig - &a, true));
        entries.retain(|e| !e.1.is_zero());
        exact.push(ExactVector {
            entries,
            tail: None,
        });
        min_table.push(mn);
        sigma.push(sig);
        a_coef.push(a);
    }

    let complete = n_total == Some(m);
    if let (Some(n), true) = (n_total, complete) {
        if n >= 1 {
            // ultimate vector: remainders, then sqrt f_k for every k > minS(N-1)
            let prev = min_table[n - 1];
            let mut entries = head_remainders(&mut scan, prev, &sigma[n - 1], &a_coef[n - 1]);
            let plen = g.prefix_len();
            for k in prev + 1..=plen {
                entries.push((k, scan.f(k), false));
            }
            entries.retain(|e| !e.1.is_zero());
            let start = (prev + 1).max(plen + 1);
            let rule = g.tail().shifted(start - plen - 1);
            let tail = (!rule.is_zero()).then_some((start, rule));
            exact.push(ExactVector { entries, tail });
        }
    }

    let settled = if complete {
        None
    } else {
        Some(min_table[m].saturating_sub(2))
    };
    Ok(TetrisOutput {
        vectors: exact.iter().map(ExactVector::to_sparse).collect(),
        exact,
        sigma: sigma.split_off(1),
        a_coef: a_coef.split_off(1),
        min_s: min_table.split_off(1),
        total,
        settled,
    })
}

/// The two coupling remainders that open `v_n`, at `minS(n-1)-1` and `minS(n-1)`.
fn head_remainders(
    scan: &mut Scan<'_>,
    prev: usize,
    sigma_prev: &Rational,
    a_prev: &Rational,
) -> Vec<(usize, Rational, bool)> {
    if prev == 0 {
        return Vec::new();
    }
    let r1 = scan.f(prev - 1) - a_prev;
    let r2 = scan.f(prev) - sigma_prev + a_prev;
    vec![(prev - 1, r1, false), (prev, r2, false)]
}

/// First `m` vectors of the spectral-tetris frame (all `N` of them when the
/// total mass `N` is finite and `m >= N`).
///
/// Entries equal to 1 are split off as unit vectors `e_k` first; the rest must
/// have integer or infinite total mass, entries `<= 1/2` after the first one,
/// and `f_{minS(n)-1} >= f_{minS(n)}` at every coupling position. With a tail
/// of ones, unit vectors are emitted for the first `m` tail positions.
pub fn tetris_vectors(spec: &DiagonalSpec, m: usize) -> Result<TetrisOutput> {
    let spec = spec.normalized();
    let plen = spec.prefix_len();
    let ones_tail = spec.tail_class() == Some(EntryClass::One);
    let mut ones: Vec<usize> = spec
        .prefix()
        .iter()
        .enumerate()
        .filter(|(_, x)| x.is_one())
        .map(|(i, _)| i + 1)
        .collect();
    if ones.is_empty() && !ones_tail {
        return tetris_core(&spec, m);
    }
    let (rest, map) = spec.subsequence(|c| c != EntryClass::One);
    let core = tetris_core(&rest, if ones_tail { usize::MAX } else { m })?;
    let mut settled = core
        .settled
        .map(|s| map.first_image_beyond(s).saturating_sub(1));
    if ones_tail {
        ones.extend(plen + 1..=plen + m);
        settled = Some(settled.map_or(plen + m, |s| s.min(plen + m)));
    }
    let mut exact: Vec<ExactVector> = ones
        .iter()
        .map(|&k| ExactVector {
            entries: vec![(k, Rational::one(), false)],
            tail: None,
        })
        .collect();
    let mut vectors: Vec<SparseVector> = ones.iter().map(|&k| SparseVector::unit(k)).collect();
    for (e, v) in core.exact.iter().zip(&core.vectors) {
        vectors.push(embed_vector(v, &map)?);
        if e.tail.is_none() {
            exact.push(e.relabel(&map)?);
        } else {
            // finite map means no tail survives; otherwise shift it along
            let t = map.tail().ok_or_else(|| Error::internal("tail on finite map"))?;
            let h = map.head().len();
            let mut m2 = e.clone();
            let (start, rule) = m2.tail.take().expect("checked");
            let extra: Vec<_> = (start..=h)
                .map(|k| (k, rule.value(k - start + 1), false))
                .collect();
            m2.entries.extend(extra);
            let mut out = m2.relabel(&map)?;
            let local_start = start.max(h + 1);
            out.tail = Some((
                t.first + (local_start - h - 1),
                rule.shifted(local_start - start),
            ));
            exact.push(out);
        }
    }
    Ok(TetrisOutput {
        vectors,
        exact,
        settled,
        ..core
    })
}

/// Stable decreasing sort. `sorted[i] = values[pi(i)]`; ties keep the smaller
/// original index first.
pub fn sort_desc_window(values: &[Rational]) -> (Vec<Rational>, PermutationWindow) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[j].cmp(&values[i]));
    let sorted = idx.iter().map(|&i| values[i].clone()).collect();
    let perm = PermutationWindow::from_vec(idx.iter().map(|&i| i + 1).collect())
        .expect("sorting indices is a permutation");
    (sorted, perm)
}

/// Sorts every block `I_n = (minS(n-1), minS(n)]` decreasingly.
///
/// Returns `pi` with `g_i = f_{pi(i)}` and the sorted sequence `g`, which
/// satisfies `g_{minS(g,n)-1} >= g_{minS(g,n)}` for all `n` below the total
/// mass. Blocks lying inside a constant tail are already sorted and are left
/// alone; with finite total `N` the unbounded last block is left alone too.
pub fn block_sort(spec: &DiagonalSpec) -> Result<(PermutationWindow, DiagonalSpec)> {
    let f = spec.normalized();
    if f.prefix().iter().any(|x| x.is_one()) || f.tail_class() == Some(EntryClass::One) {
        return Err(Error::hypothesis(0, "entries equal to 1 must be split off first"));
    }
    check_small_after_first(&f)?;
    let n_total = integer_total(&f)?;
    let plen = f.prefix_len();
    let mut scan = Scan::new(&f);
    let mut bounds = vec![0usize];
    loop {
        let n = bounds.len();
        let prev = bounds[n - 1];
        let more = match n_total {
            Some(total) => n < total,
            None => prev < plen,
        };
        if !more {
            break;
        }
        bounds.push(scan.min_s(n, prev + 1));
    }
    let last = *bounds.last().expect("minS(0)");
    let mut window = Vec::with_capacity(last);
    let mut values = Vec::with_capacity(last);
    for w in bounds.windows(2) {
        let block: Vec<Rational> = (w[0] + 1..=w[1]).map(|i| scan.f(i)).collect();
        let (sorted, perm) = sort_desc_window(&block);
        window.extend(perm.as_slice().iter().map(|&j| w[0] + j));
        values.extend(sorted);
    }
    let perm = PermutationWindow::from_vec(window).map_err(|e| Error::internal(e.to_string()))?;
    let base = f.materialize(last)?;
    let mut prefix = base.prefix().to_vec();
    prefix[..last].clone_from_slice(&values);
    let g = DiagonalSpec::new(prefix, base.tail().clone())?;

    // ordering and sandwich checks on every sorted block
    let mut gscan = Scan::new(&g);
    let mut prev_g = 0;
    for n in 1..bounds.len() {
        let mg = gscan.min_s(n, prev_g + 1);
        if !(bounds[n - 1] + 2 <= mg && mg <= bounds[n]) {
            return Err(Error::internal(format!(
                "block sort sandwich fails at n={n}: minS(g,n)={mg}"
            )));
        }
        if gscan.f(mg - 1) < gscan.f(mg) {
            return Err(Error::internal(format!("block sort ordering fails at n={n}")));
        }
        prev_g = mg;
    }
    Ok((perm, g))
}

/// `pos(n)` and `Pos(n)`: indices of the `n`-th entry `<= 1/2` and `> 1/2`.
pub struct Positions {
    spec: DiagonalSpec,
}

pub fn positions(spec: &DiagonalSpec) -> Positions {
    Positions {
        spec: spec.normalized(),
    }
}

impl Positions {
    pub fn small(&self, n: usize) -> Result<usize> {
        self.spec.nth_where(n, EntryClass::at_most_half)
    }

    pub fn large(&self, n: usize) -> Result<usize> {
        self.spec.nth_where(n, |c| !c.at_most_half())
    }
}

/// `A^m ∩ {1..limit}` for odd `m`: the dyadic orbit `{m, 2m, 4m, ...}`.
pub fn dyadic_orbit(m: usize, limit: usize) -> Vec<usize> {
    assert!(m % 2 == 1, "orbits are indexed by odd numbers");
    std::iter::successors(Some(m), |&a| a.checked_mul(2))
        .take_while(|&a| a <= limit)
        .collect()
}

/// Splits a sequence with exactly `k` entries above 1/2 and divergent small
/// mass into `g^m = (f_Pos(m), f_pos(m), f_pos(k+m), f_pos(2k+m), ...)`.
///
/// Each subsequence comes with the map from its positions to the original
/// indices. The permutation sends working position `(i-1)k + m` to the
/// original index of `g^m_i` and is the identity past the prefix.
pub fn interleave_split_fin(
    spec: &DiagonalSpec,
    k: usize,
) -> Result<(Vec<(DiagonalSpec, IndexMap)>, PermutationWindow)> {
    let f = spec.normalized();
    let large = f.count_class(EntryClass::Large).zip(f.count_class(EntryClass::One));
    let count = large.map(|(a, b)| a + b);
    if k == 0 || count != Some(k) {
        return Err(Error::hypothesis(
            0,
            format!("expected exactly {k} entries above 1/2, found {count:?}"),
        ));
    }
    if f.tail_class() != Some(EntryClass::Small) || f.tail().sum_from(1).is_finite() {
        return Err(Error::hypothesis(0, "small entries must have divergent sum"));
    }
    let pos = positions(&f);
    let plen = f.prefix_len();
    let mut parts = Vec::with_capacity(k);
    for m in 1..=k {
        let mut head = vec![pos.large(m)?];
        let mut j = m;
        loop {
            let idx = pos.small(j)?;
            if idx > plen {
                break;
            }
            head.push(idx);
            j += k;
        }
        let first = pos.small(j)?;
        let prefix = head.iter().map(|&i| f.entry(i)).collect();
        let sub = DiagonalSpec::new(prefix, f.tail().clone())?;
        let map = IndexMap::new(head, Some(Affine { first, stride: k }))?;
        parts.push((sub, map));
    }
    let longest = parts.iter().map(|(_, m)| m.head().len()).max().unwrap_or(0);
    let width = (plen.max(k * longest)).div_ceil(k) * k;
    let mut window = vec![0; width];
    for (m, (_, map)) in parts.iter().enumerate() {
        for i in 1.. {
            let w = (i - 1) * k + m + 1;
            if w > width {
                break;
            }
            window[w - 1] = map.apply(i)?;
        }
    }
    let perm = PermutationWindow::from_vec(window).map_err(|e| Error::internal(e.to_string()))?;
    Ok((parts, perm))
}

/// Windowed splitting for infinitely many entries on both sides of 1/2.
///
/// Small entries are grouped into blocks `I_n` by the partial sums of the
/// small subsequence; `g^m` (odd `m`) takes `f_Pos((m+1)/2)` followed by the
/// blocks `I_a`, `a ∈ {m, 2m, 4m, ...}`, in order. Only indices `<= window`
/// are used: each `g^m` is cut before its first entry beyond the window, and
/// the permutation lists the concatenation `g^1, g^3, ...` followed by the
/// unused window indices.
pub fn interleave_split_inf(
    spec: &DiagonalSpec,
    window: usize,
) -> Result<(Vec<(usize, DiagonalSpec)>, PermutationWindow)> {
    let f = spec.normalized();
    let values = f.take(window);
    let mut large_idx = Vec::new();
    let mut small_blocks: Vec<(usize, usize)> = Vec::new();
    let mut s = Rational::zero();
    for (i, x) in values.iter().enumerate() {
        if *x > half() {
            large_idx.push(i + 1);
        } else {
            // the block of the j-th small entry is floor(S_{j-1}) + 1
            let block = s.floor().to_integer().to_usize().unwrap_or(usize::MAX) + 1;
            small_blocks.push((i + 1, block));
            s += x;
        }
    }
    let odd_part = |mut b: usize| {
        while b.is_multiple_of(2) {
            b /= 2;
        }
        b
    };
    let mut subs = Vec::new();
    let mut order = Vec::with_capacity(window);
    let mut used = vec![false; window];
    for (r, &lead) in large_idx.iter().enumerate() {
        let m = 2 * r + 1;
        let mut idx = vec![lead];
        idx.extend(
            small_blocks
                .iter()
                .filter(|&&(_, b)| odd_part(b) == m)
                .map(|&(i, _)| i),
        );
        for &i in &idx {
            used[i - 1] = true;
        }
        let prefix = idx.iter().map(|&i| values[i - 1].clone()).collect();
        subs.push((m, DiagonalSpec::finite(prefix)?));
        order.extend(idx);
    }
    order.extend((1..=window).filter(|&i| !used[i - 1]));
    let perm = PermutationWindow::from_vec(order).map_err(|e| Error::internal(e.to_string()))?;
    Ok((subs, perm))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsequenceTrace {
    /// Original indices of the first positions of the subsequence.
    pub indices: Vec<usize>,
    /// Block-sort permutation applied before the frame construction.
    #[serde(rename = "blockPermutation")]
    pub block_permutation: Vec<usize>,
    pub tetris: TetrisTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonsummableTrace {
    pub complement: bool,
    pub ones: Vec<usize>,
    pub large: usize,
    #[serde(rename = "splitPermutation")]
    pub split_permutation: Option<Vec<usize>>,
    pub parts: Vec<SubsequenceTrace>,
}

/// Block sort followed by the tetris frame; the result is expressed in the
/// coordinates of `g` itself.
pub(crate) fn sorted_tetris(g: &DiagonalSpec, m: usize) -> Result<(ProjectionRep, PermutationWindow, TetrisOutput)> {
    let (perm, h) = block_sort(g)?;
    let out = tetris_vectors(&h, m)?;
    let map = window_map(&perm);
    let rep = direct_sum(vec![Part {
        rep: out.rep(),
        map,
    }])?;
    Ok((rep, perm, out))
}

/// The map `i -> pi(i)` with identity tail.
pub(crate) fn window_map(perm: &PermutationWindow) -> IndexMap {
    IndexMap::new(
        perm.as_slice().to_vec(),
        Some(Affine {
            first: perm.len() + 1,
            stride: 1,
        }),
    )
    .expect("permutations are injective")
}

/// Projection with the given diagonal when `a = inf` or `b = inf`.
pub fn nonsummable_construct(spec: &DiagonalSpec, m: usize) -> Result<ProjectionRep> {
    nonsummable_construct_traced(spec, m).map(|(rep, _)| rep)
}

pub fn nonsummable_construct_traced(
    spec: &DiagonalSpec,
    m: usize,
) -> Result<(ProjectionRep, NonsummableTrace)> {
    let report = classify(spec);
    let complement = match report.case {
        FeasibilityCase::NonsummableA => false,
        FeasibilityCase::NonsummableB => true,
        _ => {
            return Err(Error::invalid(
                "the nonsummable construction needs a divergent a or b",
            ))
        }
    };
    let f = spec.normalized();
    let work = if complement { f.complement() } else { f };
    let ones: Vec<usize> = work
        .prefix()
        .iter()
        .enumerate()
        .filter(|(_, x)| x.is_one())
        .map(|(i, _)| i + 1)
        .collect();
    let (rest, rmap) = work.subsequence(|c| c != EntryClass::One);
    let large = rest.count_class(EntryClass::Large).ok_or_else(|| {
        Error::Unsupported("infinitely many entries on both sides of 1/2 with divergent sums".into())
    })?;

    let mut parts = vec![Part {
        rep: ProjectionRep::frame((1..=ones.len()).map(SparseVector::unit).collect()),
        map: IndexMap::finite(ones.clone())?,
    }];
    let mut traces = Vec::new();
    let mut split_permutation = None;
    let subsequences: Vec<(DiagonalSpec, IndexMap)> = if large == 0 {
        vec![(rest.clone(), IndexMap::identity())]
    } else {
        let (subs, perm) = interleave_split_fin(&rest, large)?;
        split_permutation = Some(perm.as_slice().to_vec());
        subs
    };
    for (g, gmap) in subsequences {
        let (perm, h) = block_sort(&g)?;
        let out = tetris_vectors(&h, m)?;
        let map = window_map(&perm).then(&gmap)?.then(&rmap)?;
        traces.push(SubsequenceTrace {
            indices: (1..=h.prefix_len().max(perm.len()))
                .map(|i| map.apply(i))
                .collect::<Result<_>>()?,
            block_permutation: perm.as_slice().to_vec(),
            tetris: out.trace(),
        });
        parts.push(Part {
            rep: out.rep(),
            map,
        });
    }
    let rep = direct_sum(parts)?;
    let rep = if complement { rep.complement() } else { rep };
    Ok((
        rep,
        NonsummableTrace {
            complement,
            ones,
            large,
            split_permutation,
            parts: traces,
        },
    ))
}
