//! Constructions for finite `a` and `b`: rank-one projections, the
//! decoupling of two small entries and one large entry into three groups,
//! the 3×3 correction, and the dispatch over zero/one entries.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::feasibility::{plan, Route};
use crate::perm::{Affine, IndexMap, PermutationWindow};
use crate::projection::{direct_sum, Part, ProjectionRep};
use crate::rational::{serde_rational, serde_rational_vec, ExtRational, Rational};
use crate::schurhorn::{finite_projection, majorizes_exact, schur_horn_unitary_exact};
use crate::seq::{DiagonalSpec, EntryClass, TailRule};
use crate::sparse::{SparseVector, SqrtTail};
use crate::tetris::{sorted_tetris, TetrisTrace};

/// Rank-one projection onto `v_0 = Σ sqrt(f_i) e_i`; needs `Σ f_i = 1`.
pub fn rank_one(spec: &DiagonalSpec) -> Result<ProjectionRep> {
    let total = spec.total();
    if total != ExtRational::Finite(Rational::one()) {
        return Err(Error::invalid(format!("rank-one diagonal must sum to 1, not {total}")));
    }
    let support = spec
        .prefix()
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i + 1, crate::rational::to_f64(x).sqrt()))
        .collect();
    let tail = match spec.tail() {
        t if t.is_zero() => None,
        t @ TailRule::Geometric { .. } => Some(SqrtTail {
            start: spec.prefix_len() + 1,
            rule: t.clone(),
        }),
        t => return Err(Error::Unsupported(format!("rank-one tail {t:?}"))),
    };
    Ok(ProjectionRep::frame(vec![SparseVector::new(support, tail)?]).with_settled(None))
}

/// `a_i = f_pos(i)` (finitely many entries `<= 1/2`) and `b_i = f_Pos(i)`,
/// each with the map from its rank to the index in `spec`.
pub struct SmallLarge {
    pub a: Vec<Rational>,
    pub a_map: Vec<usize>,
    pub b: DiagonalSpec,
    pub b_map: IndexMap,
}

/// Splits a sequence with entries in (0,1), finitely many (at least two)
/// of them `<= 1/2` and infinitely many above 1/2.
pub fn split_small_large(spec: &DiagonalSpec) -> Result<SmallLarge> {
    let w = spec.normalized();
    if let Some(x) = w.prefix().iter().find(|x| !EntryClass::of(x).is_proper()) {
        return Err(Error::hypothesis(0, format!("entry {x} is not in (0,1)")));
    }
    if w.tail_class() != Some(EntryClass::Large) {
        return Err(Error::hypothesis(0, "need infinitely many entries in (1/2,1)"));
    }
    let (a, amap) = w.subsequence(EntryClass::at_most_half);
    if a.prefix_len() < 2 {
        return Err(Error::hypothesis(0, "need at least two entries <= 1/2"));
    }
    let (b, b_map) = w.subsequence(|c| !c.at_most_half());
    Ok(SmallLarge {
        a: a.prefix().to_vec(),
        a_map: amap.head().to_vec(),
        b,
        b_map,
    })
}

/// Indices and modified values of the decoupling, with the three groups.
/// Indices `i1..i5` are ranks in the `a`/`b` subsequences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecouplingPlan {
    pub i1: usize,
    pub i2: usize,
    pub i3: usize,
    pub i4: usize,
    pub i5: usize,
    #[serde(rename = "aTilde1", with = "serde_rational")]
    pub a_tilde1: Rational,
    #[serde(rename = "aTilde2", with = "serde_rational")]
    pub a_tilde2: Rational,
    #[serde(rename = "bTilde3", with = "serde_rational")]
    pub b_tilde3: Rational,
    #[serde(rename = "groupI", with = "serde_rational_vec")]
    pub group_i: Vec<Rational>,
    #[serde(rename = "groupII")]
    pub group_ii: DiagonalSpec,
    #[serde(rename = "groupIII")]
    pub group_iii: DiagonalSpec,
    /// Layout position (group I, then II and III alternating) to index.
    pub permutation: PermutationWindow,
    #[serde(skip)]
    pub map_i: Vec<usize>,
    #[serde(skip)]
    pub map_ii: Vec<usize>,
    #[serde(skip)]
    pub map_iii: IndexMap,
    /// Indices of `ã_{i1}`, `b̃_{i3}`, `ã_{i2}`.
    #[serde(skip)]
    pub corrected: [usize; 3],
    /// Original values at `corrected`.
    #[serde(skip)]
    pub targets: [Rational; 3],
}

fn consistency(what: &str) -> Error {
    Error::internal(format!("decoupling invariant {what} failed"))
}

/// Chooses `i1..i5` and the modified values, then forms the three groups.
pub fn decouple(spec: &DiagonalSpec) -> Result<DecouplingPlan> {
    let w = spec.normalized();
    let SmallLarge { a, a_map, b, b_map } = split_small_large(&w)?;
    let n = a.len();
    let a_at = |i: usize| a[i - 1].clone();
    let b_at = |i: usize| b.entry(i);
    let (i1, i2) = if a_at(1) >= a_at(2) { (1, 2) } else { (2, 1) };
    let threshold = Rational::one() - a_at(i1);
    let i3 = (1..)
        .find(|&i| b_at(i) >= threshold)
        .expect("b_i tends to 1");
    let a_sum_from = |k: usize| -> Rational { a.iter().skip(k - 1).sum() };
    let i4 = (3..=n + 1)
        .find(|&k| b_at(i3) + a_sum_from(k) <= Rational::one())
        .expect("k = N + 1 always qualifies");
    let deficits = b.complement();
    let gap3 = Rational::one() - b_at(i3);
    let deficit_from = |k: usize| -> Rational {
        let s = deficits
            .tail_sum(k)
            .finite()
            .cloned()
            .expect("b is finite");
        if i3 >= k {
            s - &gap3
        } else {
            s
        }
    };
    let i5 = (1..)
        .find(|&k| deficit_from(k) <= a_at(i2))
        .expect("deficits tend to 0");
    let b_tilde3 = Rational::one() - a_sum_from(i4);
    let a_tilde2 = deficit_from(i5);
    let a_tilde1 = a_at(i1) + a_at(i2) + b_at(i3) - &a_tilde2 - &b_tilde3;

    // exact invariant checks
    if &b_tilde3 + a_sum_from(i4) != Rational::one() {
        return Err(consistency("(suma)"));
    }
    if Rational::one() - &a_tilde2 + deficit_from(i5) != Rational::one() {
        return Err(consistency("(sumb)"));
    }
    if &a_tilde1 + &a_tilde2 + &b_tilde3 != a_at(i1) + a_at(i2) + b_at(i3) {
        return Err(consistency("(summ)"));
    }
    if a_tilde1.is_negative() || a_tilde1 > Rational::one() {
        return Err(consistency("0 <= ã_{i1} <= 1"));
    }
    if !majorizes_exact(
        &[b_at(i3), a_at(i1), a_at(i2)],
        &[b_tilde3.clone(), a_tilde1.clone(), a_tilde2.clone()],
    ) {
        return Err(consistency("(ts0)"));
    }

    let pos = |i: usize| a_map[i - 1];
    let big = |j: usize| b_map.apply(j).expect("b is infinite");
    let mut group_i = vec![a_tilde1.clone()];
    let mut map_i = vec![pos(i1)];
    for i in 3..i4 {
        group_i.push(a_at(i));
        map_i.push(pos(i));
    }
    for j in (1..i5).filter(|&j| j != i3) {
        group_i.push(b_at(j));
        map_i.push(big(j));
    }
    let total_i: Rational = group_i.iter().sum();
    if !total_i.is_integer() || total_i.is_negative() {
        return Err(consistency("(ts)"));
    }
    let mut ii = vec![b_tilde3.clone()];
    let mut map_ii = vec![big(i3)];
    for i in i4..=n {
        ii.push(a_at(i));
        map_ii.push(pos(i));
    }
    let group_ii = DiagonalSpec::finite(ii)?;

    // group III: ã_{i2}, then b_j for j >= i5, j != i3; explicit up to `last`
    let b_in_prefix = b_map.head().len();
    let last = i3.max(b_in_prefix + 1).max(i5).max(i5 + map_ii.len());
    let mut iii = vec![a_tilde2.clone()];
    let mut head_iii = vec![pos(i2)];
    for j in (i5..=last).filter(|&j| j != i3) {
        iii.push(b_at(j));
        head_iii.push(big(j));
    }
    let next = big(last + 1);
    let tail_iii = w.tail().shifted(next - w.prefix_len() - 1);
    let group_iii = DiagonalSpec::new(iii, tail_iii)?;
    let map_iii = IndexMap::new(head_iii.clone(), Some(Affine { first: next, stride: 1 }))?;

    // layout: group I, then II and III alternating, then the rest of III
    let mut layout = map_i.clone();
    let mut it_iii = head_iii.iter();
    for &x in &map_ii {
        layout.push(x);
        layout.push(*it_iii.next().expect("III was extended past II"));
    }
    layout.extend(it_iii);
    let permutation = PermutationWindow::from_vec(layout)
        .map_err(|_| consistency("layout is a permutation"))?
        .trimmed();

    Ok(DecouplingPlan {
        i1,
        i2,
        i3,
        i4,
        i5,
        corrected: [pos(i1), big(i3), pos(i2)],
        targets: [a_at(i1), b_at(i3), a_at(i2)],
        a_tilde1,
        a_tilde2,
        b_tilde3,
        group_i,
        group_ii,
        group_iii,
        permutation,
        map_i,
        map_ii,
        map_iii,
    })
}

/// `v -> Vᵀ v` where `V` acts as `u` on the coordinates `coords` and as the
/// identity elsewhere.
fn conjugate_coords(v: &SparseVector, coords: &[usize; 3], u: &nalgebra::DMatrix<f64>) -> Result<SparseVector> {
    let top = *coords.iter().max().expect("three coordinates");
    let v = v.materialize_tail(top);
    let old: Vec<f64> = coords.iter().map(|&k| v.get(k)).collect();
    let mut support: Vec<(usize, f64)> = v
        .support()
        .iter()
        .copied()
        .filter(|(k, _)| !coords.contains(k))
        .collect();
    for (j, &k) in coords.iter().enumerate() {
        let x: f64 = (0..3).map(|i| u[(i, j)] * old[i]).sum();
        if x != 0.0 {
            support.push((k, x));
        }
    }
    support.sort_by_key(|e| e.0);
    SparseVector::new(support, v.sqrt_tail().cloned())
}

/// Projection for a sequence meeting the decoupling hypotheses: the direct
/// sum of the three group projections followed by the 3×3 correction.
pub fn summable_construct2(spec: &DiagonalSpec) -> Result<ProjectionRep> {
    summable_construct2_planned(spec).map(|(rep, _)| rep)
}

fn summable_construct2_planned(spec: &DiagonalSpec) -> Result<(ProjectionRep, DecouplingPlan)> {
    let plan = decouple(spec)?;
    let p_i = finite_projection(&plan.group_i)?;
    let p_ii = rank_one(&plan.group_ii)?;
    let p_iii = rank_one(&plan.group_iii.complement())?.complement();
    let assembled = direct_sum(vec![
        Part {
            rep: p_i,
            map: IndexMap::finite(plan.map_i.clone())?,
        },
        Part {
            rep: p_ii,
            map: IndexMap::finite(plan.map_ii.clone())?,
        },
        Part {
            rep: p_iii,
            map: plan.map_iii.clone(),
        },
    ])?;
    let [x1, x2, x3] = plan.corrected;
    // block orthogonality: the 3×3 compression is diagonal
    for (p, q) in [(x1, x2), (x1, x3), (x2, x3)] {
        if assembled.entry(p, q).abs() > 1e-12 {
            return Err(consistency("block orthogonality"));
        }
    }
    let lambda = [plan.a_tilde1.clone(), plan.b_tilde3.clone(), plan.a_tilde2.clone()];
    let u = schur_horn_unitary_exact(&lambda, &plan.targets)?;
    let vectors = assembled
        .vectors
        .iter()
        .map(|v| conjugate_coords(v, &plan.corrected, &u))
        .collect::<Result<Vec<_>>>()?;
    let rep = ProjectionRep {
        form: assembled.form,
        vectors,
        settled: None,
    };
    Ok((rep, plan))
}

/// `Pro(n)`: index of the `n`-th entry in (0,1); `pro(n)`: of the `n`-th
/// entry equal to 0 or 1.
pub struct ProperPositions {
    spec: DiagonalSpec,
}

pub fn positions_proper(spec: &DiagonalSpec) -> ProperPositions {
    ProperPositions {
        spec: spec.normalized(),
    }
}

impl ProperPositions {
    #[allow(non_snake_case)]
    pub fn Pro(&self, n: usize) -> Result<usize> {
        self.spec.nth_where(n, EntryClass::is_proper)
    }

    pub fn pro(&self, n: usize) -> Result<usize> {
        self.spec.nth_where(n, |c| !c.is_proper())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummableTrace {
    pub route: String,
    /// The proper entries were handled through `1 - f`.
    pub complement: bool,
    #[serde(rename = "properIndices")]
    pub proper_indices: Vec<usize>,
    pub decoupling: Option<DecouplingPlan>,
    pub tetris: Option<TetrisTrace>,
}

/// Projection with the given diagonal when `a` and `b` are finite and
/// `a - b` is an integer.
pub fn summable_construct(spec: &DiagonalSpec) -> Result<ProjectionRep> {
    summable_construct_traced(spec).map(|(rep, _)| rep)
}

pub fn summable_construct_traced(spec: &DiagonalSpec) -> Result<(ProjectionRep, SummableTrace)> {
    let planned = plan(spec)?;
    let f = spec.normalized();
    match planned.route {
        Route::Nonsummable { .. } => Err(Error::invalid("a or b diverges; not a summable diagonal")),
        Route::FiniteProper { ones_tail: true, .. } => {
            let (rep, mut trace) = finite_proper(&f.complement())?;
            trace.complement = true;
            Ok((rep.complement(), trace))
        }
        Route::FiniteProper { .. } => finite_proper(&f),
        Route::InfiniteProper { complement, small } => {
            let (h, hmap) = f.subsequence(EntryClass::is_proper);
            let w = if complement { h.complement() } else { h };
            let (rep_w, decoupling, tetris) = if small >= 2 {
                let (rep, plan) = summable_construct2_planned(&w)?;
                (rep, Some(plan), None)
            } else {
                let (rep, out) = few_small_route(&w)?;
                (rep, None, Some(out))
            };
            let rep_h = if complement { rep_w.complement() } else { rep_w };
            let rep = with_zero_one_part(&f, Part { rep: rep_h, map: hmap.clone() })?;
            let route = if small >= 2 { "decouple" } else { "sorted-tetris-complement" };
            Ok((
                rep,
                SummableTrace {
                    route: route.into(),
                    complement,
                    proper_indices: hmap.head().to_vec(),
                    decoupling,
                    tetris,
                },
            ))
        }
    }
}

/// Finitely many proper entries: finite Schur–Horn block plus 0/1 diagonal.
/// Needs a spec without a tail of ones.
fn finite_proper(f: &DiagonalSpec) -> Result<(ProjectionRep, SummableTrace)> {
    let (h, hmap) = f.subsequence(EntryClass::is_proper);
    let block = finite_projection(h.prefix())?;
    let rep = with_zero_one_part(
        f,
        Part {
            rep: block,
            map: hmap.clone(),
        },
    )?;
    Ok((
        rep,
        SummableTrace {
            route: "finite-schur-horn".into(),
            complement: false,
            proper_indices: hmap.head().to_vec(),
            decoupling: None,
            tetris: None,
        },
    ))
}

/// Adds the diagonal 0/1 projection on the entries equal to 0 or 1. A
/// co-frame needs every zero listed, so there must be finitely many.
fn with_zero_one_part(f: &DiagonalSpec, proper: Part) -> Result<ProjectionRep> {
    let (z, zmap) = f.subsequence(|c| !c.is_proper());
    let settled = proper.rep.settled;
    let ones_part = if proper.rep.form == crate::projection::Form::Frame {
        let ones: Vec<usize> = z
            .prefix()
            .iter()
            .enumerate()
            .filter(|(_, x)| x.is_one())
            .map(|(i, _)| zmap.apply(i + 1))
            .collect::<Result<_>>()?;
        let units = (1..=ones.len()).map(SparseVector::unit).collect();
        Part {
            rep: ProjectionRep::frame(units),
            map: IndexMap::finite(ones)?,
        }
    } else {
        if zmap.tail().is_some() {
            return Err(Error::internal("0/1 entries must be finite beside a co-frame"));
        }
        let units = z
            .prefix()
            .iter()
            .enumerate()
            .filter(|(_, x)| x.is_one())
            .map(|(i, _)| SparseVector::unit(i + 1))
            .collect();
        Part {
            rep: ProjectionRep::frame(units),
            map: zmap,
        }
    };
    let rep = direct_sum(vec![proper, ones_part])?;
    Ok(rep.with_settled(settled))
}

/// Sequence in (0,1) with at most one entry `<= 1/2` and infinitely many
/// above: sorted tetris on `g = 1 - w` (its single entry `>= 1/2` moved to
/// the front), then the complement.
fn few_small_route(w: &DiagonalSpec) -> Result<(ProjectionRep, TetrisTrace)> {
    let g = w.complement();
    let big = g.prefix().iter().position(|x| *x >= crate::rational::half());
    let rotation = match big {
        Some(j) => {
            let mut head = vec![j + 1];
            head.extend(1..=j);
            IndexMap::new(head, Some(Affine { first: j + 2, stride: 1 }))?
        }
        None => IndexMap::identity(),
    };
    let rotated = match big {
        Some(j) => {
            let mut prefix = vec![g.prefix()[j].clone()];
            prefix.extend(g.prefix()[..j].iter().cloned());
            prefix.extend(g.prefix()[j + 1..].iter().cloned());
            DiagonalSpec::new(prefix, g.tail().clone())?
        }
        None => g.clone(),
    };
    let (rep, _, out) = sorted_tetris(&rotated, usize::MAX)?;
    let rep = direct_sum(vec![Part { rep, map: rotation }])?;
    Ok((rep.complement(), out.trace()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, to_f64};

    fn decouple_example() -> DiagonalSpec {
        DiagonalSpec::new(
            vec![rat(3, 10), rat(1, 5)],
            TailRule::one_minus_geometric(rat(1, 4), rat(1, 2)),
        )
        .unwrap()
    }

    #[test]
    fn rank_one_examples() {
        let p = rank_one(&DiagonalSpec::finite(vec![rat(1, 2), rat(1, 4), rat(1, 4)]).unwrap()).unwrap();
        assert!((p.entry(1, 2) - 0.5f64.sqrt() * 0.5).abs() < 1e-15);
        assert!(p.gram_error() < 1e-15);
        let e = rank_one(&DiagonalSpec::finite(vec![rat(1, 1)]).unwrap()).unwrap();
        assert_eq!(e.vectors, vec![SparseVector::unit(1)]);
        let g = DiagonalSpec::new(vec![], TailRule::geometric(rat(1, 2), rat(1, 2))).unwrap();
        let p = rank_one(&g).unwrap();
        assert!(p.vectors[0].sqrt_tail().is_some());
        assert!((p.vectors[0].norm_sq() - 1.0).abs() < 1e-15);
        assert!(rank_one(&DiagonalSpec::finite(vec![rat(1, 2)]).unwrap()).is_err());
    }

    #[test]
    fn split_examples() {
        let s = DiagonalSpec::new(
            vec![rat(3, 10), rat(3, 4), rat(1, 5)],
            TailRule::one_minus_geometric(rat(1, 8), rat(1, 2)),
        )
        .unwrap();
        let sl = split_small_large(&s).unwrap();
        assert_eq!(sl.a, vec![rat(3, 10), rat(1, 5)]);
        assert_eq!(sl.b.take(2), vec![rat(3, 4), rat(7, 8)]);
        assert_eq!(sl.a_map, vec![1, 3]);
        let small = DiagonalSpec::new(vec![], TailRule::geometric(rat(1, 4), rat(1, 2))).unwrap();
        assert!(split_small_large(&small).is_err());
        let halves = DiagonalSpec::new(
            vec![rat(1, 2), rat(1, 2)],
            TailRule::one_minus_geometric(rat(1, 4), rat(1, 2)),
        )
        .unwrap();
        assert_eq!(split_small_large(&halves).unwrap().a.len(), 2);
    }

    #[test]
    fn decoupling_worked_example() {
        let p = decouple(&decouple_example()).unwrap();
        assert_eq!((p.i1, p.i2, p.i3, p.i4, p.i5), (1, 2, 1, 3, 3));
        assert_eq!(p.b_tilde3, rat(1, 1));
        assert_eq!(p.a_tilde1, rat(1, 8));
        assert_eq!(p.a_tilde2, rat(1, 8));
        assert_eq!(p.group_i, vec![rat(1, 8), rat(7, 8)]);
        assert_eq!(p.group_ii.total(), ExtRational::Finite(rat(1, 1)));
        assert_eq!(
            p.group_iii.complement().total(),
            ExtRational::Finite(rat(1, 1))
        );
    }

    #[test]
    fn swapped_small_entries() {
        let s = DiagonalSpec::new(
            vec![rat(1, 5), rat(3, 10)],
            TailRule::one_minus_geometric(rat(1, 4), rat(1, 2)),
        )
        .unwrap();
        assert_eq!(decouple(&s).unwrap().i1, 2);
    }

    #[test]
    fn decoupling_end_to_end() {
        let s = decouple_example();
        let p = summable_construct2(&s).unwrap();
        let want = [0.3, 0.2, 0.75, 0.875, 0.9375, 0.96875];
        for (k, x) in want.iter().enumerate() {
            assert!((p.diag_of(k + 1) - x).abs() < 1e-9, "k={k}");
        }
        assert!(p.gram_error() < 1e-9);
        for k in 7..40 {
            assert!((p.diag_of(k) - to_f64(&s.entry(k))).abs() < 1e-9);
        }
    }

    #[test]
    fn proper_positions() {
        let s = DiagonalSpec::finite(vec![rat(1, 1), rat(1, 2), rat(0, 1), rat(1, 2)]).unwrap();
        let p = positions_proper(&s);
        assert_eq!((p.Pro(1).unwrap(), p.Pro(2).unwrap()), (2, 4));
        let pro: Vec<usize> = (1..=4).map(|n| p.pro(n).unwrap()).collect();
        assert_eq!(pro, vec![1, 3, 5, 6]);
        assert!(p.Pro(3).is_err());
        let ones = DiagonalSpec::finite(vec![rat(1, 1); 3]).unwrap();
        assert_eq!(positions_proper(&ones).pro(5).unwrap(), 5);
    }

    #[test]
    fn case_one_block() {
        let s = DiagonalSpec::finite(vec![rat(1, 1), rat(1, 2), rat(1, 2), rat(1, 1), rat(0, 1)]).unwrap();
        let p = summable_construct(&s).unwrap();
        let d = p.diagonal(6);
        let want = [1.0, 0.5, 0.5, 1.0, 0.0, 0.0];
        for k in 0..6 {
            assert!((d[k] - want[k]).abs() < 1e-12);
        }
        assert!((p.entry(2, 3).abs() - 0.5).abs() < 1e-12);
        assert_eq!(p.entry(1, 2), 0.0);
        let zero = summable_construct(&DiagonalSpec::finite(vec![]).unwrap()).unwrap();
        assert!(zero.vectors.is_empty());
    }

    #[test]
    fn case_two_with_interleaved_ones() {
        let s = DiagonalSpec::new(
            vec![rat(1, 1), rat(3, 10), rat(0, 1), rat(1, 5), rat(1, 1)],
            TailRule::one_minus_geometric(rat(1, 4), rat(1, 2)),
        )
        .unwrap();
        let p = summable_construct(&s).unwrap();
        for k in 1..30 {
            assert!((p.diag_of(k) - to_f64(&s.entry(k))).abs() < 1e-9, "k={k}");
        }
        assert!(p.gram_error() < 1e-9);
    }

    #[test]
    fn few_small_entries_go_through_tetris() {
        // a = 1/2 and b = 1/4 + 1/8 + ... = 1/2
        let s = DiagonalSpec::new(
            vec![rat(1, 2)],
            TailRule::one_minus_geometric(rat(1, 4), rat(1, 2)),
        )
        .unwrap();
        let p = summable_construct(&s).unwrap();
        for k in 1..30 {
            assert!((p.diag_of(k) - to_f64(&s.entry(k))).abs() < 1e-9, "k={k}");
        }
        assert!(p.gram_error() < 1e-9);
    }

    #[test]
    fn complement_route_for_small_tails() {
        let two = DiagonalSpec::new(
            vec![rat(3, 4), rat(3, 4)],
            TailRule::geometric(rat(1, 4), rat(1, 2)),
        )
        .unwrap();
        let one = DiagonalSpec::new(vec![rat(3, 4)], TailRule::geometric(rat(1, 8), rat(1, 2))).unwrap();
        for s in [two, one] {
            let (p, trace) = summable_construct_traced(&s).unwrap();
            assert!(trace.complement);
            for k in 1..30 {
                assert!((p.diag_of(k) - to_f64(&s.entry(k))).abs() < 1e-9, "k={k}");
            }
            assert!(p.gram_error() < 1e-9);
        }
    }
}
