//! Top-level dispatch, the per-cell selector over a field, conjugation by a
//! windowed permutation, and the verification harness and oracles.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::feasibility::{branch_partition, plan, BranchLabel, Route};
use crate::field::{glue, Cell, CellField};
use crate::perm::PermutationWindow;
use crate::projection::ProjectionRep;
use crate::rational::to_f64;
use crate::schurhorn::majorizes;
use crate::seq::DiagonalSpec;
use crate::sparse::SparseVector;
use crate::summable::{summable_construct_traced, SummableTrace};
use crate::tetris::{nonsummable_construct_traced, NonsummableTrace};

/// Largest index checked when a representation is complete.
pub const MAX_VERIFY: usize = 2048;
/// Largest dense block used for the idempotency and symmetry checks.
pub const MAX_DENSE: usize = 128;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "route", rename_all = "snake_case")]
pub enum Trace {
    Nonsummable(NonsummableTrace),
    Summable(SummableTrace),
}

/// Projection with diagonal `spec`; `m` bounds the number of streamed
/// vectors on the nonsummable route.
pub fn carpenter(spec: &DiagonalSpec, m: usize) -> Result<ProjectionRep> {
    carpenter_traced(spec, m).map(|(rep, _, _)| rep)
}

pub fn carpenter_traced(spec: &DiagonalSpec, m: usize) -> Result<(ProjectionRep, BranchLabel, Trace)> {
    let planned = plan(spec)?;
    let (rep, trace) = match planned.route {
        Route::Nonsummable { .. } => {
            let (rep, t) = nonsummable_construct_traced(spec, m)?;
            (rep, Trace::Nonsummable(t))
        }
        _ => {
            let (rep, t) = summable_construct_traced(spec)?;
            (rep, Trace::Summable(t))
        }
    };
    Ok((rep, planned.label, trace))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellOutput {
    pub cell: String,
    pub label: BranchLabel,
    pub rep: ProjectionRep,
    pub trace: Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionField {
    pub cells: Vec<CellOutput>,
}

impl ProjectionField {
    pub fn get(&self, cell: &str) -> Option<&CellOutput> {
        self.cells.iter().find(|c| c.cell == cell)
    }
}

fn build_cell(c: &Cell, m: usize) -> Result<(String, CellOutput)> {
    let (rep, label, trace) = carpenter_traced(&c.spec, m).map_err(|e| match e {
        Error::Infeasible { a, b, .. } => Error::Infeasible {
            cell: Some(c.cell.clone()),
            a,
            b,
        },
        other => other,
    })?;
    Ok((
        c.cell.clone(),
        CellOutput {
            cell: c.cell.clone(),
            label,
            rep,
            trace,
        },
    ))
}

/// Runs the selector on every cell: cells are grouped by branch label, each
/// branch is built on its own, and the branch outputs are glued back in field
/// order.
pub fn carpenter_field(field: &CellField, m: usize, parallel: bool) -> Result<ProjectionField> {
    let labels = branch_partition(field)?;
    let branches = field.split(|c| labels[&c.cell].clone());
    let run = |cells: &Vec<Cell>| -> Result<Vec<(String, CellOutput)>> {
        cells.iter().map(|c| build_cell(c, m)).collect()
    };
    let groups: Vec<&Vec<Cell>> = branches.values().collect();
    let parts: Vec<Vec<(String, CellOutput)>> = if parallel {
        groups.par_iter().map(|g| run(g)).collect::<Result<_>>()?
    } else {
        groups.iter().map(|g| run(g)).collect::<Result<_>>()?
    };
    let glued = glue(&field.ids(), parts)?;
    Ok(ProjectionField {
        cells: glued.into_iter().map(|(_, c)| c).collect(),
    })
}

/// `Uᵀ P U` with `U e_i = e_{π(i)}`, so the new diagonal at `i` is the old
/// one at `π(i)`.
pub fn conjugate_by_permutation(p: &ProjectionRep, pi: &PermutationWindow) -> Result<ProjectionRep> {
    let inv = pi.inverse();
    let len = pi.len();
    let vectors = p
        .vectors
        .iter()
        .map(|v| {
            let v = v.materialize_tail(len);
            let entries = v.support().iter().map(|&(k, x)| (inv.apply(k), x)).collect();
            let moved = SparseVector::from_entries(entries)?;
            SparseVector::new(moved.support().to_vec(), v.sqrt_tail().cloned())
        })
        .collect::<Result<Vec<_>>>()?;
    let settled = p
        .settled
        .map(|s| (1..=s).take_while(|&i| pi.apply(i) <= s).count());
    Ok(ProjectionRep {
        form: p.form,
        vectors,
        settled,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    #[serde(rename = "gramMaxErr")]
    pub gram_max_err: f64,
    #[serde(rename = "diagMaxErr")]
    pub diag_max_err: f64,
    #[serde(rename = "idempotencyMaxErr")]
    pub idempotency_max_err: f64,
    #[serde(rename = "selfAdjointMaxErr")]
    pub self_adjoint_max_err: f64,
    #[serde(rename = "settledIndices")]
    pub settled_indices: usize,
    pub pass: bool,
}

/// Checks `p` against `spec` on its settled indices.
///
/// The diagonal is compared on `1..=settled` (or `1..=max(m, reach)` for a
/// complete representation, capped at [`MAX_VERIFY`]). Idempotency uses the
/// dense compression to the first `min(settled, MAX_DENSE)` coordinates; the
/// mass of row `i` beyond the block, `P_ii - Σ_{k<=n} P_ik²`, bounds the
/// dropped terms of `(P²)_ij` by Cauchy–Schwarz and is allowed for.
pub fn verify_projection(p: &ProjectionRep, spec: &DiagonalSpec, m: usize, tol: f64) -> VerificationReport {
    let settled = match p.settled {
        Some(s) => s,
        None => m.max(p.max_index()).min(MAX_VERIFY),
    };
    let gram = p.gram_error();
    let diag = (1..=settled)
        .map(|k| (p.diag_of(k) - to_f64(&spec.entry(k))).abs())
        .fold(0.0, f64::max);
    let n = settled.min(MAX_DENSE);
    let d = p.dense(n);
    let sym = (&d - d.transpose()).amax();
    let sq = &d * &d;
    let slack: Vec<f64> = (0..n)
        .map(|i| (p.diag_of(i + 1) - d.row(i).norm_squared()).max(0.0))
        .collect();
    let mut idem: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let excess = (sq[(i, j)] - d[(i, j)]).abs() - (slack[i] * slack[j]).sqrt();
            idem = idem.max(excess);
        }
    }
    let bad = |x: f64| !(x <= tol);
    VerificationReport {
        gram_max_err: gram,
        diag_max_err: diag,
        idempotency_max_err: idem.max(0.0),
        self_adjoint_max_err: sym,
        settled_indices: settled,
        pass: !(bad(gram) || bad(diag) || bad(idem) || bad(sym)),
    }
}

/// Random orthogonal matrix: QR of a matrix with uniform entries in [-1,1].
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
    a.qr().q()
}

/// `a - b` is within `tol` of an integer.
pub fn approx_feasible(diag: &[f64], tol: f64) -> bool {
    let (a, b) = diag.iter().fold((0.0, 0.0), |(a, b), &f| {
        if f <= 0.5 {
            (a + f, b)
        } else {
            (a, b + 1.0 - f)
        }
    });
    let diff = a - b;
    (diff - diff.round()).abs() <= tol
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub violations: usize,
}

/// Diagonals of random projections `U diag(1,…,1,0,…,0) Uᵀ` in dimension
/// `dim`; counts those whose `a - b` is not an integer.
pub fn necessity_oracle(dim: usize, trials: usize, seed: u64) -> Result<OracleReport> {
    if dim == 0 || dim > 8 {
        return Err(Error::invalid("oracle dimension must be in 1..=8"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    for _ in 0..trials {
        let u = random_orthogonal(&mut rng, dim);
        let rank = rng.gen_range(0..=dim);
        let cols = u.columns(0, rank);
        let p = &cols * &cols.transpose();
        let diag: Vec<f64> = p.diagonal().iter().copied().collect();
        if !approx_feasible(&diag, 1e-9) {
            violations += 1;
        }
    }
    Ok(OracleReport {
        dim,
        trials,
        seed,
        violations,
    })
}

/// Diagonals of `Uᵀ diag(λ) U` for random `U` and `λ`; counts those not
/// majorized by `λ`.
pub fn schur_necessity_oracle(dim: usize, trials: usize, seed: u64) -> Result<OracleReport> {
    if dim == 0 || dim > 8 {
        return Err(Error::invalid("oracle dimension must be in 1..=8"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    for _ in 0..trials {
        let u = random_orthogonal(&mut rng, dim);
        let lambda: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..=2.0)).collect();
        let l = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(lambda.clone()));
        let a = u.transpose() * l * &u;
        let diag: Vec<f64> = a.diagonal().iter().copied().collect();
        if !majorizes(&diag, &lambda) {
            violations += 1;
        }
    }
    Ok(OracleReport {
        dim,
        trials,
        seed,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::Form;
    use crate::rational::rat;
    use crate::seq::TailRule;
    use crate::tetris::min_s;

    fn halves() -> DiagonalSpec {
        DiagonalSpec::finite(vec![rat(1, 2), rat(1, 2)]).unwrap()
    }

    #[test]
    fn carpenter_examples() {
        let p = carpenter(&halves(), 4).unwrap();
        let d = p.dense(2);
        assert!(d.iter().all(|x| (x.abs() - 0.5).abs() < 1e-12));
        let c = DiagonalSpec::new(vec![], TailRule::constant(rat(2, 5))).unwrap();
        let (_, label, trace) = carpenter_traced(&c, 4).unwrap();
        assert_eq!(label.path[0], "NonsummableA");
        assert!(matches!(trace, Trace::Nonsummable(_)));
        let z = carpenter(&DiagonalSpec::finite(vec![]).unwrap(), 4).unwrap();
        assert!(z.vectors.is_empty() && z.form == Form::Frame);
        let bad = DiagonalSpec::finite(vec![rat(1, 3)]).unwrap();
        assert!(matches!(carpenter(&bad, 4), Err(Error::Infeasible { .. })));
    }

    fn cell(id: &str, spec: DiagonalSpec) -> Cell {
        Cell {
            cell: id.into(),
            spec,
        }
    }

    #[test]
    fn field_examples() {
        let c = DiagonalSpec::new(vec![], TailRule::constant(rat(2, 5))).unwrap();
        let g = DiagonalSpec::new(vec![], TailRule::geometric(rat(1, 2), rat(1, 2))).unwrap();
        let f = CellField::new(vec![cell("x", halves()), cell("y", c), cell("z", g)]).unwrap();
        let out = carpenter_field(&f, 4, true).unwrap();
        assert_eq!(out.cells.len(), 3);
        let labels: std::collections::BTreeSet<_> = out.cells.iter().map(|c| c.label.clone()).collect();
        assert_eq!(labels.len(), 3);
        for c in &out.cells {
            assert_eq!(c.rep, carpenter(&f.cells().iter().find(|x| x.cell == c.cell).unwrap().spec, 4).unwrap());
        }
        let dup = CellField::new(vec![cell("a", halves()), cell("b", halves())]).unwrap();
        let out = carpenter_field(&dup, 4, false).unwrap();
        assert_eq!(
            serde_json::to_string(&out.cells[0].rep).unwrap(),
            serde_json::to_string(&out.cells[1].rep).unwrap()
        );
        assert!(carpenter_field(&CellField::default(), 4, true).unwrap().cells.is_empty());
        let bad = CellField::new(vec![cell("ok", halves()), cell("bad", DiagonalSpec::finite(vec![rat(1, 3)]).unwrap())]).unwrap();
        match carpenter_field(&bad, 4, true) {
            Err(Error::Infeasible { cell, .. }) => assert_eq!(cell.as_deref(), Some("bad")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn permutation_conjugation() {
        let p = ProjectionRep::frame(vec![SparseVector::unit(1)]);
        let id = conjugate_by_permutation(&p, &PermutationWindow::identity(3)).unwrap();
        assert_eq!(id, p);
        let swap = PermutationWindow::from_vec(vec![2, 1]).unwrap();
        let q = conjugate_by_permutation(&p, &swap).unwrap();
        assert_eq!((q.diag_of(1), q.diag_of(2)), (0.0, 1.0));
        let r = carpenter(&halves(), 2).unwrap();
        let pi = PermutationWindow::from_vec(vec![3, 1, 2]).unwrap();
        let q = conjugate_by_permutation(&r, &pi).unwrap();
        for i in 1..=3 {
            assert!((q.diag_of(i) - r.diag_of(pi.apply(i))).abs() < 1e-15);
        }
    }

    #[test]
    fn verification_examples() {
        let p = carpenter(&halves(), 2).unwrap();
        let r = verify_projection(&p, &halves(), 2, 1e-9);
        assert!(r.pass && r.gram_max_err <= 1e-15 && r.diag_max_err <= 1e-15);
        let c = DiagonalSpec::new(vec![], TailRule::constant(rat(2, 5))).unwrap();
        let p = carpenter(&c, 8).unwrap();
        let r = verify_projection(&p, &c, 8, 1e-9);
        assert!(r.pass, "{r:?}");
        assert_eq!(r.settled_indices, min_s(&c, 8).unwrap() - 2);
        let mut broken = p.clone();
        broken.vectors[0] = SparseVector::from_entries(vec![(1, 3.0)]).unwrap();
        let r = verify_projection(&broken, &c, 8, 1e-9);
        assert!(!r.pass && r.gram_max_err > 1.0);
    }

    #[test]
    fn oracles_find_no_violations() {
        for dim in 1..=4 {
            assert_eq!(necessity_oracle(dim, 200, 7).unwrap().violations, 0);
            assert_eq!(schur_necessity_oracle(dim, 200, 7).unwrap().violations, 0);
        }
        assert!(necessity_oracle(9, 1, 0).is_err());
    }
}
