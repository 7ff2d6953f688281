//! Majorization and constructive finite Schur–Horn: orthogonal `U` with a
//! prescribed diagonal for `Uᵀ diag(λ) U`, finite projections with a given
//! diagonal, and a unitary intertwining two projections of equal rank.

use nalgebra::DMatrix;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::projection::ProjectionRep;
use crate::rational::{in_unit_interval, to_f64, Rational};
use crate::sparse::SparseVector;

const MAJORIZATION_TOL: f64 = 1e-9;

fn sorted_desc<T: Clone + PartialOrd>(xs: &[T]) -> Vec<T> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| b.partial_cmp(a).expect("comparable entries"));
    v
}

/// `f ⪯ λ` exactly: equal totals and dominated prefix sums of the decreasing
/// rearrangements.
pub fn majorizes_exact(f: &[Rational], lambda: &[Rational]) -> bool {
    if f.len() != lambda.len() {
        return false;
    }
    let (fs, ls) = (sorted_desc(f), sorted_desc(lambda));
    let (mut sf, mut sl) = (Rational::zero(), Rational::zero());
    for (x, y) in fs.iter().zip(&ls) {
        sf += x;
        sl += y;
        if sf > sl {
            return false;
        }
    }
    sf == sl
}

/// Floating-point `f ⪯ λ` with absolute tolerance `1e-9` on prefix sums.
pub fn majorizes(f: &[f64], lambda: &[f64]) -> bool {
    if f.len() != lambda.len() || f.iter().chain(lambda).any(|x| !x.is_finite()) {
        return false;
    }
    let (fs, ls) = (sorted_desc(f), sorted_desc(lambda));
    let (mut sf, mut sl) = (0.0, 0.0);
    for (x, y) in fs.iter().zip(&ls) {
        sf += x;
        sl += y;
        if sf > sl + MAJORIZATION_TOL {
            return false;
        }
    }
    (sf - sl).abs() <= MAJORIZATION_TOL
}

/// Orthogonal `U` with `diag(Uᵀ diag(λ) U) = f` in the given order.
///
/// Targets are pinned from the largest down. With the working values `d`
/// sorted decreasingly, the largest remaining target `t` is pinned by one
/// plane rotation of the consecutive pair `d_j >= t >= d_{j+1}` (smallest such
/// `j`); the leftover value `d_j + d_{j+1} - t` keeps majorizing the remaining
/// targets.
pub fn schur_horn_unitary(lambda: &[f64], f: &[f64]) -> Result<DMatrix<f64>> {
    if lambda.len() != f.len() {
        return Err(Error::invalid("spectrum and target lengths differ"));
    }
    if !majorizes(f, lambda) {
        return Err(Error::Domain("target is not majorized by the spectrum".into()));
    }
    Ok(horn_rotations(lambda, f))
}

/// [`schur_horn_unitary`] with an exact majorization check.
pub fn schur_horn_unitary_exact(lambda: &[Rational], f: &[Rational]) -> Result<DMatrix<f64>> {
    if lambda.len() != f.len() {
        return Err(Error::invalid("spectrum and target lengths differ"));
    }
    if !majorizes_exact(f, lambda) {
        return Err(Error::Domain("target is not majorized by the spectrum".into()));
    }
    let l: Vec<f64> = lambda.iter().map(to_f64).collect();
    let t: Vec<f64> = f.iter().map(to_f64).collect();
    Ok(horn_rotations(&l, &t))
}

fn horn_rotations(lambda: &[f64], f: &[f64]) -> DMatrix<f64> {
    let n = lambda.len();
    // active vectors: mutually Λ-orthogonal, each with its value wᵀΛw
    let mut active: Vec<(Vec<f64>, f64)> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            (e, lambda[i])
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| f[b].partial_cmp(&f[a]).expect("finite targets"));
    let mut u = DMatrix::zeros(n, n);
    for (step, &target) in order.iter().enumerate() {
        active.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite values"));
        let t = f[target];
        if step + 1 == n {
            let (w, _) = active.pop().expect("one vector left");
            u.set_column(target, &nalgebra::DVector::from_vec(w));
            break;
        }
        let j = (0..active.len() - 1)
            .find(|&j| active[j].1 >= t && t >= active[j + 1].1)
            .unwrap_or(active.len() - 2);
        let (dj, dk) = (active[j].1, active[j + 1].1);
        let c2 = if dj > dk {
            ((t - dk) / (dj - dk)).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let (c, s) = (c2.sqrt(), (1.0 - c2).sqrt());
        let (wj, wk) = (active[j].0.clone(), active[j + 1].0.clone());
        let pinned: Vec<f64> = wj.iter().zip(&wk).map(|(a, b)| c * a - s * b).collect();
        let rest: Vec<f64> = wj.iter().zip(&wk).map(|(a, b)| s * a + c * b).collect();
        u.set_column(target, &nalgebra::DVector::from_vec(pinned));
        active[j] = (rest, dj + dk - t);
        active.remove(j + 1);
    }
    u
}

/// Rank-`k` projection with diagonal `f`, where `k = Σ f` must be an integer.
/// The frame consists of the first `k` rows of the Schur–Horn unitary for
/// the spectrum `(1,…,1,0,…,0)`.
pub fn finite_projection(f: &[Rational]) -> Result<ProjectionRep> {
    if let Some(x) = f.iter().find(|x| !in_unit_interval(x)) {
        return Err(Error::invalid(format!("entry {x} is outside [0,1]")));
    }
    let total: Rational = f.iter().sum();
    if !total.is_integer() {
        return Err(Error::invalid(format!("entries sum to {total}, not an integer")));
    }
    let k = total.to_integer().to_usize().expect("bounded by the length");
    let n = f.len();
    let lambda: Vec<Rational> = (0..n)
        .map(|i| Rational::from_integer((i < k).into()))
        .collect();
    let u = schur_horn_unitary_exact(&lambda, f)?;
    let vectors = (0..k)
        .map(|i| SparseVector::from_entries(u.row(i).iter().enumerate().map(|(j, x)| (j + 1, *x)).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProjectionRep::frame(vectors).with_settled(None))
}

const RANK_TOL: f64 = 1e-9;

/// Orthonormal basis of the column space, columns chosen by largest residual
/// (smallest index on ties).
fn column_basis(m: &DMatrix<f64>) -> Vec<nalgebra::DVector<f64>> {
    let mut residual: Vec<nalgebra::DVector<f64>> = m.column_iter().map(|c| c.into_owned()).collect();
    let mut basis: Vec<nalgebra::DVector<f64>> = Vec::new();
    loop {
        let best = residual
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.norm()))
            .fold(None, |acc: Option<(usize, f64)>, (i, nrm)| match acc {
                Some((_, b)) if b >= nrm => acc,
                _ => Some((i, nrm)),
            });
        let Some((i, nrm)) = best else { break };
        if nrm < RANK_TOL {
            break;
        }
        let q = &residual[i] / nrm;
        for r in residual.iter_mut() {
            let proj = q.dot(r);
            *r -= &q * proj;
        }
        basis.push(q);
    }
    basis
}

fn check_projection(p: &DMatrix<f64>, name: &str) -> Result<()> {
    if !p.is_square() {
        return Err(Error::invalid(format!("{name} is not square")));
    }
    let sym = (p - p.transpose()).amax();
    let idem = (p * p - p).amax();
    if sym > 1e-8 || idem > 1e-8 {
        return Err(Error::invalid(format!("{name} is not an orthogonal projection")));
    }
    Ok(())
}

/// Orthogonal `U` with `Q = Uᵀ P U`, built from orthonormal bases of the
/// ranges and their complements; `det U = 1`.
pub fn intertwining_unitary(p: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_projection(p, "P")?;
    check_projection(q, "Q")?;
    let n = p.nrows();
    if q.nrows() != n {
        return Err(Error::invalid("P and Q have different dimensions"));
    }
    let id = DMatrix::<f64>::identity(n, n);
    let (rp, rq) = (column_basis(p), column_basis(q));
    if rp.len() != rq.len() {
        return Err(Error::Domain(format!(
            "rank mismatch: rank P = {}, rank Q = {}",
            rp.len(),
            rq.len()
        )));
    }
    let bp: Vec<_> = rp.into_iter().chain(column_basis(&(&id - p))).collect();
    let mut bq: Vec<_> = rq.into_iter().chain(column_basis(&(&id - q))).collect();
    if bp.len() != n || bq.len() != n {
        return Err(Error::internal("basis construction lost a dimension"));
    }
    let build = |bq: &[nalgebra::DVector<f64>]| {
        let mut u = DMatrix::zeros(n, n);
        for (a, b) in bp.iter().zip(bq) {
            u += a * b.transpose();
        }
        u
    };
    let mut u = build(&bq);
    if n > 0 && u.determinant() < 0.0 {
        let last = bq.last_mut().expect("n > 0");
        *last = -&*last;
        u = build(&bq);
    }
    Ok(u)
}
