//! Exact rational orthogonal matrices from the Cayley transform
//! `U = (I - S)(I + S)^{-1}` of a skew-symmetric `S`, and the exact
//! diagonals they produce. Independent of every construction in the crate.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::feasibility::classify;
use crate::rational::{rat, Rational};
use crate::schurhorn::majorizes_exact;
use crate::selector::OracleReport;
use crate::seq::DiagonalSpec;

pub type RatMatrix = Vec<Vec<Rational>>;

fn identity(n: usize) -> RatMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect()
}

/// Solves `A X = B` by Gauss–Jordan elimination.
fn solve(mut a: RatMatrix, mut b: RatMatrix) -> Result<RatMatrix> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::Domain("singular matrix".into()))?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col].clone();
        for x in a[col].iter_mut().chain(b[col].iter_mut()) {
            *x /= &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in 0..n {
                let t = &factor * &a[col][c];
                a[r][c] -= t;
            }
            for c in 0..b[r].len() {
                let t = &factor * &b[col][c];
                b[r][c] -= t;
            }
        }
    }
    Ok(b)
}

/// `(I - S)(I + S)^{-1}`, exactly orthogonal for skew-symmetric `S`.
pub fn cayley(s: &RatMatrix) -> Result<RatMatrix> {
    let n = s.len();
    for i in 0..n {
        if s[i].len() != n {
            return Err(Error::invalid("matrix is not square"));
        }
        for j in 0..n {
            if s[i][j] != -s[j][i].clone() {
                return Err(Error::invalid("matrix is not skew-symmetric"));
            }
        }
    }
    let id = identity(n);
    let plus: RatMatrix = (0..n).map(|i| (0..n).map(|j| &id[i][j] + &s[i][j]).collect()).collect();
    let minus: RatMatrix = (0..n).map(|i| (0..n).map(|j| &id[i][j] - &s[i][j]).collect()).collect();
    // (I - S) and (I + S)^{-1} commute, so U = (I + S)^{-1} (I - S)
    solve(plus, minus)
}

/// Skew-symmetric matrix with entries `p/q`, `|p| <= 3`, `1 <= q <= 3`.
pub fn random_skew(rng: &mut impl Rng, n: usize) -> RatMatrix {
    let mut s = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let x = rat(rng.gen_range(-3..=3), rng.gen_range(1..=3));
            s[j][i] = -x.clone();
            s[i][j] = x;
        }
    }
    s
}

pub fn random_orthogonal_exact(rng: &mut impl Rng, n: usize) -> RatMatrix {
    cayley(&random_skew(rng, n)).expect("I + S is invertible for skew-symmetric S")
}

/// `diag(Uᵀ diag(λ) U)_j = Σ_i λ_i U_ij²`.
pub fn conjugate_diagonal(u: &RatMatrix, lambda: &[Rational]) -> Vec<Rational> {
    let n = u.len();
    (0..n)
        .map(|j| (0..n).map(|i| &lambda[i] * &u[i][j] * &u[i][j]).sum())
        .collect()
}

/// Diagonal of the projection onto the span of the first `rank` rows of `U`.
pub fn projection_diagonal(u: &RatMatrix, rank: usize) -> Vec<Rational> {
    let lambda: Vec<Rational> = (0..u.len())
        .map(|i| if i < rank { Rational::one() } else { Rational::zero() })
        .collect();
    conjugate_diagonal(u, &lambda)
}

/// Random rational pair `(λ, f)` with `f = diag(Uᵀ diag(λ) U)` exactly, so
/// `f ⪯ λ` holds by construction.
pub fn random_majorizing_pair(rng: &mut impl Rng, n: usize) -> (Vec<Rational>, Vec<Rational>) {
    let u = random_orthogonal_exact(rng, n);
    let lambda: Vec<Rational> = (0..n).map(|_| rat(rng.gen_range(-8..=8), rng.gen_range(1..=4))).collect();
    let f = conjugate_diagonal(&u, &lambda);
    (lambda, f)
}

/// Exact necessity check: diagonals of Cayley-orbit projections in
/// dimension `dim` always have integer `a - b`.
pub fn exact_necessity_oracle(dim: usize, trials: usize, seed: u64) -> Result<OracleReport> {
    if dim == 0 || dim > 8 {
        return Err(Error::invalid("oracle dimension must be in 1..=8"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    for _ in 0..trials {
        let u = random_orthogonal_exact(&mut rng, dim);
        let rank = rng.gen_range(0..=dim);
        let spec = DiagonalSpec::finite(projection_diagonal(&u, rank))?;
        if !classify(&spec).is_feasible() {
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

/// Exact Schur necessity: `diag(Uᵀ diag(λ) U) ⪯ λ` for Cayley-orbit `U`.
pub fn exact_schur_oracle(dim: usize, trials: usize, seed: u64) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let violations = (0..trials)
        .filter(|_| {
            let (lambda, f) = random_majorizing_pair(&mut rng, dim);
            !majorizes_exact(&f, &lambda)
        })
        .count();
    Ok(OracleReport {
        dim,
        trials,
        seed,
        violations,
    })
}
