//! Which sequences in `[0,1]` are diagonals of orthogonal projections on
//! `l2(N)`, and an explicit projection for each one that is.
//!
//! A sequence `(f_i)` is a projection diagonal iff, with
//! `a = Σ_{f_i <= 1/2} f_i` and `b = Σ_{f_i > 1/2} (1 - f_i)`, either sum
//! diverges or `a - b` is an integer. [`feasibility`] decides this exactly for
//! sequences given as a rational prefix plus a closed-form tail, and
//! [`selector::carpenter`] builds a projection: a streamed spectral-tetris
//! frame when a sum diverges ([`tetris`]), a finite Schur–Horn block or a
//! decoupled three-group construction otherwise ([`summable`]).

pub mod error;
pub mod feasibility;
pub mod field;
pub mod oracle;
pub mod perm;
pub mod projection;
pub mod rational;
pub mod schurhorn;
pub mod selector;
pub mod seq;
pub mod sispectral;
pub mod sparse;
pub mod summable;
pub mod tetris;

pub use error::{Error, Result};
pub use feasibility::{branch_partition, classify, plan, BranchLabel, FeasibilityCase, FeasibilityReport, Verdict};
pub use field::{Cell, CellField};
pub use perm::{IndexMap, PermutationWindow};
pub use projection::{Form, ProjectionRep};
pub use rational::{ExtRational, Rational};
pub use selector::{carpenter, carpenter_field, conjugate_by_permutation, verify_projection, ProjectionField, VerificationReport};
pub use seq::{DiagonalSpec, TailRule};
pub use sparse::SparseVector;
