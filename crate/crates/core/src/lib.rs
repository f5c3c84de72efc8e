//! Reed-Muller codes over F_2 and the information-theoretic machinery
//! around their successive layer entropies.
//!
//! The crate is organised bottom-up:
//!
//! - [`f2`]: bit-packed vectors, matrices and canonical subspaces over F_2.
//! - [`rm`]: monomial orders, evaluation/coefficient maps, generator matrices.
//! - [`info`]: exact distributions over F_2^k, entropies, Ruzsa distances,
//!   Bhattacharyya parameters.
//! - [`symmetry`]: affine substitutions acting on evaluations and on
//!   coefficient layers, invariant subspaces, orbit-distance search.
//! - [`analysis`]: layer entropies of the transformed noise `W = G Z` and the
//!   identities/bounds built from them.
//! - [`pfr`]: exhaustive subspace oracles for Freiman-Ruzsa type inequalities.
//! - [`decoder`]: BSC simulation, exact bit-MAP / ML decoding and the
//!   puncture-and-list decoder.
//!
//! Coordinates are 0-indexed throughout the API. A variable subset `A ⊆ [m]`
//! is a bitmask where bit `j` stands for variable `x_{j+1}`.

pub mod analysis;
pub mod decoder;
pub mod error;
pub mod f2;
pub mod info;
pub mod pfr;
pub mod rm;
pub mod seeding;
pub mod symmetry;

mod numeric;

pub use error::{Error, Result};
pub use f2::{BitMatrix, BitVector, Subspace};
pub use info::{DenseDistribution, JointDistribution};
pub use rm::RmCode;
