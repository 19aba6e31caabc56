//! Exact computations around the pillowcase weight on Young diagrams.
//!
//! The crate is organised bottom-up:
//!
//! - [`partitions`]: partitions, hooks, beta-sets and the 2-core/2-quotient map.
//! - [`characters`]: Murnaghan-Nakayama characters (straight and skew), the
//!   involution fast path, central characters and character tables.
//! - [`weights`]: the pillowcase weight and its partition function.
//! - [`shifted`]: shifted power sums and shifted Schur functions.
//! - [`volumes`]: the functions `g_nu`, the expectation engine and its file cache.
//! - [`qseries`]: truncated q-series, Eisenstein generators, quasimodular fitting
//!   and asymptotic substitution.
//! - [`limitshape`]: rescaled contours, Sobolev norms and limit-shape diagnostics.
//! - [`oracle`]: brute-force census of permutation tuples.
//! - [`cli`]: the command-line front end.

pub mod characters;
pub mod cli;
pub mod error;
pub mod limitshape;
pub mod linalg;
pub mod oracle;
pub mod partitions;
pub mod qseries;
pub mod shifted;
pub mod volumes;
pub mod weights;

mod arith;

pub use error::{Error, Result};
pub use partitions::Partition;

/// Exact rational numbers used throughout the crate.
pub type Rational = num_rational::BigRational;
