//! Rademacher-type exact series for r-colored l-regular partitions.
//!
//! The crate evaluates the convergent series for `b_l^(r)(n)`, `p^(r)(n)` and
//! their specializations (r-colored distinct parts, sum of minimal excludants
//! over partitions and overpartitions), certifies the result as an exact
//! integer, and cross-checks it against exact q-series expansions.
//! Jensen polynomials of the same sequences are tested for hyperbolicity
//! with exact Sturm sequences.
//!
//! Modules, bottom-up:
//! - [`arith`]: Dedekind sums, modular inverses, Jacobi symbols.
//! - [`qoracle`]: exact coefficients of the generating products.
//! - [`mpnum`]: precision contexts, `exp(2 pi i theta)`, modified Bessel `I_nu`.
//! - [`charsums`]: the Kloosterman-type sums of each series.
//! - [`radseries`]: series evaluation, certification, transformation checks.
//! - [`turan`]: Jensen polynomials, hyperbolicity, Hermite limits.

pub mod arith;
pub mod charsums;
pub mod error;
pub mod mpnum;
pub mod qoracle;
pub mod radseries;
pub mod tables;
pub mod turan;

pub use error::{Error, Result};
