//! Desk-scale laboratory for the Gaussian fluctuations of traces of
//! non-Hermitian random matrices with i.i.d. entries.
//!
//! The crate couples three kinds of machinery:
//!
//! * Monte-Carlo simulation of seeded, nested matrix ensembles
//!   ([`ensemble`], [`trace`], [`asclt`]);
//! * exact rational combinatorics for moments, covariances and
//!   partitioned-chain cardinalities ([`combinatorics`], [`oracle`]);
//! * the discrete Wiener-chaos toolkit (homogeneous sums, contractions,
//!   influences) together with explicit smooth-function bounds
//!   ([`kernels`], [`stein`]).
//!
//! Every exact quantity doubles as an oracle for the corresponding
//! Monte-Carlo estimate, and vice versa; the integration tests in
//! `tests/acceptance.rs` wire the two sides together.

pub mod asclt;
pub mod combinatorics;
pub mod ensemble;
pub mod kernels;
pub mod oracle;
pub mod stein;
pub mod trace;

mod rng;
mod util;

pub use rng::child_seed;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("enumeration budget exceeded: {what} needs {needed} > budget {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u128,
    },
    #[error("moment of order {0} is not available for this distribution")]
    MissingMoment(usize),
    #[error("pattern count is not polynomial in N: mismatch at verification node N={0}")]
    NotPolynomial(i64),
    #[error("kernel has zero variance (empty support)")]
    ZeroVariance,
}

pub type Result<T> = std::result::Result<T, Error>;
