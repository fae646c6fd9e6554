//! Numeric laboratory for computational analytic number theory.
//!
//! The crate is organised around immutable sieve-produced tables of
//! arithmetic functions ([`sieve`]), the special multiplicative families
//! built on top of them ([`families`]), Dirichlet-series machinery for
//! main-term coefficients ([`dirichlet`]), exponential-sum evaluation and
//! bound checking ([`expsum`]), the sawtooth function and Vaaler's
//! trigonometric approximation ([`psi`]), empirical hypothesis checkers
//! ([`verify`]), and summatory error-term profiling ([`error_lab`]).

pub mod dirichlet;
pub mod error_lab;
pub mod expsum;
pub mod families;
pub mod kahan;
pub mod psi;
pub mod report;
pub mod sieve;
pub mod verify;

pub use num_complex::Complex64;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the operation's stated domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed user input (unknown names, bad grammar, unsorted grids).
    #[error("usage error: {0}")]
    Usage(String),
    /// A parameter regime precondition failed; names the violated inequality.
    #[error("regime error: {0}")]
    Regime(String),
    /// A least-squares system was too ill-conditioned to trust.
    #[error("ill-conditioned fit: condition number {condition:.3e} exceeds 1e12")]
    IllConditioned { condition: f64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache format error: {0}")]
    CacheFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
