//! Numerical laboratory for inner functions on the unit disk.
//!
//! The crate evaluates Blaschke products and singular inner functions in log
//! space, measures Carleson-type quantities of boundary sets (entropy,
//! porosity, dyadic hit sums), builds the atomic measures used by embedding
//! counterexamples, and runs the zero-placement constructions together with
//! the bound checks that certify them.
//!
//! Everything is deterministic: there is no randomness anywhere in the
//! construction paths, so every reported constant is reproducible bit for
//! bit. Asymptotic claims (convergence, divergence, boundedness) are always
//! reported as partial sums, slopes, or recorded constants at an explicit
//! truncation depth, never as bare booleans.

pub mod disk;
pub mod eval;
pub mod measure;
pub mod sets;
pub mod wepify;

/// Refusals and input rejections shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A construction precondition failed; the diagnostic names the witness.
    #[error("{0}")]
    Refused(String),
    /// Malformed or inconsistent input data.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
