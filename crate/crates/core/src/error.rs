//! Error and resource-budget types shared across the crate.

use std::fmt;

/// Resource caps for basis generation and the collection engine.
///
/// Exceeding a cap is always an explicit [`Error::Budget`], never silent
/// truncation.
#[derive(Clone, Debug)]
pub struct Budget {
    /// Maximum number of Hall basis elements generated per basis.
    pub max_basis_elements: usize,
    /// Maximum number of symbols in an intermediate word during collection.
    pub max_word_symbols: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_basis_elements: 500_000,
            max_word_symbols: 1_000_000,
        }
    }
}

/// A hypothesis-validation report: the list of violated hypotheses, empty when
/// the input satisfies every precondition of the formula being invoked.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "all hypotheses hold")
        } else {
            write!(f, "{}", self.violations.join("; "))
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input outside any formula hypothesis (bad index, bad parse,
    /// dimension mismatch).
    #[error("domain error: {0}")]
    Domain(String),

    /// A formula hypothesis is violated; the computation was refused.
    #[error("hypothesis violated: {0}")]
    Validation(ValidationReport),

    /// A configured resource cap was exceeded.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// An internal cross-check failed. This is either a bug or a genuine
    /// counterexample and must never be suppressed.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
