//! Error type shared by every lattice module.

use thiserror::Error;

/// Errors surfaced by lattice construction and verification.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Matrix operation on incompatible shapes.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An index request outside what the moment / Gram budget covers.
    #[error("budget exceeded: {what} needs index {needed}, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: i64,
        budget: i64,
    },

    /// A denominator determinant vanished at a lattice site, so the variable
    /// or polynomial is undefined there.
    #[error("lattice breakdown: {what} at (n={n}, l={l})")]
    Breakdown { what: &'static str, n: i64, l: i64 },

    /// A measure that violates its invariants (duplicate nodes, empty, ...).
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    /// Basis index outside the admissible set {0, 2, 3, ...}.
    #[error("inadmissible basis index {0}")]
    InadmissibleIndex(i64),

    /// Operation precondition not met (wrong m, window too small, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),
}
