use thiserror::Error;

/// Errors surfaced by the library. Validation failures of template axioms are
/// *not* errors; they are report entries (see `template::ValidationReport`).
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain of the operation (time out of range,
    /// mismatched dimensions, empty grids, and similar precondition failures).
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input file or string.
    #[error("parse error: {0}")]
    Parse(String),

    /// A score computation was run on data that does not satisfy the template
    /// axioms (upstream validation was skipped or wrong).
    #[error("invalid template: {0}")]
    InvalidTemplate(String),

    /// Enumeration work exceeded the configured budget.
    #[error("enumeration budget exceeded: needs about {needed} candidates, budget is {budget}")]
    Budget { needed: u128, budget: u128 },

    /// Flow time so large the basis entries would overflow `f64`.
    #[error("flow time {t} out of safe range (|t| <= {max_t:.3})")]
    FlowRange { t: f64, max_t: f64 },

    /// A structural invariant of an input was violated (non-unimodular basis,
    /// determinant mismatch in a perturbation, ill-conditioned reduction).
    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
