//! Error type shared across the toolkit.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Model hyperparameters violate an invariant (zero counts, d != h*d_k, ...).
    InvalidModel(String),
    /// Platform description is inconsistent (inventory/slot mismatch, bad resistances, ...).
    InvalidPlatform(String),
    /// Placement failed validation; one string per violation.
    InvalidPlacement(Vec<String>),
    /// A kernel had no core assignment during traffic synthesis.
    UnmappedKernel(String),
    /// No path between two routers (placement should have been rejected earlier).
    Unroutable { src: String, dst: String },
    /// Statistics over an empty link set.
    ZeroLinks,
    /// Objective vectors of different lengths were compared.
    DimensionMismatch { left: usize, right: usize },
    /// A resource cannot hold what the mapping requires.
    CapacityExceeded {
        what: String,
        required: u64,
        available: u64,
    },
    /// Exhaustive enumeration refused: the design space exceeds the guard.
    SearchSpaceTooLarge { estimate: u128, limit: u128 },
    /// Catch-all for rejected numeric inputs.
    InvalidInput(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidModel(m) => write!(f, "invalid model config: {m}"),
            Error::InvalidPlatform(m) => write!(f, "invalid platform: {m}"),
            Error::InvalidPlacement(v) => {
                write!(f, "invalid placement ({} violations): {}", v.len(), v.join("; "))
            }
            Error::UnmappedKernel(id) => write!(f, "kernel `{id}` has no core assignment"),
            Error::Unroutable { src, dst } => write!(f, "no route from {src} to {dst}"),
            Error::ZeroLinks => write!(f, "utilization statistics over zero links"),
            Error::DimensionMismatch { left, right } => {
                write!(f, "objective dimension mismatch: {left} vs {right}")
            }
            Error::CapacityExceeded {
                what,
                required,
                available,
            } => write!(f, "{what}: required {required}, available {available}"),
            Error::SearchSpaceTooLarge { estimate, limit } => {
                write!(f, "design space too large to enumerate: ~{estimate} placements (limit {limit})")
            }
            Error::InvalidInput(m) => write!(f, "invalid input: {m}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
