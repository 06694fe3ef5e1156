//! Crate-wide error type. Hand-rolled so the crate stays `no_std`.

use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong across the probability, region, Gaussian,
/// and simulator layers. Variants carry the numbers needed to act on the
/// failure, not just describe it.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A probability entry is below zero.
    NegativeMass { index: usize, value: f64 },
    /// A distribution (or channel row) does not sum to 1 within tolerance.
    NotNormalized { sum: f64 },
    /// Table/channel/argument dimensions do not line up.
    ShapeMismatch(String),
    /// A variable or symbol index is out of range or repeated.
    BadIndex { index: usize, limit: usize },
    /// The same variable appears in two groups of a mutual-information query.
    OverlappingGroups { var: usize },
    /// An auxiliary alphabet exceeds the bound that preserves optimality.
    CardinalityExceeded { size: usize, limit: usize },
    /// A dense table would exceed the configured entry cap.
    TableTooLarge { entries: u128, cap: usize },
    /// An optimizer or simulator configuration field is out of range.
    ConfigInvalid(String),
    /// No channel satisfies the rate caps. Constant channels always do, so
    /// optimizers never actually return this; it exists for API completeness.
    NoFeasiblePoint,
    /// A closed-form expression was evaluated outside its domain.
    DomainError(String),
    /// Parallel sequences passed to a joint check have different lengths.
    LengthMismatch { expected: usize, got: usize },
    /// A message index does not fit its index space.
    IndexOutOfRange { index: u64, size: u64 },
    /// A codebook (or bin table) would exceed the configured memory cap.
    MemoryCapExceeded { needed: u128, cap: u64 },
    /// Exhaustive analysis would enumerate more sequences than the cap.
    EnumerationCapExceeded { needed: u128, cap: u64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NegativeMass { index, value } => {
                write!(f, "negative probability mass {value} at flat index {index}")
            }
            Error::NotNormalized { sum } => {
                write!(f, "probabilities sum to {sum}, not 1 (tolerance 1e-12)")
            }
            Error::ShapeMismatch(what) => write!(f, "shape mismatch: {what}"),
            Error::BadIndex { index, limit } => {
                write!(f, "index {index} invalid (limit {limit}, repeats not allowed)")
            }
            Error::OverlappingGroups { var } => {
                write!(f, "variable {var} appears in more than one group")
            }
            Error::CardinalityExceeded { size, limit } => {
                write!(f, "auxiliary alphabet size {size} exceeds bound {limit}")
            }
            Error::TableTooLarge { entries, cap } => {
                write!(f, "dense table needs {entries} entries, cap is {cap}")
            }
            Error::ConfigInvalid(what) => write!(f, "invalid config: {what}"),
            Error::NoFeasiblePoint => write!(f, "no channel satisfies the rate caps"),
            Error::DomainError(what) => write!(f, "outside domain: {what}"),
            Error::LengthMismatch { expected, got } => {
                write!(f, "sequence length {got} does not match {expected}")
            }
            Error::IndexOutOfRange { index, size } => {
                write!(f, "message index {index} outside space of size {size}")
            }
            Error::MemoryCapExceeded { needed, cap } => {
                write!(f, "codebook needs {needed} stored symbols, memory cap is {cap}")
            }
            Error::EnumerationCapExceeded { needed, cap } => {
                write!(f, "exact analysis needs {needed} sequence tuples, cap is {cap}")
            }
        }
    }
}
