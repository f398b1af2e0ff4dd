use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("gate T({k},{n}) is out of range; need 1 <= k <= n")]
    InvalidGate { k: u32, n: u32 },
    #[error("slice ({k},{n}) is out of range; need 0 <= k <= n and n >= 1")]
    InvalidSlice { k: u32, n: u32 },
    #[error("assignment has {actual} bits but the formula has {expected} leaves")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("formula with fan-out {n} and depth {depth} has too many leaves")]
    TooManyLeaves { n: u32, depth: u32 },
    #[error("{count} reluctant inputs exceed the enumeration cap of {cap}")]
    EnumerationCap { count: String, cap: u64 },
    #[error("instance too large: {what} (limit {limit})")]
    InstanceTooLarge { what: String, limit: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
}
