use crate::hexlattice::HexVertex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("boundary walk is not a simple cycle (vertex {0:?} repeats)")]
    NonSimpleCycle(HexVertex),
    #[error("boundary walk is not closed: {0}")]
    NotAClosedWalk(String),
    #[error("the origin vertex is neither inside nor on the boundary")]
    OriginOutside,
    #[error("face set does not form a simply connected domain: {0}")]
    NotSimplyConnected(String),
    #[error("offset {0:?} does not map the lattice to itself")]
    ParityViolation((i32, i32, i32)),
    #[error("configuration is not even (vertex {vertex} has degree {degree})")]
    NotEven { vertex: usize, degree: usize },
    #[error("configuration or distribution belongs to a different domain")]
    DomainMismatch,
    #[error("enumeration too large: {what} = {size} exceeds the limit {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("loop weight n must be positive, got {0}")]
    NonPositiveN(f64),
    #[error("{name} = {value} is out of range ({expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}
