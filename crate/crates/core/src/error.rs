use alloc::boxed::Box;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("degree must be at least {min}, got {got}")]
    InvalidDegree { got: usize, min: usize },
    #[error("interval [{a}, {b}] is empty or not finite")]
    InvalidInterval { a: f64, b: f64 },
    #[error("interior knots are not strictly increasing at position {position}")]
    NonMonotoneKnots { position: usize },
    #[error("interior knot {value} lies outside ({a}, {b})")]
    KnotOutsideInterval { value: f64, a: f64, b: f64 },
    #[error("partition needs at least one interval")]
    EmptyPartition,
    #[error("invalid partition parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("Greville abscissae repeat at index {index}")]
    RepeatedGreville { index: usize },
    #[error("point {x} lies outside [{a}, {b}]")]
    OutOfDomain { x: f64, a: f64, b: f64 },
    #[error("basis index {index} outside 0..{dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("expected {expected} samples, got {got}")]
    SampleCount { expected: usize, got: usize },
    #[error("stencil half-width {p} is below the degree {m}")]
    StencilTooNarrow { p: usize, m: usize },
    #[error("exactness order {q} exceeds the admissible maximum {max}")]
    ExactnessTooHigh { q: usize, max: usize },
    #[error("window {lo}..={hi} around index {center} leaves the basis index set")]
    WindowOutOfRange { center: usize, lo: isize, hi: isize },
    #[error("constraint matrix is rank deficient")]
    RankDeficient,
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex exceeded the iteration cap of {cap}")]
    IterationCap { cap: usize },
    #[error("operation not defined for this operator kind: {0}")]
    UnsupportedKind(&'static str),
    #[error("derivative oracle failed at {x}")]
    Oracle { x: f64 },
    #[error("at index {index}: {source}")]
    AtIndex { index: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn at(self, index: usize) -> Self {
        Error::AtIndex {
            index,
            source: Box::new(self),
        }
    }
}
