use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("operation `{op}` expects a table of length {expected}, got {got}")]
    ArityMismatch { op: String, expected: usize, got: usize },
    #[error("value {value} out of range for a carrier of size {size}")]
    OutOfRange { value: usize, size: usize },
    #[error("carrier must have at least two elements")]
    DegenerateCarrier,
    #[error("search budget of {0} exceeded")]
    SearchBudgetExceeded(usize),
    #[error("size budget of {0} exceeded")]
    SizeBudgetExceeded(usize),
    #[error("algebra has no Mal'cev term")]
    NoMalcevTerm,

    #[error("operands live in different contexts")]
    ContextMismatch,
    #[error("empty input")]
    EmptyInput,
    #[error("clopen is not good")]
    NotGood,
    #[error("clopen is empty or the whole punctured space")]
    EmptyOrFull,
    #[error("clopen types differ")]
    TypeMismatch,
    #[error("piece domains overlap")]
    OverlappingDomains,
    #[error("map is not a bijection: {0}")]
    NotBijective(String),
    #[error("homeomorphism does not extend to the distinguished points")]
    NotExtendable,
    #[error("homeomorphism moves a distinguished point")]
    PointNotFixed,
    #[error("invalid point context: {0}")]
    BadContext(String),
    #[error("parse error: {0}")]
    Parse(String),

    #[error("label at a distinguished point differs from its filter idempotent")]
    FilterViolation,
    #[error("filter value {0} is not an idempotent")]
    NotIdempotent(usize),
    #[error("restriction to the empty set")]
    EmptyRestriction,
    #[error("map is not an automorphism")]
    NotAutomorphism,
    #[error("automorphism does not carry the first idempotent to the second")]
    IdempotentMismatch,
    #[error("homeomorphism does not carry the first point to the second")]
    PointMismatch,

    #[error("tail label does not stabilize the filter idempotent")]
    TailLabelViolation,
    #[error("automorphism moves an idempotent filtered at a limit point of the support")]
    IllegalTriple,
    #[error("context must have exactly one distinguished point")]
    NotSinglePoint,
    #[error("automorphism does not stabilize the filter idempotent")]
    NotStabilizing,
    #[error("filter idempotents are not in distinct orbits")]
    OrbitCollision,

    #[error("not an embedding: {0}")]
    NotEmbedding(String),
    #[error("embeddings have different sources")]
    SourceMismatch,
    #[error("source arity exceeds target arity")]
    ArityOrder,
    #[error("extension failed: {0}")]
    ExtensionFailure(String),

    #[error("values on S_k are not idempotent")]
    NotIdempotentOnSk,
    #[error("idempotent pattern does not match the filters")]
    PatternMismatch,
    #[error("algebra is not a loop or ring with a single identity idempotent")]
    NotLoopOrRing,
    #[error("rank must be at least one")]
    ZeroRank,

    #[error("precondition fails: {0} is not good")]
    PreconditionNotGood(&'static str),
    #[error("no type-matching witness: {0}")]
    TypeWitnessFailure(String),
    #[error("context has no distinguished points")]
    NoPoints,
    #[error("generator set is empty")]
    EmptyGeneratorSet,
    #[error("map does not act on the depth-{0} approximation")]
    NotLevelPreserving(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
