use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("coordinate index {index} out of range for a space of {len} coordinates")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("outcome space with {m} coordinates exceeds the cap of {cap}")]
    SpaceTooLarge { m: usize, cap: usize },

    #[error("probability {0} must lie strictly between 0 and 1")]
    InvalidProbability(f64),

    #[error("functional has {got} values, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("functional values must be finite")]
    NonFinite,

    #[error("functionals live on different outcome spaces")]
    SpaceMismatch,

    #[error("functional is not centered: E[F] = {0}")]
    NotCentered(f64),

    #[error("semigroup time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("kernel index {index} is outside a space of {m} coordinates")]
    KernelIndexOutOfRange { index: u32, m: usize },

    #[error("kernel tuple {0:?} has the wrong length or repeats an index")]
    InvalidTuple(Vec<u32>),

    #[error("chaos kernels must have distinct positive orders in increasing order")]
    InvalidChaosOrders,

    #[error("contraction indices l={l}, k={k} invalid for orders {n} and {m}")]
    InvalidContraction { n: usize, m: usize, k: usize, l: usize },

    #[error("malformed graph: {0}")]
    MalformedGraph(String),

    #[error("vertex {0} is isolated")]
    IsolatedVertex(usize),

    #[error("{what}: {count} exceeds the budget of {budget}")]
    BudgetExceeded {
        what: &'static str,
        count: u128,
        budget: u128,
    },

    #[error("graph with {vertices} vertices is too large for exhaustive subgraph enumeration (max {max}); use approximate mode")]
    ExhaustiveTooLarge { vertices: usize, max: usize },

    #[error("n = {n} is smaller than the {vertices} vertices of the pattern")]
    TooFewVertices { n: usize, vertices: usize },

    #[error("variance is zero; cannot standardize")]
    ZeroVariance,

    #[error("{reps} replications given, at least {min} required")]
    TooFewReps { reps: usize, min: usize },

    #[error("alpha = {alpha} is not below the normality threshold 1/beta = {threshold}")]
    NonNormalRegime { alpha: f64, threshold: f64 },

    #[error("counter {counter} cannot count copies of this pattern")]
    IncompatibleCounter { counter: &'static str },

    #[error("invalid graph family: {0}")]
    InvalidFamily(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
