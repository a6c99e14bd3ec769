use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("alphabet rank must be at least 2, got {0}")]
    RankTooSmall(u32),

    #[error("generator index {index} outside alphabet of rank {rank}")]
    GeneratorOutOfRange { index: u32, rank: u32 },

    #[error("malformed token {token:?} at position {position} (byte offset {offset})")]
    MalformedToken {
        token: String,
        position: usize,
        offset: usize,
    },

    #[error("word must be nontrivial")]
    TrivialWord,

    #[error("{word} is a proper power ({root})^{exponent}")]
    ProperPower {
        word: String,
        root: String,
        exponent: u32,
    },

    #[error("{element} lies in the cyclic subgroup generated by {u}")]
    InCyclicSubgroup { element: String, u: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("stage {stage}: {reason}")]
    InvalidStage { stage: usize, reason: String },

    #[error("stages {first} and {second} have commensurable elements up to conjugacy")]
    Commensurable { first: usize, second: usize },

    #[error("t-letter of stage {stage} is foreign to the requested map (stage {expected})")]
    ForeignStage { stage: usize, expected: usize },

    #[error("budget exceeded for {what}: needs {needed}, cap is {cap}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("threshold {threshold} is unsound: r = {r:?} trivializes the word")]
    Counterexample { threshold: u64, r: Vec<i64> },

    #[error("no solution found within the guaranteed bound {bound}")]
    NoSolutionWithinBound { bound: i64 },
}

pub type Result<T> = std::result::Result<T, Error>;
