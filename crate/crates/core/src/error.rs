use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("processing time must be finite and non-negative, got {0}")]
    InvalidProcessingTime(f64),

    #[error("job ids must be exactly 0..n-1 with no duplicates")]
    BadJobIds,

    #[error("a job sequence must contain at least one job")]
    EmptySequence,

    #[error("machine count must be at least {min}, got {m}")]
    BadMachineCount { m: usize, min: usize },

    #[error("rank {rank} out of range 1..={m}")]
    RankOutOfRange { rank: usize, m: usize },

    #[error("all processing times are zero: R(J) is undefined")]
    DegenerateAllZero,

    #[error("no valid scheduler configuration for m={m} (h={h} gives i={i}, need i < m-h); smallest valid m for this h rule is {min_valid_m}")]
    ConfigInvalid {
        m: usize,
        h: usize,
        i: usize,
        min_valid_m: usize,
    },

    #[error("unknown scheduler '{0}'")]
    UnknownScheduler(String),

    #[error("exact optimum search is limited to n <= {max_n}, got n={n}")]
    InstanceTooLarge { n: usize, max_n: usize },

    #[error("invalid distribution parameters: {0}")]
    BadDistribution(String),

    #[error("invalid generator parameters: {0}")]
    BadGenerator(String),

    #[error("no proper sequence after {retries} retries (m={m}, n={n})")]
    NotProperAfterRetries { m: usize, n: usize, retries: usize },

    #[error("a proper sequence needs n > m, got n={n}, m={m}")]
    NotEnoughJobs { n: usize, m: usize },

    #[error("epsilon must lie in (0, {max}), got {eps}")]
    EpsilonOutOfRange { eps: f64, max: f64 },

    #[error("sequence is not proper; the stability probability is defined over proper sequences only")]
    NotProper,

    #[error("at least one trial is required")]
    NoTrials,

    #[error("phi must lie in {range}, got {phi}")]
    PhiOutOfRange { phi: f64, range: &'static str },

    #[error("prefix floor(phi*n) is empty")]
    EmptyPrefix,

    #[error("permutation enumeration is capped at n <= {cap}, got n={n}")]
    EnumerationTooLarge { n: usize, cap: usize },

    #[error("{count} distinct arrangements exceed the exact-mode cap of {cap}")]
    TooManyArrangements { count: u128, cap: u128 },

    #[error("not a permutation of 0..n-1")]
    BadPermutation,

    #[error("invalid input file: {0}")]
    InvalidInput(String),

    #[error("invalid manifest: {0}")]
    InvalidManifest(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
