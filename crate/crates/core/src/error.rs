use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse polynomial {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("the zero polynomial is not allowed")]
    ZeroPolynomial,

    #[error("polynomial has degree {found}, at least {required} is required")]
    Degree { required: usize, found: usize },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("polynomial vanishes identically modulo {0}")]
    VanishesModP(u64),

    #[error("f({0}) = 0, so the lcm degenerates to 0")]
    IntegerZero(u64),

    #[error("sieve bound B = {bound} is below N = {n_max}; largest-prime-factor decisions would be unsound")]
    BoundBelowN { bound: u64, n_max: u64 },

    #[error("{count} roots of f modulo {prime}^{level} exceed the bound d*disc^2 = {bound}")]
    RootBound {
        prime: u64,
        level: u32,
        count: usize,
        bound: String,
    },

    #[error("root table for p = {prime} is truncated at {depth} levels; exact counts need {needed}")]
    TruncatedTable { prime: u64, depth: usize, needed: usize },

    #[error("{poly} is reducible ({witness}); statistics need an irreducible polynomial")]
    Reducible { poly: String, witness: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("checkpoint cannot be resumed: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
