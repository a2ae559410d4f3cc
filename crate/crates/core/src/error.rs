use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("elements live over different primes ({0} and {1})")]
    PrimeMismatch(u64, u64),

    #[error("incompatible cyclotomic levels: (p={p1}, n={n1}) vs (p={p2}, n={n2})")]
    IncompatibleLevels { p1: u64, n1: u32, p2: u64, n2: u32 },

    #[error("{0} is divisible by p and is not a p-adic unit")]
    NotUnit(String),

    #[error("element is not a vanishing sum: {0}")]
    NotZeroSum(String),

    #[error("not spectral: the set is not p-homogeneous")]
    NotHomogeneous,

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
