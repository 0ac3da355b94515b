use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field elements live in different fields (mod {0} vs mod {1})")]
    ModulusMismatch(u64, u64),
    #[error("zero has no multiplicative inverse")]
    InverseOfZero,
    #[error("binary operation {0} needs a second operand")]
    MissingOperand(&'static str),
    #[error("unsupported prime bit length {0} (expected 2..=61)")]
    BitsOutOfRange(u32),
    #[error("no prime with {0} bits found")]
    NoPrimeFound(u32),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("value {value} out of range [0, {bound})")]
    OutOfRange { value: u64, bound: u64 },
    #[error("domain of {0} points exceeds the enumeration limit")]
    DomainTooLarge(u128),
    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("player {player} cannot see {what}")]
    Invisible { player: usize, what: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("sampling budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("internal check failed: {0}")]
    CheckFailed(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
