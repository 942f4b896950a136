use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("value is not a canonical element of {0}")]
    NonCanonical(&'static str),
    #[error("inversion of zero")]
    DivisionByZero,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("coordinates do not satisfy the curve equation")]
    NotOnCurve,
    #[error("point is not in the prime-order subgroup")]
    NotInSubgroup,
    #[error("not a point: no curve point has this compact encoding")]
    NotAPoint,
    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("vote must be 0 or 1, got {0}")]
    InvalidVote(u64),
    #[error("tally infeasible: no result in [0, {0}] matches the vote sum")]
    TallyInfeasible(usize),
    #[error("length mismatch: expected {expected}, got {actual} ({what})")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("Bits2Num accepts at most {max} bits, got {got}")]
    TooManyBits { max: usize, got: usize },
    #[error("selector or bit input must be 0 or 1")]
    NonBit,
    #[error("witness does not satisfy the {0} relation")]
    RelationUnsatisfied(&'static str),
    #[error("cannot prove false statement for circuit {0}")]
    CannotProveFalseStatement(String),
    #[error("circuit {circuit} does not support variant {variant}")]
    UnsupportedVariant {
        circuit: &'static str,
        variant: String,
    },
    #[error("duplicate address {0}")]
    DuplicateAddress(String),
    #[error("invalid parameter file: {0}")]
    Params(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
