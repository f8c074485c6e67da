use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field size {p}^{l} is outside the supported range")]
    FieldTooLarge { p: u64, l: u32 },
    #[error("bad field literal {0:?} (expected \"p\" or \"p^l\")")]
    FieldSyntax(String),
    #[error("{m} does not divide q - 1 = {q_minus_one}")]
    NonDivisor { m: u64, q_minus_one: u64 },
    #[error("no embedding of F_{from} into F_{into}")]
    NoEmbedding { from: u64, into: u64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("degree {degree} exceeds the declared bound {bound}")]
    DegreeExceeded { degree: u32, bound: u32 },
    #[error("{what}: needs {needed} steps, budget is {limit}")]
    BudgetExceeded { what: &'static str, needed: u128, limit: u128 },
    #[error("directions are linearly dependent")]
    DependentDirections,
    #[error("point is not in L (coordinates must sum to zero)")]
    NotInL,
    #[error("flat is not contained in the variety")]
    FlatNotInX,
    #[error("flat catalog is empty")]
    EmptyCatalog,
    #[error("X_sing has no points at some extension level; codim reported as dim X")]
    DegenerateCount,
    #[error("fiber is empty at extension level {level}")]
    EmptyFiber { level: u32 },
    #[error("function is not weakly polynomial of degree <= {a}: {detail}")]
    NotWeaklyPolynomial { a: u32, detail: String },
    #[error("non-admissible character component is nonzero: {0}")]
    NonAdmissibleComponentNonzero(String),
    #[error("constructed polynomial does not restrict to the component: {0}")]
    VanishingCheckFailed(String),
    #[error("no Gamma element moves the character into the positive chamber: {0}")]
    NoPositiveChamber(String),
    #[error("slice residual is not of the expected lower degree: {0}")]
    ResidualNotLowerDegree(String),
    #[error("slice budget exceeded: {0}")]
    SliceBudgetExceeded(String),
    #[error("residual nonzero after {used} slices with degree bound {a}")]
    TooManySlices { used: usize, a: u32 },
    #[error("base polynomial does not match the function on the base flat")]
    BaseMismatch,
    #[error("sign of a cyclotomic value could not be certified")]
    Undecidable,
    #[error("field is not admissible: {0}")]
    NotAdmissible(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True for errors caused by hitting a configured budget.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. } | Error::SliceBudgetExceeded(_))
    }
}
