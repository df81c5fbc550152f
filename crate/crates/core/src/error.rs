use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("negative exponent at position {pos}")]
    NegativeExponent { pos: usize },
    #[error("polynomial is not quasihomogeneous")]
    NoSolution,
    #[error("weights are not uniquely determined by the monomials")]
    NonUnique,
    #[error("weight system has a non-positive weight")]
    NonPositiveWeight,
    #[error("polynomial is not invertible: {0}")]
    NotInvertible(String),
    #[error("polynomial is not a sum of Fermat, chain and loop blocks: {0}")]
    NotClassifiable(String),
    #[error("Milnor ring is infinite-dimensional (degenerate singularity)")]
    Degenerate,
    #[error("Hessian vanishes in the Milnor ring")]
    DegenerateHessian,
    #[error("Milnor ring has no unique socle monomial")]
    SocleNotUnique,
    #[error("exponent matrix is rank deficient")]
    RankDeficient,
    #[error("group of order {order} exceeds the enumeration cap {cap}")]
    GroupTooLarge { order: u128, cap: usize },
    #[error("not a subgroup: {0}")]
    NotSubgroup(String),
    #[error("group is not admissible: {0}")]
    NotAdmissible(String),
    #[error("malformed sector: {0}")]
    MalformedSector(String),
    #[error("polynomial is not of the form z^2 + f: {0}")]
    BadForm(String),
    #[error("weight system is not Calabi-Yau: {0}")]
    NotCy(String),
    #[error("group out of range: {0}")]
    GroupOutOfRange(String),
    #[error("sector pair does not split: {0}")]
    NotSplit(String),
    #[error("elements come from different state spaces")]
    MixedSpaces,
    #[error("not a basis element: {0}")]
    NotBasisElement(String),
    #[error("no invertible polynomial found for weight system {0}")]
    NoInvertibleRepresentative(String),
    #[error("catalog error on line {line}: {msg}")]
    Catalog { line: usize, msg: String },
    #[error("enumeration bound {bound} yields only {found} weight systems; raise the bound")]
    BoundTooSmall { bound: u64, found: usize },
    #[error("I/O error: {0}")]
    Io(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

impl Error {
    /// Errors caused by malformed input rather than a violated mathematical precondition.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::NegativeExponent { .. }
                | Error::NoSolution
                | Error::NonUnique
                | Error::NonPositiveWeight
                | Error::Catalog { .. }
                | Error::Io(_)
                | Error::Invalid(_)
                | Error::BoundTooSmall { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
