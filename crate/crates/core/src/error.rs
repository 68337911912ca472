use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse {0:?} as a fraction")]
    ParseRational(String),

    #[error("matrix shape {rows}x{cols} does not match {len} entries")]
    Shape { rows: usize, cols: usize, len: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("form is not negative definite")]
    NotNegativeDefinite,

    #[error("invalid group presentation: {0}")]
    InvalidGroup(String),

    #[error("element does not belong to the group: {0}")]
    GroupMismatch(String),

    #[error("p = {p} and q = {q} are not coprime")]
    NotCoprime { p: u64, q: u64 },

    #[error("invalid lens space parameters p = {p}, q = {q}")]
    InvalidLensSpace { p: u64, q: u64 },

    #[error("index {i} outside [0, {bound}) for L({p},{q})")]
    BadIndex { p: u64, q: u64, i: u64, bound: u64 },

    #[error("no conjugation-symmetric labeling exists for this table")]
    NoSymmetricLabeling,

    #[error("twist count must be at least 1, got {0}")]
    BadTwistCount(i64),

    #[error("invalid white graph: {0}")]
    InvalidGraph(String),

    #[error("unsupported determinant {0}: only squarefree or p^2*s factorizations are searched")]
    UnsupportedDeterminant(u64),

    #[error("unsupported subgroup type: {0}")]
    UnsupportedType(String),

    #[error("search space too large: {0}")]
    TooLarge(String),

    #[error("knot {0} has no presentation in the database")]
    PresentationUnavailable(String),

    #[error("unknown knot {0}")]
    UnknownKnot(String),

    #[error("parse error at line {line}, field {field}: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("validation failed for {knot}: {message}")]
    Validation { knot: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
