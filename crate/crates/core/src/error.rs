//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LpaError {
    #[error("duplicate name `{0}`")]
    DuplicateName(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("graph must declare at least one vertex")]
    EmptyVertexSet,

    #[error("edge `{edge}` references undeclared vertex `{vertex}`")]
    UndeclaredEndpoint { edge: String, vertex: String },

    #[error("rose graph needs at least one petal, got {0}")]
    RoseTooSmall(usize),

    #[error("path is not composable: range of `{left}` is not the source of `{right}`")]
    NotComposable { left: String, right: String },

    #[error("path is not closed")]
    NotClosed,

    #[error("monomial ranges differ: r(p) = `{p_range}` but r(q) = `{q_range}`")]
    RangeMismatch { p_range: String, q_range: String },

    #[error("operands live over different graphs")]
    GraphMismatch,

    #[error("scalar field modes differ between operands")]
    FieldModeMismatch,

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("invalid field mode `{0}` (expected `rational` or `fp:<prime>`)")]
    BadFieldMode(String),

    #[error("division by zero scalar")]
    DivisionByZero,

    #[error("matrix size mismatch: {0}x{0} vs {1}x{1}")]
    SizeMismatch(usize, usize),

    #[error("matrix corners differ")]
    CornerMismatch,

    #[error("matrix entry ({row},{col}) is not in the corner {corner}L{corner}")]
    EntryOutsideCorner { row: usize, col: usize, corner: String },

    #[error("{side} product is not the identity: entry ({row},{col}) = {entry}")]
    NotInverse {
        side: &'static str,
        row: usize,
        col: usize,
        entry: String,
    },

    #[error("matrix over the field is singular")]
    Singular,

    #[error("element is not a unit: {0}")]
    NotAUnit(String),

    #[error("Cuntz-Krieger relation {relation} fails for the candidate images: {detail}")]
    CkViolation { relation: String, detail: String },

    #[error("edge list invalid for the endomorphism frame: {0}")]
    BadFrame(String),

    #[error("endomorphisms have incompatible provenance; both must be matrix-built on the same frame")]
    IncompatibleProvenance,

    #[error("automorphism witness rejected: phi_P(Q) differs from P^-1 at entry ({row},{col})")]
    WitnessRejected { row: usize, col: usize },

    #[error("endomorphism is not graded")]
    NotGraded,

    #[error("expected the rose graph R_n with n >= {min_petals}")]
    NotARose { min_petals: usize },

    #[error("infinite path junction invalid: prefix ends at `{prefix_end}` but cycle starts at `{cycle_start}`")]
    BadJunction {
        prefix_end: String,
        cycle_start: String,
    },

    #[error("permutation of {{1..{n}}} expected, got {got:?}")]
    BadPermutation { n: usize, got: Vec<usize> },

    #[error("infinite path is not flagged {0}")]
    MissingFlag(&'static str),

    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("script error at line {line}: {msg}")]
    Script { line: usize, msg: String },

    #[error("{0}")]
    CheckFailed(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LpaError>;
