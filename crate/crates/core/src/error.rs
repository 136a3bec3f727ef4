use thiserror::Error;

use crate::matrix::GenMatrix;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("entry code {0} is outside {{0,1,2,3}}")]
    InvalidEntry(u8),

    #[error("row length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("matrix must have at least one generator row and one column (got k={k}, n={n})")]
    Degenerate { k: usize, n: usize },

    #[error("{k} generators exceeds the supported maximum of {max}")]
    TooManyGenerators { k: usize, max: usize },

    #[error(
        "matrix does not define a Bieberbach group of diagonal type with holonomy C2^{k}: {reason}"
    )]
    InvalidMatrix { k: usize, reason: String },

    #[error("column {column} is not deletable")]
    NotDeletable { column: usize },

    #[error("group has torsion (closure row {row:#b} contains no entry 1)")]
    HasTorsion { row: u32 },

    #[error("refined lattice is not diagonal: the kernel translations do not split along the action characters")]
    NonDiagonalRefinement,

    #[error("expected holonomy C2^{expected}, found C2^{found}")]
    WrongHolonomy { expected: usize, found: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("unknown symbol `{0}` in word")]
    UnknownSymbol(String),

    #[error("malformed word: {0}")]
    WordSyntax(String),

    #[error("element {index} is not a pure translation")]
    NotTranslation { index: usize },

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("col-irreducible valid matrix found at k={k}, n={n}:\n{matrix}")]
    Counterexample {
        k: usize,
        n: usize,
        matrix: GenMatrix,
    },

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown example `{0}`")]
    UnknownExample(String),
}
