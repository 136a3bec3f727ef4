//! Bieberbach groups of diagonal type with holonomy `C₂ᵏ`, described by
//! characteristic matrices over the Klein four-group.

pub mod affine;
pub mod canonical;
pub mod cert;
pub mod diffuse;
pub mod error;
pub mod io;
pub mod klein;
pub mod library;
pub mod matrix;
pub mod reduction;
pub mod scalar;
pub mod search;
pub mod vasquez;

pub use affine::{
    compose, eval_word, realize, torsion_oracle, translation_rank, AffineIsometry,
    GroupRealization, Word,
};
pub use canonical::{canonical_key, canonicalize};
pub use error::{Error, Result};
pub use io::{parse_matrix, serialize_matrix};
pub use klein::{phi, star, star_rows, DEntry, Row, SignClass};
pub use library::{example, ExampleId};
pub use matrix::{
    closure, column_one_counts, display_order, is_faithful, is_torsion_free, validate,
    ClosureMatrix, Element, GenMatrix, ValidityReport,
};
pub use scalar::Scalar;

/// Isometries with machine-integer translations.
pub type Isometry = AffineIsometry<i64>;
/// Realizations with machine-integer translations.
pub type Realization = GroupRealization<i64>;
