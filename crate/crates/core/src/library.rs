//! Embedded example matrices. Only generators are stored; closures are
//! always recomputed.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::GenMatrix;
use crate::vasquez::{LOWER_K5, MIN_72_1_1_502};

/// Named example matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExampleId {
    /// The 4-dimensional `C₂²` group `min.19.1.1.7`.
    Min19,
    /// The 5-dimensional `C₂³` group `min.72.1.1.502`.
    Min72,
    /// The 3-dimensional Hantzsche-Wendt group.
    DeltaP,
    /// Lower-bound construction for `k = 2..=5`.
    Lower(u8),
}

impl ExampleId {
    pub const ALL: [ExampleId; 7] = [
        ExampleId::Min19,
        ExampleId::Min72,
        ExampleId::DeltaP,
        ExampleId::Lower(2),
        ExampleId::Lower(3),
        ExampleId::Lower(4),
        ExampleId::Lower(5),
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExampleId::Min19 => "min.19.1.1.7",
            ExampleId::Min72 => "min.72.1.1.502",
            ExampleId::DeltaP => "deltaP",
            ExampleId::Lower(2) => "lower:k2",
            ExampleId::Lower(3) => "lower:k3",
            ExampleId::Lower(4) => "lower:k4",
            ExampleId::Lower(_) => "lower:k5",
        }
    }

    pub fn matrix(self) -> GenMatrix {
        let built = match self {
            ExampleId::Min19 => GenMatrix::from_codes(&MIN_19_1_1_7),
            ExampleId::Min72 | ExampleId::Lower(3) => GenMatrix::from_codes(&MIN_72_1_1_502),
            ExampleId::DeltaP => GenMatrix::from_codes(&DELTA_P),
            ExampleId::Lower(2) => GenMatrix::from_codes(&LOWER_K2),
            ExampleId::Lower(4) => GenMatrix::from_codes(&LOWER_K4),
            ExampleId::Lower(_) => GenMatrix::from_codes(&LOWER_K5),
        };
        built.expect("embedded matrices are well formed")
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExampleId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::UnknownExample(s.to_string()))
    }
}

/// Looks up an example by name.
pub fn example(name: &str) -> Result<GenMatrix> {
    Ok(name.parse::<ExampleId>()?.matrix())
}

pub const MIN_19_1_1_7: [[u8; 4]; 2] = [[2, 2, 1, 3], [1, 0, 2, 2]];

pub const DELTA_P: [[u8; 3]; 2] = [[1, 3, 2], [2, 1, 3]];

pub const LOWER_K2: [[u8; 3]; 2] = [[1, 2, 2], [2, 1, 3]];

pub const LOWER_K4: [[u8; 10]; 4] = [
    [1, 2, 2, 2, 2, 2, 2, 0, 0, 0],
    [2, 1, 2, 2, 3, 0, 0, 2, 2, 0],
    [2, 2, 1, 2, 0, 3, 0, 3, 0, 2],
    [2, 2, 2, 1, 0, 0, 3, 0, 3, 3],
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::validate;
    use crate::vasquez::build_lower_bound_matrix;

    #[test]
    fn names_round_trip() {
        for id in ExampleId::ALL {
            assert_eq!(id.name().parse::<ExampleId>().unwrap(), id);
        }
        assert!(matches!(example("min.20"), Err(Error::UnknownExample(_))));
    }

    #[test]
    fn all_valid() {
        for id in ExampleId::ALL {
            assert!(validate(&id.matrix()).is_valid(), "{id}");
        }
    }

    #[test]
    fn lower_matches_construction() {
        for k in 2..=5u8 {
            assert_eq!(
                ExampleId::Lower(k).matrix(),
                build_lower_bound_matrix(k as usize).unwrap()
            );
        }
    }
}
