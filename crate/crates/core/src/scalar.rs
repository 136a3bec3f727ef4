//! Integer scalars for exact affine arithmetic.

use std::fmt::{Debug, Display};

use num_traits::Signed;

/// Exact signed integers; `i64` and arbitrary-precision integers both qualify.
pub trait Scalar: Signed + Clone + Debug + Display + PartialEq + From<i8> + Send + Sync {
    fn two() -> Self {
        Self::from(2)
    }

    fn is_even(&self) -> bool {
        (self.clone() % Self::two()).is_zero()
    }
}

impl<T> Scalar for T where T: Signed + Clone + Debug + Display + PartialEq + From<i8> + Send + Sync {}
