//! Numeric abstraction shared by the field and kernel machinery.

use std::fmt::Debug;

use num_traits::{FromPrimitive, NumAssign, ToPrimitive};

/// Scalar type the grid arithmetic is generic over.
///
/// Implemented for `f64`, `f32` and exact types such as `Ratio<i64>`:
/// the field computations only need ring operations, ordering and
/// small-integer constants.
pub trait Scalar:
    Copy + Debug + PartialOrd + NumAssign + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn abs_diff(self, other: Self) -> Self {
        if self >= other {
            self - other
        } else {
            other - self
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl<T> Scalar for T where
    T: Copy + Debug + PartialOrd + NumAssign + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}
