use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_traits::{Float, FromPrimitive, Num, NumAssign};

/// Coefficient ring for the tensor algebra.
///
/// Anything with field operations works: `f32`, `f64`, exact rationals.
pub trait Scalar:
    Num + NumAssign + Neg<Output = Self> + FromPrimitive + Copy + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// Embed a small integer.
    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("integer not representable")
    }

    /// `1 / n!`
    fn inv_factorial(n: usize) -> Self {
        let mut f = Self::one();
        for k in 2..=n {
            f /= Self::from_int(k as i64);
        }
        f
    }
}

impl<T> Scalar for T where
    T: Num + NumAssign + Neg<Output = T> + FromPrimitive + Copy + PartialOrd + Debug + Display + Send + Sync + 'static
{
}

/// Scalars with transcendental functions, needed for exponentials and OU factors.
pub trait Real: Scalar + Float {}

impl<T: Scalar + Float> Real for T {}
