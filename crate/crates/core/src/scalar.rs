//! Scalar abstractions shared by the exact and floating-point code paths.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, Signed};

/// Ring element usable as a matrix entry.
pub trait Scalar: Clone + Debug + PartialEq + Num + Signed + FromPrimitive {
    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("small integer is representable")
    }
}

impl<T> Scalar for T where T: Clone + Debug + PartialEq + Num + Signed + FromPrimitive {}

/// Marker for scalars with exact arithmetic (integral domains and fields
/// whose `/` is exact whenever the quotient exists). Rank is only defined
/// for these; floating-point rank needs a tolerance and lives elsewhere.
pub trait Exact: Scalar {}

impl Exact for i32 {}
impl Exact for i64 {}
impl Exact for i128 {}
impl Exact for num_bigint::BigInt {}
impl Exact for num_rational::Rational64 {}
impl Exact for num_rational::BigRational {}
