//! Coefficient fields for sector classes: exact rationals for structural
//! identities, complex doubles for series evaluation.

use num_complex::Complex64;
use num_traits::ToPrimitive;
use num_traits::{One, Zero};
use std::ops::{Add, Mul, Neg, Sub};

use crate::arith::Q;

pub trait Scalar:
    Clone
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    fn from_q(x: &Q) -> Self;
}

impl Scalar for Q {
    fn from_q(x: &Q) -> Self {
        x.clone()
    }
}

impl Scalar for Complex64 {
    fn from_q(x: &Q) -> Self {
        Complex64::new(x.to_f64().expect("finite rational"), 0.0)
    }
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().expect("finite rational")
}
