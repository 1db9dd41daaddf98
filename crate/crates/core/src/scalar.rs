use std::ops::{Add, Div, Mul, Neg, Sub};

/// Number type a Finsler norm is written against. Implemented for plain
/// `f64` (cheap evaluation, finite differences) and for [`crate::Jet`]
/// (exact truncated derivatives).
pub trait Scalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// A constant of the same kind as `self`.
    fn lift(&self, value: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(&self) -> Self;
    fn powf(&self, p: f64) -> Self;
    fn recip(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }
}

impl Scalar for f64 {
    fn lift(&self, value: f64) -> Self {
        value
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn powf(&self, p: f64) -> Self {
        f64::powf(*self, p)
    }
    fn recip(&self) -> Self {
        f64::recip(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
}

/// `sum_i a[i] * b[i]` with a generic scalar.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = a[0].lift(0.0);
    for (p, q) in a.iter().zip(b) {
        acc = acc + p.clone() * q.clone();
    }
    acc
}
