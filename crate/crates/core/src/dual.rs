//! Forward-mode dual numbers: a value together with its derivative in β.
//!
//! Every partition-function recursion runs over `Dual<T>` so that the
//! derivative of log Z comes out of the same pass as log Z itself.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Self { re, eps }
    }

    pub fn constant(re: T) -> Self {
        Self { re, eps: T::zero() }
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    /// Multiplies value and derivative by a constant.
    pub fn scale(self, c: T) -> Self {
        Self { re: self.re * c, eps: self.eps * c }
    }

    /// d/dβ log of this quantity.
    pub fn log_derivative(self) -> T {
        self.eps / self.re
    }

    pub fn abs_re(self) -> T {
        self.re.abs()
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self { re: self.re + rhs.re, eps: self.eps + rhs.eps }
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self { re: self.re - rhs.re, eps: self.eps - rhs.eps }
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self { re: self.re * rhs.re, eps: self.eps * rhs.re + self.re * rhs.eps }
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let re = self.re / rhs.re;
        Self { re, eps: (self.eps - re * rhs.eps) / rhs.re }
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { re: -self.re, eps: -self.eps }
    }
}

impl<T: Scalar> AddAssign for Dual<T> {
    fn add_assign(&mut self, rhs: Self) {
        self.re += rhs.re;
        self.eps += rhs.eps;
    }
}

impl<T: Scalar> SubAssign for Dual<T> {
    fn sub_assign(&mut self, rhs: Self) {
        self.re -= rhs.re;
        self.eps -= rhs.eps;
    }
}

impl<T: Scalar> MulAssign for Dual<T> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<T: Scalar> std::iter::Sum for Dual<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |a, b| a + b)
    }
}

/// Boltzmann factor e^{-βω} of one edge together with its β-derivative.
/// An infinite weight contributes exactly zero.
pub fn edge_factor<T: Scalar>(omega: T, beta: T) -> Dual<T> {
    if omega.is_infinite() && omega > T::zero() {
        return Dual::zero();
    }
    let v = (-beta * omega).exp();
    Dual::new(v, -omega * v)
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), carry: T::zero() }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

impl<T: Scalar> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self::new()
    }
}
