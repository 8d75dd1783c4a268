use std::ops::{Div, Mul};

use crate::scalar::Scalar;

/// Nonnegative number stored as a zero flag plus a natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScaled<T> {
    zero: bool,
    log: T,
}

impl<T: Scalar> LogScaled<T> {
    pub fn one() -> Self {
        LogScaled { zero: false, log: T::zero() }
    }

    pub fn zero() -> Self {
        LogScaled { zero: true, log: T::neg_infinity() }
    }

    pub fn from_log(log: T) -> Self {
        if log == T::neg_infinity() {
            Self::zero()
        } else {
            LogScaled { zero: false, log }
        }
    }

    /// Panics on negative input; callers only pass sums of nonnegative terms.
    pub fn from_value(v: T) -> Self {
        assert!(!(v < T::zero()), "LogScaled requires a nonnegative value");
        if v == T::zero() {
            Self::zero()
        } else {
            LogScaled { zero: false, log: v.ln() }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn ln(&self) -> T {
        self.log
    }

    pub fn value(&self) -> T {
        if self.zero {
            T::zero()
        } else {
            self.log.exp()
        }
    }

    pub fn powf(&self, e: T) -> Self {
        if self.zero {
            if e == T::zero() {
                Self::one()
            } else {
                Self::zero()
            }
        } else {
            LogScaled { zero: false, log: self.log * e }
        }
    }
}

impl<T: Scalar> Mul for LogScaled<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.zero || rhs.zero {
            Self::zero()
        } else {
            LogScaled { zero: false, log: self.log + rhs.log }
        }
    }
}

impl<T: Scalar> Div for LogScaled<T> {
    type Output = Self;
    /// Division by zero yields +infinity in log space.
    fn div(self, rhs: Self) -> Self {
        if self.zero {
            Self::zero()
        } else if rhs.zero {
            LogScaled { zero: false, log: T::infinity() }
        } else {
            LogScaled { zero: false, log: self.log - rhs.log }
        }
    }
}
