//! Truncated formal power series with exact arithmetic.
//!
//! The coefficient type is generic: `BigRational` gives exact results for
//! rational inputs, `f64` covers everything else.  All operations truncate
//! consistently at the series order.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{FromPrimitive, One, Zero};

use crate::error::{Error, Result};

/// Scalars usable as series coefficients.
pub trait SeriesScalar:
    Clone
    + PartialEq
    + Zero
    + One
    + FromPrimitive
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> SeriesScalar for T where
    T: Clone
        + PartialEq
        + Zero
        + One
        + FromPrimitive
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
        + Neg<Output = T>
{
}

/// Power series truncated at a fixed order: coefficients c_0..c_N.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalSeries<T> {
    coeffs: Vec<T>,
}

impl<T: SeriesScalar> FormalSeries<T> {
    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![T::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = T::one();
        s
    }

    /// Build from coefficients c_0..c_N; the order is `coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least the constant term");
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, i: usize, v: T) {
        assert!(i < self.coeffs.len());
        self.coeffs[i] = v;
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let coeffs = (0..=order)
            .map(|i| self.coeff(i) + other.coeff(i))
            .collect();
        Self { coeffs }
    }

    /// Cauchy product truncated at the smaller order.
    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut coeffs = vec![T::zero(); order + 1];
        for i in 0..=order {
            let ci = self.coeff(i);
            if ci.is_zero() {
                continue;
            }
            for j in 0..=(order - i) {
                coeffs[i + j] = coeffs[i + j].clone() + ci.clone() * other.coeff(j);
            }
        }
        Self { coeffs }
    }

    pub fn scale(&self, c: &T) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|v| v.clone() * c.clone()).collect(),
        }
    }

    /// exp of a series with zero constant term, via the ODE relation
    /// g' = g·f', i.e. n·g_n = Σ_{k=1..n} k·f_k·g_{n−k}.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeff(0).is_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        let order = self.order();
        let mut g = vec![T::zero(); order + 1];
        g[0] = T::one();
        for n in 1..=order {
            let mut acc = T::zero();
            for k in 1..=n {
                let kf = T::from_usize(k).expect("small integer fits scalar");
                acc = acc + kf * self.coeff(k) * g[n - k].clone();
            }
            let nf = T::from_usize(n).expect("small integer fits scalar");
            g[n] = acc / nf;
        }
        Ok(Self { coeffs: g })
    }
}
