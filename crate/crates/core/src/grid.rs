//! Uniform origin-centered grid with its implied frequency grid.

use crate::error::{Error, Result};

/// Spatial grid of `n` points covering [−L/2, L/2) with L = n·Δx.
///
/// `n` is a power of two; frequency spacing is 2π/L with standard FFT
/// ordering (index j > n/2 meaning j − n).
#[derive(Clone, Debug, PartialEq)]
pub struct FourierGrid {
    n: usize,
    dx: f64,
}

impl FourierGrid {
    pub fn new(n: usize, dx: f64) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "grid size must be a power of two >= 2, got {n}"
            )));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid spacing must be positive and finite, got {dx}"
            )));
        }
        Ok(Self { n, dx })
    }

    /// n points spanning a total length `len`.
    pub fn with_length(n: usize, len: f64) -> Result<Self> {
        Self::new(n, len / n as f64)
    }

    /// Default desk-scale grid: n = 4096, L = 20·max(σ√τ, ε)·1.5.
    pub fn default_for(sigma: f64, tau: f64, eps: f64) -> Result<Self> {
        let scale = (sigma * tau.sqrt()).max(eps.abs());
        Self::with_length(4096, 20.0 * scale * 1.5)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> f64 {
        self.n as f64 * self.dx
    }

    /// x_i = (i − n/2)·Δx.
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.dx
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// FFT-ordered angular frequency for index j.
    pub fn freq(&self, j: usize) -> f64 {
        let signed = if j <= self.n / 2 {
            j as isize
        } else {
            j as isize - self.n as isize
        };
        2.0 * std::f64::consts::PI * signed as f64 / self.len()
    }
}
