//! Noncommutative stochastic calculus for nonlocal diffusion.
//!
//! The library studies a drift-free quantum stochastic increment built from
//! creation, annihilation, and number differentials, and everything that
//! flows from its multiplication table:
//!
//! - [`ito`] — the differential basis, exact rational coefficient
//!   polynomials, powers of the base increment, and the backward /
//!   Fokker-Planck expansions they generate;
//! - [`series`] — truncated formal power series over any suitable scalar
//!   (exact rationals or floats), with composition-free `exp`;
//! - [`nonlocality`] — jump-size distributions H(y): point mass, Gaussian,
//!   triangular, tabulated, or moment-only data, with characteristic
//!   functions and moment sequences;
//! - [`moments`] — kernel moments two independent ways (series expansion of
//!   the moment generating function, and a sum over partitions without
//!   singleton parts) plus quadrature reconciliation;
//! - [`grid`] / [`kernel`] — Fourier grids, the spectral propagator
//!   exp(−σ²p²τ·H̃(p)/2), and an explicit finite-difference solver for the
//!   truncated Kramers-Moyal hierarchy;
//! - [`operator`] — the grid algebra of pairs (symbol, displacement kernel
//!   field) with composition, involution, and norm estimation;
//! - [`gauge`] — the non-quadratic Hamiltonian, its Legendre transform, and
//!   the quantitative failure of the classical gauge/drift equivalence;
//! - [`io`] — CSV and atomic-file helpers.

pub mod error;
pub mod gauge;
pub mod grid;
pub mod io;
pub mod ito;
pub mod kernel;
pub mod moments;
pub mod nonlocality;
pub mod operator;
pub mod series;

pub use error::{Error, Result};
pub use gauge::{GaugeConfig, GaugePotential, PhasePoint};
pub use grid::FourierGrid;
pub use ito::{BackwardPDE, CoeffPoly, DifferentialBasis, IncrementCombination, SignConvention};
pub use kernel::{KernelSample, SolutionSlice};
pub use moments::MomentRow;
pub use nonlocality::{MomentSequence, NonlocalityFunction};
pub use operator::{NonlocalOperator, OperatorFixture, StateVector};
pub use series::FormalSeries;

use num_rational::BigRational;

/// Formal series with exact rational coefficients; the default for symbolic
/// derivations.
pub type RationalSeries = FormalSeries<BigRational>;

/// Formal series with double-precision coefficients; the default for
/// numeric work.
pub type RealSeries = FormalSeries<f64>;
