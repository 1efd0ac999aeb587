//! Fundamental solution of the Wick-rotated nonlocal equation and two
//! solvers for it: spectral convolution and a truncated Kramers-Moyal
//! finite-difference scheme.
//!
//! The frequency symbol is exp(−σ²p²τ·H̃(p)/2); with a Dirac nonlocality it
//! reduces to the heat kernel.  Kernels are renormalized to unit mass after
//! inversion, so no transform prefactor convention enters the results.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grid::FourierGrid;
use crate::ito::NumericPde;
use crate::nonlocality::NonlocalityFunction;

const BOUNDARY_MASS_TOL: f64 = 1e-6;
const IMAG_RESIDUE_TOL: f64 = 1e-10;
const CFL_SAFETY: f64 = 0.4;
const INSTABILITY_GROWTH: f64 = 10.0;

/// The kernel K^H_τ sampled on a grid, with the parameters that built it.
#[derive(Clone, Debug)]
pub struct KernelSample {
    pub grid: FourierGrid,
    pub values: Vec<f64>,
    pub sigma: f64,
    pub tau: f64,
    pub nonlocality: NonlocalityFunction,
}

/// A solution (or terminal condition) on a grid at Wick time τ.
#[derive(Clone, Debug)]
pub struct SolutionSlice {
    pub grid: FourierGrid,
    pub values: Vec<f64>,
    pub tau: f64,
}

impl SolutionSlice {
    pub fn new(grid: FourierGrid, values: Vec<f64>, tau: f64) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} values on a {}-point grid",
                values.len(),
                grid.n()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "solution values must be finite".into(),
            ));
        }
        Ok(Self { grid, values, tau })
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Frequency symbol exp(−σ²p²τ·H̃(p)/2) on the grid's FFT-ordered frequencies.
fn frequency_symbol(
    h: &NonlocalityFunction,
    sigma: f64,
    tau: f64,
    grid: &FourierGrid,
) -> Result<Vec<Complex64>> {
    let n = grid.n();
    let mut symbol = Vec::with_capacity(n);
    for j in 0..n {
        let p = grid.freq(j);
        let ph = h.char_fn(p)?;
        let exponent = -0.5 * sigma * sigma * p * p * tau;
        symbol.push((exponent * ph).exp());
    }
    Ok(symbol)
}

/// Build the fundamental solution by Fourier inversion and renormalize it to
/// unit mass on the grid.
pub fn build_kernel(
    h: &NonlocalityFunction,
    sigma: f64,
    tau: f64,
    grid: &FourierGrid,
) -> Result<KernelSample> {
    if sigma <= 0.0 || tau <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma and tau must be positive, got sigma={sigma}, tau={tau}"
        )));
    }
    let n = grid.n();
    let symbol = frequency_symbol(h, sigma, tau, grid)?;

    // K(x_i) = (1/L)·Σ_j (−1)^j C(p_j) e^{−2πi j i / n}: the alternating sign
    // re-centers the output so index i sits at x_i = (i − n/2)Δx.
    let mut buf: Vec<Complex64> = symbol
        .iter()
        .enumerate()
        .map(|(j, c)| if j % 2 == 0 { *c } else { -*c })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let inv_len = 1.0 / grid.len();
    let peak = buf.iter().fold(0.0f64, |m, v| m.max(v.re.abs()));
    let max_imag = buf.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
    if max_imag > IMAG_RESIDUE_TOL * peak.max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidParameter(format!(
            "imaginary residue {:.3e} of peak after inversion",
            max_imag / peak
        )));
    }
    let mut values: Vec<f64> = buf.iter().map(|v| v.re * inv_len).collect();

    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let boundary = values[0].abs().max(values[n - 1].abs());
    if boundary > BOUNDARY_MASS_TOL * peak {
        return Err(Error::BoundaryMass {
            fraction: boundary / peak,
            threshold: BOUNDARY_MASS_TOL,
        });
    }

    let mass: f64 = values.iter().sum::<f64>() * grid.dx();
    for v in &mut values {
        *v /= mass;
    }

    Ok(KernelSample {
        grid: grid.clone(),
        values,
        sigma,
        tau,
        nonlocality: h.clone(),
    })
}

impl KernelSample {
    /// Trapezoid quadrature of x^k·K(x).
    pub fn moment(&self, k: usize) -> f64 {
        self.moment_checked(k).0
    }

    /// Moment plus a flag set when the boundary cells contribute more than
    /// 1e−6 of the total (the domain is then too small for this order).
    pub fn moment_checked(&self, k: usize) -> (f64, bool) {
        let n = self.grid.n();
        let dx = self.grid.dx();
        let mut acc = 0.0;
        let mut boundary = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            let term = w * self.grid.x(i).powi(k as i32) * v * dx;
            acc += term;
            if i < 2 || i >= n - 2 {
                boundary += term.abs();
            }
        }
        (acc, boundary > 1e-6 * acc.abs().max(f64::MIN_POSITIVE))
    }

    /// Excess kurtosis μ4/μ2² − 3 about the kernel mean.
    pub fn excess_kurtosis(&self) -> f64 {
        let mean = self.moment(1);
        let n = self.grid.n();
        let dx = self.grid.dx();
        let central = |k: i32| -> f64 {
            self.values
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                    w * (self.grid.x(i) - mean).powi(k) * v * dx
                })
                .sum()
        };
        let m2 = central(2);
        central(4) / (m2 * m2) - 3.0
    }

    /// Total mass in negative lobes, as a fraction of total |mass|.
    pub fn negative_mass_fraction(&self) -> f64 {
        let dx = self.grid.dx();
        let neg: f64 = self.values.iter().filter(|v| **v < 0.0).map(|v| -v * dx).sum();
        let total: f64 = self.values.iter().map(|v| v.abs() * dx).sum();
        neg / total
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// JSON sidecar describing the sample.
    pub fn sidecar_json(&self) -> Value {
        json!({
            "sigma": self.sigma,
            "tau": self.tau,
            "H": nonlocality_json(&self.nonlocality),
            "n": self.grid.n(),
            "L": self.grid.len(),
        })
    }
}

pub fn nonlocality_json(h: &NonlocalityFunction) -> Value {
    match h {
        NonlocalityFunction::Dirac => json!({ "kind": "dirac" }),
        NonlocalityFunction::Gaussian { eps } => json!({ "kind": "gaussian", "eps": eps }),
        NonlocalityFunction::Triangular { eps } => json!({ "kind": "triangular", "eps": eps }),
        NonlocalityFunction::Tabulated { ys, .. } => {
            json!({ "kind": "tabulated", "points": ys.len() })
        }
        NonlocalityFunction::MomentOnly(seq) => {
            json!({ "kind": "moment_only", "order": seq.max_order() })
        }
    }
}

/// Evolve a terminal condition by spectral convolution with K^H_τ.
///
/// Exact in the frequency domain, so the semigroup property holds to grid
/// accuracy.  Boundary decay is validated by building the kernel first.
pub fn propagate(
    u0: &SolutionSlice,
    h: &NonlocalityFunction,
    sigma: f64,
    tau: f64,
) -> Result<SolutionSlice> {
    // Runs the boundary-mass and residue checks for these parameters.
    build_kernel(h, sigma, tau, &u0.grid)?;

    let n = u0.grid.n();
    let symbol = frequency_symbol(h, sigma, tau, &u0.grid)?;
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex64> = u0.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    // The forward DFT pairs index j with frequency −p_j under the e^{+ipx}
    // transform convention, so the multiplier is C(−p_j) = conj C(p_j).
    for (b, s) in buf.iter_mut().zip(&symbol) {
        *b *= s.conj();
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let values = buf.iter().map(|v| v.re * scale).collect();
    SolutionSlice::new(u0.grid.clone(), values, u0.tau + tau)
}

// --- Kramers-Moyal finite-difference solver --------------------------------

/// Fornberg weights for the m-th derivative at evaluation point `z` from
/// nodes `x` (all in grid units).
fn fd_weights(z: f64, x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0f64; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m]).collect()
}

/// Stencil set for one derivative order: wide central in the interior,
/// minimal central where the wide one no longer fits, one-sided in the
/// outermost band.  Boundary stencils stay minimal-width: wide one-sided
/// differencing is explosively unstable under explicit stepping.
struct DerivativeStencil {
    /// Interior (wide) halfwidth.
    half: usize,
    /// Minimal halfwidth; also the width of the one-sided band.
    bhalf: usize,
    central: Vec<f64>,
    central_min: Vec<f64>,
    /// `left[i]` applies at cell i (< bhalf), over absolute cells 0..=2·bhalf.
    left: Vec<Vec<f64>>,
    /// `right[r]` applies at cell n−1−r (r < bhalf), over the last 2·bhalf+1 cells.
    right: Vec<Vec<f64>>,
}

impl DerivativeStencil {
    fn new(order: usize, dx: f64) -> Self {
        // Width policy, driven by von Neumann stability of the truncated
        // expansion (which is not parabolic past order 2):
        // - even orders >= 4 use the minimal central stencil, whose symbol
        //   is the matching power of the [1, -2, 1] symbol; together with a
        //   2nd-derivative symbol that dominates it up to the grid Nyquist
        //   frequency this keeps the real part of the step operator
        //   dissipative.  Wider even stencils push the discrete spectrum
        //   past the crossover where the order-4 term overtakes diffusion
        //   and the scheme blows up from roundoff.
        // - order 2 and the odd orders take extra width (~6th-order
        //   accuracy): the odd central symbols are purely imaginary
        //   (dispersive) and a sharper 2nd-derivative symbol only adds
        //   dissipation, so accuracy is free there.
        let bhalf = (order + 1) / 2;
        let half = if order <= 3 || order % 2 == 1 {
            bhalf + 2
        } else {
            bhalf
        };
        let scale = dx.powi(order as i32).recip();
        let centered = |h: usize| -> Vec<f64> {
            let nodes: Vec<f64> = (0..2 * h + 1).map(|i| i as f64 - h as f64).collect();
            fd_weights(0.0, &nodes, order)
                .into_iter()
                .map(|w| w * scale)
                .collect()
        };
        let central = centered(half);
        let central_min = centered(bhalf);
        let one_sided: Vec<f64> = (0..2 * bhalf + 1).map(|i| i as f64).collect();
        let left: Vec<Vec<f64>> = (0..bhalf)
            .map(|i| {
                fd_weights(i as f64, &one_sided, order)
                    .into_iter()
                    .map(|w| w * scale)
                    .collect()
            })
            .collect();
        let right = (0..bhalf)
            .map(|r| {
                // mirror of the left stencil at distance r from the end
                fd_weights((2 * bhalf - r) as f64, &one_sided, order)
                    .into_iter()
                    .map(|w| w * scale)
                    .collect()
            })
            .collect();
        Self {
            half,
            bhalf,
            central,
            central_min,
            left,
            right,
        }
    }

    fn apply(&self, u: &[f64], out: &mut [f64], coeff: f64) {
        let n = u.len();
        let (half, bhalf) = (self.half, self.bhalf);
        for i in half..n - half {
            let mut acc = 0.0;
            for (k, w) in self.central.iter().enumerate() {
                acc += w * u[i - half + k];
            }
            out[i] += coeff * acc;
        }
        // narrow central band where the wide stencil would overhang
        for i in (bhalf..half).chain(n - half..n - bhalf) {
            let mut acc = 0.0;
            for (k, w) in self.central_min.iter().enumerate() {
                acc += w * u[i - bhalf + k];
            }
            out[i] += coeff * acc;
        }
        let width = 2 * bhalf + 1;
        for i in 0..bhalf.min(n) {
            let mut acc = 0.0;
            for (k, w) in self.left[i].iter().enumerate() {
                acc += w * u[k];
            }
            out[i] += coeff * acc;
        }
        for r in 0..bhalf.min(n) {
            let mut acc = 0.0;
            for (k, w) in self.right[r].iter().enumerate() {
                acc += w * u[n - width + k];
            }
            out[n - 1 - r] += coeff * acc;
        }
    }
}

/// Forward (Fokker-Planck sign) truncation for an arbitrary nonlocality:
/// coefficient σ²/2·(−1)^j·a_j/j! at derivative order j+2, j = 0..N−2,
/// with a_j the moments of H.  For the translation model this reproduces
/// σ²(−ε)^{k−2}/k! exactly.
pub fn kramers_moyal_numeric(
    h: &NonlocalityFunction,
    sigma: f64,
    order: usize,
) -> Result<NumericPde> {
    if order < 2 {
        return Err(Error::OrderTooSmall(order));
    }
    let a = h.moments(order - 2)?;
    let mut coeffs = Vec::with_capacity(order - 1);
    let mut factorial = 1.0f64;
    for j in 0..=order - 2 {
        if j > 0 {
            factorial *= j as f64;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        coeffs.push(0.5 * sigma * sigma * sign * a.value(j).unwrap() / factorial);
    }
    // CFL length scale of the jumps: exact ε where the kind carries one,
    // otherwise inferred from the second moment.
    let eps = match h {
        NonlocalityFunction::Dirac => 0.0,
        NonlocalityFunction::Gaussian { eps } | NonlocalityFunction::Triangular { eps } => *eps,
        _ => 3.0 * a.value(2.min(order - 2)).unwrap_or(0.0).abs().sqrt(),
    };
    Ok(NumericPde {
        sigma,
        eps,
        coeffs,
    })
}

/// Stable explicit step size: Δτ = 0.4·Δx²/σ², scaled down by
/// (1 + |ε|/Δx)^{N−2} for the higher-order terms.
pub fn stable_time_step(pde: &NumericPde, dx: f64) -> f64 {
    let n = pde.order();
    let base = CFL_SAFETY * dx * dx / (pde.sigma * pde.sigma);
    base / (1.0 + pde.eps.abs() / dx).powi(n as i32 - 2)
}

/// Explicit time stepping of ∂u/∂τ = Σ_{k=2}^{N} b_k ∂^k u with central
/// stencils in the interior and one-sided stencils in a boundary band.
///
/// Aborts with an instability error when the sup-norm grows more than 10×
/// in a single step.
pub fn solve_kramers_moyal(
    u0: &SolutionSlice,
    pde: &NumericPde,
    tau: f64,
    n_steps: Option<usize>,
) -> Result<SolutionSlice> {
    if pde.order() > 8 {
        return Err(Error::InvalidParameter(format!(
            "Kramers-Moyal truncation order {} exceeds 8",
            pde.order()
        )));
    }
    if tau <= 0.0 {
        return Err(Error::InvalidParameter("tau must be positive".into()));
    }
    let dx = u0.grid.dx();
    let steps = match n_steps {
        Some(s) if s > 0 => s,
        Some(_) => return Err(Error::InvalidParameter("n_steps must be positive".into())),
        None => (tau / stable_time_step(pde, dx)).ceil() as usize,
    };
    let dt = tau / steps as f64;

    let stencils: Vec<DerivativeStencil> = (2..=pde.order())
        .map(|k| DerivativeStencil::new(k, dx))
        .collect();

    let mut u = u0.values.clone();
    let mut rhs = vec![0.0f64; u.len()];
    let initial_sup = sup(&u);
    let mut prev_sup = initial_sup;
    for _ in 0..steps {
        rhs.iter_mut().for_each(|v| *v = 0.0);
        for (stencil, &b) in stencils.iter().zip(&pde.coeffs) {
            if b != 0.0 {
                stencil.apply(&u, &mut rhs, b);
            }
        }
        for (ui, ri) in u.iter_mut().zip(&rhs) {
            *ui += dt * ri;
        }
        let s = sup(&u);
        // catch both one-step explosions and slow exponential creep (the
        // truncated expansion is not parabolic past order 2, so high modes
        // can grow from roundoff)
        if prev_sup > 0.0 && s > INSTABILITY_GROWTH * prev_sup {
            return Err(Error::Unstable {
                growth: s / prev_sup,
            });
        }
        if initial_sup > 0.0 && s > INSTABILITY_GROWTH * initial_sup {
            return Err(Error::Unstable {
                growth: s / initial_sup,
            });
        }
        prev_sup = s;
    }
    SolutionSlice::new(u0.grid.clone(), u, u0.tau + tau)
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Analytic centered Gaussian density, used as the Dirac-H reduction target.
pub fn gaussian_density(x: f64, variance: f64) -> f64 {
    (-0.5 * x * x / variance).exp() / (2.0 * std::f64::consts::PI * variance).sqrt()
}
