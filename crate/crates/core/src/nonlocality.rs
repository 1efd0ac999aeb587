//! Catalog of nonlocality functions H(y): densities, characteristic
//! functions, and moment sequences.

use num_complex::Complex64;

use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-10;

/// Ordered real moments a_0..a_N.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSequence {
    values: Vec<f64>,
}

impl MomentSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty moment sequence".into()));
        }
        if (values[0] - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidParameter(format!(
                "a_0 must be 1 (probability normalization), got {}",
                values[0]
            )));
        }
        Ok(Self { values })
    }

    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn value(&self, k: usize) -> Option<f64> {
        self.values.get(k).copied()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Smallest eigenvalue of the Hankel matrix [a_{i+j}], 0 <= i,j <= m
    /// with m = floor(N/2).  Genuine densities give a PSD matrix.
    pub fn hankel_min_eigenvalue(&self) -> f64 {
        let m = self.max_order() / 2;
        let dim = m + 1;
        let mut mat = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                mat[i * dim + j] = self.values[i + j];
            }
        }
        symmetric_min_eigenvalue(&mut mat, dim)
    }

    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        self.hankel_min_eigenvalue() >= -tol
    }
}

/// Jacobi eigenvalue sweep for a small dense symmetric matrix.
fn symmetric_min_eigenvalue(a: &mut [f64], n: usize) -> f64 {
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).fold(f64::INFINITY, f64::min)
}

/// A nonlocality function H(y).
///
/// All kinds except `MomentOnly` can evaluate the characteristic function
/// H̃(p) = ∫ e^{ipy} H(y) dy and expose finite moments to any order.
#[derive(Clone, Debug, PartialEq)]
pub enum NonlocalityFunction {
    /// Point mass at the origin.
    Dirac,
    /// Centered Gaussian with standard deviation `eps`.
    Gaussian { eps: f64 },
    /// One-sided triangular density 2(ε−y)/ε² on [0, ε].
    Triangular { eps: f64 },
    /// Density sampled on a strictly increasing grid.
    Tabulated { ys: Vec<f64>, density: Vec<f64> },
    /// Only a moment sequence is known.
    MomentOnly(MomentSequence),
}

impl NonlocalityFunction {
    pub fn gaussian(eps: f64) -> Result<Self> {
        if eps <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gaussian length scale must be positive, got {eps}"
            )));
        }
        Ok(Self::Gaussian { eps })
    }

    pub fn triangular(eps: f64) -> Result<Self> {
        if eps <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "triangular length scale must be positive, got {eps}"
            )));
        }
        Ok(Self::Triangular { eps })
    }

    pub fn tabulated(ys: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if ys.len() != density.len() || ys.len() < 2 {
            return Err(Error::InvalidParameter(
                "tabulated density needs matching grids of length >= 2".into(),
            ));
        }
        if !ys.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "tabulated grid must be strictly increasing".into(),
            ));
        }
        if density.iter().any(|&d| d < 0.0 || !d.is_finite()) {
            return Err(Error::InvalidParameter(
                "tabulated density must be finite and nonnegative".into(),
            ));
        }
        let mass = trapezoid(&ys, &density, |_| 1.0);
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidParameter(format!(
                "tabulated density integrates to {mass}, not 1 (tolerance {NORMALIZATION_TOL})"
            )));
        }
        Ok(Self::Tabulated { ys, density })
    }

    /// Resample an analytic kind onto a uniform grid (normalizing to unit
    /// mass), mainly for grid-convergence checks.
    pub fn tabulate(&self, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let dy = (hi - lo) / (n - 1) as f64;
        let ys: Vec<f64> = (0..n).map(|i| lo + i as f64 * dy).collect();
        let mut density: Vec<f64> = ys.iter().map(|&y| self.density(y)).collect();
        let mass = trapezoid(&ys, &density, |_| 1.0);
        if mass <= 0.0 {
            return Err(Error::InvalidParameter("tabulated mass not positive".into()));
        }
        for d in &mut density {
            *d /= mass;
        }
        Self::tabulated(ys, density)
    }

    /// Pointwise density where one exists; Dirac and MomentOnly have none.
    fn density(&self, y: f64) -> f64 {
        match self {
            Self::Dirac | Self::MomentOnly(_) => 0.0,
            Self::Gaussian { eps } => {
                let z = y / eps;
                (-0.5 * z * z).exp() / (eps * (2.0 * std::f64::consts::PI).sqrt())
            }
            Self::Triangular { eps } => {
                if y < 0.0 || y > *eps {
                    0.0
                } else {
                    2.0 * (eps - y) / (eps * eps)
                }
            }
            Self::Tabulated { ys, density } => interp_linear(ys, density, y),
        }
    }

    /// Moments a_0..a_n.
    pub fn moments(&self, n: usize) -> Result<MomentSequence> {
        let values = match self {
            Self::Dirac => {
                let mut v = vec![0.0; n + 1];
                v[0] = 1.0;
                v
            }
            Self::Gaussian { eps } => {
                let mut v = vec![0.0; n + 1];
                v[0] = 1.0;
                let mut acc = 1.0;
                let mut k = 0usize;
                while 2 * (k + 1) <= n {
                    k += 1;
                    acc *= eps * eps * (2 * k - 1) as f64;
                    v[2 * k] = acc;
                }
                v
            }
            Self::Triangular { eps } => (0..=n)
                .map(|k| 2.0 * eps.powi(k as i32) / ((k + 1) as f64 * (k + 2) as f64))
                .collect(),
            Self::Tabulated { ys, density } => (0..=n)
                .map(|k| trapezoid(ys, density, |y| y.powi(k as i32)))
                .collect(),
            Self::MomentOnly(seq) => {
                if n > seq.max_order() {
                    return Err(Error::MomentsUnavailable {
                        stored: seq.max_order(),
                        requested: n,
                    });
                }
                seq.values()[..=n].to_vec()
            }
        };
        MomentSequence::new(values)
    }

    /// Characteristic function H̃(p) = ∫ e^{ipy} H(y) dy.
    pub fn char_fn(&self, p: f64) -> Result<Complex64> {
        match self {
            Self::Dirac => Ok(Complex64::new(1.0, 0.0)),
            Self::Gaussian { eps } => Ok(Complex64::new((-0.5 * eps * eps * p * p).exp(), 0.0)),
            Self::Triangular { eps } => Ok(triangular_char_fn(*eps, p)),
            Self::Tabulated { ys, density } => {
                // trapezoid quadrature of e^{ipy}·ρ(y)
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..ys.len() - 1 {
                    let h = ys[i + 1] - ys[i];
                    let f0 = Complex64::from_polar(density[i], p * ys[i]);
                    let f1 = Complex64::from_polar(density[i + 1], p * ys[i + 1]);
                    acc += 0.5 * h * (f0 + f1);
                }
                Ok(acc)
            }
            Self::MomentOnly(_) => Err(Error::CharFnUnavailable),
        }
    }

    /// Convolution of the distribution with itself.
    pub fn self_convolve(&self) -> Result<Self> {
        match self {
            Self::Dirac => Ok(Self::Dirac),
            Self::Gaussian { eps } => Ok(Self::Gaussian {
                eps: eps * std::f64::consts::SQRT_2,
            }),
            Self::Triangular { eps } => {
                let tab = self.tabulate(0.0, *eps, 4097)?;
                tab.self_convolve()
            }
            Self::Tabulated { ys, density } => {
                let n = ys.len();
                let dy = ys[1] - ys[0];
                if !ys.windows(2).all(|w| (w[1] - w[0] - dy).abs() < 1e-9 * dy) {
                    return Err(Error::InvalidParameter(
                        "self-convolution needs a uniform tabulation grid".into(),
                    ));
                }
                let mut conv = vec![0.0; 2 * n - 1];
                for (k, c) in conv.iter_mut().enumerate() {
                    let jlo = k.saturating_sub(n - 1);
                    let jhi = k.min(n - 1);
                    let mut acc = 0.0;
                    for j in jlo..=jhi {
                        let w = if j == jlo || j == jhi { 0.5 } else { 1.0 };
                        acc += w * density[j] * density[k - j];
                    }
                    *c = acc * dy;
                }
                let lo = 2.0 * ys[0];
                let cys: Vec<f64> = (0..conv.len()).map(|i| lo + i as f64 * dy).collect();
                let mass = trapezoid(&cys, &conv, |_| 1.0);
                for c in &mut conv {
                    *c /= mass;
                }
                Self::tabulated(cys, conv)
            }
            Self::MomentOnly(_) => Err(Error::CharFnUnavailable),
        }
    }
}

/// Closed form 2(1 + ipε − e^{ipε})/(ε²p²), with a series fallback near p = 0
/// where the closed form loses digits to cancellation.
fn triangular_char_fn(eps: f64, p: f64) -> Complex64 {
    let u = p * eps;
    // The closed form computes 1 + iu − e^{iu} ≈ −u²/2 by cancellation, so
    // for small |u| the moment series Σ_k a_k (ip)^k/k!, a_k =
    // 2ε^k/((k+1)(k+2)), is the well-conditioned branch; it converges to
    // machine precision well within |u| < 0.7.
    if u.abs() < 0.7 {
        let ip = Complex64::new(0.0, p);
        let mut term = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..=40u32 {
            if k > 0 {
                term *= ip * eps / k as f64;
            }
            let ak = 2.0 / ((k + 1) as f64 * (k + 2) as f64);
            acc += ak * term;
            if term.norm() < 1e-18 {
                break;
            }
        }
        acc
    } else {
        let e = Complex64::new(0.0, u).exp();
        (Complex64::new(1.0, u) - e) * 2.0 / (u * u)
    }
}

fn interp_linear(xs: &[f64], vs: &[f64], x: f64) -> f64 {
    if x <= xs[0] || x >= xs[xs.len() - 1] {
        return 0.0;
    }
    let idx = xs.partition_point(|&v| v <= x) - 1;
    let t = (x - xs[idx]) / (xs[idx + 1] - xs[idx]);
    vs[idx] * (1.0 - t) + vs[idx + 1] * t
}

fn trapezoid(xs: &[f64], vs: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..xs.len() - 1 {
        let h = xs[i + 1] - xs[i];
        acc += 0.5 * h * (f(xs[i]) * vs[i] + f(xs[i + 1]) * vs[i + 1]);
    }
    acc
}

/// The nonlocality whose moments hit the quantum Fokker-Planck target
/// μ_H^k = 2ε^k/((k+1)(k+2)) exactly: the triangular density on [0, ε].
pub fn qfp_matching_nonlocality(eps: f64) -> Result<NonlocalityFunction> {
    NonlocalityFunction::triangular(eps)
}
