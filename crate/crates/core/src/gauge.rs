//! Non-quadratic Hamiltonian mechanics of the translation model and the
//! breakdown of the gauge/drift equivalence away from the diffusive limit.
//!
//! The Hamiltonian H(p) = (σ²/ε²)(e^{εp} − εp − 1) reduces to σ²p²/2 at
//! ε = 0.  A gauge potential v(x) shifts the canonical momentum; classically
//! the transformed Lagrangian is a pure velocity translation,
//! L′(ẋ, x) = L(ẋ + σ²v(x)), and `translation_violation` measures by how
//! much that identity fails when ε > 0.

use serde_json::json;

use crate::error::{Error, Result};

/// A real potential v(x) given by samples with natural cubic spline
/// interpolation, or an exact closed form.
#[derive(Clone)]
pub enum GaugePotential {
    Zero,
    /// Strictly increasing abscissae with spline second derivatives
    /// precomputed; evaluation clamps to the sampled range.
    Spline {
        xs: Vec<f64>,
        vs: Vec<f64>,
        second: Vec<f64>,
    },
}

impl std::fmt::Debug for GaugePotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Zero => write!(f, "GaugePotential::Zero"),
            Self::Spline { xs, .. } => write!(f, "GaugePotential::Spline({} samples)", xs.len()),
        }
    }
}

impl GaugePotential {
    pub fn zero() -> Self {
        Self::Zero
    }

    /// Spline through (xs[i], vs[i]); xs must be strictly increasing and all
    /// values finite.
    pub fn from_samples(xs: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        if xs.len() != vs.len() || xs.len() < 2 {
            return Err(Error::InvalidParameter(
                "potential needs >= 2 samples with matching lengths".into(),
            ));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "potential abscissae must be strictly increasing".into(),
            ));
        }
        if xs.iter().chain(vs.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "potential samples must be finite".into(),
            ));
        }
        let second = natural_spline_second_derivatives(&xs, &vs);
        Ok(Self::Spline { xs, vs, second })
    }

    /// Sample a closed form on `n` equispaced points over [lo, hi].
    pub fn from_fn(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi > lo) || n < 2 {
            return Err(Error::InvalidParameter(
                "potential range must be nonempty with >= 2 samples".into(),
            ));
        }
        let xs: Vec<f64> = (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect();
        let vs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        Self::from_samples(xs, vs)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Spline { xs, vs, second } => {
                let n = xs.len();
                if x <= xs[0] {
                    return vs[0];
                }
                if x >= xs[n - 1] {
                    return vs[n - 1];
                }
                let k = match xs.binary_search_by(|a| a.partial_cmp(&x).unwrap()) {
                    Ok(i) => return vs[i],
                    Err(i) => i - 1,
                };
                let h = xs[k + 1] - xs[k];
                let a = (xs[k + 1] - x) / h;
                let b = (x - xs[k]) / h;
                a * vs[k]
                    + b * vs[k + 1]
                    + ((a * a * a - a) * second[k] + (b * b * b - b) * second[k + 1]) * h * h / 6.0
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }
}

/// Tridiagonal solve for natural spline curvatures (zero curvature at the
/// endpoints).
fn natural_spline_second_derivatives(xs: &[f64], vs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut second = vec![0.0; n];
    if n < 3 {
        return second;
    }
    let mut u = vec![0.0; n - 1];
    for i in 1..n - 1 {
        let sig = (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1]);
        let p = sig * second[i - 1] + 2.0;
        second[i] = (sig - 1.0) / p;
        let slope_hi = (vs[i + 1] - vs[i]) / (xs[i + 1] - xs[i]);
        let slope_lo = (vs[i] - vs[i - 1]) / (xs[i] - xs[i - 1]);
        u[i] = (6.0 * (slope_hi - slope_lo) / (xs[i + 1] - xs[i - 1]) - sig * u[i - 1]) / p;
    }
    second[n - 1] = 0.0;
    for i in (0..n - 1).rev() {
        second[i] = second[i] * second[i + 1] + u[i];
    }
    second
}

/// Model parameters plus the gauge potential.
#[derive(Clone, Debug)]
pub struct GaugeConfig {
    pub sigma: f64,
    pub eps: f64,
    pub v: GaugePotential,
}

impl GaugeConfig {
    pub fn new(sigma: f64, eps: f64, v: GaugePotential) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eps must be nonnegative, got {eps}"
            )));
        }
        Ok(Self { sigma, eps, v })
    }

    /// Same parameters with the potential switched off.
    pub fn without_potential(&self) -> Self {
        Self {
            sigma: self.sigma,
            eps: self.eps,
            v: GaugePotential::Zero,
        }
    }
}

/// A point of phase space carrying the Legendre-dual coordinates together.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
    pub xdot: f64,
}

/// H(p) = (σ²/ε²)(e^{εp} − εp − 1), with the quadratic σ²p²/2 limit at
/// ε = 0.  `expm1` keeps the small-εp regime accurate.
pub fn hamiltonian(p: f64, sigma: f64, eps: f64) -> f64 {
    if eps == 0.0 {
        return 0.5 * sigma * sigma * p * p;
    }
    let s2 = sigma * sigma;
    let u = eps * p;
    // guard the near-cancellation region where expm1(u) − u loses digits
    if u.abs() < 1e-4 {
        let u2 = u * u;
        s2 / (eps * eps) * (u2 / 2.0 * (1.0 + u / 3.0 + u2 / 12.0 + u2 * u / 60.0))
    } else {
        s2 / (eps * eps) * (u.exp_m1() - u)
    }
}

/// ẋ′ = (σ²/ε)(e^{ε(p′ − v(x))} − 1); ε = 0 branch ẋ = σ²(p′ − v(x)).
pub fn velocity_from_momentum(p_prime: f64, x: f64, cfg: &GaugeConfig) -> f64 {
    let s2 = cfg.sigma * cfg.sigma;
    let shifted = p_prime - cfg.v.eval(x);
    if cfg.eps == 0.0 {
        s2 * shifted
    } else {
        s2 / cfg.eps * (cfg.eps * shifted).exp_m1()
    }
}

/// p′₀(ẋ, x) = (1/ε)·ln(εẋ/σ² + 1) + v(x); exact inverse of
/// `velocity_from_momentum`.  Rejects ẋ outside the log domain
/// εẋ/σ² > −1.
pub fn canonical_momentum(xdot: f64, x: f64, cfg: &GaugeConfig) -> Result<f64> {
    let s2 = cfg.sigma * cfg.sigma;
    let v = cfg.v.eval(x);
    if cfg.eps == 0.0 {
        return Ok(xdot / s2 + v);
    }
    let u = cfg.eps * xdot / s2;
    if u <= -1.0 {
        return Err(Error::LogDomain {
            xdot,
            bound: -s2 / cfg.eps,
        });
    }
    Ok(u.ln_1p() / cfg.eps + v)
}

/// L′(ẋ, x) = p₀ẋ − H(p₀) + v(x)·ẋ + σ²v(x)²/2 with
/// p₀ = (1/ε)ln(εẋ/σ² + 1) the base (v-free) canonical momentum.
///
/// The first two terms are the Legendre transform of the base Hamiltonian;
/// the v-dependent terms complete it so that at ε = 0 the result is exactly
/// (ẋ + σ²v)²/(2σ²), the translated classical Lagrangian.
pub fn lagrangian(xdot: f64, x: f64, cfg: &GaugeConfig) -> Result<f64> {
    let base = cfg.without_potential();
    let p0 = canonical_momentum(xdot, x, &base)?;
    let v = cfg.v.eval(x);
    let s2 = cfg.sigma * cfg.sigma;
    Ok(p0 * xdot - hamiltonian(p0, cfg.sigma, cfg.eps) + v * xdot + 0.5 * s2 * v * v)
}

/// sup over the (ẋ, x) grid of |L′(ẋ, x) − L(ẋ + σ²v(x))|, L the v ≡ 0
/// Lagrangian.  Zero (to roundoff) at ε = 0; positive for ε > 0 and
/// nonconstant v.  Grid points pushed outside the log domain by the
/// velocity shift are skipped.
pub fn translation_violation(cfg: &GaugeConfig, xdots: &[f64], xs: &[f64]) -> Result<f64> {
    let base = cfg.without_potential();
    let s2 = cfg.sigma * cfg.sigma;
    let mut sup = 0.0f64;
    let mut evaluated = 0usize;
    for &x in xs {
        let v = cfg.v.eval(x);
        for &xdot in xdots {
            let lhs = match lagrangian(xdot, x, cfg) {
                Ok(l) => l,
                Err(Error::LogDomain { .. }) => continue,
                Err(e) => return Err(e),
            };
            let rhs = match lagrangian(xdot + s2 * v, x, &base) {
                Ok(l) => l,
                Err(Error::LogDomain { .. }) => continue,
                Err(e) => return Err(e),
            };
            sup = sup.max((lhs - rhs).abs());
            evaluated += 1;
        }
    }
    if evaluated == 0 {
        return Err(Error::InvalidParameter(
            "violation grid entirely outside the log domain".into(),
        ));
    }
    Ok(sup)
}

/// JSON summary of a violation sweep at one ε.
pub fn violation_report(cfg: &GaugeConfig, xdots: &[f64], xs: &[f64]) -> Result<serde_json::Value> {
    let sup = translation_violation(cfg, xdots, xs)?;
    Ok(json!({
        "eps": cfg.eps,
        "sup_violation": sup,
        "grid": {
            "xdot": {"lo": xdots.first(), "hi": xdots.last(), "n": xdots.len()},
            "x": {"lo": xs.first(), "hi": xs.last(), "n": xs.len()},
        },
    }))
}

/// Equispaced samples, inclusive of both endpoints.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}
