//! Symbolic quantum Ito calculus.
//!
//! Products of the stochastic differentials `dt`, `dA`, `dA†`, `dΛ` follow the
//! Hudson-Parthasarathy multiplication table.  Coefficients are exact
//! polynomials in the volatility `σ` and the gauge eigenvalue `ε` over the
//! rationals; no floating point enters this module.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// The four quantum stochastic differentials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DifferentialBasis {
    Dt,
    /// Annihilation differential dA.
    DA,
    /// Creation differential dA†.
    DADag,
    /// Gauge (number/exchange) differential dΛ.
    DLambda,
}

pub const BASIS: [DifferentialBasis; 4] = [
    DifferentialBasis::Dt,
    DifferentialBasis::DA,
    DifferentialBasis::DADag,
    DifferentialBasis::DLambda,
];

/// Multiplication table for the quantum stochastic differentials.
/// The left argument indexes the row, the right the column; only four
/// products are nonzero.
pub fn ito_multiply(
    left: DifferentialBasis,
    right: DifferentialBasis,
) -> Option<DifferentialBasis> {
    use DifferentialBasis::*;
    match (left, right) {
        (DA, DADag) => Some(Dt),
        (DA, DLambda) => Some(DA),
        (DLambda, DADag) => Some(DADag),
        (DLambda, DLambda) => Some(DLambda),
        _ => None,
    }
}

/// Exact polynomial in (σ, ε) with rational coefficients.
///
/// Keys are `(sigma_pow, eps_pow)`; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CoeffPoly {
    terms: BTreeMap<(u32, u32), BigRational>,
}

impl CoeffPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn monomial(sigma_pow: u32, eps_pow: u32, coeff: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert((sigma_pow, eps_pow), coeff);
        }
        Self { terms }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(0, 0, c)
    }

    /// The symbol σ.
    pub fn sigma() -> Self {
        Self::monomial(1, 0, BigRational::one())
    }

    /// The symbol ε.
    pub fn eps() -> Self {
        Self::monomial(0, 1, BigRational::one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigRational)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (k, v) in &other.terms {
            let entry = terms.entry(*k).or_insert_with(BigRational::zero);
            *entry += v;
            if entry.is_zero() {
                terms.remove(k);
            }
        }
        Self { terms }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms: BTreeMap<(u32, u32), BigRational> = BTreeMap::new();
        for ((s1, e1), c1) in &self.terms {
            for ((s2, e2), c2) in &other.terms {
                let key = (s1 + s2, e1 + e2);
                let entry = terms.entry(key).or_insert_with(BigRational::zero);
                *entry += c1 * c2;
            }
        }
        terms.retain(|_, v| !v.is_zero());
        Self { terms }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let terms = self.terms.iter().map(|(k, v)| (*k, v * c)).collect();
        Self { terms }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigRational::one())
    }

    /// Substitute ε → −ε: flips the sign of every odd-ε term.
    pub fn negate_eps(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(&(s, e), v)| {
                let v = if e % 2 == 1 { -v.clone() } else { v.clone() };
                ((s, e), v)
            })
            .collect();
        Self { terms }
    }

    /// Numeric evaluation at given (σ, ε).
    pub fn eval(&self, sigma: f64, eps: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(s, e), c)| {
                let c = c.numer().to_f64().unwrap() / c.denom().to_f64().unwrap();
                c * sigma.powi(s as i32) * eps.powi(e as i32)
            })
            .sum()
    }
}

impl fmt::Display for CoeffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(s, e), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", c)?;
            if s > 0 {
                write!(f, "*sigma^{}", s)?;
            }
            if e > 0 {
                write!(f, "*eps^{}", e)?;
            }
        }
        Ok(())
    }
}

/// Linear combination c_t·dt + c_A·dA + c_A†·dA† + c_Λ·dΛ with polynomial
/// coefficients.  Absent keys mean zero.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IncrementCombination {
    coeff: BTreeMap<DifferentialBasis, CoeffPoly>,
}

impl IncrementCombination {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_empty()
    }

    pub fn term(basis: DifferentialBasis, poly: CoeffPoly) -> Self {
        let mut coeff = BTreeMap::new();
        if !poly.is_zero() {
            coeff.insert(basis, poly);
        }
        Self { coeff }
    }

    pub fn basis(basis: DifferentialBasis) -> Self {
        Self::term(basis, CoeffPoly::constant(BigRational::one()))
    }

    /// The drift-free increment dX = σ·dA + σ·dA† + ε·dΛ.
    pub fn drift_free_base() -> Self {
        let mut x = Self::term(DifferentialBasis::DA, CoeffPoly::sigma());
        x = x.add(&Self::term(DifferentialBasis::DADag, CoeffPoly::sigma()));
        x.add(&Self::term(DifferentialBasis::DLambda, CoeffPoly::eps()))
    }

    pub fn coeff(&self, basis: DifferentialBasis) -> CoeffPoly {
        self.coeff.get(&basis).cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut coeff = self.coeff.clone();
        for (k, v) in &other.coeff {
            let entry = coeff.entry(*k).or_insert_with(CoeffPoly::zero);
            *entry = entry.add(v);
            if entry.is_zero() {
                coeff.remove(k);
            }
        }
        Self { coeff }
    }

    /// Bilinear extension of the Ito table.  Noncommutative.
    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&bl, cl) in &self.coeff {
            for (&br, cr) in &other.coeff {
                if let Some(b) = ito_multiply(bl, br) {
                    out = out.add(&Self::term(b, cl.mul(cr)));
                }
            }
        }
        out
    }

    /// k-fold left-to-right product of `self`; the table is order-sensitive.
    pub fn expand_power(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroPower);
        }
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.multiply(self);
        }
        Ok(acc)
    }

    /// Only the dt coefficient survives the vacuum expectation.
    pub fn vacuum_expectation(&self) -> CoeffPoly {
        self.coeff(DifferentialBasis::Dt)
    }
}

/// Coefficient side of a truncated backward or Fokker-Planck generator:
/// `coeffs[i]` multiplies the derivative of order `i + 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignConvention {
    Backward,
    FokkerPlanck,
}

impl SignConvention {
    fn as_str(&self) -> &'static str {
        match self {
            SignConvention::Backward => "backward",
            SignConvention::FokkerPlanck => "fokker_planck",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BackwardPDE {
    pub order: usize,
    pub coeffs: Vec<CoeffPoly>,
    pub convention: SignConvention,
}

impl BackwardPDE {
    /// Coefficient of the k-th spatial derivative, 2 <= k <= order.
    pub fn coeff(&self, k: usize) -> Option<&CoeffPoly> {
        if k < 2 {
            return None;
        }
        self.coeffs.get(k - 2)
    }

    /// Evaluate every coefficient at numeric (σ, ε).
    pub fn to_numeric(&self, sigma: f64, eps: f64) -> NumericPde {
        NumericPde {
            sigma,
            eps,
            coeffs: self.coeffs.iter().map(|c| c.eval(sigma, eps)).collect(),
        }
    }

    pub fn to_json(&self) -> Result<Value> {
        let mut coeffs = Vec::new();
        for (i, poly) in self.coeffs.iter().enumerate() {
            let mut terms = Vec::new();
            for (&(s, e), c) in poly.terms() {
                let num = c.numer().to_i64().ok_or_else(|| {
                    Error::InvalidParameter("coefficient numerator overflows i64".into())
                })?;
                let den = c.denom().to_i64().ok_or_else(|| {
                    Error::InvalidParameter("coefficient denominator overflows i64".into())
                })?;
                terms.push(json!({
                    "sigma_pow": s,
                    "eps_pow": e,
                    "num": num,
                    "den": den,
                }));
            }
            coeffs.push(json!({ "k": i + 2, "poly": terms }));
        }
        Ok(json!({
            "convention": self.convention.as_str(),
            "coeffs": coeffs,
        }))
    }
}

/// Numeric truncation of a generator: `coeffs[i]` multiplies the derivative
/// of order `i + 2`.
#[derive(Clone, Debug)]
pub struct NumericPde {
    pub sigma: f64,
    pub eps: f64,
    pub coeffs: Vec<f64>,
}

impl NumericPde {
    pub fn order(&self) -> usize {
        self.coeffs.len() + 1
    }
}

/// Backward equation coefficients b_k = σ²ε^{k-2}/k!, derived by expanding
/// powers of the drift-free increment through the Ito table and taking the
/// vacuum expectation.
pub fn derive_backward_pde(order: usize) -> Result<BackwardPDE> {
    if order < 2 {
        return Err(Error::OrderTooSmall(order));
    }
    let base = IncrementCombination::drift_free_base();
    let mut coeffs = Vec::with_capacity(order - 1);
    let mut factorial = BigRational::one() * BigRational::from_integer(BigInt::from(2));
    for k in 2..=order {
        if k > 2 {
            factorial *= BigRational::from_integer(BigInt::from(k as i64));
        }
        let dt = base.expand_power(k)?.vacuum_expectation();
        coeffs.push(dt.scale(&factorial.recip()));
    }
    Ok(BackwardPDE {
        order,
        coeffs,
        convention: SignConvention::Backward,
    })
}

/// Fokker-Planck coefficients: the ε → −ε image of the backward equation.
pub fn derive_fokker_planck(order: usize) -> Result<BackwardPDE> {
    let backward = derive_backward_pde(order)?;
    Ok(BackwardPDE {
        order,
        coeffs: backward.coeffs.iter().map(|c| c.negate_eps()).collect(),
        convention: SignConvention::FokkerPlanck,
    })
}

/// Kramers-Moyal form of the nonlocal Fokker-Planck generator.
///
/// `moment_polys[k]` is the k-th moment of the nonlocality function as a
/// polynomial in ε; the derivative of order k+2 receives the weight
/// σ²/2 · (−1)^k μ_k / k!.
pub fn kramers_moyal_pde(moment_polys: &[CoeffPoly]) -> Result<BackwardPDE> {
    if moment_polys.is_empty() {
        return Err(Error::OrderTooSmall(1));
    }
    let sigma_sq = CoeffPoly::sigma().mul(&CoeffPoly::sigma());
    let mut coeffs = Vec::with_capacity(moment_polys.len());
    let mut factorial = BigRational::one();
    for (k, mu) in moment_polys.iter().enumerate() {
        if k > 0 {
            factorial *= BigRational::from_integer(BigInt::from(k as i64));
        }
        let sign = if k % 2 == 0 {
            BigRational::one()
        } else {
            -BigRational::one()
        };
        let weight = sign / (&factorial * BigRational::from_integer(BigInt::from(2)));
        coeffs.push(sigma_sq.mul(mu).scale(&weight));
    }
    Ok(BackwardPDE {
        order: moment_polys.len() + 1,
        coeffs,
        convention: SignConvention::FokkerPlanck,
    })
}

/// Rational with |numerator|, |denominator| small enough for display tests.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// σ²ε^{k−2}/k! as a polynomial; the closed form the derivation must match.
pub fn backward_coefficient_closed_form(k: usize) -> CoeffPoly {
    let mut factorial = BigRational::one();
    for i in 2..=k {
        factorial *= BigRational::from_integer(BigInt::from(i as i64));
    }
    CoeffPoly::monomial(2, (k - 2) as u32, factorial.recip())
}

#[allow(unused)]
fn abs_rational(r: &BigRational) -> BigRational {
    r.abs()
}
