//! Kernel moments from nonlocality moments.
//!
//! Two independent routes: expansion of the moment generating function
//! M(p) = exp((p²σ²τ/2)·Σ a_j p^j/j!) as a formal series, and a direct sum
//! over integer partitions without unit parts.  Both must agree exactly in
//! rational arithmetic; grid quadrature of the built kernel is the external
//! cross-check.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ito::CoeffPoly;
use crate::series::{FormalSeries, SeriesScalar};

/// Partitions of n into parts >= 2, each sorted descending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionSet {
    pub n: usize,
    pub parts: Vec<Vec<usize>>,
}

/// Enumerate the partitions of `n` without using the number 1.
/// n = 0 and n = 1 yield the empty set.
pub fn partitions_without_one(n: usize) -> PartitionSet {
    let mut parts = Vec::new();
    let mut current = Vec::new();
    descend(n, n, &mut current, &mut parts);
    PartitionSet { n, parts }
}

fn descend(remaining: usize, max_part: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if remaining == 0 {
        if !current.is_empty() {
            out.push(current.clone());
        }
        return;
    }
    let mut part = max_part.min(remaining);
    while part >= 2 {
        if remaining - part != 1 {
            current.push(part);
            descend(remaining - part, part, current, out);
            current.pop();
        }
        part -= 1;
    }
}

fn factorial<T: SeriesScalar>(n: usize) -> T {
    let mut acc = T::one();
    for i in 2..=n {
        acc = acc * T::from_usize(i).expect("small integer fits scalar");
    }
    acc
}

/// Series expansion of the kernel moment generating function
/// exp((p²σ²τ/2)·Σ_j a_j p^j / j!), truncated at order `n`.
pub fn mgf_series<T: SeriesScalar>(a: &[T], sigma: T, tau: T, n: usize) -> Result<FormalSeries<T>> {
    if n >= 2 && a.len() < n - 1 {
        return Err(Error::MomentsUnavailable {
            stored: a.len().saturating_sub(1),
            requested: n - 2,
        });
    }
    let half = T::one() / T::from_usize(2).unwrap();
    let s = sigma.clone() * sigma * tau * half;
    let mut exponent = FormalSeries::zero(n);
    for i in 2..=n {
        let aj = a[i - 2].clone();
        let w = s.clone() * aj / factorial::<T>(i - 2);
        exponent.set_coeff(i, w);
    }
    exponent.exp()
}

/// Kernel moments μ_0..μ_n via the series route: μ_i = i!·c_i.
pub fn kernel_moments<T: SeriesScalar>(a: &[T], sigma: T, tau: T, n: usize) -> Result<Vec<T>> {
    let series = mgf_series(a, sigma, tau, n)?;
    Ok((0..=n)
        .map(|i| factorial::<T>(i) * series.coeff(i))
        .collect())
}

/// Kernel moments via the partition route:
/// μ_m = m! · Σ_{P ∈ partitions of m, parts >= 2} Π_i w_i^{m_i} / m_i!
/// with per-part weight w_i = σ²τ·a_{i−2} / (2·(i−2)!) and m_i the
/// multiplicity of part size i.
pub fn kernel_moments_partition<T: SeriesScalar>(
    a: &[T],
    sigma: T,
    tau: T,
    n: usize,
) -> Result<Vec<T>> {
    if n >= 2 && a.len() < n - 1 {
        return Err(Error::MomentsUnavailable {
            stored: a.len().saturating_sub(1),
            requested: n - 2,
        });
    }
    let half = T::one() / T::from_usize(2).unwrap();
    let s = sigma.clone() * sigma * tau * half;
    let weight = |i: usize| -> T { s.clone() * a[i - 2].clone() / factorial::<T>(i - 2) };

    let mut out = Vec::with_capacity(n + 1);
    for m in 0..=n {
        if m == 0 {
            out.push(T::one());
            continue;
        }
        let mut total = T::zero();
        for partition in &partitions_without_one(m).parts {
            let mut term = T::one();
            let mut idx = 0;
            while idx < partition.len() {
                let part = partition[idx];
                let mut mult = 0usize;
                while idx < partition.len() && partition[idx] == part {
                    mult += 1;
                    idx += 1;
                }
                let w = weight(part);
                let mut pow = T::one();
                for _ in 0..mult {
                    pow = pow * w.clone();
                }
                term = term * pow / factorial::<T>(mult);
            }
            total = total + term;
        }
        out.push(factorial::<T>(m) * total);
    }
    Ok(out)
}

// --- exact built-in moment sequences ---------------------------------------

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Point mass at zero: (1, 0, 0, ...).
pub fn dirac_moments(n: usize) -> Vec<BigRational> {
    let mut v = vec![BigRational::zero(); n + 1];
    v[0] = BigRational::one();
    v
}

/// Centered Gaussian with standard deviation ε: a_{2k} = ε^{2k}(2k−1)!!.
pub fn gaussian_moments_exact(eps: &BigRational, n: usize) -> Vec<BigRational> {
    let mut v = vec![BigRational::zero(); n + 1];
    v[0] = BigRational::one();
    let eps_sq = eps * eps;
    let mut acc = BigRational::one();
    let mut k = 0i64;
    while (2 * k as usize) + 2 <= n {
        k += 1;
        acc = acc * &eps_sq * big(2 * k - 1);
        v[2 * k as usize] = acc.clone();
    }
    v
}

/// Triangular density 2(ε−y)/ε² on [0, ε]: a_k = 2ε^k/((k+1)(k+2)).
pub fn triangular_moments_exact(eps: &BigRational, n: usize) -> Vec<BigRational> {
    let mut v = Vec::with_capacity(n + 1);
    let mut eps_pow = BigRational::one();
    for k in 0..=n as i64 {
        if k > 0 {
            eps_pow *= eps;
        }
        v.push(big(2) * &eps_pow / (big(k + 1) * big(k + 2)));
    }
    v
}

/// The k-th triangular moment as a polynomial in ε: 2ε^k/((k+1)(k+2)).
pub fn triangular_moment_poly(k: usize) -> CoeffPoly {
    let c = big(2) / (big(k as i64 + 1) * big(k as i64 + 2));
    CoeffPoly::monomial(0, k as u32, c)
}

// --- reconciliation report -------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct MomentRow {
    pub n: usize,
    pub series: String,
    pub partition: String,
    pub quadrature: f64,
    pub rel_gap: f64,
}

/// Per-order comparison of the two exact routes against grid quadrature.
/// `rel_gap` is |series − quadrature| / max(|series|, |quadrature|, tiny).
pub fn moment_report(
    a: &[BigRational],
    sigma: &BigRational,
    tau: &BigRational,
    quadrature: &[f64],
) -> Result<Vec<MomentRow>> {
    let n = quadrature.len().saturating_sub(1);
    let series = kernel_moments(a, sigma.clone(), tau.clone(), n)?;
    let partition = kernel_moments_partition(a, sigma.clone(), tau.clone(), n)?;
    let mut rows = Vec::with_capacity(n + 1);
    // characteristic magnitude μ₂^{i/2} keeps the gap meaningful for the
    // vanishing odd moments
    let spread = if n >= 2 {
        rational_to_f64(&series[2]).abs().sqrt()
    } else {
        1.0
    };
    for i in 0..=n {
        let sv = rational_to_f64(&series[i]);
        let q = quadrature[i];
        let scale = sv.abs().max(q.abs()).max(spread.powi(i as i32)).max(1e-12);
        rows.push(MomentRow {
            n: i,
            series: series[i].to_string(),
            partition: partition[i].to_string(),
            quadrature: q,
            rel_gap: (sv - q).abs() / scale,
        });
    }
    Ok(rows)
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap()
}
