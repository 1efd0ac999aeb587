//! Grid realization of the nonlocal operator algebra: pairs (a(x), H(z;x))
//! acting on states by weighted nonlocal convolution, composed through the
//! bilinear kernel-field integral, with unit, involution, and norm
//! estimation.
//!
//! Displacement columns use the same centered convention as the grid
//! coordinates; all index arithmetic is periodic.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::FourierGrid;
use crate::nonlocality::NonlocalityFunction;

const ROW_MASS_TOL: f64 = 1e-8;

/// ψ(x) on a grid.
#[derive(Clone, Debug)]
pub struct StateVector {
    pub grid: FourierGrid,
    pub values: Vec<Complex64>,
}

impl StateVector {
    pub fn new(grid: FourierGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} state values on a {}-point grid",
                values.len(),
                grid.n()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: FourierGrid, values: &[f64]) -> Result<Self> {
        let v = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(grid, v)
    }

    /// L² norm by quadrature.
    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()).sqrt()
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
    }
}

/// The pair (a(x), H(z;x)): a multiplication symbol and, per grid point, a
/// distribution over displacements stored as one dense row.
#[derive(Clone, Debug)]
pub struct NonlocalOperator {
    pub grid: FourierGrid,
    pub symbol: Vec<Complex64>,
    /// Row-major n×n; row i is H(·; x_i) over centered displacements.
    pub kernel_field: Vec<Complex64>,
}

impl NonlocalOperator {
    /// (1, δ): the unit element.  The Kronecker row 1/Δx keeps the unit laws
    /// exact on the grid.
    pub fn identity(grid: FourierGrid) -> Self {
        let n = grid.n();
        let symbol = vec![Complex64::new(1.0, 0.0); n];
        let mut kernel_field = vec![Complex64::new(0.0, 0.0); n * n];
        let spike = Complex64::new(1.0 / grid.dx(), 0.0);
        for i in 0..n {
            kernel_field[i * n + n / 2] = spike;
        }
        Self {
            grid,
            symbol,
            kernel_field,
        }
    }

    /// (a(x), δ): pointwise multiplication by the symbol.
    pub fn multiplication(grid: FourierGrid, symbol: Vec<Complex64>) -> Result<Self> {
        let mut op = Self::identity(grid);
        if symbol.len() != op.grid.n() {
            return Err(Error::GridMismatch("symbol length != grid size".into()));
        }
        op.symbol = symbol;
        Ok(op)
    }

    /// x-independent kernel rows sampled from a nonlocality function and
    /// normalized to unit row mass.
    pub fn from_nonlocality(
        grid: FourierGrid,
        symbol: Vec<Complex64>,
        h: &NonlocalityFunction,
    ) -> Result<Self> {
        if let NonlocalityFunction::Dirac = h {
            return Self::multiplication(grid, symbol);
        }
        let g = grid.clone();
        Self::from_kernel_fn(grid, symbol, |_, z| match h {
            NonlocalityFunction::Gaussian { eps } => {
                let u = z / eps;
                (-0.5 * u * u).exp() / (eps * (2.0 * std::f64::consts::PI).sqrt())
            }
            NonlocalityFunction::Triangular { eps } => {
                if z < 0.0 || z > *eps {
                    0.0
                } else {
                    2.0 * (eps - z) / (eps * eps)
                }
            }
            _ => {
                let _ = &g;
                0.0
            }
        })
    }

    /// Kernel field from a density f(x, z) over displacements z, normalized
    /// row by row.
    pub fn from_kernel_fn(
        grid: FourierGrid,
        symbol: Vec<Complex64>,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let n = grid.n();
        if symbol.len() != n {
            return Err(Error::GridMismatch("symbol length != grid size".into()));
        }
        let dx = grid.dx();
        let mut kernel_field = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            let x = grid.x(i);
            let row = &mut kernel_field[i * n..(i + 1) * n];
            let mut mass = 0.0;
            for (j, r) in row.iter_mut().enumerate() {
                let z = grid.x(j); // centered displacement
                let d = f(x, z);
                if d < 0.0 || !d.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "kernel rows must be probability densities; got {d} at (x={x}, z={z})"
                    )));
                }
                *r = Complex64::new(d, 0.0);
                mass += d * dx;
            }
            if mass <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "kernel row at x={x} has no mass"
                )));
            }
            for r in row.iter_mut() {
                *r /= mass;
            }
        }
        Ok(Self {
            grid,
            symbol,
            kernel_field,
        })
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    /// Largest deviation of any row mass from 1 (meaningful for constructed
    /// operators; composition folds the partner symbol into the rows).
    pub fn max_row_mass_defect(&self) -> f64 {
        let n = self.n();
        let dx = self.grid.dx();
        (0..n).fold(0.0f64, |m, i| {
            let mass: Complex64 = self.kernel_field[i * n..(i + 1) * n].iter().sum();
            m.max((mass * dx - 1.0).norm())
        })
    }

    pub fn row_mass_within_tolerance(&self) -> bool {
        self.max_row_mass_defect() <= ROW_MASS_TOL
    }

    /// (Aψ)(x) = a(x)·Σ_z ψ(x−z)·H(z;x)·Δx with periodic wraparound.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.grid != self.grid {
            return Err(Error::GridMismatch("operator and state grids differ".into()));
        }
        let n = self.n();
        let dx = self.grid.dx();
        let half = n / 2;
        let values: Vec<Complex64> = (0..n)
            .map(|i| {
                let row = &self.kernel_field[i * n..(i + 1) * n];
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, h) in row.iter().enumerate() {
                    if h.re != 0.0 || h.im != 0.0 {
                        let target = (i + n + half - j) % n; // i − (j − n/2) mod n
                        acc += psi.values[target] * h;
                    }
                }
                self.symbol[i] * acc * dx
            })
            .collect();
        StateVector::new(self.grid.clone(), values)
    }

    /// Bilinear composition: the symbol stays a(x) and the kernel field
    /// becomes H_ab(z;x) = Σ_u H_a(u;x)·b(x−u)·H_b(z−u;x−u)·Δx.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if other.grid != self.grid {
            return Err(Error::GridMismatch("operator grids differ".into()));
        }
        let n = self.n();
        let dx = self.grid.dx();
        let half = n / 2;
        let kernel_field: Vec<Complex64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let row_a = &self.kernel_field[i * n..(i + 1) * n];
                let mut out = vec![Complex64::new(0.0, 0.0); n];
                for (u, ha) in row_a.iter().enumerate() {
                    if ha.re == 0.0 && ha.im == 0.0 {
                        continue;
                    }
                    let shifted = (i + n + half - u) % n; // x − u on the grid
                    let weight = *ha * other.symbol[shifted] * dx;
                    let row_b = &other.kernel_field[shifted * n..(shifted + 1) * n];
                    // column j of the output takes row_b at displacement
                    // z − u, i.e. column j − u + n/2 (mod n).
                    for (j, o) in out.iter_mut().enumerate() {
                        let src = (j + n + half - u) % n;
                        *o += weight * row_b[src];
                    }
                }
                out
            })
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            symbol: self.symbol.clone(),
            kernel_field,
        })
    }

    /// (a, H)* = (conj a, H); involutive by construction.
    pub fn involution(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            symbol: self.symbol.iter().map(|s| s.conj()).collect(),
            kernel_field: self.kernel_field.clone(),
        }
    }

    /// Adjoint action (A*φ)(m) = Σ_i conj(M[i][m])·φ_i with M the dense
    /// action matrix; used by the norm estimator.
    fn apply_adjoint(&self, phi: &StateVector) -> Result<StateVector> {
        if phi.grid != self.grid {
            return Err(Error::GridMismatch("operator and state grids differ".into()));
        }
        let n = self.n();
        let dx = self.grid.dx();
        let half = n / 2;
        let mut values = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let row = &self.kernel_field[i * n..(i + 1) * n];
            let lead = self.symbol[i] * dx;
            for (j, h) in row.iter().enumerate() {
                if h.re != 0.0 || h.im != 0.0 {
                    let m = (i + n + half - j) % n;
                    values[m] += (lead * h).conj() * phi.values[i];
                }
            }
        }
        StateVector::new(self.grid.clone(), values)
    }

    /// Seeded power iteration on A*A; returns the best (largest) singular
    /// value estimate seen, so the result is nondecreasing in `trials`.
    pub fn operator_norm_estimate(&self, trials: usize, seed: u64) -> Result<f64> {
        let n = self.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut best = 0.0f64;
        for _ in 0..trials.max(1) {
            let state = StateVector::new(self.grid.clone(), v.clone())?;
            let norm_v = state.norm();
            if norm_v == 0.0 {
                break;
            }
            let av = self.apply(&state)?;
            best = best.max(av.norm() / norm_v);
            let back = self.apply_adjoint(&av)?;
            let norm_back = back.norm();
            if norm_back == 0.0 {
                break;
            }
            v = back.values.iter().map(|x| x / norm_back).collect();
        }
        Ok(best)
    }

    /// Dense action matrix M[i][m] = a(x_i)·H(z(i,m); x_i)·Δx, for operator
    /// level comparisons.
    pub fn action_matrix(&self) -> Vec<Complex64> {
        let n = self.n();
        let dx = self.grid.dx();
        let half = n / 2;
        let mut mat = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            let row = &self.kernel_field[i * n..(i + 1) * n];
            for (j, h) in row.iter().enumerate() {
                let m = (i + n + half - j) % n;
                mat[i * n + m] += self.symbol[i] * h * dx;
            }
        }
        mat
    }

    /// Sup over kernel-field entries of |self − other|; grids must match.
    pub fn kernel_sup_distance(&self, other: &Self) -> Result<f64> {
        if other.grid != self.grid {
            return Err(Error::GridMismatch("operator grids differ".into()));
        }
        Ok(self
            .kernel_field
            .iter()
            .zip(&other.kernel_field)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm())))
    }

    /// Sup-entry distance between the dense action matrices; usable across
    /// operators with different symbols (e.g. AB vs BA).
    pub fn action_sup_distance(&self, other: &Self) -> Result<f64> {
        if other.grid != self.grid {
            return Err(Error::GridMismatch("operator grids differ".into()));
        }
        let a = self.action_matrix();
        let b = other.action_matrix();
        Ok(a.iter()
            .zip(&b)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).norm())))
    }
}

// --- fixtures --------------------------------------------------------------

/// Serializable description of an operator fixture.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorFixture {
    pub n: usize,
    pub dx: f64,
    /// Complex pairs (re, im), one per grid point.
    pub symbol: Vec<(f64, f64)>,
    pub kernel: KernelSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Delta,
    Gaussian { eps: f64 },
    /// Gaussian whose width varies across the domain:
    /// ε(x) = eps0 + eps1·x/(L/2).
    GaussianVarying { eps0: f64, eps1: f64 },
    /// Dense row-major real matrix.
    Dense { rows: Vec<Vec<f64>> },
}

impl OperatorFixture {
    pub fn build(&self) -> Result<NonlocalOperator> {
        let grid = FourierGrid::new(self.n, self.dx)?;
        if self.symbol.len() != self.n {
            return Err(Error::GridMismatch("fixture symbol length != n".into()));
        }
        let symbol: Vec<Complex64> = self
            .symbol
            .iter()
            .map(|&(re, im)| Complex64::new(re, im))
            .collect();
        match &self.kernel {
            KernelSpec::Delta => NonlocalOperator::multiplication(grid, symbol),
            KernelSpec::Gaussian { eps } => {
                let h = NonlocalityFunction::gaussian(*eps)?;
                NonlocalOperator::from_nonlocality(grid, symbol, &h)
            }
            KernelSpec::GaussianVarying { eps0, eps1 } => {
                let (e0, e1) = (*eps0, *eps1);
                let halflen = grid.len() / 2.0;
                NonlocalOperator::from_kernel_fn(grid, symbol, move |x, z| {
                    let eps = e0 + e1 * x / halflen;
                    let eps = eps.max(1e-6);
                    let u = z / eps;
                    (-0.5 * u * u).exp() / (eps * (2.0 * std::f64::consts::PI).sqrt())
                })
            }
            KernelSpec::Dense { rows } => {
                if rows.len() != self.n || rows.iter().any(|r| r.len() != self.n) {
                    return Err(Error::GridMismatch("dense kernel must be n×n".into()));
                }
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                let n = self.n;
                NonlocalOperator::from_kernel_fn(grid.clone(), symbol, move |x, z| {
                    // recover indices from coordinates
                    let i = ((x / grid_dx_helper(&grid)) + (n / 2) as f64).round() as usize;
                    let j = ((z / grid_dx_helper(&grid)) + (n / 2) as f64).round() as usize;
                    flat[i * n + j]
                })
            }
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("fixture serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        serde_json::from_value(v.clone())
            .map_err(|e| Error::Parse(format!("operator fixture: {e}")))
    }
}

fn grid_dx_helper(g: &FourierGrid) -> f64 {
    g.dx()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(n: usize, len: f64) -> FourierGrid {
        FourierGrid::with_length(n, len).unwrap()
    }

    fn gaussian_state(g: &FourierGrid, width: f64) -> StateVector {
        let v: Vec<f64> = g.xs().iter().map(|&x| (-0.5 * x * x / (width * width)).exp()).collect();
        StateVector::from_real(g.clone(), &v).unwrap()
    }

    fn x_symbol(g: &FourierGrid) -> Vec<Complex64> {
        g.xs().iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    fn ones(g: &FourierGrid) -> Vec<Complex64> {
        vec![Complex64::new(1.0, 0.0); g.n()]
    }

    #[test]
    fn multiplication_with_delta_kernel() {
        let g = grid(128, 8.0);
        let a = NonlocalOperator::multiplication(g.clone(), x_symbol(&g)).unwrap();
        let psi = gaussian_state(&g, 1.0);
        let out = a.apply(&psi).unwrap();
        for i in 0..g.n() {
            let expect = psi.values[i] * g.x(i);
            assert!((out.values[i] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn unit_row_preserves_constants() {
        let g = grid(128, 8.0);
        let h = NonlocalityFunction::gaussian(0.4).unwrap();
        let a = NonlocalOperator::from_nonlocality(g.clone(), ones(&g), &h).unwrap();
        let c = Complex64::new(0.7, -0.2);
        let psi = StateVector::new(g.clone(), vec![c; g.n()]).unwrap();
        let out = a.apply(&psi).unwrap();
        for v in &out.values {
            assert!((v - c).norm() < 1e-10);
        }
    }

    #[test]
    fn gaussian_kernel_smears_spike() {
        let g = grid(256, 8.0);
        let eps = 0.3;
        let h = NonlocalityFunction::gaussian(eps).unwrap();
        let a = NonlocalOperator::from_nonlocality(g.clone(), ones(&g), &h).unwrap();
        // δ-like spike at the origin
        let mut spike = vec![Complex64::new(0.0, 0.0); g.n()];
        spike[g.n() / 2] = Complex64::new(1.0 / g.dx(), 0.0);
        let psi = StateVector::new(g.clone(), spike).unwrap();
        let out = a.apply(&psi).unwrap();
        // direct convolution oracle: density of the kernel itself
        for i in 0..g.n() {
            let x = g.x(i);
            let expect = (-0.5 * x * x / (eps * eps)).exp()
                / (eps * (2.0 * std::f64::consts::PI).sqrt());
            assert!(
                (out.values[i].re - expect).abs() < 1e-6 + 1e-6 * expect,
                "x = {x}"
            );
        }
    }

    #[test]
    fn unit_laws_exact() {
        let g = grid(128, 8.0);
        let id = NonlocalOperator::identity(g.clone());
        let h = NonlocalityFunction::gaussian(0.4).unwrap();
        let a = NonlocalOperator::from_nonlocality(g.clone(), x_symbol(&g), &h).unwrap();
        let left = id.compose(&a).unwrap();
        let right = a.compose(&id).unwrap();
        // identity symbol is 1, so compose(id, a) keeps symbol 1 but the
        // kernel row picks up a(x)·H; compare at the action level.
        assert!(left.action_sup_distance(&a).unwrap() < 1e-12);
        assert!(right.action_sup_distance(&a).unwrap() < 1e-12);
    }

    #[test]
    fn composition_of_multiplications_is_pointwise_product() {
        let g = grid(128, 8.0);
        let a = NonlocalOperator::multiplication(g.clone(), x_symbol(&g)).unwrap();
        let ab = a.compose(&a).unwrap();
        let psi = gaussian_state(&g, 1.0);
        let out = ab.apply(&psi).unwrap();
        for i in 0..g.n() {
            let x = g.x(i);
            let expect = psi.values[i] * x * x;
            assert!((out.values[i] - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn representation_property() {
        let g = grid(128, 8.0);
        let ha = NonlocalityFunction::gaussian(0.35).unwrap();
        let a = NonlocalOperator::from_nonlocality(g.clone(), x_symbol(&g), &ha).unwrap();
        let b = OperatorFixture {
            n: g.n(),
            dx: g.dx(),
            symbol: g.xs().iter().map(|&x| ((0.5 * x).cos(), 0.0)).collect(),
            kernel: KernelSpec::GaussianVarying {
                eps0: 0.3,
                eps1: 0.1,
            },
        }
        .build()
        .unwrap();
        let psi = gaussian_state(&g, 1.2);
        let lhs = a.compose(&b).unwrap().apply(&psi).unwrap();
        let rhs = a.apply(&b.apply(&psi).unwrap()).unwrap();
        assert!(lhs.sup_distance(&rhs) < 1e-8);
    }

    #[test]
    fn associativity_defect_small() {
        let g = grid(128, 8.0);
        let a = NonlocalOperator::from_nonlocality(
            g.clone(),
            x_symbol(&g),
            &NonlocalityFunction::gaussian(0.3).unwrap(),
        )
        .unwrap();
        let b = OperatorFixture {
            n: g.n(),
            dx: g.dx(),
            symbol: g.xs().iter().map(|&x| ((0.7 * x).sin(), 0.1)).collect(),
            kernel: KernelSpec::GaussianVarying {
                eps0: 0.35,
                eps1: 0.15,
            },
        }
        .build()
        .unwrap();
        let c = NonlocalOperator::from_nonlocality(
            g.clone(),
            g.xs().iter().map(|&x| Complex64::new((-0.1 * x * x).exp(), 0.0)).collect(),
            &NonlocalityFunction::gaussian(0.25).unwrap(),
        )
        .unwrap();
        let lhs = a.compose(&b.compose(&c).unwrap()).unwrap();
        let rhs = a.compose(&b).unwrap().compose(&c).unwrap();
        let defect = lhs.kernel_sup_distance(&rhs).unwrap();
        assert!(defect < 1e-8, "associativity defect {defect}");
    }

    #[test]
    fn noncommutativity_witness() {
        let g = grid(128, 8.0);
        let a = NonlocalOperator::from_nonlocality(
            g.clone(),
            x_symbol(&g),
            &NonlocalityFunction::gaussian(0.3).unwrap(),
        )
        .unwrap();
        let b = OperatorFixture {
            n: g.n(),
            dx: g.dx(),
            symbol: g.xs().iter().map(|&x| ((0.7 * x).sin(), 0.0)).collect(),
            kernel: KernelSpec::GaussianVarying {
                eps0: 0.35,
                eps1: 0.15,
            },
        }
        .build()
        .unwrap();
        let ab = a.compose(&b).unwrap();
        let ba = b.compose(&a).unwrap();
        let diff = ab.action_sup_distance(&ba).unwrap();
        assert!(diff > 1e-7 * 10.0, "commutator too small: {diff}");
    }

    #[test]
    fn x_independent_kernels_compose_to_convolution() {
        // With unit symbols and x-independent kernels, composition is plain
        // kernel convolution; cross-check against self_convolve.
        let g = grid(512, 16.0);
        let eps = 0.5 / std::f64::consts::SQRT_2;
        let h = NonlocalityFunction::gaussian(eps).unwrap();
        let a = NonlocalOperator::from_nonlocality(g.clone(), ones(&g), &h).unwrap();
        let composed = a.compose(&a).unwrap();
        let hh = h.self_convolve().unwrap(); // Gaussian(0.5)
        let target = NonlocalOperator::from_nonlocality(g.clone(), ones(&g), &hh).unwrap();
        let defect = composed.kernel_sup_distance(&target).unwrap();
        assert!(defect < 1e-6, "convolution defect {defect}");
    }

    #[test]
    fn involution_is_involutive() {
        let g = grid(64, 4.0);
        let symbol: Vec<Complex64> = g
            .xs()
            .iter()
            .map(|&x| Complex64::new(x, (2.0 * x).sin()))
            .collect();
        let a = NonlocalOperator::from_nonlocality(
            g.clone(),
            symbol.clone(),
            &NonlocalityFunction::gaussian(0.3).unwrap(),
        )
        .unwrap();
        let aa = a.involution().involution();
        assert_eq!(a.symbol, aa.symbol);
        assert_eq!(a.kernel_field, aa.kernel_field);
        // a(x) = i flips to −i
        let b = NonlocalOperator::multiplication(
            g.clone(),
            vec![Complex64::new(0.0, 1.0); g.n()],
        )
        .unwrap();
        assert_eq!(b.involution().symbol[0], Complex64::new(0.0, -1.0));
        // real symbol unchanged
        let c = NonlocalOperator::multiplication(g, vec![Complex64::new(2.0, 0.0); 64]).unwrap();
        assert_eq!(c.involution().symbol, c.symbol);
    }

    #[test]
    fn norm_estimates() {
        let g = grid(256, 8.0);
        let id = NonlocalOperator::identity(g.clone());
        let n1 = id.operator_norm_estimate(5, 7).unwrap();
        assert_relative_eq!(n1, 1.0, epsilon = 1e-6);

        let c = NonlocalOperator::multiplication(
            g.clone(),
            vec![Complex64::new(-2.5, 0.0); g.n()],
        )
        .unwrap();
        let n2 = c.operator_norm_estimate(5, 7).unwrap();
        assert_relative_eq!(n2, 2.5, epsilon = 1e-6);

        let x = NonlocalOperator::multiplication(g.clone(), x_symbol(&g)).unwrap();
        let n3 = x.operator_norm_estimate(800, 7).unwrap();
        // multiplication by x on [−L/2, L/2): norm approaches L/2
        assert!((n3 - 4.0).abs() < 0.05, "norm estimate {n3}");
    }

    #[test]
    fn norm_estimate_monotone_in_trials() {
        let g = grid(128, 8.0);
        let x = NonlocalOperator::multiplication(g.clone(), x_symbol(&g)).unwrap();
        let mut prev = 0.0;
        for &t in &[1, 5, 20, 100] {
            let e = x.operator_norm_estimate(t, 13).unwrap();
            assert!(e >= prev - 1e-15);
            prev = e;
        }
    }

    #[test]
    fn row_mass_validation() {
        let g = grid(128, 8.0);
        let h = NonlocalityFunction::gaussian(0.4).unwrap();
        let a = NonlocalOperator::from_nonlocality(g.clone(), ones(&g), &h).unwrap();
        assert!(a.row_mass_within_tolerance());
        assert!(NonlocalOperator::identity(g).row_mass_within_tolerance());
    }

    #[test]
    fn fixture_round_trip() {
        let fixture = OperatorFixture {
            n: 64,
            dx: 0.125,
            symbol: (0..64).map(|i| (i as f64 * 0.01, -0.5)).collect(),
            kernel: KernelSpec::Gaussian { eps: 0.3 },
        };
        let v = fixture.to_json();
        let back = OperatorFixture::from_json(&v).unwrap();
        let op1 = fixture.build().unwrap();
        let op2 = back.build().unwrap();
        assert_eq!(op1.symbol, op2.symbol);
        assert_eq!(op1.kernel_field, op2.kernel_field);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let g1 = grid(64, 4.0);
        let g2 = grid(128, 4.0);
        let a = NonlocalOperator::identity(g1);
        let psi = gaussian_state(&g2, 1.0);
        assert!(a.apply(&psi).is_err());
        let b = NonlocalOperator::identity(g2);
        assert!(a.compose(&b).is_err());
    }
}
