//! Implementations of the six subcommands.

use std::path::Path;

use serde_json::json;

use nlkbe::gauge::{linspace, translation_violation, GaugeConfig, GaugePotential};
use nlkbe::grid::FourierGrid;
use nlkbe::io;
use nlkbe::ito::{derive_backward_pde, derive_fokker_planck};
use nlkbe::kernel::{
    build_kernel, kramers_moyal_numeric, propagate, solve_kramers_moyal, SolutionSlice,
};
use nlkbe::moments::{
    dirac_moments, gaussian_moments_exact, moment_report, triangular_moments_exact,
};
use nlkbe::operator::{KernelSpec, NonlocalOperator, OperatorFixture};
use nlkbe::nonlocality::NonlocalityFunction;
use nlkbe::{Error, Result};

use num_rational::BigRational;

/// dirac | gaussian | triangular | path to a two-column (y, density) CSV.
pub fn parse_nonlocality(spec: &str, eps: f64) -> Result<NonlocalityFunction> {
    match spec {
        "dirac" => Ok(NonlocalityFunction::Dirac),
        "gaussian" => NonlocalityFunction::gaussian(eps),
        "triangular" => NonlocalityFunction::triangular(eps),
        path => {
            let p = Path::new(path);
            if !p.exists() {
                return Err(Error::InvalidParameter(format!(
                    "unknown nonlocality '{spec}' (expected dirac, gaussian, triangular, \
                     or an existing CSV file)"
                )));
            }
            let (ys, density) = io::read_two_column_csv(p)?;
            NonlocalityFunction::tabulated(ys, density)
        }
    }
}

fn emit_json(value: &serde_json::Value, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => io::write_json(path, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value).expect("serializes"));
            Ok(())
        }
    }
}

pub fn derive(order: usize, output: Option<&Path>) -> Result<()> {
    let backward = derive_backward_pde(order)?;
    let forward = derive_fokker_planck(order)?;
    let doc = json!({
        "order": order,
        "backward": backward.to_json()?,
        "fokker_planck": forward.to_json()?,
    });
    emit_json(&doc, output)
}

pub fn kernel(
    sigma: f64,
    tau: f64,
    h: &NonlocalityFunction,
    grid_n: usize,
    grid_len: Option<f64>,
    output: Option<&Path>,
) -> Result<()> {
    let eps_scale = match h {
        NonlocalityFunction::Gaussian { eps } | NonlocalityFunction::Triangular { eps } => *eps,
        _ => 0.0,
    };
    let grid = match grid_len {
        Some(len) => FourierGrid::with_length(grid_n, len)?,
        None => {
            let d = FourierGrid::default_for(sigma, tau, eps_scale)?;
            FourierGrid::with_length(grid_n, d.len())?
        }
    };
    let k = build_kernel(h, sigma, tau, &grid)?;

    let mass = k.moment(0);
    println!("mass {mass:.12}");
    for n in 1..=4 {
        println!("mu_{n} {:.12e}", k.moment(n));
    }

    if let Some(path) = output {
        io::write_two_column_csv(path, ("x", "value"), &grid.xs(), &k.values)?;
        io::write_json(&path.with_extension("json"), &k.sidecar_json())?;
    }
    Ok(())
}

pub fn moments(
    sigma: f64,
    tau: f64,
    eps: f64,
    kind: &str,
    order: usize,
    output: Option<&Path>,
) -> Result<()> {
    let rational = |x: f64| {
        BigRational::from_float(x)
            .ok_or_else(|| Error::InvalidParameter(format!("non-finite parameter {x}")))
    };
    let eps_q = rational(eps)?;
    let a = match kind {
        "dirac" => dirac_moments(order),
        "gaussian" => gaussian_moments_exact(&eps_q, order),
        "triangular" => triangular_moments_exact(&eps_q, order),
        other => {
            return Err(Error::InvalidParameter(format!(
                "moment reconciliation needs an analytic kind (dirac, gaussian, triangular), \
                 got '{other}'"
            )))
        }
    };
    let h = parse_nonlocality(kind, eps)?;

    // Quadrature grid: keep the Nyquist frequency below the symbol's first
    // revival (Δx > ε/2) so the raw kernel is a clean density.
    let len = FourierGrid::default_for(sigma, tau, eps)?.len();
    let mut n = 4096usize;
    while n > 64 && len / n as f64 <= 0.55 * eps {
        n /= 2;
    }
    let grid = FourierGrid::with_length(n, len)?;
    let k = build_kernel(&h, sigma, tau, &grid)?;
    let quadrature: Vec<f64> = (0..=order).map(|i| k.moment(i)).collect();

    let rows = moment_report(&a, &rational(sigma)?, &rational(tau)?, &quadrature)?;
    let doc = serde_json::to_value(&rows).expect("serializes");
    emit_json(&doc, output)
}

pub fn solve(
    payoff: &Path,
    sigma: f64,
    tau: f64,
    h: &NonlocalityFunction,
    methods: &[String],
    output: Option<&Path>,
) -> Result<()> {
    let (xs, values) = io::read_two_column_csv(payoff)?;
    let grid = grid_from_samples(&xs)?;
    let u0 = SolutionSlice::new(grid.clone(), values, 0.0)?;

    let mut results: Vec<(String, SolutionSlice)> = Vec::new();
    for method in methods {
        let out = match method.as_str() {
            "spectral" => propagate(&u0, h, sigma, tau)?,
            m => {
                let order = m
                    .strip_prefix("kramers-moyal:")
                    .or_else(|| m.strip_prefix("kramers_moyal:"))
                    .ok_or_else(|| {
                        Error::InvalidParameter(format!(
                            "unknown method '{m}' (expected spectral or kramers-moyal:N)"
                        ))
                    })?
                    .parse::<usize>()
                    .map_err(|_| {
                        Error::InvalidParameter(format!("bad truncation order in '{m}'"))
                    })?;
                let pde = kramers_moyal_numeric(h, sigma, order)?;
                solve_kramers_moyal(&u0, &pde, tau, None)?
            }
        };
        results.push((method.clone(), out));
    }

    if results.len() > 1 {
        let a = &results[0].1;
        for (name, b) in &results[1..] {
            let sup = a
                .values
                .iter()
                .zip(&b.values)
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            println!("disagreement {} vs {}: {sup:.6e}", results[0].0, name);
        }
    }

    let (_, first) = &results[0];
    match output {
        Some(path) => io::write_two_column_csv(path, ("x", "value"), &grid.xs(), &first.values),
        None => {
            for (x, v) in grid.xs().iter().zip(&first.values) {
                println!("{x:.16e},{v:.16e}");
            }
            Ok(())
        }
    }
}

fn grid_from_samples(xs: &[f64]) -> Result<FourierGrid> {
    let n = xs.len();
    if !n.is_power_of_two() || n < 2 {
        return Err(Error::GridMismatch(format!(
            "payoff grid needs a power-of-two point count, got {n}"
        )));
    }
    let dx = xs[1] - xs[0];
    let grid = FourierGrid::new(n, dx)?;
    for (i, &x) in xs.iter().enumerate() {
        if (x - grid.x(i)).abs() > 1e-9 * dx.max(1.0) {
            return Err(Error::GridMismatch(format!(
                "payoff abscissae must be uniform and centered: x[{i}] = {x}, expected {}",
                grid.x(i)
            )));
        }
    }
    Ok(grid)
}

const ASSOCIATIVITY_TOL: f64 = 1e-8;
const REPRESENTATION_TOL: f64 = 1e-8;
const UNIT_TOL: f64 = 1e-12;

pub fn algebra_check(
    fixture: Option<&Path>,
    grid_n: usize,
    seed: u64,
    output: Option<&Path>,
) -> Result<()> {
    let (a, b, c) = load_operators(fixture, grid_n)?;
    let grid = a.grid.clone();

    let id = NonlocalOperator::identity(grid.clone());
    let unit_defect = id
        .compose(&a)?
        .action_sup_distance(&a)?
        .max(a.compose(&id)?.action_sup_distance(&a)?);

    let lhs = a.compose(&b.compose(&c)?)?;
    let rhs = a.compose(&b)?.compose(&c)?;
    let associativity_defect = lhs.kernel_sup_distance(&rhs)?;

    // representation: (AB)ψ vs A(Bψ) on a smooth state
    let psi_values: Vec<_> = grid
        .xs()
        .iter()
        .map(|&x| num_complex::Complex64::new((-0.5 * x * x).exp(), 0.0))
        .collect();
    let psi = nlkbe::operator::StateVector::new(grid.clone(), psi_values)?;
    let representation_defect = a
        .compose(&b)?
        .apply(&psi)?
        .sup_distance(&a.apply(&b.apply(&psi)?)?);

    let noncommutativity = a
        .compose(&b)?
        .action_sup_distance(&b.compose(&a)?)?;

    let norm_a = a.operator_norm_estimate(50, seed)?;

    let pass = unit_defect <= UNIT_TOL
        && associativity_defect <= ASSOCIATIVITY_TOL
        && representation_defect <= REPRESENTATION_TOL
        && noncommutativity > 10.0 * ASSOCIATIVITY_TOL;

    let doc = json!({
        "grid": {"n": grid.n(), "L": grid.len()},
        "unit_defect": unit_defect,
        "associativity_defect": associativity_defect,
        "representation_defect": representation_defect,
        "noncommutativity": noncommutativity,
        "norm_estimate_a": norm_a,
        "tolerances": {
            "unit": UNIT_TOL,
            "associativity": ASSOCIATIVITY_TOL,
            "representation": REPRESENTATION_TOL,
        },
        "pass": pass,
    });
    emit_json(&doc, output)?;
    if pass {
        Ok(())
    } else {
        Err(Error::GridMismatch(
            "algebra tolerances not met; see report".into(),
        ))
    }
}

fn load_operators(
    fixture: Option<&Path>,
    grid_n: usize,
) -> Result<(NonlocalOperator, NonlocalOperator, NonlocalOperator)> {
    match fixture {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let doc: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("fixture file: {e}")))?;
            let list = doc["operators"]
                .as_array()
                .ok_or_else(|| Error::Parse("fixture file needs an 'operators' array".into()))?;
            if list.len() < 2 {
                return Err(Error::Parse("need at least two operator fixtures".into()));
            }
            let ops: Vec<NonlocalOperator> = list
                .iter()
                .map(|v| OperatorFixture::from_json(v)?.build())
                .collect::<Result<_>>()?;
            let a = ops[0].clone();
            let b = ops[1].clone();
            let c = ops.get(2).cloned().unwrap_or_else(|| a.clone());
            Ok((a, b, c))
        }
        None => default_operators(grid_n),
    }
}

/// Built-in bandlimited fixture triple on an L=16 grid.
pub fn default_operators(
    grid_n: usize,
) -> Result<(NonlocalOperator, NonlocalOperator, NonlocalOperator)> {
    let grid = FourierGrid::with_length(grid_n, 16.0)?;
    let n = grid.n();
    let dx = grid.dx();
    let a = OperatorFixture {
        n,
        dx,
        symbol: grid.xs().iter().map(|&x| (x, 0.0)).collect(),
        kernel: KernelSpec::Gaussian { eps: 0.3 },
    }
    .build()?;
    let b = OperatorFixture {
        n,
        dx,
        symbol: grid.xs().iter().map(|&x| ((0.7 * x).sin(), 0.0)).collect(),
        kernel: KernelSpec::GaussianVarying {
            eps0: 0.35,
            eps1: 0.15,
        },
    }
    .build()?;
    let c = OperatorFixture {
        n,
        dx,
        symbol: grid
            .xs()
            .iter()
            .map(|&x| ((-0.1 * x * x).exp(), 0.0))
            .collect(),
        kernel: KernelSpec::Gaussian { eps: 0.25 },
    }
    .build()?;
    Ok((a, b, c))
}

pub fn gauge(
    eps_list: &str,
    v_csv: Option<&Path>,
    sigma: f64,
    output: Option<&Path>,
) -> Result<()> {
    let eps_values: Vec<f64> = eps_list
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad epsilon '{s}'")))
        })
        .collect::<Result<_>>()?;
    if eps_values.is_empty() {
        return Err(Error::InvalidParameter("empty epsilon list".into()));
    }

    let v = match v_csv {
        Some(path) => {
            let (xs, vs) = io::read_two_column_csv(path)?;
            GaugePotential::from_samples(xs, vs)?
        }
        None => GaugePotential::from_fn(|x| x.sin(), -6.0, 6.0, 2001)?,
    };

    let xdots = linspace(-1.5, 1.5, 60);
    let xs = linspace(-5.0, 5.0, 60);
    use rayon::prelude::*;
    let violations: Vec<f64> = eps_values
        .par_iter()
        .map(|&eps| {
            let cfg = GaugeConfig::new(sigma, eps, v.clone())?;
            translation_violation(&cfg, &xdots, &xs)
        })
        .collect::<Result<_>>()?;

    for (eps, viol) in eps_values.iter().zip(&violations) {
        println!("eps {eps} violation {viol:.12e}");
    }
    if let Some(path) = output {
        io::write_two_column_csv(path, ("eps", "sup_violation"), &eps_values, &violations)?;
    }
    Ok(())
}
