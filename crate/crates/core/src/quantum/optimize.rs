//! Quantum maximum of a Bell functional for two qubits.
//!
//! For fixed measurements the best state is the top eigenvector of the Bell
//! operator, so the search runs over measurement angles only, with the top
//! eigenvalue as objective. Nelder–Mead from random starts does the search.

use rand::Rng;
use rayon::prelude::*;

use super::bell::{bell_operator_from_weights, BellCoefficients};
use super::operator::DensityOperator;
use super::strategy::{Measurement, QuantumStrategy};
use crate::error::Result;
use crate::rng::{Domain, Streams};
use crate::sources::{InputDistribution, MdlParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadConfig {
    /// Stop once every vertex is within this distance of the best one.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub initial_step: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 20_000,
            initial_step: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` with the standard Nelder–Mead moves (reflection 1,
/// expansion 2, contraction 1/2, shrink 1/2) from an axis-aligned simplex.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], cfg: &NelderMeadConfig) -> NelderMeadResult {
    let dim = x0.len();
    assert!(dim >= 1, "need at least one parameter");
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += cfg.initial_step;
        let v = f(&x);
        simplex.push((x, v));
    }

    let diameter = |s: &[(Vec<f64>, f64)]| {
        s[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&s[0].0)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if diameter(&simplex) < cfg.tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let worst = simplex[dim].clone();
        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(x, _)| x[j]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };

        let xr = along(1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = f(&xe);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = along(0.5);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < worst.1.min(fr) {
            simplex[dim] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for (x, v) in simplex.iter_mut().skip(1) {
            for (xi, bi) in x.iter_mut().zip(&best) {
                *xi = bi + 0.5 * (*xi - bi);
            }
            *v = f(x);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        value,
        iterations,
        converged,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub seed: u64,
    pub nelder_mead: NelderMeadConfig,
    /// Search full Bloch-sphere directions (8 parameters) instead of the x–z plane (4).
    pub full_bloch: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: 0x5eed,
            nelder_mead: NelderMeadConfig::default(),
            full_bloch: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellOptimum {
    /// Top Bell-operator eigenvalue at the best measurements.
    pub value: f64,
    /// Pure top-eigenvector state with the best measurements.
    pub strategy: QuantumStrategy,
    /// Whether the winning restart met the simplex tolerance.
    pub converged: bool,
    pub restarts_converged: usize,
    pub best_restart: usize,
}

fn measurements_from(params: &[f64], full_bloch: bool) -> [Measurement; 4] {
    std::array::from_fn(|k| {
        if full_bloch {
            Measurement::bloch(params[2 * k], params[2 * k + 1])
        } else {
            Measurement::xz(params[k])
        }
    })
}

/// Maximizes the quantum value of `coeffs` over two-qubit strategies.
/// Restarts run in parallel; the largest value wins, ties to the lowest restart index.
pub fn maximize_bell(
    coeffs: &BellCoefficients,
    inputs: Option<&InputDistribution>,
    config: &OptimizerConfig,
) -> Result<BellOptimum> {
    let weights = coeffs.conditional_weights(inputs)?;
    let dim = if config.full_bloch { 8 } else { 4 };
    let streams = Streams::new(config.seed);
    let objective = |p: &[f64]| -> f64 {
        -bell_operator_from_weights(&weights, &measurements_from(p, config.full_bloch)).max_eigenvalue()
    };

    let runs: Vec<NelderMeadResult> = (0..config.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = streams.at(Domain::Optimizer, r as u64);
            let x0: Vec<f64> = (0..dim)
                .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect();
            nelder_mead(objective, &x0, &config.nelder_mead)
        })
        .collect();

    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.value < runs[best].value {
            best = i;
        }
    }
    let measurements = measurements_from(&runs[best].x, config.full_bloch);
    let (value, vector) = bell_operator_from_weights(&weights, &measurements).top_eigenpair();
    let strategy = QuantumStrategy::new(
        DensityOperator::pure(&vector)?,
        [measurements[0], measurements[1]],
        [measurements[2], measurements[3]],
    )?;
    Ok(BellOptimum {
        value,
        strategy,
        converged: runs[best].converged,
        restarts_converged: runs.iter().filter(|r| r.converged).count(),
        best_restart: best,
    })
}

/// Quantum maximum `S̃*_μ` of the source-independent MDL functional, a
/// certified lower bound on the source-dependent maximum of `S_μ`.
pub fn optimize_s_tilde(params: &MdlParams, config: &OptimizerConfig) -> Result<BellOptimum> {
    maximize_bell(&BellCoefficients::s_mu_tilde(params), None, config)
}

/// Largest single-round entropy certifiable for `params`: the bound
/// evaluated at the quantum maximum of `S̃_μ`. Returns `(S̃*, entropy)`.
pub fn max_entropy(params: &MdlParams, config: &OptimizerConfig) -> Result<(f64, f64)> {
    let s = optimize_s_tilde(params, config)?.value.max(0.0);
    Ok((s, crate::rates::single_round_bound(s, params)?))
}
