//! Exact classical (local hidden variable) maximum of joint-mode functionals
//! when the adversary also picks the input distribution from the μ-box.
//!
//! Both the local polytope and the input polytope are enumerated by their
//! vertices: the 16 deterministic strategies and the vertices of
//! `{q ∈ simplex : μ_min ≤ q(xy) ≤ μ_max}`. The objective is bilinear, so the
//! maximum sits on a pair of vertices. Shared randomness cannot help: the
//! adversary's mixture is a convex combination of such pairs.

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::bell::{winning_value, BellCoefficients};
use super::strategy::Behavior;
use crate::error::{Error, Result};
use crate::sources::{InputDistribution, MdlParams};

const VERTEX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LhvOptimum {
    pub value: f64,
    /// Alice answers `alice[x]`, Bob answers `bob[y]`.
    pub alice: [u8; 2],
    pub bob: [u8; 2],
    pub inputs: InputDistribution,
}

/// All 16 deterministic local strategies as `(alice, bob)` response tables.
pub fn deterministic_strategies() -> impl Iterator<Item = ([u8; 2], [u8; 2])> {
    (0u8..16).map(|k| ([k >> 3 & 1, k >> 2 & 1], [k >> 1 & 1, k & 1]))
}

/// Vertices of the μ-box intersected with the probability simplex: three
/// coordinates pinned to a bound, the fourth fixed by normalization.
pub fn box_vertices(params: &MdlParams) -> Vec<InputDistribution> {
    let (lo, hi) = (params.mu_min(), params.mu_max());
    let mut out: Vec<[f64; 4]> = Vec::new();
    for free in 0..4 {
        for mask in 0..8u8 {
            let mut q = [0.0; 4];
            let mut bit = 0;
            for (i, qi) in q.iter_mut().enumerate() {
                if i == free {
                    continue;
                }
                *qi = if mask >> bit & 1 == 1 { hi } else { lo };
                bit += 1;
            }
            let rest: f64 = q.iter().sum();
            q[free] = 1.0 - rest;
            if q[free] < lo - VERTEX_TOL || q[free] > hi + VERTEX_TOL {
                continue;
            }
            q[free] = q[free].clamp(lo, hi);
            if !out
                .iter()
                .any(|v| v.iter().zip(&q).all(|(a, b)| (a - b).abs() <= VERTEX_TOL))
            {
                out.push(q);
            }
        }
    }
    out.into_iter()
        .filter_map(|q| {
            // Renormalize away the clamp's rounding.
            let s: f64 = q.iter().sum();
            InputDistribution::new([[q[0] / s, q[1] / s], [q[2] / s, q[3] / s]]).ok()
        })
        .collect()
}

/// Classical maximum of a joint-mode functional over deterministic strategies
/// and the vertices of the μ-box. Ties keep the first strategy/vertex found.
pub fn lhv_max(coeffs: &BellCoefficients, params: &MdlParams) -> Result<LhvOptimum> {
    let vertices = box_vertices(params);
    if vertices.is_empty() {
        return Err(Error::Constraint(format!(
            "μ-box [{}, {}] admits no normalized distribution",
            params.mu_min(),
            params.mu_max()
        )));
    }
    let mut best: Option<LhvOptimum> = None;
    for (alice, bob) in deterministic_strategies() {
        let behavior = Behavior::deterministic(alice, bob);
        for q in &vertices {
            let value = coeffs.evaluate(&behavior, Some(q))?;
            if best.is_none_or(|b| value > b.value) {
                best = Some(LhvOptimum {
                    value,
                    alice,
                    bob,
                    inputs: *q,
                });
            }
        }
    }
    Ok(best.expect("non-empty search"))
}

/// Classical maximum of `S_μ`; never positive.
///
/// Evaluated in exact rational arithmetic over the μ-box vertices, so the
/// zero maximum is returned as `0.0` rather than a rounding residue.
pub fn lhv_max_s_mu(params: &MdlParams) -> Result<f64> {
    if params.mu_max() <= 0.0 {
        return Err(Error::Constraint("μ_max must be positive".into()));
    }
    let exact = |v: f64| BigRational::from_float(v).expect("finite μ");
    let (lo, hi) = (exact(params.mu_min()), exact(params.mu_max()));
    let one = BigRational::one();

    let mut vertices: Vec<[BigRational; 4]> = Vec::new();
    for free in 0..4 {
        for mask in 0..8u8 {
            let mut q: [BigRational; 4] = std::array::from_fn(|_| BigRational::zero());
            let mut bit = 0;
            for (i, qi) in q.iter_mut().enumerate() {
                if i != free {
                    *qi = if mask >> bit & 1 == 1 { hi.clone() } else { lo.clone() };
                    bit += 1;
                }
            }
            let rest: BigRational = q.iter().sum();
            q[free] = &one - rest;
            if q[free] >= lo && q[free] <= hi && !vertices.contains(&q) {
                vertices.push(q);
            }
        }
    }
    if vertices.is_empty() {
        return Err(Error::Constraint(format!(
            "μ-box [{}, {}] admits no normalized distribution",
            params.mu_min(),
            params.mu_max()
        )));
    }

    let mut best: Option<BigRational> = None;
    for (alice, bob) in deterministic_strategies() {
        let weights: [BigRational; 4] = std::array::from_fn(|k| {
            let (x, y) = ((k >> 1) as u8, (k & 1) as u8);
            exact(winning_value(alice[x as usize], bob[y as usize], x, y, params))
        });
        for q in &vertices {
            let value: BigRational = q.iter().zip(&weights).map(|(q, w)| q * w).sum();
            if best.as_ref().is_none_or(|b| value > *b) {
                best = Some(value);
            }
        }
    }
    Ok(best.expect("non-empty search").to_f64().expect("bounded rational"))
}
