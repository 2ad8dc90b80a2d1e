//! Two-source extraction by cyclic convolution over GF(2), the parameter lifts
//! to the Markov model and to smooth min-entropy, the output-length solver,
//! and a brute-force error oracle for tiny instances.
//!
//! Security of the convolution extractor is *assumed* under the sum rule
//! `k1 + k2 ≥ N + 2m + 2·log₂(1/ε)`. The rule is checked against
//! [`exact_error`] at toy sizes only.

use rayon::prelude::*;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::rng::{Domain, Streams};
use crate::sources::{seed_min_entropy, MdlParams};

/// Largest input length accepted by [`exact_error`].
pub const EXACT_MAX_N: usize = 8;
const FAMILY_SEED: u64 = 0xf1a7_5eed;
const RANDOM_SUBSETS: usize = 200;

/// First `m` bits of the cyclic convolution `out_j = ⊕_i x_i·z_{(j−i) mod N}`.
pub fn conv_extract(x: &BitString, z: &BitString, m: usize) -> Result<BitString> {
    let n = x.len();
    if z.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: z.len(),
        });
    }
    if m == 0 || m > n {
        return Err(Error::Argument(format!("output length {m} outside 1..={n}")));
    }

    // out_j = <x, rot_j(r)> with r_i = z_{(−i) mod N}. Doubling r turns every
    // rotation into a plain window read at bit offset N − j.
    let mut doubled = BitString::zeros(2 * n);
    for i in 0..n {
        if z.get((n - i) % n) {
            doubled.set(i, true);
            doubled.set(i + n, true);
        }
    }
    let rr = doubled.words();
    let xw = x.words();
    let bit = |j: usize| -> bool {
        let offset = n - j;
        let (q, r) = (offset / 64, offset % 64);
        let mut acc = 0u64;
        for (w, &xv) in xw.iter().enumerate() {
            let lo = rr[q + w] >> r;
            let hi = if r == 0 {
                0
            } else {
                rr.get(q + w + 1).map_or(0, |v| v << (64 - r))
            };
            acc ^= xv & (lo | hi);
        }
        acc.count_ones() & 1 == 1
    };
    let bits: Vec<bool> = (0..m).into_par_iter().map(bit).collect();
    Ok(bits.into_iter().collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractorParams {
    pub n1: usize,
    pub d: usize,
    pub m: usize,
    pub k1: f64,
    pub k2: f64,
    pub eps_ext: f64,
}

impl ExtractorParams {
    pub fn new(n1: usize, d: usize, m: usize, k1: f64, k2: f64, eps_ext: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Constraint("m must be at least 1".into()));
        }
        if k1 > n1 as f64 || k2 > d as f64 || k1 < 0.0 || k2 < 0.0 {
            return Err(Error::Constraint(format!(
                "entropies ({k1}, {k2}) exceed input lengths ({n1}, {d})"
            )));
        }
        if !(eps_ext > 0.0 && eps_ext < 1.0) {
            return Err(Error::Constraint(format!("eps_ext = {eps_ext} outside (0, 1)")));
        }
        Ok(Self {
            n1,
            d,
            m,
            k1,
            k2,
            eps_ext,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalRequirement {
    /// Symmetric split of the sum rule.
    pub k1: f64,
    pub k2: f64,
    /// `N + 2m + 2·log₂(1/ε)`, the quantity any admissible split must reach.
    pub total: f64,
    pub feasible: bool,
}

pub fn classical_requirement(n: usize, m: usize, eps: f64) -> Result<ClassicalRequirement> {
    if m == 0 || m > n {
        return Err(Error::Argument(format!("output length {m} outside 1..={n}")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Argument(format!("eps = {eps} outside (0, 1]")));
    }
    let total = n as f64 + 2.0 * m as f64 + 2.0 * (1.0 / eps).log2();
    let k = total / 2.0;
    Ok(ClassicalRequirement {
        k1: k,
        k2: k,
        total,
        feasible: k <= n as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftedParams {
    pub k1: f64,
    pub k2: f64,
    pub eps: f64,
    pub feasible: bool,
}

/// Classical `(k1, k2, ε)` extractor → Markov-model
/// `(k1 + log₂(1/ε), k2 + log₂(1/ε), √(3ε·2^{m−2}))`.
pub fn markov_lift(p: &ExtractorParams) -> LiftedParams {
    let log_inv = (1.0 / p.eps_ext).log2();
    let eps = (3.0 * p.eps_ext * 2f64.powi(p.m as i32 - 2)).sqrt();
    LiftedParams {
        k1: p.k1 + log_inv,
        k2: p.k2 + log_inv,
        eps,
        feasible: eps < 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothRequirement {
    pub k1_req: f64,
    pub k2_req: f64,
    pub final_error: f64,
}

/// Thresholds `k + log₂(1/ε) + 1` on the smooth (first) and plain (second)
/// min-entropies, with final error `6(ε_s + ε)`.
pub fn smooth_requirement(lifted: &LiftedParams, eps_s: f64) -> SmoothRequirement {
    let extra = (1.0 / lifted.eps).log2() + 1.0;
    SmoothRequirement {
        k1_req: lifted.k1 + extra,
        k2_req: lifted.k2 + extra,
        final_error: 6.0 * (eps_s + lifted.eps),
    }
}

/// A feasible extraction: the classical parameters whose lifts fit both budgets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionPlan {
    /// Common input length `max(2n, d)`.
    pub n: usize,
    pub m: usize,
    pub k1: f64,
    pub k2: f64,
    /// `log₂(1/ε)` of the classical extractor; kept in log form since `ε` underflows for large `m`.
    pub log_inv_eps_classical: f64,
    /// Error of the Markov-model extractor.
    pub eps_markov: f64,
    /// `6(ε_s + ε_markov)`.
    pub final_error: f64,
}

fn plan_for(big_n: usize, m: usize, budget1: f64, budget2: f64, eps_ext: f64, eps_s: f64) -> Option<ExtractionPlan> {
    // ε_ext is the Markov-model error; the classical ε solves
    // √(3ε·2^{m−2}) = ε_ext.
    let log_inv_markov = (1.0 / eps_ext).log2();
    let log_inv_c = 2.0 * log_inv_markov + 3f64.log2() + m as f64 - 2.0;
    if log_inv_c < 0.0 {
        return None;
    }
    let slack = log_inv_c + log_inv_markov + 1.0;
    let cap1 = (budget1 - slack).min(big_n as f64);
    let cap2 = (budget2 - slack).min(big_n as f64);
    if cap1 < 0.0 || cap2 < 0.0 {
        return None;
    }
    let total = big_n as f64 + 2.0 * m as f64 + 2.0 * log_inv_c;
    if cap1 + cap2 < total {
        return None;
    }
    let k2 = cap2;
    let k1 = (total - k2).max(0.0);
    Some(ExtractionPlan {
        n: big_n,
        m,
        k1,
        k2,
        log_inv_eps_classical: log_inv_c,
        eps_markov: eps_ext,
        final_error: 6.0 * (eps_s + eps_ext),
    })
}

/// Largest feasible extraction for `n` rounds (a `2n`-bit raw string with
/// smooth min-entropy `n·η`) and a `d`-bit MDL seed.
pub fn plan_extraction(
    n: usize,
    eta: f64,
    d: usize,
    params: &MdlParams,
    eps_ext: f64,
    eps_s: f64,
) -> Option<ExtractionPlan> {
    if eta <= 0.0 || n == 0 || d == 0 || !(eps_ext > 0.0 && eps_ext < 1.0) {
        return None;
    }
    let big_n = (2 * n).max(d);
    let budget1 = n as f64 * eta;
    let budget2 = seed_min_entropy(d as u64, params);
    let feasible = |m: usize| plan_for(big_n, m, budget1, budget2, eps_ext, eps_s);
    // Requirements grow with m, so the feasible set is an initial segment.
    feasible(1)?;
    let (mut lo, mut hi) = (1, big_n);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if feasible(mid).is_some() {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    feasible(lo)
}

/// Output length of [`plan_extraction`]; 0 means nothing can be extracted.
pub fn output_length(n: usize, eta: f64, d: usize, params: &MdlParams, eps_ext: f64, eps_s: f64) -> usize {
    plan_extraction(n, eta, d, params, eps_ext, eps_s).map_or(0, |p| p.m)
}

fn conv_small(x: u32, z: u32, n: usize, m: usize) -> u32 {
    let mut out = 0;
    for j in 0..m {
        let mut bit = 0;
        for i in 0..n {
            bit ^= (x >> i) & (z >> ((j + n - i) % n)) & 1;
        }
        out |= bit << j;
    }
    out
}

/// Flat sources of size `2^k` on `{0,1}^N` (elements as little-endian
/// integers): every interval, then 200 random subsets from a fixed seed.
/// Sorted and deduplicated.
pub fn flat_source_family(n: usize, k: u32) -> Result<Vec<Vec<u32>>> {
    if n == 0 || n > EXACT_MAX_N {
        return Err(Error::Argument(format!("N = {n} outside 1..={EXACT_MAX_N}")));
    }
    if k as usize > n {
        return Err(Error::Argument(format!("k = {k} exceeds N = {n}")));
    }
    let universe = 1usize << n;
    let size = 1usize << k;
    let mut family: Vec<Vec<u32>> = (0..=universe - size)
        .map(|a| (a as u32..(a + size) as u32).collect())
        .collect();
    let mut rng = Streams::new(FAMILY_SEED)
        .child(Domain::Family, (n as u64) << 8 | k as u64)
        .at(Domain::Family, 0);
    for _ in 0..RANDOM_SUBSETS {
        let mut s: Vec<u32> = rand::seq::index::sample(&mut rng, universe, size)
            .into_iter()
            .map(|v| v as u32)
            .collect();
        s.sort_unstable();
        family.push(s);
    }
    family.sort();
    family.dedup();
    Ok(family)
}

/// Per-seed distances, scaled to integers: entry `z` is
/// `Σ_o |count_o·2^m − |A||`, so `d(z) = entry / (2·|A|·2^m)`.
fn scaled_seed_distances(x_set: &[u32], n: usize, m: usize) -> Vec<u64> {
    let outputs = 1usize << m;
    let a = x_set.len() as i64;
    (0..1u32 << n)
        .map(|z| {
            let mut counts = vec![0i64; outputs];
            for &x in x_set {
                counts[conv_small(x, z, n, m) as usize] += 1;
            }
            counts.iter().map(|&c| (c * outputs as i64 - a).unsigned_abs()).sum()
        })
        .collect()
}

/// Distance of `(Ext(X,Z), Z)` from `(U_m, Z)` for flat `X` on `x_set` and
/// flat `Z` on `z_set`: `Σ_z P(z)·½Σ_o |P(o|z) − 2^{−m}|`.
pub fn strong_distance(x_set: &[u32], z_set: &[u32], n: usize, m: usize) -> Result<f64> {
    if n == 0 || n > EXACT_MAX_N || m == 0 || m > n {
        return Err(Error::Argument(format!("need 1 <= m <= N <= {EXACT_MAX_N}")));
    }
    if x_set.is_empty() || z_set.is_empty() {
        return Err(Error::Argument("empty flat source".into()));
    }
    let table = scaled_seed_distances(x_set, n, m);
    Ok(mean_distance(&table, z_set, x_set.len(), m))
}

fn mean_distance(table: &[u64], z_set: &[u32], a: usize, m: usize) -> f64 {
    let sum: u64 = z_set.iter().map(|&z| table[z as usize]).sum();
    sum as f64 / (2.0 * a as f64 * (1u64 << m) as f64 * z_set.len() as f64)
}

/// Worst strong distance over pairs drawn from [`flat_source_family`] with
/// sizes `2^k1` and `2^k2`.
pub fn exact_error(n: usize, m: usize, k1: u32, k2: u32) -> Result<f64> {
    if m == 0 || m > n {
        return Err(Error::Argument(format!("output length {m} outside 1..={n}")));
    }
    let xs = flat_source_family(n, k1)?;
    let zs = flat_source_family(n, k2)?;
    let worst = xs
        .par_iter()
        .map(|x_set| {
            let table = scaled_seed_distances(x_set, n, m);
            zs.iter()
                .map(|z_set| mean_distance(&table, z_set, x_set.len(), m))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// Parses a sidecar header line `"N m"`.
pub fn parse_header(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace().map(str::parse::<usize>);
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(n)), Some(Ok(m)), None) => Ok((n, m)),
        _ => Err(Error::Argument(format!("bad header {line:?}, expected \"N m\""))),
    }
}
