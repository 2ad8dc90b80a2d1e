//! Entropy arithmetic: the single-round bound, the min-tradeoff function and
//! its linearization, the finite-size rate `η_opt`, and the Hoeffding
//! completeness bound.
//!
//! Logs are base 2 throughout. `μ* = μ_min·μ_max` and the critical violation
//! is `s_c = μ*·(√2−1)/2`, above which the single-round bound saturates at one bit.

use crate::error::{Error, Result};
use crate::sources::MdlParams;

const CLAMP_TOL: f64 = 1e-12;
const GRID_POINTS: usize = 200;

/// `(√2−1)/2`, the largest `S_μ/μ*` a quantum device can reach.
pub const ALPHA_CRITICAL: f64 = (std::f64::consts::SQRT_2 - 1.0) / 2.0;

/// Empirical distribution of the per-round score `C ∈ {μ_min, 0, −μ_max}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyDist {
    pub p_win: f64,
    pub p_lose: f64,
    pub p_zero: f64,
}

impl FrequencyDist {
    pub fn new(p_win: f64, p_lose: f64, p_zero: f64) -> Result<Self> {
        for (name, p) in [("p_win", p_win), ("p_lose", p_lose), ("p_zero", p_zero)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Constraint(format!("{name} = {p} outside [0, 1]")));
            }
        }
        let sum = p_win + p_lose + p_zero;
        if (sum - 1.0).abs() > CLAMP_TOL {
            return Err(Error::Constraint(format!("frequencies sum to {sum}")));
        }
        Ok(Self { p_win, p_lose, p_zero })
    }

    /// Frequencies of a tally `(wins, losses, zeros)`.
    pub fn from_counts(wins: u64, losses: u64, zeros: u64) -> Result<Self> {
        let total = wins + losses + zeros;
        if total == 0 {
            return Err(Error::Argument("empty tally".into()));
        }
        let t = total as f64;
        Ok(Self {
            p_win: wins as f64 / t,
            p_lose: losses as f64 / t,
            p_zero: zeros as f64 / t,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EatParams {
    pub n: u128,
    pub s_exp: f64,
    pub delta_est: f64,
    pub eps_s: f64,
    pub eps_ea: f64,
}

impl EatParams {
    pub fn new(n: u128, s_exp: f64, delta_est: f64, eps_s: f64, eps_ea: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Constraint("n must be at least 1".into()));
        }
        if !(delta_est > 0.0 && delta_est < s_exp) {
            return Err(Error::Constraint(format!(
                "need 0 < delta_est < s_exp, got delta_est = {delta_est}, s_exp = {s_exp}"
            )));
        }
        for (name, e) in [("eps_s", eps_s), ("eps_ea", eps_ea)] {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::Constraint(format!("{name} = {e} outside (0, 1)")));
            }
        }
        Ok(Self {
            n,
            s_exp,
            delta_est,
            eps_s,
            eps_ea,
        })
    }

    /// Abort threshold on the observed mean score.
    pub fn threshold(&self) -> f64 {
        self.s_exp - self.delta_est
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    pub eta_opt: f64,
    pub s_t_star: f64,
    pub hmin_bound: f64,
    pub a_star: f64,
    pub b_star: f64,
    pub zeta_star: f64,
}

impl RateResult {
    pub fn is_positive(&self) -> bool {
        self.eta_opt > 0.0
    }
}

fn mu_star(params: &MdlParams) -> Result<f64> {
    let m = params.mu_star();
    if m <= 0.0 {
        return Err(Error::Domain("μ_min = 0 certifies nothing: μ* = 0".into()));
    }
    Ok(m)
}

/// Largest violation for which the single-round bound is below one bit.
pub fn critical_violation(params: &MdlParams) -> f64 {
    params.mu_star() * ALPHA_CRITICAL
}

pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&x) {
        return Err(Error::Domain(format!("h({x}) undefined")));
    }
    let x = x.clamp(0.0, 1.0);
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    Ok(term(x) + term(1.0 - x))
}

/// Lower bound `α ≥ S_μ/μ*` on the Eberhard value implied by an MDL violation.
pub fn alpha_from_smu(s: f64, params: &MdlParams) -> f64 {
    s / params.mu_star()
}

/// `u(s) = 1/2 + √(s(s+μ*))/μ*`.
fn h_argument(s: f64, m: f64) -> f64 {
    0.5 + (s * (s + m)).sqrt() / m
}

/// `1 − h(1/2 + √(s(s+μ*))/μ*)`, saturating at 1 past `s_c`.
pub fn single_round_bound(s: f64, params: &MdlParams) -> Result<f64> {
    if s < 0.0 {
        return Err(Error::Domain(format!("negative violation {s}")));
    }
    g_mu(s, params)
}

/// The piecewise single-round bound. Negative `s` is treated as zero.
pub fn g_mu(s: f64, params: &MdlParams) -> Result<f64> {
    let m = mu_star(params)?;
    let s = s.max(0.0);
    if s / m >= ALPHA_CRITICAL - CLAMP_TOL {
        return Ok(1.0);
    }
    let u = h_argument(s, m).min(1.0);
    Ok(1.0 - binary_entropy(u)?)
}

fn check_cut(s_t: f64, m: f64) -> Result<()> {
    if !(s_t > 0.0 && s_t < m * ALPHA_CRITICAL) {
        return Err(Error::Domain(format!(
            "cut point {s_t} outside (0, {})",
            m * ALPHA_CRITICAL
        )));
    }
    Ok(())
}

/// Slope `a = g'(s_t)` and intercept `b = g(s_t) − a·s_t` of the tangent at `s_t`.
pub fn linearize(s_t: f64, params: &MdlParams) -> Result<(f64, f64)> {
    let m = mu_star(params)?;
    check_cut(s_t, m)?;
    let root = (s_t * (s_t + m)).sqrt();
    let u = 0.5 + root / m;
    let a = (u / (1.0 - u)).log2() * (2.0 * s_t + m) / (2.0 * m * root);
    let b = g_mu(s_t, params)? - a * s_t;
    Ok((a, b))
}

/// Min-tradeoff function: `g` up to `s_t`, its tangent line beyond.
pub fn f_min(s: f64, s_t: f64, params: &MdlParams) -> Result<f64> {
    let (a, b) = linearize(s_t, params)?;
    if s <= s_t {
        g_mu(s, params)
    } else {
        Ok(a * s + b)
    }
}

/// Second-order correction `2(log₂9 + a(s_t)·μ_max)·√(1 − 2·log₂(ε_s·ε_EA))`.
pub fn zeta(s_t: f64, eps_s: f64, eps_ea: f64, params: &MdlParams) -> Result<f64> {
    for e in [eps_s, eps_ea] {
        if !(e > 0.0 && e <= 1.0) {
            return Err(Error::Domain(format!("ε = {e} outside (0, 1]")));
        }
    }
    let (a, _) = linearize(s_t, params)?;
    Ok(zeta_from_slope(a, eps_s, eps_ea, params))
}

fn zeta_from_slope(a: f64, eps_s: f64, eps_ea: f64, params: &MdlParams) -> f64 {
    2.0 * (9f64.log2() + a * params.mu_max()) * (1.0 - 2.0 * (eps_s * eps_ea).log2()).sqrt()
}

/// Per-round rate at cut point `s_t`: `f_min(S_exp − δ_est, s_t) − ζ(s_t)/√n`.
pub fn rate_at(eat: &EatParams, s_t: f64, params: &MdlParams) -> Result<f64> {
    let (a, b) = linearize(s_t, params)?;
    let s = eat.threshold();
    let f = if s <= s_t { g_mu(s, params)? } else { a * s + b };
    Ok(f - zeta_from_slope(a, eat.eps_s, eat.eps_ea, params) / (eat.n as f64).sqrt())
}

/// Maximizes [`rate_at`] over the cut point: a 200-point grid locates the
/// bracket, golden-section search refines it.
pub fn eta_opt(eat: &EatParams, params: &MdlParams) -> Result<RateResult> {
    let m = mu_star(params)?;
    let eps_m = 1e-12 * m;
    let (lo, hi) = (eps_m, m * ALPHA_CRITICAL - eps_m);
    let objective = |s_t: f64| rate_at(eat, s_t, params);

    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let grid = |i: usize| if i == GRID_POINTS - 1 { hi } else { lo + step * i as f64 };
    let mut best_i = 0;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..GRID_POINTS {
        let v = objective(grid(i))?;
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }

    let mut a = grid(best_i.saturating_sub(1));
    let mut b = grid((best_i + 1).min(GRID_POINTS - 1));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (objective(c)?, objective(d)?);
    for _ in 0..200 {
        if (b - a) <= 1e-15 * hi {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d)?;
        }
    }

    let (mut s_t, mut eta) = if fc >= fd { (c, fc) } else { (d, fd) };
    if best_v > eta {
        s_t = grid(best_i);
        eta = best_v;
    }
    let (a_star, b_star) = linearize(s_t, params)?;
    Ok(RateResult {
        eta_opt: eta,
        s_t_star: s_t,
        hmin_bound: eat.n as f64 * eta,
        a_star,
        b_star,
        zeta_star: zeta_from_slope(a_star, eat.eps_s, eat.eps_ea, params),
    })
}

/// Hoeffding bound on the honest abort probability: `exp(−2nδ²/(μ_min+μ_max)²)`.
pub fn completeness_bound(n: u64, delta_est: f64, params: &MdlParams) -> f64 {
    let range = params.mu_min() + params.mu_max();
    (-2.0 * n as f64 * delta_est * delta_est / (range * range)).exp()
}

/// `δ_est` for which [`completeness_bound`] equals `target`.
pub fn delta_for_completeness(n: u64, target: f64, params: &MdlParams) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) || n == 0 {
        return Err(Error::Domain(format!("target {target}, n {n}")));
    }
    let range = params.mu_min() + params.mu_max();
    Ok(range * (-target.ln() / (2.0 * n as f64)).sqrt())
}

/// Expected score `μ_min·p_win − μ_max·p_lose`.
pub fn s_mu_of_freq(f: &FrequencyDist, params: &MdlParams) -> f64 {
    params.mu_min() * f.p_win - params.mu_max() * f.p_lose
}
