//! Bell functionals on 2-input/2-output behaviors and their Bell operators.

use super::operator::{CMatrix, Operator};
use super::strategy::{indices, Behavior, Measurement};
use crate::error::{Error, Result};
use crate::sources::{InputDistribution, MdlParams};

/// How coefficients pair with a behavior: against `P(ab|xy)` or against
/// the joint `P(abxy) = P(ab|xy)·P_XY(xy)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientMode {
    Conditional,
    Joint,
}

/// Coefficients `c(a,b,x,y)` of a linear Bell functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellCoefficients {
    pub c: [[[[f64; 2]; 2]; 2]; 2],
    pub mode: CoefficientMode,
}

/// The four "MDL" events: a win at (0,0,0,0) and losses at the other three, all as `(a,b,x,y)`.
const WIN: (usize, usize, usize, usize) = (0, 0, 0, 0);
const LOSSES: [(usize, usize, usize, usize); 3] = [(0, 1, 0, 1), (1, 0, 1, 0), (0, 0, 1, 1)];

impl BellCoefficients {
    pub fn new(c: [[[[f64; 2]; 2]; 2]; 2], mode: CoefficientMode) -> Result<Self> {
        if c.iter().flatten().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Argument("non-finite Bell coefficient".into()));
        }
        Ok(Self { c, mode })
    }

    pub fn zero() -> Self {
        Self {
            c: [[[[0.0; 2]; 2]; 2]; 2],
            mode: CoefficientMode::Conditional,
        }
    }

    fn win_loss(win: f64, loss: f64, mode: CoefficientMode) -> Self {
        let mut c = [[[[0.0; 2]; 2]; 2]; 2];
        c[WIN.0][WIN.1][WIN.2][WIN.3] = win;
        for (a, b, x, y) in LOSSES {
            c[a][b][x][y] = -loss;
        }
        Self { c, mode }
    }

    /// `(−1)^{a+b+xy}`, conditional.
    pub fn chsh() -> Self {
        let mut c = [[[[0.0; 2]; 2]; 2]; 2];
        for (a, b, x, y) in indices() {
            c[a][b][x][y] = if (a + b + x * y) % 2 == 0 { 1.0 } else { -1.0 };
        }
        Self {
            c,
            mode: CoefficientMode::Conditional,
        }
    }

    pub fn eberhard() -> Self {
        Self::win_loss(1.0, 1.0, CoefficientMode::Conditional)
    }

    /// The MDL functional `S_μ`, joint mode.
    pub fn s_mu(params: &MdlParams) -> Self {
        Self::win_loss(params.mu_min(), params.mu_max(), CoefficientMode::Joint)
    }

    /// The source-independent lower bound `S̃_μ`, conditional mode.
    pub fn s_mu_tilde(params: &MdlParams) -> Self {
        Self::win_loss(
            params.mu_min() * params.mu_min(),
            params.mu_max() * params.mu_max(),
            CoefficientMode::Conditional,
        )
    }

    /// Coefficients that act on conditional probabilities: joint-mode
    /// coefficients get the input weights folded in.
    pub fn conditional_weights(&self, inputs: Option<&InputDistribution>) -> Result<[[[[f64; 2]; 2]; 2]; 2]> {
        match self.mode {
            CoefficientMode::Conditional => Ok(self.c),
            CoefficientMode::Joint => {
                let q = inputs
                    .ok_or_else(|| Error::Argument("joint-mode coefficients need an input distribution".into()))?;
                let mut w = self.c;
                for (a, b, x, y) in indices() {
                    w[a][b][x][y] *= q.get(x as u8, y as u8);
                }
                Ok(w)
            }
        }
    }

    pub fn evaluate(&self, behavior: &Behavior, inputs: Option<&InputDistribution>) -> Result<f64> {
        let w = self.conditional_weights(inputs)?;
        let t = behavior.table();
        Ok(indices().map(|(a, b, x, y)| w[a][b][x][y] * t[a][b][x][y]).sum())
    }

    /// Same functional after flipping Alice's outcome labels.
    pub fn relabel_alice_outcomes(&self) -> Self {
        let mut c = self.c;
        for (a, b, x, y) in indices() {
            c[a][b][x][y] = self.c[1 - a][b][x][y];
        }
        Self { c, mode: self.mode }
    }

    pub fn relabel_bob_outcomes(&self) -> Self {
        let mut c = self.c;
        for (a, b, x, y) in indices() {
            c[a][b][x][y] = self.c[a][1 - b][x][y];
        }
        Self { c, mode: self.mode }
    }
}

/// `β = Σ (−1)^{a+b+xy} P(ab|xy)`.
pub fn chsh_beta(b: &Behavior) -> f64 {
    BellCoefficients::chsh().evaluate(b, None).expect("conditional")
}

/// `α = P(00|00) − P(01|01) − P(10|10) − P(00|11)`.
pub fn eberhard_alpha(b: &Behavior) -> f64 {
    BellCoefficients::eberhard().evaluate(b, None).expect("conditional")
}

/// `S_μ = μ_min·P(0000) − μ_max·(P(0101) + P(1010) + P(0011))` with joint
/// probabilities taken under `inputs`, which must lie in the μ-box.
pub fn s_mu(b: &Behavior, inputs: &InputDistribution, params: &MdlParams) -> Result<f64> {
    inputs.check_box(params)?;
    BellCoefficients::s_mu(params).evaluate(b, Some(inputs))
}

/// `S̃_μ = μ_min²·P(00|00) − μ_max²·(P(01|01) + P(10|10) + P(00|11))`.
pub fn s_mu_tilde(b: &Behavior, params: &MdlParams) -> f64 {
    BellCoefficients::s_mu_tilde(params)
        .evaluate(b, None)
        .expect("conditional")
}

/// Per-round score `C_i`: μ_min on a win, −μ_max on a loss, 0 otherwise.
pub fn winning_value(a: u8, b: u8, x: u8, y: u8, params: &MdlParams) -> f64 {
    match (a, b, x, y) {
        (0, 0, 0, 0) => params.mu_min(),
        (0, 1, 0, 1) | (1, 0, 1, 0) | (0, 0, 1, 1) => -params.mu_max(),
        _ => 0.0,
    }
}

/// `𝓑 = Σ c(a,b,x,y) Pᵃ_x ⊗ Pᵇ_y` for measurements `[A0, A1, B0, B1]`.
/// Joint-mode coefficients need `inputs`.
pub fn bell_operator(
    coeffs: &BellCoefficients,
    measurements: &[Measurement; 4],
    inputs: Option<&InputDistribution>,
) -> Result<Operator> {
    let w = coeffs.conditional_weights(inputs)?;
    Ok(bell_operator_from_weights(&w, measurements))
}

pub(crate) fn bell_operator_from_weights(w: &[[[[f64; 2]; 2]; 2]; 2], measurements: &[Measurement; 4]) -> Operator {
    let proj = |m: &Measurement| [m.projector(0), m.projector(1)];
    let alice = [proj(&measurements[0]), proj(&measurements[1])];
    let bob = [proj(&measurements[2]), proj(&measurements[3])];
    let mut op = Operator::zeros(4);
    for (a, b, x, y) in indices() {
        let coef = w[a][b][x][y];
        if coef != 0.0 {
            let term: CMatrix = alice[x][a].kronecker(&bob[y][b]);
            op.add_scaled_in_place(&term, coef);
        }
    }
    op
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::strategy::{born_behavior, QuantumStrategy};
    use std::f64::consts::SQRT_2;

    #[test]
    fn chsh_examples() {
        assert!((chsh_beta(&Behavior::deterministic([0, 0], [0, 0])) - 2.0).abs() < 1e-15);
        assert!(chsh_beta(&Behavior::uniform()).abs() < 1e-15);
        let b = born_behavior(&QuantumStrategy::chsh_optimal()).unwrap();
        assert!((chsh_beta(&b) - 2.0 * SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn eberhard_examples() {
        assert!((eberhard_alpha(&Behavior::uniform()) + 0.5).abs() < 1e-15);
        let b = born_behavior(&QuantumStrategy::chsh_optimal()).unwrap();
        assert!((eberhard_alpha(&b) - (SQRT_2 - 1.0) / 2.0).abs() < 1e-6);
        assert!((eberhard_alpha(&b) - (chsh_beta(&b) / 4.0 - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn s_mu_examples() {
        let p = MdlParams::uniform();
        let q = InputDistribution::uniform();
        assert!((s_mu(&Behavior::uniform(), &q, &p).unwrap() + 1.0 / 32.0).abs() < 1e-15);
        let opt = born_behavior(&QuantumStrategy::chsh_optimal()).unwrap();
        let v = s_mu(&opt, &q, &p).unwrap();
        assert!((v - (SQRT_2 - 1.0) / 32.0).abs() < 1e-12);
        assert!((v - 0.012944).abs() < 1e-6);
        // A behavior with P(00|00) = 0 and no losses: a = 1 on x = 0, a = b = 1 on (1,1).
        let b = Behavior::deterministic([1, 1], [1, 1]);
        let p2 = MdlParams::new(0.1, 0.5).unwrap();
        let q2 = InputDistribution::new([[0.1, 0.4], [0.4, 0.1]]).unwrap();
        assert_eq!(s_mu(&b, &q2, &p2).unwrap(), 0.0);
    }

    #[test]
    fn s_mu_rejects_inputs_outside_box() {
        let p = MdlParams::new(0.2, 0.3).unwrap();
        let q = InputDistribution::new([[0.7, 0.1], [0.1, 0.1]]).unwrap();
        assert!(matches!(s_mu(&Behavior::uniform(), &q, &p), Err(Error::Constraint(_))));
    }

    #[test]
    fn s_mu_tilde_examples() {
        let p = MdlParams::uniform();
        assert!((s_mu_tilde(&Behavior::uniform(), &p) + 1.0 / 32.0).abs() < 1e-15);
        let opt = born_behavior(&QuantumStrategy::chsh_optimal()).unwrap();
        assert!((s_mu_tilde(&opt, &p) - (SQRT_2 - 1.0) / 32.0).abs() < 1e-12);
        let p0 = MdlParams::new(0.0, 0.6).unwrap();
        assert!(s_mu_tilde(&opt, &p0) <= 0.0);
        assert!(s_mu_tilde(&Behavior::uniform(), &p0) <= 0.0);
    }

    #[test]
    fn winning_function_table() {
        let p = MdlParams::new(0.2, 0.4).unwrap();
        assert_eq!(winning_value(0, 0, 0, 0, &p), 0.2);
        assert_eq!(winning_value(0, 0, 1, 1, &p), -0.4);
        assert_eq!(winning_value(0, 1, 0, 1, &p), -0.4);
        assert_eq!(winning_value(1, 0, 1, 0, &p), -0.4);
        assert_eq!(winning_value(1, 1, 1, 1, &p), 0.0);
    }

    #[test]
    fn bell_operator_examples() {
        let m = QuantumStrategy::chsh_optimal().measurements();
        let zero = bell_operator(&BellCoefficients::zero(), &m, None).unwrap();
        assert!(zero.matrix().norm() == 0.0);
        let chsh = bell_operator(&BellCoefficients::chsh(), &m, None).unwrap();
        assert!(chsh.is_hermitian(1e-12));
        assert!((chsh.max_eigenvalue() - 2.0 * SQRT_2).abs() < 1e-12);
        let st = bell_operator(&BellCoefficients::s_mu_tilde(&MdlParams::uniform()), &m, None).unwrap();
        assert!((st.max_eigenvalue() - (SQRT_2 - 1.0) / 32.0).abs() < 1e-12);
    }

    #[test]
    fn joint_mode_requires_inputs() {
        let m = QuantumStrategy::chsh_optimal().measurements();
        let coeffs = BellCoefficients::s_mu(&MdlParams::uniform());
        assert!(bell_operator(&coeffs, &m, None).is_err());
        let op = bell_operator(&coeffs, &m, Some(&InputDistribution::uniform())).unwrap();
        assert!((op.max_eigenvalue() - (SQRT_2 - 1.0) / 32.0).abs() < 1e-12);
    }

    #[test]
    fn non_finite_coefficients_rejected() {
        let mut c = [[[[0.0; 2]; 2]; 2]; 2];
        c[1][0][1][0] = f64::NAN;
        assert!(BellCoefficients::new(c, CoefficientMode::Conditional).is_err());
    }
}
