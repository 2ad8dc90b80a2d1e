use num_complex::Complex64;

use super::operator::{c, CMatrix, DensityOperator};
use crate::error::{Error, Result};
use crate::sources::{InputDistribution, INPUT_PAIRS};

const NORM_TOL: f64 = 1e-10;

/// Projective ±1 qubit measurement along the Bloch direction with polar angle
/// `angle` (from Z towards X) and azimuth `azimuth` (0 keeps it in the x–z plane).
/// Outcome 0 is the +1 eigenprojector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub angle: f64,
    pub azimuth: f64,
}

impl Measurement {
    /// Measurement of `cos θ·Z + sin θ·X`.
    pub fn xz(angle: f64) -> Self {
        Self { angle, azimuth: 0.0 }
    }

    pub fn bloch(angle: f64, azimuth: f64) -> Self {
        Self { angle, azimuth }
    }

    /// Bloch vector `(n_x, n_y, n_z)`.
    pub fn direction(&self) -> [f64; 3] {
        let (s, c) = self.angle.sin_cos();
        [s * self.azimuth.cos(), s * self.azimuth.sin(), c]
    }

    /// `(I + (−1)^outcome · n·σ) / 2`.
    pub fn projector(&self, outcome: u8) -> CMatrix {
        let [nx, ny, nz] = self.direction();
        let sign = if outcome == 0 { 1.0 } else { -1.0 };
        let h = 0.5 * sign;
        CMatrix::from_row_slice(
            2,
            2,
            &[
                c(0.5 + h * nz),
                Complex64::new(h * nx, -h * ny),
                Complex64::new(h * nx, h * ny),
                c(0.5 - h * nz),
            ],
        )
    }
}

/// Two-qubit state plus one measurement per input for each party.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumStrategy {
    pub state: DensityOperator,
    pub alice: [Measurement; 2],
    pub bob: [Measurement; 2],
}

impl QuantumStrategy {
    pub fn new(state: DensityOperator, alice: [Measurement; 2], bob: [Measurement; 2]) -> Result<Self> {
        if state.dim() != 4 {
            return Err(Error::InvalidState(format!(
                "strategy needs a two-qubit state, got dimension {}",
                state.dim()
            )));
        }
        Ok(Self { state, alice, bob })
    }

    /// `|Φ+⟩` with Alice measuring at {0, π/2} and Bob at {π/4, −π/4}.
    pub fn chsh_optimal() -> Self {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
        Self {
            state: DensityOperator::phi_plus(),
            alice: [Measurement::xz(0.0), Measurement::xz(FRAC_PI_2)],
            bob: [Measurement::xz(FRAC_PI_4), Measurement::xz(-FRAC_PI_4)],
        }
    }

    /// Measurements in the order `[A0, A1, B0, B1]`.
    pub fn measurements(&self) -> [Measurement; 4] {
        [self.alice[0], self.alice[1], self.bob[0], self.bob[1]]
    }
}

/// Conditional table `P(ab|xy)`, indexed `[a][b][x][y]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Behavior {
    p: [[[[f64; 2]; 2]; 2]; 2],
}

impl Behavior {
    #[allow(clippy::needless_range_loop)]
    pub fn new(p: [[[[f64; 2]; 2]; 2]; 2]) -> Result<Self> {
        for (x, y) in INPUT_PAIRS {
            let mut sum = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    let v = p[a][b][x as usize][y as usize];
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::Constraint(format!("P({a}{b}|{x}{y}) = {v}")));
                    }
                    sum += v;
                }
            }
            if (sum - 1.0).abs() > NORM_TOL {
                return Err(Error::Constraint(format!("P(·|{x}{y}) sums to {sum}")));
            }
        }
        Ok(Self { p })
    }

    pub fn uniform() -> Self {
        Self {
            p: [[[[0.25; 2]; 2]; 2]; 2],
        }
    }

    /// Local deterministic box: `a = alice[x]`, `b = bob[y]`.
    pub fn deterministic(alice: [u8; 2], bob: [u8; 2]) -> Self {
        let mut p = [[[[0.0; 2]; 2]; 2]; 2];
        for (x, y) in INPUT_PAIRS {
            p[alice[x as usize] as usize][bob[y as usize] as usize][x as usize][y as usize] = 1.0;
        }
        Self { p }
    }

    pub fn get(&self, a: u8, b: u8, x: u8, y: u8) -> f64 {
        self.p[a as usize][b as usize][x as usize][y as usize]
    }

    pub fn table(&self) -> &[[[[f64; 2]; 2]; 2]; 2] {
        &self.p
    }

    /// Convex mixture `(1−w)·self + w·other`.
    pub fn mix(&self, other: &Behavior, w: f64) -> Behavior {
        let mut p = self.p;
        for (a, b, x, y) in indices() {
            p[a][b][x][y] = (1.0 - w) * self.p[a][b][x][y] + w * other.p[a][b][x][y];
        }
        Behavior { p }
    }

    /// `P(a|x)` computed with Bob's input `y`.
    pub fn alice_marginal(&self, a: u8, x: u8, y: u8) -> f64 {
        self.get(a, 0, x, y) + self.get(a, 1, x, y)
    }

    pub fn bob_marginal(&self, b: u8, x: u8, y: u8) -> f64 {
        self.get(0, b, x, y) + self.get(1, b, x, y)
    }

    /// Largest signalling violation over both parties.
    pub fn signalling_gap(&self) -> f64 {
        let mut gap: f64 = 0.0;
        for o in 0..2 {
            for i in 0..2 {
                gap = gap.max((self.alice_marginal(o, i, 0) - self.alice_marginal(o, i, 1)).abs());
                gap = gap.max((self.bob_marginal(o, 0, i) - self.bob_marginal(o, 1, i)).abs());
            }
        }
        gap
    }

    /// Joint probability `P(abxy) = P(ab|xy)·P_XY(xy)`.
    pub fn joint(&self, a: u8, b: u8, x: u8, y: u8, inputs: &InputDistribution) -> f64 {
        self.get(a, b, x, y) * inputs.get(x, y)
    }
}

pub(crate) fn indices() -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..16).map(|k| ((k >> 3) & 1, (k >> 2) & 1, (k >> 1) & 1, k & 1))
}

/// Born-rule behavior `P(ab|xy) = Tr[(Pᵃ_x ⊗ Pᵇ_y) ρ]`.
pub fn born_behavior(strategy: &QuantumStrategy) -> Result<Behavior> {
    let state = DensityOperator::new(strategy.state.operator().clone())?;
    if state.dim() != 4 {
        return Err(Error::InvalidState(format!("dimension {} != 4", state.dim())));
    }
    let rho = state.operator().matrix();
    let mut p = [[[[0.0; 2]; 2]; 2]; 2];
    for (a, b, x, y) in indices() {
        let proj = strategy.alice[x]
            .projector(a as u8)
            .kronecker(&strategy.bob[y].projector(b as u8));
        p[a][b][x][y] = (proj * rho).trace().re.clamp(0.0, 1.0);
    }
    Behavior::new(p)
}
