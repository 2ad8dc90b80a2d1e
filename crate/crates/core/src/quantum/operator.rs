use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    m: CMatrix,
}

impl Operator {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Argument(format!(
                "operator must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Argument("operator has non-finite entries".into()));
        }
        Ok(Self { m })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| (self.m[(i, j)] - self.m[(j, i)].conj()).norm() <= tol))
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    pub fn kron(&self, other: &Operator) -> Operator {
        Operator {
            m: self.m.kronecker(&other.m),
        }
    }

    /// Eigenvalues in ascending order; assumes Hermitian input.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.m.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Largest eigenvalue and a unit eigenvector for it; assumes Hermitian input.
    pub fn top_eigenpair(&self) -> (f64, CVector) {
        let eig = self.m.clone().symmetric_eigen();
        let (idx, val) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        (val, eig.eigenvectors.column(idx).into_owned())
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.m
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `⟨ψ|M|ψ⟩`, real part.
    pub fn expectation(&self, psi: &CVector) -> f64 {
        (psi.adjoint() * &self.m * psi)[(0, 0)].re
    }

    pub fn scaled(&self, s: f64) -> Operator {
        Operator { m: &self.m * c(s) }
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(Operator { m: &self.m + &other.m })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.add(&other.scaled(-1.0))
    }

    pub(crate) fn add_scaled_in_place(&mut self, other: &CMatrix, s: f64) {
        self.m += other * c(s);
    }
}

/// Positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: Operator,
}

impl DensityOperator {
    pub fn new(op: Operator) -> Result<Self> {
        if !op.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::InvalidState("operator is not Hermitian".into()));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let min = op.eigenvalues()[0];
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
        }
        Ok(Self { op })
    }

    /// `|ψ⟩⟨ψ|` for a normalizable vector; the vector is normalized first.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let psi = psi / c(norm);
        Self::new(Operator::new(&psi * psi.adjoint())?)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: Operator::identity(dim).scaled(1.0 / dim as f64),
        }
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn phi_plus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = CVector::from_vec(vec![c(s), c(0.0), c(0.0), c(s)]);
        Self::pure(&psi).expect("Φ+ is a valid state")
    }

    /// Computational basis state `|k⟩⟨k|` of dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = c(1.0);
        Self { op: Operator { m } }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn spectrum(&self) -> Vec<f64> {
        self.op.eigenvalues()
    }
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let diff = rho.op.sub(&sigma.op)?;
    let d = 0.5 * diff.eigenvalues().iter().map(|v| v.abs()).sum::<f64>();
    Ok(d.clamp(0.0, 1.0))
}

/// `(1−q)ρ + q·I/d`.
pub fn depolarize(rho: &DensityOperator, q: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("depolarizing weight {q} outside [0, 1]")));
    }
    let d = rho.dim();
    let op = rho
        .op
        .scaled(1.0 - q)
        .add(&Operator::identity(d).scaled(q / d as f64))?;
    Ok(DensityOperator { op })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_distance_examples() {
        let rho = DensityOperator::phi_plus();
        assert!(trace_distance(&rho, &rho).unwrap().abs() < 1e-12);
        let zero = DensityOperator::basis(2, 0);
        let one = DensityOperator::basis(2, 1);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
        let mixed = DensityOperator::maximally_mixed(2);
        assert!((trace_distance(&mixed, &zero).unwrap() - 0.5).abs() < 1e-12);
        let a = trace_distance(&mixed, &zero).unwrap();
        let b = trace_distance(&zero, &mixed).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trace_distance_dim_mismatch() {
        let a = DensityOperator::maximally_mixed(2);
        let b = DensityOperator::maximally_mixed(4);
        assert!(matches!(trace_distance(&a, &b), Err(Error::DimensionMismatch(2, 4))));
    }

    #[test]
    fn depolarize_endpoints() {
        let rho = DensityOperator::phi_plus();
        assert_eq!(depolarize(&rho, 0.0).unwrap(), rho);
        let full = depolarize(&rho, 1.0).unwrap();
        assert!(trace_distance(&full, &DensityOperator::maximally_mixed(4)).unwrap() < 1e-15);
        assert!(depolarize(&rho, 1.5).is_err());
        assert!(depolarize(&rho, -0.1).is_err());
        let half = depolarize(&rho, 0.5).unwrap();
        DensityOperator::new(half.operator().clone()).unwrap();
    }

    #[test]
    fn invalid_states_rejected() {
        let mut m = CMatrix::identity(2, 2) * c(0.5);
        m[(0, 0)] = c(1.2);
        m[(1, 1)] = c(-0.2);
        assert!(matches!(
            DensityOperator::new(Operator::new(m).unwrap()),
            Err(Error::InvalidState(_))
        ));
        let m = CMatrix::identity(2, 2);
        assert!(DensityOperator::new(Operator::new(m).unwrap()).is_err());
        let mut m = CMatrix::identity(2, 2) * c(0.5);
        m[(0, 1)] = Complex64::new(0.0, 0.1);
        assert!(DensityOperator::new(Operator::new(m).unwrap()).is_err());
    }

    #[test]
    fn top_eigenpair_matches_expectation() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0);
        m[(1, 0)] = c(1.0);
        let op = Operator::new(m).unwrap();
        let (val, v) = op.top_eigenpair();
        assert!((val - 1.0).abs() < 1e-14);
        assert!((op.expectation(&v) - 1.0).abs() < 1e-14);
    }
}
