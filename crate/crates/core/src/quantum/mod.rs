//! Two-qubit linear algebra, Bell functionals, the classical (LHV) oracle and
//! quantum-value maximization.

pub mod bell;
pub mod lhv;
pub mod operator;
pub mod optimize;
pub mod strategy;

pub use bell::{
    bell_operator, chsh_beta, eberhard_alpha, s_mu, s_mu_tilde, winning_value, BellCoefficients, CoefficientMode,
};
pub use lhv::{box_vertices, deterministic_strategies, lhv_max, lhv_max_s_mu, LhvOptimum};
pub use operator::{depolarize, trace_distance, CMatrix, CVector, DensityOperator, Operator};
pub use optimize::{
    max_entropy, maximize_bell, nelder_mead, optimize_s_tilde, BellOptimum, NelderMeadConfig, NelderMeadResult,
    OptimizerConfig,
};
pub use strategy::{born_behavior, Behavior, Measurement, QuantumStrategy};
