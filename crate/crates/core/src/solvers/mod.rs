//! Proximal shrinkage, Fourier-domain quadratic solves and the ADMM solvers
//! for the first-order (ROF) and second-order (LLT) TV models.

mod admm;
mod objective;
mod quadratic;
mod shrink;

pub use admm::{
    admm_llt, admm_rof, AdmmConfig, AdmmOutput, InnerTrace, IterRecord, IterateStore, Regularizer, Retention,
};
pub use objective::{objective_llt, objective_rof};
pub use quadratic::{fft_quadratic_solve, QuadraticSolver};
pub use shrink::isotropic_shrink;
