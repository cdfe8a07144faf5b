//! Stage-wise alternating total-variation image restoration.
//!
//! The crate solves the first-order (ROF) and second-order (LLT) total
//! variation models with ADMM, using FFT-diagonalized periodic operators for
//! the quadratic sub-problem and isotropic shrinkage for the splitting
//! variable. [`stagewise::run_stagewise`] alternates the two models, picks the
//! locally optimal iterate of every stage under a semi-convergence rule and
//! restarts the next stage from it.
//!
//! ```
//! use stagetv_core::{phantom, degrade::{degrade, DegradeSpec}, FourierSymbol};
//! use stagetv_core::stagewise::{run_stagewise, StagewiseConfig};
//!
//! let clean = phantom::piecewise_constant(32, 32);
//! let noisy = degrade(&clean, &DegradeSpec::denoising(20.0, 7)).unwrap();
//! let sym_k = FourierSymbol::identity(32, 32);
//! let cfg = StagewiseConfig { n_max: 2, ..StagewiseConfig::oracle(clean.clone()) };
//! let result = run_stagewise(&noisy, &sym_k, &cfg).unwrap();
//! assert!(result.stages.len() <= 2);
//! ```

pub mod degrade;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod metrics;
pub mod ops;
pub mod phantom;
pub mod solvers;
pub mod stagewise;

#[cfg(feature = "dense-oracle")]
pub mod dense;

pub use error::{Error, Result};
pub use fourier::{operator_symbol, Fft2, FourierSymbol};
pub use grid::{linf_distance, periodic_index, Field, GradientField, HessianField, ImageGrid};
pub use ops::BlurKernel;
pub use solvers::{AdmmConfig, AdmmOutput, InnerTrace, IterRecord, IterateStore, Regularizer, Retention};
pub use stagewise::{RestoreResult, Selection, SelectionMode, StageRecord, StagewiseConfig, Termination, TraceEntry};
