//! Fixtures shared by the solver benchmarks.

use stagetv_core::degrade::{degrade, BlurSpec, DegradeSpec};
use stagetv_core::{phantom, FourierSymbol, ImageGrid};

/// A restoration problem: clean image, observation and forward symbol.
pub struct Problem {
    pub clean: ImageGrid,
    pub observed: ImageGrid,
    pub sym_k: FourierSymbol,
}

/// Mixed phantom of side `n` with noise `sigma`, optionally blurred by the
/// default 3×3 Gaussian.
pub fn mixed_problem(n: usize, sigma: f64, blurred: bool) -> Problem {
    let clean = phantom::mixed(n, n);
    let blur = blurred.then(BlurSpec::default);
    let observed = degrade(&clean, &DegradeSpec { blur, noise_sigma: sigma, seed: 7 }).expect("valid spec");
    let sym_k = match blur {
        Some(b) => b.kernel().and_then(|k| k.symbol(n, n)).expect("kernel fits"),
        None => FourierSymbol::identity(n, n),
    };
    Problem { clean, observed, sym_k }
}
