//! Synthetic degradation `f = K u + η` with seeded Gaussian noise.
//!
//! Noise scheme (part of the file-format contract, so replays are exact):
//! a ChaCha20 stream seeded with `seed` via `seed_from_u64` yields one `u64`
//! per uniform. Pixels are filled in row-major order, two at a time, by the
//! Box–Muller transform with `u₁ = (a >> 11 + 1) · 2⁻⁵³ ∈ (0, 1]` and
//! `u₂ = (b >> 11) · 2⁻⁵³ ∈ [0, 1)`:
//! `z₀ = √(−2 ln u₁) cos 2πu₂`, `z₁ = √(−2 ln u₁) sin 2πu₂`.
//! An odd trailing pixel takes `z₀` of a final pair.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::ops::{circular_convolve, gaussian_kernel, BlurKernel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlurSpec {
    pub size: usize,
    pub sigma: f64,
}

impl BlurSpec {
    pub fn kernel(&self) -> Result<BlurKernel> {
        gaussian_kernel(self.size, self.sigma)
    }
}

impl Default for BlurSpec {
    fn default() -> Self {
        Self { size: 3, sigma: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradeSpec {
    /// Gaussian blur; `None` for pure denoising.
    pub blur: Option<BlurSpec>,
    /// Noise standard deviation in intensity units.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl DegradeSpec {
    pub fn denoising(noise_sigma: f64, seed: u64) -> Self {
        Self {
            blur: None,
            noise_sigma,
            seed,
        }
    }

    pub fn deblurring(blur: BlurSpec, noise_sigma: f64, seed: u64) -> Self {
        Self {
            blur: Some(blur),
            noise_sigma,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config(format!(
                "noise sigma must be >= 0, got {}",
                self.noise_sigma
            )));
        }
        if let Some(b) = &self.blur {
            b.kernel()?;
        }
        Ok(())
    }
}

fn unit_open_closed(x: u64) -> f64 {
    ((x >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn unit_closed_open(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `n` standard normal samples from `seed` (see the module docs).
pub fn standard_normals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n + 1);
    while out.len() < n {
        let u1 = unit_open_closed(rng.next_u64());
        let u2 = unit_closed_open(rng.next_u64());
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        out.push(r * c);
        out.push(r * s);
    }
    out.truncate(n);
    out
}

/// `K u + η`; no clamping.
pub fn degrade(u: &ImageGrid, spec: &DegradeSpec) -> Result<ImageGrid> {
    spec.validate()?;
    let blurred = match &spec.blur {
        Some(b) => circular_convolve(u, &b.kernel()?)?,
        None => u.clone(),
    };
    if spec.noise_sigma == 0.0 {
        return Ok(blurred);
    }
    let noise = standard_normals(u.len(), spec.seed);
    let data = blurred
        .as_slice()
        .iter()
        .zip(&noise)
        .map(|(v, z)| v + spec.noise_sigma * z)
        .collect();
    ImageGrid::new(u.rows(), u.cols(), data)
}
