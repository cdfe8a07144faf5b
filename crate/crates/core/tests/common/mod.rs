#![allow(dead_code)]

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stagetv_core::dense;
use stagetv_core::{Field, ImageGrid};

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let unit = (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * unit
    }

    pub fn grid(&mut self, rows: usize, cols: usize, lo: f64, hi: f64) -> ImageGrid {
        let data = (0..rows * cols).map(|_| self.uniform(lo, hi)).collect();
        ImageGrid::new(rows, cols, data).unwrap()
    }

    pub fn field<const C: usize>(&mut self, rows: usize, cols: usize) -> Field<C> {
        let planes = std::array::from_fn(|_| (0..rows * cols).map(|_| self.uniform(-1.0, 1.0)).collect());
        Field::from_planes(rows, cols, planes).unwrap()
    }
}

pub fn field_vector<const C: usize>(p: &Field<C>) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_vec(p.to_vec())
}

pub fn grid_vector(u: &ImageGrid) -> nalgebra::DVector<f64> {
    dense::to_vector(u)
}

/// `‖a − b‖ / max(‖b‖, tiny)`.
pub fn rel(a: &nalgebra::DVector<f64>, b: &nalgebra::DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub fn max_abs(a: &nalgebra::DVector<f64>, b: &nalgebra::DVector<f64>) -> f64 {
    (a - b).amax()
}
