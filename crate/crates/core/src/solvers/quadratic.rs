use crate::error::{Error, Result};
use crate::fourier::{Fft2, FourierSymbol};
use crate::grid::ImageGrid;

/// Smallest denominator magnitude accepted by the pointwise division.
const MIN_DENOMINATOR: f64 = 1e-14;

/// Solver for `(KᵀK + penalty · LᵀL) u = rhs` with circulant `K` and a
/// multi-channel circulant `L` (one symbol per output channel).
///
/// The denominator `|K̂|² + penalty · Σ_c |L̂_c|²` is computed once.
#[derive(Debug, Clone)]
pub struct QuadraticSolver {
    fft: Fft2,
    denominator: Vec<f64>,
}

impl QuadraticSolver {
    pub fn new(sym_k: &FourierSymbol, sym_l: &[FourierSymbol], penalty: f64) -> Result<Self> {
        if !(penalty > 0.0 && penalty.is_finite()) {
            return Err(Error::domain(format!("penalty must be positive, got {penalty}")));
        }
        let (rows, cols) = sym_k.shape();
        for s in sym_l {
            if s.shape() != (rows, cols) {
                return Err(Error::Shape {
                    expected: (rows, cols),
                    actual: s.shape(),
                });
            }
        }
        let mut denominator = sym_k.norm_sqr();
        for s in sym_l {
            for (d, z) in denominator.iter_mut().zip(s.as_slice()) {
                *d += penalty * z.norm_sqr();
            }
        }
        if let Some((idx, &d)) = denominator
            .iter()
            .enumerate()
            .find(|(_, d)| d.abs() < MIN_DENOMINATOR)
        {
            return Err(Error::Singular {
                row: idx / cols,
                col: idx % cols,
                magnitude: d.abs(),
            });
        }
        Ok(Self {
            fft: Fft2::new(rows, cols),
            denominator,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.fft.shape()
    }

    pub(crate) fn fft(&self) -> &Fft2 {
        &self.fft
    }

    pub fn solve(&self, rhs: &ImageGrid) -> Result<ImageGrid> {
        if rhs.shape() != self.shape() {
            return Err(Error::Shape {
                expected: self.shape(),
                actual: rhs.shape(),
            });
        }
        Ok(self.fft.filter(rhs, |k, z| z / self.denominator[k]))
    }
}

/// One-shot solve of `(KᵀK + penalty · LᵀL) u = rhs` by pointwise division
/// in the frequency domain.
pub fn fft_quadratic_solve(
    rhs: &ImageGrid,
    sym_k: &FourierSymbol,
    sym_l: &[FourierSymbol],
    penalty: f64,
) -> Result<ImageGrid> {
    QuadraticSolver::new(sym_k, sym_l, penalty)?.solve(rhs)
}
