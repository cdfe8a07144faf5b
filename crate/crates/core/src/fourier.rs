//! 2-D DFT plumbing and Fourier symbols of periodic (circulant) operators.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::ImageGrid;

/// Planned forward/inverse 2-D DFT for one grid shape.
///
/// Row-major data; the inverse is normalized by `1 / (rows · cols)`.
#[derive(Clone)]
pub struct Fft2 {
    rows: usize,
    cols: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish()
    }
}

impl Fft2 {
    pub fn new(rows: usize, cols: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            rows,
            cols,
            row_fwd: planner.plan_fft_forward(cols),
            row_inv: planner.plan_fft_inverse(cols),
            col_fwd: planner.plan_fft_forward(rows),
            col_inv: planner.plan_fft_inverse(rows),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn transform(&self, data: &mut [Complex64], row: &Arc<dyn Fft<f64>>, col: &Arc<dyn Fft<f64>>) {
        let (m, n) = (self.rows, self.cols);
        assert_eq!(data.len(), m * n, "buffer does not match the planned shape");
        row.process(data);
        let mut t = vec![Complex64::default(); m * n];
        transpose(data, &mut t, m, n);
        col.process(&mut t);
        transpose(&t, data, n, m);
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.row_fwd, &self.col_fwd);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.row_inv, &self.col_inv);
        let scale = 1.0 / (self.rows * self.cols) as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    pub fn forward_real(&self, u: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    /// Inverse transform keeping the real part.
    pub fn inverse_real(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        self.inverse(&mut spectrum);
        spectrum.into_iter().map(|z| z.re).collect()
    }

    /// `F⁻¹(S · F(u))` for a spectrum multiplier `S`.
    pub(crate) fn filter(&self, u: &ImageGrid, multiplier: impl Fn(usize, Complex64) -> Complex64) -> ImageGrid {
        let mut spec = self.forward_real(u.as_slice());
        spec.iter_mut().enumerate().for_each(|(k, z)| *z = multiplier(k, *z));
        ImageGrid::from_raw(self.rows, self.cols, self.inverse_real(spec))
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for i in 0..rows {
        for j in 0..cols {
            dst[j * rows + i] = src[i * cols + j];
        }
    }
}

/// Per-frequency multiplier of a circulant operator.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSymbol {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl FourierSymbol {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::domain("symbol length does not match its shape"));
        }
        Ok(Self { rows, cols, data })
    }

    /// Symbol of the identity operator (all ones).
    pub fn identity(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(1.0, 0.0); rows * cols],
        }
    }

    /// Transform of an impulse response.
    pub fn from_impulse_response(h: &ImageGrid) -> Self {
        let fft = Fft2::new(h.rows(), h.cols());
        Self {
            rows: h.rows(),
            cols: h.cols(),
            data: fft.forward_real(h.as_slice()),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Multiplier at frequency bin `(k, l)`.
    pub fn get(&self, k: usize, l: usize) -> Complex64 {
        self.data[k * self.cols + l]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_identity(&self) -> bool {
        self.data.iter().all(|z| z.re == 1.0 && z.im == 0.0)
    }

    /// `|S|²` per bin: the (real, nonnegative) symbol of `Aᵀ A`.
    pub fn norm_sqr(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Bin `(k, l)` conjugates bin `(−k, −l)` to within `rel_tol · max|S|`.
    pub fn is_conjugate_symmetric(&self, rel_tol: f64) -> bool {
        let scale = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        (0..self.rows).all(|k| {
            (0..self.cols).all(|l| {
                let a = self.get(k, l);
                let b = self.get((self.rows - k) % self.rows, (self.cols - l) % self.cols);
                (a - b.conj()).norm() <= rel_tol * scale
            })
        })
    }

    fn check_shape(&self, u: &ImageGrid) -> Result<()> {
        if self.shape() == u.shape() {
            Ok(())
        } else {
            Err(Error::Shape {
                expected: self.shape(),
                actual: u.shape(),
            })
        }
    }

    /// Apply the operator: `F⁻¹(S · F(u))`.
    pub fn apply(&self, u: &ImageGrid) -> Result<ImageGrid> {
        self.check_shape(u)?;
        Ok(self.apply_with(&Fft2::new(self.rows, self.cols), u))
    }

    /// Apply the adjoint operator: `F⁻¹(conj(S) · F(u))`.
    pub fn apply_adjoint(&self, u: &ImageGrid) -> Result<ImageGrid> {
        self.check_shape(u)?;
        Ok(self.apply_adjoint_with(&Fft2::new(self.rows, self.cols), u))
    }

    pub(crate) fn apply_with(&self, fft: &Fft2, u: &ImageGrid) -> ImageGrid {
        if self.is_identity() {
            return u.clone();
        }
        fft.filter(u, |k, z| self.data[k] * z)
    }

    pub(crate) fn apply_adjoint_with(&self, fft: &Fft2, u: &ImageGrid) -> ImageGrid {
        if self.is_identity() {
            return u.clone();
        }
        fft.filter(u, |k, z| self.data[k].conj() * z)
    }
}

/// Symbol of a linear shift-invariant operator from its response to the
/// unit impulse at `(0, 0)`.
///
/// The operator must be circulant; anything else silently yields a symbol
/// that does not represent it.
pub fn operator_symbol(apply: impl Fn(&ImageGrid) -> ImageGrid, rows: usize, cols: usize) -> FourierSymbol {
    FourierSymbol::from_impulse_response(&apply(&ImageGrid::delta(rows, cols, 0, 0)))
}
