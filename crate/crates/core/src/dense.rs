//! Dense-matrix reference implementations for testing.
//!
//! Everything here is built from index formulas on `MN`-vectors in row-major
//! order, independently of the stencil and FFT code it is used to check.
//! Stacked operators put channel `c` in rows `c·MN .. (c+1)·MN`, matching
//! [`Field::to_vec`](crate::grid::Field::to_vec). Only practical for small
//! grids.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::ops::BlurKernel;

fn wrap(i: isize, len: usize) -> usize {
    i.rem_euclid(len as isize) as usize
}

/// `I_shift − I` where `I_shift` reads the pixel at offset `(di, dj)`.
fn difference(rows: usize, cols: usize, di: isize, dj: isize, forward: bool) -> DMatrix<f64> {
    let n = rows * cols;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..rows {
        for j in 0..cols {
            let p = i * cols + j;
            let q = wrap(i as isize + di, rows) * cols + wrap(j as isize + dj, cols);
            if forward {
                m[(p, q)] += 1.0;
                m[(p, p)] -= 1.0;
            } else {
                m[(p, p)] += 1.0;
                m[(p, q)] -= 1.0;
            }
        }
    }
    m
}

pub fn forward_x(rows: usize, cols: usize) -> DMatrix<f64> {
    difference(rows, cols, 0, 1, true)
}

pub fn forward_y(rows: usize, cols: usize) -> DMatrix<f64> {
    difference(rows, cols, 1, 0, true)
}

pub fn backward_x(rows: usize, cols: usize) -> DMatrix<f64> {
    difference(rows, cols, 0, -1, false)
}

pub fn backward_y(rows: usize, cols: usize) -> DMatrix<f64> {
    difference(rows, cols, -1, 0, false)
}

/// Stack blocks vertically.
pub fn vstack(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let cols = blocks[0].ncols();
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "blocks must share a column count");
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(b);
        r += b.nrows();
    }
    out
}

/// `[D_x^+; D_y^+]`, shape `2MN × MN`.
pub fn gradient(rows: usize, cols: usize) -> DMatrix<f64> {
    vstack(&[forward_x(rows, cols), forward_y(rows, cols)])
}

/// `[D_x^-D_x^+; D_y^+D_x^+; D_x^+D_y^+; D_y^-D_y^+]`, shape `4MN × MN`.
pub fn hessian(rows: usize, cols: usize) -> DMatrix<f64> {
    let (fx, fy) = (forward_x(rows, cols), forward_y(rows, cols));
    vstack(&[
        backward_x(rows, cols) * &fx,
        &fy * &fx,
        &fx * &fy,
        backward_y(rows, cols) * &fy,
    ])
}

/// Periodic convolution: row `(i, j)` holds `k(a, b)` at column
/// `(i − a, j − b)`.
pub fn blur(kernel: &BlurKernel, rows: usize, cols: usize) -> DMatrix<f64> {
    let n = rows * cols;
    let r = kernel.radius();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..rows {
        for j in 0..cols {
            for a in -r..=r {
                for b in -r..=r {
                    let q = wrap(i as isize - a, rows) * cols + wrap(j as isize - b, cols);
                    m[(i * cols + j, q)] += kernel.tap(a, b);
                }
            }
        }
    }
    m
}

/// Matrix of a linear map, column by column from unit impulses.
pub fn matrix_of(apply: impl Fn(&ImageGrid) -> Vec<f64>, rows: usize, cols: usize) -> DMatrix<f64> {
    let n = rows * cols;
    let columns: Vec<DVector<f64>> = (0..n)
        .map(|p| DVector::from_vec(apply(&ImageGrid::delta(rows, cols, p / cols, p % cols))))
        .collect();
    DMatrix::from_columns(&columns)
}

pub fn to_vector(u: &ImageGrid) -> DVector<f64> {
    DVector::from_column_slice(u.as_slice())
}

pub fn to_grid(v: &DVector<f64>, rows: usize, cols: usize) -> ImageGrid {
    ImageGrid::new(rows, cols, v.as_slice().to_vec()).expect("finite vector of matching length")
}

/// Solve `A x = b` by LU with partial pivoting.
pub fn lu_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    a.clone().lu().solve(b).ok_or(Error::Singular {
        row: 0,
        col: 0,
        magnitude: 0.0,
    })
}

/// Radial shrinkage of a channel-major stacked vector with `channels` blocks.
pub fn shrink_stacked(x: &DVector<f64>, channels: usize, t: f64) -> DVector<f64> {
    let n = x.len() / channels;
    let mut out = x.clone();
    for p in 0..n {
        let norm = (0..channels).map(|c| x[c * n + p].powi(2)).sum::<f64>().sqrt();
        let scale = if norm > t { 1.0 - t / norm } else { 0.0 };
        for c in 0..channels {
            out[c * n + p] = scale * x[c * n + p];
        }
    }
    out
}

/// `½‖K u − f‖² + λ Σ_p ‖(L u)_p‖₂`.
pub fn objective(
    u: &DVector<f64>,
    f: &DVector<f64>,
    k: &DMatrix<f64>,
    l: &DMatrix<f64>,
    channels: usize,
    lambda: f64,
) -> f64 {
    let r = k * u - f;
    let lu = l * u;
    let n = u.len();
    let tv: f64 = (0..n)
        .map(|p| (0..channels).map(|c| lu[c * n + p].powi(2)).sum::<f64>().sqrt())
        .sum();
    0.5 * r.norm_squared() + lambda * tv
}

/// Plain dense ADMM with the same splitting, update order and zero start for
/// `v` and `μ` as the FFT solvers. Returns `u¹ … u^iters`; the initial
/// iterate does not enter the updates.
pub fn admm(
    f: &DVector<f64>,
    k: &DMatrix<f64>,
    l: &DMatrix<f64>,
    channels: usize,
    lambda: f64,
    beta: f64,
    iters: usize,
) -> Result<Vec<DVector<f64>>> {
    let lt = l.transpose();
    let a = k.transpose() * k + (&lt * l) * beta;
    let lu_a = a.lu();
    let kt_f = k.transpose() * f;
    let mut v = DVector::zeros(l.nrows());
    let mut mu = DVector::zeros(l.nrows());
    let mut out = Vec::with_capacity(iters);
    for _ in 0..iters {
        let rhs = &kt_f + &lt * (&v * beta - &mu);
        let u = lu_a.solve(&rhs).ok_or(Error::Singular {
            row: 0,
            col: 0,
            magnitude: 0.0,
        })?;
        let lu = l * &u;
        v = shrink_stacked(&(&lu + &mu / beta), channels, lambda / beta);
        mu = &mu - (&v - &lu) * beta;
        out.push(u);
    }
    Ok(out)
}
