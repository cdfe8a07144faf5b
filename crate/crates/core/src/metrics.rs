//! Image quality metrics: PSNR, SSIM, Pratt's figure of merit and the
//! relative-change statistic used as the inner stopping rule.

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::ops;

/// Peak intensity of the working range.
pub const PEAK: f64 = 255.0;

/// SSIM window side and Gaussian width.
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

/// Pratt's scaling constant.
pub const FOM_SCALE: f64 = 1.0 / 9.0;

pub fn mse(u: &ImageGrid, reference: &ImageGrid) -> Result<f64> {
    u.check_conformable(reference)?;
    Ok(u.distance(reference).powi(2) / u.len() as f64)
}

/// `10 log₁₀(255² / MSE)` in dB; identical images give `+∞`.
pub fn psnr(u: &ImageGrid, reference: &ImageGrid) -> Result<f64> {
    let m = mse(u, reference)?;
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (PEAK * PEAK / m).log10())
}

/// `‖next − prev‖₂ / ‖prev‖₂`.
pub fn rel_error(next: &ImageGrid, prev: &ImageGrid) -> Result<f64> {
    next.check_conformable(prev)?;
    let base = prev.norm();
    if base == 0.0 {
        return Err(Error::domain("relative error against a zero-norm image"));
    }
    Ok(next.distance(prev) / base)
}

fn gaussian_window() -> Vec<f64> {
    let r = (SSIM_WINDOW / 2) as isize;
    let w: Vec<f64> = (-r..=r)
        .map(|a| (-((a * a) as f64) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Separable "valid" filtering: output is `(rows − w + 1) × (cols − w + 1)`.
fn filter_valid(data: &[f64], rows: usize, cols: usize, w: &[f64]) -> Vec<f64> {
    let n = w.len();
    let oc = cols - n + 1;
    let or = rows - n + 1;
    let mut horiz = vec![0.0; rows * oc];
    for i in 0..rows {
        for j in 0..oc {
            horiz[i * oc + j] = (0..n).map(|t| w[t] * data[i * cols + j + t]).sum();
        }
    }
    let mut out = vec![0.0; or * oc];
    for i in 0..or {
        for j in 0..oc {
            out[i * oc + j] = (0..n).map(|t| w[t] * horiz[(i + t) * oc + j]).sum();
        }
    }
    out
}

/// Mean structural similarity with an 11×11 Gaussian window (σ = 1.5),
/// `C1 = (0.01·255)²`, `C2 = (0.03·255)²`, over all fully covered windows.
pub fn ssim(u: &ImageGrid, reference: &ImageGrid) -> Result<f64> {
    u.check_conformable(reference)?;
    let (rows, cols) = u.shape();
    if rows < SSIM_WINDOW || cols < SSIM_WINDOW {
        return Err(Error::domain(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {rows}x{cols}"
        )));
    }
    let w = gaussian_window();
    let x = u.as_slice();
    let y = reference.as_slice();
    let xx: Vec<f64> = x.iter().map(|a| a * a).collect();
    let yy: Vec<f64> = y.iter().map(|a| a * a).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();

    let mu_x = filter_valid(x, rows, cols, &w);
    let mu_y = filter_valid(y, rows, cols, &w);
    let e_xx = filter_valid(&xx, rows, cols, &w);
    let e_yy = filter_valid(&yy, rows, cols, &w);
    let e_xy = filter_valid(&xy, rows, cols, &w);

    let c1 = (SSIM_K1 * PEAK).powi(2);
    let c2 = (SSIM_K2 * PEAK).powi(2);
    let n = mu_x.len();
    let total: f64 = (0..n)
        .map(|k| {
            let (mx, my) = (mu_x[k], mu_y[k]);
            let sxx = e_xx[k] - mx * mx;
            let syy = e_yy[k] - my * my;
            let sxy = e_xy[k] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2))
        })
        .sum();
    Ok(total / n as f64)
}

/// Binary edge map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    rows: usize,
    cols: usize,
    mask: Vec<bool>,
}

impl EdgeMap {
    pub fn new(rows: usize, cols: usize, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != rows * cols {
            return Err(Error::domain("edge mask length does not match its shape"));
        }
        Ok(Self { rows, cols, mask })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.cols + j]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&e| e).count()
    }
}

/// Edge detector used by [`fom`]: forward-difference gradient magnitude
/// above `mean + 2·std` of the magnitude map. No non-maximum suppression.
pub fn edge_map(u: &ImageGrid) -> EdgeMap {
    let mag = ops::grad(u).pixel_norms();
    let n = mag.len() as f64;
    let mean = mag.iter().sum::<f64>() / n;
    let var = mag.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / n;
    let thr = mean + 2.0 * var.sqrt();
    EdgeMap {
        rows: u.rows(),
        cols: u.cols(),
        mask: mag.iter().map(|&m| m > thr).collect(),
    }
}

/// 1-D squared distance transform (lower envelope of parabolas).
/// Infinite entries of `f` are "no site"; an all-infinite input stays infinite.
fn dt_1d(f: &[f64], out: &mut [f64]) {
    let sites: Vec<usize> = (0..f.len()).filter(|&q| f[q].is_finite()).collect();
    let Some((&first, rest)) = sites.split_first() else {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    };
    let mut v = vec![first];
    let mut z = vec![f64::NEG_INFINITY, f64::INFINITY];
    for &q in rest {
        loop {
            let k = v.len() - 1;
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            // z[0] = −∞, so the envelope never empties.
            if s <= z[k] {
                v.pop();
                z.pop();
            } else {
                v.push(q);
                z[k + 1] = s;
                z.push(f64::INFINITY);
                break;
            }
        }
    }
    let mut k = 0usize;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Squared Euclidean distance from every pixel to the nearest edge pixel.
fn squared_distance_map(edges: &EdgeMap) -> Vec<f64> {
    let (rows, cols) = edges.shape();
    let mut g: Vec<f64> = edges
        .mask
        .iter()
        .map(|&e| if e { 0.0 } else { f64::INFINITY })
        .collect();
    let mut col_in = vec![0.0; rows];
    let mut col_out = vec![0.0; rows];
    for j in 0..cols {
        for i in 0..rows {
            col_in[i] = g[i * cols + j];
        }
        dt_1d(&col_in, &mut col_out);
        for i in 0..rows {
            g[i * cols + j] = col_out[i];
        }
    }
    let mut row_out = vec![0.0; cols];
    for i in 0..rows {
        dt_1d(&g[i * cols..(i + 1) * cols], &mut row_out);
        g[i * cols..(i + 1) * cols].copy_from_slice(&row_out);
    }
    g
}

/// Pratt's figure of merit of `detected` against `reference`:
/// `Σ_detected 1 / (1 + d²/9) / max(N_ref, N_det)`.
pub fn fom_from_edges(detected: &EdgeMap, reference: &EdgeMap) -> Result<f64> {
    if detected.shape() != reference.shape() {
        return Err(Error::Shape {
            expected: reference.shape(),
            actual: detected.shape(),
        });
    }
    let n_ref = reference.count();
    if n_ref == 0 {
        return Err(Error::domain("reference image has no edge pixels"));
    }
    let n_det = detected.count();
    let dist = squared_distance_map(reference);
    let sum: f64 = detected
        .mask
        .iter()
        .zip(&dist)
        .filter(|(&e, _)| e)
        .map(|(_, &d2)| 1.0 / (1.0 + FOM_SCALE * d2))
        .sum();
    Ok(sum / n_ref.max(n_det) as f64)
}

/// Figure of merit of `u`'s edges against `reference`'s edges.
pub fn fom(u: &ImageGrid, reference: &ImageGrid) -> Result<f64> {
    u.check_conformable(reference)?;
    fom_from_edges(&edge_map(u), &edge_map(reference))
}
