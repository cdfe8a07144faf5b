//! Periodic finite differences, their adjoints, and circular blur.
//!
//! x-differences act along columns (`j`), y-differences along rows (`i`);
//! every stencil wraps around the image border.

use crate::error::{Error, Result};
use crate::fourier::FourierSymbol;
use crate::grid::{GradientField, HessianField, ImageGrid};

#[inline]
fn next(k: usize, len: usize) -> usize {
    if k + 1 == len {
        0
    } else {
        k + 1
    }
}

#[inline]
fn prev(k: usize, len: usize) -> usize {
    if k == 0 {
        len - 1
    } else {
        k - 1
    }
}

fn stencil(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            out.push(f(i, j));
        }
    }
    out
}

fn dx_forward(u: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    stencil(rows, cols, |i, j| u[i * cols + next(j, cols)] - u[i * cols + j])
}

fn dx_backward(u: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    stencil(rows, cols, |i, j| u[i * cols + j] - u[i * cols + prev(j, cols)])
}

fn dy_forward(u: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    stencil(rows, cols, |i, j| u[next(i, rows) * cols + j] - u[i * cols + j])
}

fn dy_backward(u: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    stencil(rows, cols, |i, j| u[i * cols + j] - u[prev(i, rows) * cols + j])
}

fn lift(u: &ImageGrid, op: fn(&[f64], usize, usize) -> Vec<f64>) -> ImageGrid {
    ImageGrid::from_raw(u.rows(), u.cols(), op(u.as_slice(), u.rows(), u.cols()))
}

/// `u(i, j+1) − u(i, j)`, wrapping the last column onto the first.
pub fn forward_diff_x(u: &ImageGrid) -> ImageGrid {
    lift(u, dx_forward)
}

/// `u(i+1, j) − u(i, j)`, wrapping the last row onto the first.
pub fn forward_diff_y(u: &ImageGrid) -> ImageGrid {
    lift(u, dy_forward)
}

/// `u(i, j) − u(i, j−1)`, wrapping the first column onto the last.
pub fn backward_diff_x(u: &ImageGrid) -> ImageGrid {
    lift(u, dx_backward)
}

/// `u(i, j) − u(i−1, j)`, wrapping the first row onto the last.
pub fn backward_diff_y(u: &ImageGrid) -> ImageGrid {
    lift(u, dy_backward)
}

/// First-order discrete gradient `(D_x^+ u, D_y^+ u)`.
pub fn grad(u: &ImageGrid) -> GradientField {
    let (r, c) = u.shape();
    let s = u.as_slice();
    GradientField::from_raw(r, c, [dx_forward(s, r, c), dy_forward(s, r, c)])
}

/// Exact transpose of [`grad`]: `−(D_x^- p_x + D_y^- p_y)`.
pub fn grad_adjoint(p: &GradientField) -> ImageGrid {
    let (r, c) = p.shape();
    let [px, py] = p.planes();
    let a = dx_backward(px, r, c);
    let b = dy_backward(py, r, c);
    ImageGrid::from_raw(r, c, a.iter().zip(&b).map(|(x, y)| -(x + y)).collect())
}

/// Second-order discrete gradient with channels
/// `(D_x^-D_x^+ u, D_y^+D_x^+ u, D_x^+D_y^+ u, D_y^-D_y^+ u)`.
pub fn hessian(u: &ImageGrid) -> HessianField {
    let (r, c) = u.shape();
    let s = u.as_slice();
    let ux = dx_forward(s, r, c);
    let uy = dy_forward(s, r, c);
    HessianField::from_raw(
        r,
        c,
        [
            dx_backward(&ux, r, c),
            dy_forward(&ux, r, c),
            dx_forward(&uy, r, c),
            dy_backward(&uy, r, c),
        ],
    )
}

/// Exact transpose of [`hessian`].
///
/// Uses `(D^+)^T = −D^-` and `(D^-)^T = −D^+` channel by channel, so the
/// signs cancel pairwise.
pub fn hessian_adjoint(q: &HessianField) -> ImageGrid {
    let (r, c) = q.shape();
    let [qxx, qyx, qxy, qyy] = q.planes();
    let a = dx_backward(&dx_forward(qxx, r, c), r, c);
    let b = dx_backward(&dy_backward(qyx, r, c), r, c);
    let d = dy_backward(&dx_backward(qxy, r, c), r, c);
    let e = dy_backward(&dy_forward(qyy, r, c), r, c);
    let out = (0..r * c).map(|k| a[k] + b[k] + d[k] + e[k]).collect();
    ImageGrid::from_raw(r, c, out)
}

/// Square, odd-sized convolution kernel with taps summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct BlurKernel {
    size: usize,
    taps: Vec<f64>,
}

impl BlurKernel {
    /// Validate and wrap `size × size` row-major taps.
    pub fn new(size: usize, taps: Vec<f64>) -> Result<Self> {
        if size % 2 == 0 {
            return Err(Error::domain(format!("kernel size must be odd, got {size}")));
        }
        if taps.len() != size * size {
            return Err(Error::domain("kernel tap count does not match size"));
        }
        if taps.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::domain("kernel taps must be finite and nonnegative"));
        }
        let sum: f64 = taps.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("kernel taps sum to {sum}, expected 1")));
        }
        Ok(Self { size, taps })
    }

    pub fn identity() -> Self {
        Self {
            size: 1,
            taps: vec![1.0],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> isize {
        (self.size / 2) as isize
    }

    /// Tap at offset `(a, b)` from the center, both in `[−radius, radius]`.
    pub fn tap(&self, a: isize, b: isize) -> f64 {
        let r = self.radius();
        self.taps[((a + r) as usize) * self.size + (b + r) as usize]
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Fourier symbol of periodic convolution with this kernel on a
    /// `rows × cols` grid. The kernel center sits at the origin, with negative
    /// offsets wrapped, so the blur does not shift the image.
    pub fn symbol(&self, rows: usize, cols: usize) -> Result<FourierSymbol> {
        if self.size > rows || self.size > cols {
            return Err(Error::domain(format!(
                "{0}x{0} kernel does not fit a {rows}x{cols} grid",
                self.size
            )));
        }
        let r = self.radius();
        let mut h = vec![0.0; rows * cols];
        for a in -r..=r {
            for b in -r..=r {
                let i = a.rem_euclid(rows as isize) as usize;
                let j = b.rem_euclid(cols as isize) as usize;
                h[i * cols + j] += self.tap(a, b);
            }
        }
        Ok(FourierSymbol::from_impulse_response(&ImageGrid::from_raw(rows, cols, h)))
    }

    /// The kernel rotated by 180°, i.e. the adjoint blur.
    pub fn flipped(&self) -> Self {
        Self {
            size: self.size,
            taps: self.taps.iter().rev().copied().collect(),
        }
    }
}

/// Normalized `size × size` Gaussian.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<BlurKernel> {
    if size % 2 == 0 {
        return Err(Error::domain(format!("kernel size must be odd, got {size}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("kernel sigma must be positive, got {sigma}")));
    }
    let r = (size / 2) as isize;
    let mut taps = Vec::with_capacity(size * size);
    for a in -r..=r {
        for b in -r..=r {
            taps.push((-((a * a + b * b) as f64) / (2.0 * sigma * sigma)).exp());
        }
    }
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    Ok(BlurKernel { size, taps })
}

/// Periodic 2-D convolution `out(i, j) = Σ k(a, b) u(i − a, j − b)`.
pub fn circular_convolve(u: &ImageGrid, k: &BlurKernel) -> Result<ImageGrid> {
    let (rows, cols) = u.shape();
    if k.size > rows || k.size > cols {
        return Err(Error::domain(format!(
            "{0}x{0} kernel does not fit a {rows}x{cols} grid",
            k.size
        )));
    }
    let r = k.radius();
    let s = u.as_slice();
    let mut out = vec![0.0; rows * cols];
    for a in -r..=r {
        for b in -r..=r {
            let w = k.tap(a, b);
            if w == 0.0 {
                continue;
            }
            for i in 0..rows {
                let si = (i as isize - a).rem_euclid(rows as isize) as usize;
                for j in 0..cols {
                    let sj = (j as isize - b).rem_euclid(cols as isize) as usize;
                    out[i * cols + j] += w * s[si * cols + sj];
                }
            }
        }
    }
    Ok(ImageGrid::from_raw(rows, cols, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: &[f64]) -> ImageGrid {
        ImageGrid::new(1, v.len(), v.to_vec()).unwrap()
    }

    fn col(v: &[f64]) -> ImageGrid {
        ImageGrid::new(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn constants_are_annihilated() {
        let c = ImageGrid::filled(5, 7, 42.0);
        for out in [
            forward_diff_x(&c),
            forward_diff_y(&c),
            backward_diff_x(&c),
            backward_diff_y(&c),
        ] {
            assert!(out.as_slice().iter().all(|&v| v == 0.0));
        }
        assert_eq!(grad(&c).norm(), 0.0);
        assert_eq!(hessian(&c).norm(), 0.0);
    }

    #[test]
    fn forward_differences_wrap() {
        assert_eq!(forward_diff_x(&row(&[1., 2., 4.])).as_slice(), &[1., 2., -3.]);
        assert_eq!(forward_diff_y(&col(&[1., 2., 4.])).as_slice(), &[1., 2., -3.]);
        assert_eq!(backward_diff_x(&row(&[1., 2., 4.])).as_slice(), &[-3., 1., 2.]);
        assert_eq!(backward_diff_y(&col(&[1., 2., 4.])).as_slice(), &[-3., 1., 2.]);
    }

    #[test]
    fn gradient_of_column_ramp() {
        let u = ImageGrid::from_fn(4, 4, |_, j| j as f64).unwrap();
        let g = grad(&u);
        for i in 0..4 {
            for j in 0..4 {
                let [gx, gy] = g.pixel(i, j);
                assert_eq!(gx, if j == 3 { -3.0 } else { 1.0 });
                assert_eq!(gy, 0.0);
            }
        }
    }

    #[test]
    fn grad_adjoint_of_impulse() {
        let mut p = GradientField::zeros(4, 5);
        p.planes_mut()[0][0] = 1.0;
        let out = grad_adjoint(&p);
        for i in 0..4 {
            for j in 0..5 {
                let expected = match (i, j) {
                    (0, 0) => -1.0,
                    (0, 1) => 1.0,
                    _ => 0.0,
                };
                assert_eq!(out.get(i, j), expected, "({i}, {j})");
            }
        }
        assert_eq!(grad_adjoint(&GradientField::zeros(3, 3)).norm(), 0.0);
        assert_eq!(hessian_adjoint(&HessianField::zeros(3, 3)).norm(), 0.0);
    }

    #[test]
    fn bilinear_hessian_pure_channels_vanish_inside() {
        let u = ImageGrid::from_fn(8, 8, |i, j| (i * j) as f64).unwrap();
        let h = hessian(&u);
        for i in 0..8 {
            for j in 0..8 {
                let [xx, _, _, yy] = h.pixel(i, j);
                // D_x^- D_x^+ touches columns j-1..=j+1; only the wrap columns see the seam.
                if j != 0 && j != 7 {
                    assert_eq!(xx, 0.0, "xx at ({i}, {j})");
                }
                if i != 0 && i != 7 {
                    assert_eq!(yy, 0.0, "yy at ({i}, {j})");
                }
            }
        }
    }

    #[test]
    fn gaussian_kernel_values() {
        let k = gaussian_kernel(1, 3.7).unwrap();
        assert_eq!(k.taps(), &[1.0]);

        let k = gaussian_kernel(3, 0.5).unwrap();
        // exp(-2) normalization evaluated by hand: 1 / (1 + 4e^-2 + 4e^-4).
        let e1 = (-2.0f64).exp();
        let e2 = (-4.0f64).exp();
        let z = 1.0 + 4.0 * e1 + 4.0 * e2;
        assert!((k.tap(0, 0) - 1.0 / z).abs() < 1e-15);
        assert!((k.tap(0, 0) - 0.6193).abs() < 5e-5);
        assert!((k.tap(1, 0) - 0.0838).abs() < 5e-5);
        assert!((k.tap(1, 1) - 0.0113).abs() < 5e-5);
        for size in [1, 3, 5, 7] {
            for sigma in [0.3, 0.5, 1.0, 2.5] {
                let s: f64 = gaussian_kernel(size, sigma).unwrap().taps().iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
        assert!(gaussian_kernel(4, 1.0).is_err());
        assert!(gaussian_kernel(3, 0.0).is_err());
    }

    #[test]
    fn gaussian_is_point_symmetric() {
        let k = gaussian_kernel(5, 1.3).unwrap();
        assert_eq!(k, k.flipped());
    }

    #[test]
    fn convolution_identities() {
        let u = ImageGrid::from_fn(6, 5, |i, j| (i * 7 + j * j) as f64).unwrap();
        assert_eq!(circular_convolve(&u, &BlurKernel::identity()).unwrap(), u);
        let c = ImageGrid::filled(6, 5, 17.0);
        let out = circular_convolve(&c, &gaussian_kernel(3, 0.8).unwrap()).unwrap();
        assert!(out.as_slice().iter().all(|v| (v - 17.0).abs() < 1e-12));
        assert!(circular_convolve(&ImageGrid::zeros(2, 8), &gaussian_kernel(3, 0.5).unwrap()).is_err());
    }

    #[test]
    fn kernel_validation() {
        assert!(BlurKernel::new(2, vec![0.25; 4]).is_err());
        assert!(BlurKernel::new(3, vec![0.5; 9]).is_err());
        assert!(BlurKernel::new(1, vec![1.0]).is_ok());
    }
}
