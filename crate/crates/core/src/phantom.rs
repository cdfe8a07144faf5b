//! Deterministic synthetic test images in the [0, 255] range.

use crate::grid::ImageGrid;

/// Disk (200) and rectangle (130) on a flat background (60).
pub fn piecewise_constant(rows: usize, cols: usize) -> ImageGrid {
    let (r, c) = (rows as f64, cols as f64);
    ImageGrid::from_fn(rows, cols, |i, j| {
        let (y, x) = (i as f64, j as f64);
        let in_disk = (y - r / 2.0).powi(2) + (x - c / 2.0).powi(2) < (r.min(c) / 4.0).powi(2);
        let in_rect = y >= 5.0 / 64.0 * r && y < 20.0 / 64.0 * r && x >= 40.0 / 64.0 * c && x < 58.0 / 64.0 * c;
        if in_disk {
            200.0
        } else if in_rect {
            130.0
        } else {
            60.0
        }
    })
    .expect("finite by construction")
}

/// Radial quadratic bowl rising from 40 at the center to 200 at the corners.
pub fn smooth_quadratic(rows: usize, cols: usize) -> ImageGrid {
    let (cy, cx) = (rows as f64 / 2.0, cols as f64 / 2.0);
    ImageGrid::from_fn(rows, cols, |i, j| {
        let dy = (i as f64 - cy) / cy;
        let dx = (j as f64 - cx) / cx;
        40.0 + 80.0 * (dy * dy + dx * dx)
    })
    .expect("finite by construction")
}

/// Left half from [`piecewise_constant`], right half from [`smooth_quadratic`].
pub fn mixed(rows: usize, cols: usize) -> ImageGrid {
    let pc = piecewise_constant(rows, cols);
    let sm = smooth_quadratic(rows, cols);
    ImageGrid::from_fn(rows, cols, |i, j| {
        if 2 * j < cols {
            pc.get(i, j)
        } else {
            sm.get(i, j)
        }
    })
    .expect("finite by construction")
}

/// Two flat halves split down the middle column (60 | 180).
pub fn two_region(rows: usize, cols: usize) -> ImageGrid {
    ImageGrid::from_fn(rows, cols, |_, j| if 2 * j < cols { 60.0 } else { 180.0 }).expect("finite by construction")
}
