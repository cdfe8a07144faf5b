//! Pixel lattices and the multi-channel fields built on them.
//!
//! Storage is dense row-major: pixel `(i, j)` (row `i`, column `j`) lives at
//! `i * cols + j`. Vectorizing an image is therefore just taking its data
//! slice, and every dense-matrix statement about the operators in this crate
//! refers to that ordering.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Wrap a signed index onto `[0, len)`.
pub fn periodic_index(i: isize, len: usize) -> Result<usize> {
    if len == 0 {
        return Err(Error::domain("periodic_index: len must be at least 1"));
    }
    let len = len as isize;
    Ok((((i % len) + len) % len) as usize)
}

/// Largest absolute pixel difference.
pub fn linf_distance(a: &ImageGrid, b: &ImageGrid) -> Result<f64> {
    a.check_conformable(b)?;
    Ok(a.data
        .iter()
        .zip(&b.data)
        .fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs())))
}

/// Real-valued M×N image.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ImageGrid {
    /// Build a grid from row-major data. Every value must be finite.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::domain(format!("empty grid {rows}x{cols}")));
        }
        if rows * cols != data.len() {
            return Err(Error::domain(format!(
                "{rows}x{cols} grid needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "non-finite value at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(rows * cols, data.len());
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        assert!(rows > 0 && cols > 0, "empty grid");
        assert!(value.is_finite());
        Self::from_raw(rows, cols, vec![value; rows * cols])
    }

    /// Evaluate `f(i, j)` at every pixel.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    /// Unit impulse at `(i, j)`.
    pub fn delta(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut g = Self::zeros(rows, cols);
        g.data[i * cols + j] = 1.0;
        g
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

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Row-major vectorization.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_conformable(&self, other: &ImageGrid) -> bool {
        self.shape() == other.shape()
    }

    pub fn check_conformable(&self, other: &ImageGrid) -> Result<()> {
        if self.is_conformable(other) {
            Ok(())
        } else {
            Err(Error::Shape {
                expected: self.shape(),
                actual: other.shape(),
            })
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ImageGrid {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Pixelwise combination; panics on shape mismatch.
    pub fn zip_map(&self, other: &ImageGrid, f: impl Fn(f64, f64) -> f64) -> ImageGrid {
        assert_eq!(self.shape(), other.shape(), "grids are not conformable");
        Self::from_raw(
            self.rows,
            self.cols,
            self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn dot(&self, other: &ImageGrid) -> f64 {
        assert_eq!(self.shape(), other.shape(), "grids are not conformable");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.len() as f64
    }

    /// ‖self − other‖₂.
    pub fn distance(&self, other: &ImageGrid) -> f64 {
        assert_eq!(self.shape(), other.shape(), "grids are not conformable");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Clamp to the working range [0, 255].
    pub fn clamped(&self) -> ImageGrid {
        self.map(|v| v.clamp(0.0, 255.0))
    }

    /// Clamp and round half away from zero, as done when writing 8-bit files.
    pub fn quantized(&self) -> ImageGrid {
        self.map(|v| v.clamp(0.0, 255.0).round())
    }
}

impl Add for &ImageGrid {
    type Output = ImageGrid;
    fn add(self, rhs: &ImageGrid) -> ImageGrid {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &ImageGrid {
    type Output = ImageGrid;
    fn sub(self, rhs: &ImageGrid) -> ImageGrid {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &ImageGrid {
    type Output = ImageGrid;
    fn mul(self, rhs: f64) -> ImageGrid {
        self.map(|a| a * rhs)
    }
}

/// `C` real channels per pixel, stored as one row-major plane per channel.
///
/// Dense statements stack the planes channel-major: the vectorized field is
/// `[plane 0; plane 1; …]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<const C: usize> {
    rows: usize,
    cols: usize,
    planes: [Vec<f64>; C],
}

/// Per-pixel forward differences `(x, y)`.
pub type GradientField = Field<2>;

/// Per-pixel second differences in the order `(xx, yx, xy, yy)`.
pub type HessianField = Field<4>;

impl<const C: usize> Field<C> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            planes: std::array::from_fn(|_| vec![0.0; rows * cols]),
        }
    }

    /// Assemble from one grid per channel.
    pub fn from_channels(channels: [ImageGrid; C]) -> Result<Self> {
        let shape = channels[0].shape();
        for ch in &channels[1..] {
            if ch.shape() != shape {
                return Err(Error::Shape {
                    expected: shape,
                    actual: ch.shape(),
                });
            }
        }
        Ok(Self {
            rows: shape.0,
            cols: shape.1,
            planes: channels.map(|g| g.data),
        })
    }

    /// Build from raw channel-major planes; every value must be finite.
    pub fn from_planes(rows: usize, cols: usize, planes: [Vec<f64>; C]) -> Result<Self> {
        for p in &planes {
            if p.len() != rows * cols {
                return Err(Error::domain(format!(
                    "{rows}x{cols} field plane needs {} values, got {}",
                    rows * cols,
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain("non-finite field value"));
            }
        }
        Ok(Self { rows, cols, planes })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, planes: [Vec<f64>; C]) -> Self {
        Self { rows, cols, planes }
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

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.planes[c]
    }

    pub fn channel_grid(&self, c: usize) -> ImageGrid {
        ImageGrid::from_raw(self.rows, self.cols, self.planes[c].clone())
    }

    pub(crate) fn planes(&self) -> &[Vec<f64>; C] {
        &self.planes
    }

    pub(crate) fn planes_mut(&mut self) -> &mut [Vec<f64>; C] {
        &mut self.planes
    }

    /// Channel vector at pixel `(i, j)`.
    pub fn pixel(&self, i: usize, j: usize) -> [f64; C] {
        let idx = i * self.cols + j;
        std::array::from_fn(|c| self.planes[c][idx])
    }

    /// Channel-major vectorization.
    pub fn to_vec(&self) -> Vec<f64> {
        self.planes.concat()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "fields are not conformable");
        self.planes
            .iter()
            .zip(&other.planes)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// ‖self − other‖₂.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "fields are not conformable");
        self.planes
            .iter()
            .zip(&other.planes)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// Euclidean length of the channel vector at every pixel.
    pub fn pixel_norms(&self) -> Vec<f64> {
        (0..self.rows * self.cols)
            .map(|idx| self.planes.iter().map(|p| p[idx] * p[idx]).sum::<f64>().sqrt())
            .collect()
    }

    /// Sum of pixelwise Euclidean magnitudes (the L1-of-L2 total variation).
    pub fn l1_of_l2(&self) -> f64 {
        self.pixel_norms().iter().sum()
    }

    pub fn all_finite(&self) -> bool {
        self.planes.iter().flatten().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(
            self.rows,
            self.cols,
            std::array::from_fn(|c| self.planes[c].iter().map(|&v| f(v)).collect()),
        )
    }

    /// Channelwise combination; panics on shape mismatch.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.shape(), other.shape(), "fields are not conformable");
        Self::from_raw(
            self.rows,
            self.cols,
            std::array::from_fn(|c| {
                self.planes[c]
                    .iter()
                    .zip(&other.planes[c])
                    .map(|(&a, &b)| f(a, b))
                    .collect()
            }),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn periodic_index_examples() {
        assert_eq!(periodic_index(5, 4).unwrap(), 1);
        assert_eq!(periodic_index(-1, 4).unwrap(), 3);
        assert_eq!(periodic_index(0, 7).unwrap(), 0);
        assert!(matches!(periodic_index(3, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn linf_examples() {
        let u = ImageGrid::from_fn(3, 3, |i, j| (i * 3 + j) as f64).unwrap();
        assert_eq!(linf_distance(&u, &u).unwrap(), 0.0);
        assert_eq!(
            linf_distance(&ImageGrid::zeros(2, 2), &ImageGrid::filled(2, 2, 1.0)).unwrap(),
            1.0
        );
        let mut bumped = u.clone().into_vec();
        bumped[4] += 0.5;
        let bumped = ImageGrid::new(3, 3, bumped).unwrap();
        assert_eq!(linf_distance(&u, &bumped).unwrap(), 0.5);
        assert!(matches!(
            linf_distance(&u, &ImageGrid::zeros(3, 4)),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(ImageGrid::new(2, 2, vec![0.0; 3]).is_err());
        assert!(ImageGrid::new(2, 2, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(ImageGrid::new(0, 2, vec![]).is_err());
        assert!(Field::<2>::from_planes(2, 2, [vec![0.0; 4], vec![f64::INFINITY; 4]]).is_err());
    }

    #[test]
    fn row_major_layout() {
        let u = ImageGrid::new(2, 3, vec![0., 1., 2., 3., 4., 5.]).unwrap();
        assert_eq!(u.get(1, 0), 3.0);
        assert_eq!(u.get(0, 2), 2.0);
    }

    proptest! {
        #[test]
        fn periodic_index_is_shift_invariant(i in -1000isize..1000, len in 1usize..50) {
            let a = periodic_index(i, len).unwrap();
            prop_assert!(a < len);
            prop_assert_eq!(a, periodic_index(i + len as isize, len).unwrap());
            prop_assert_eq!(periodic_index(a as isize, len).unwrap(), a);
        }

        #[test]
        fn vectorize_round_trips(rows in 1usize..8, cols in 1usize..8, seed in any::<u64>()) {
            let data: Vec<f64> = (0..rows * cols)
                .map(|k| ((seed ^ k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11) as f64)
                .collect();
            let g = ImageGrid::new(rows, cols, data.clone()).unwrap();
            prop_assert_eq!(g.into_vec(), data);
        }
    }
}
