use crate::error::{Error, Result};
use crate::grid::Field;

/// Isotropic shrinkage: every pixel's channel vector `x` becomes
/// `max(0, ‖x‖ − t) · x / ‖x‖` (zero when `x = 0`).
///
/// This is the proximal map of `t · Σ_pixels ‖v‖₂`.
pub fn isotropic_shrink<const C: usize>(x: &Field<C>, t: f64) -> Result<Field<C>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("shrink threshold must be >= 0, got {t}")));
    }
    let mut out = x.clone();
    shrink_in_place(&mut out, t);
    Ok(out)
}

pub(crate) fn shrink_in_place<const C: usize>(x: &mut Field<C>, t: f64) {
    let n = x.rows() * x.cols();
    let planes = x.planes_mut();
    for idx in 0..n {
        let m = planes.iter().map(|p| p[idx] * p[idx]).sum::<f64>().sqrt();
        let scale = if m > 0.0 { (m - t).max(0.0) / m } else { 0.0 };
        for p in planes.iter_mut() {
            p[idx] *= scale;
        }
    }
}
