use crate::error::Result;
use crate::fourier::FourierSymbol;
use crate::grid::ImageGrid;
use crate::ops;

fn data_term(u: &ImageGrid, f: &ImageGrid, sym_k: &FourierSymbol) -> Result<f64> {
    u.check_conformable(f)?;
    let ku = sym_k.apply(u)?;
    Ok(0.5 * ku.distance(f).powi(2))
}

/// `½‖Ku − f‖² + λ Σ |(Du)_{ij}|`.
pub fn objective_rof(u: &ImageGrid, f: &ImageGrid, sym_k: &FourierSymbol, lambda: f64) -> Result<f64> {
    Ok(data_term(u, f, sym_k)? + lambda * ops::grad(u).l1_of_l2())
}

/// `½‖Ku − f‖² + λ Σ |(DDu)_{ij}|` with the 4-channel pixel magnitude.
pub fn objective_llt(u: &ImageGrid, f: &ImageGrid, sym_k: &FourierSymbol, lambda: f64) -> Result<f64> {
    Ok(data_term(u, f, sym_k)? + lambda * ops::hessian(u).l1_of_l2())
}
