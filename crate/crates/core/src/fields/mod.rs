//! Periodic coefficient fields: trig-polynomial tensors, grid samples,
//! spectral calculus and the ellipticity scan.

pub mod ellipticity;
pub mod grid;
pub mod spectral;
pub mod trig;

pub use ellipticity::{check_ellipticity, EllipticityReport, ELLIPTICITY_SCAN_TOL};
pub use grid::{gradient, GridField};
pub use spectral::{SpectralGrid, TWO_PI};
pub use trig::{tensor_index, CoefficientEntry, CoefficientSpec, TrigTensor};

use nalgebra::DMatrix;

use crate::error::Result;

/// Lifted coefficient samples B(θ, t_l) = Mᵀ X(θ - t_l n) M for the supplied
/// tensor X and orthogonal frame matrix M = (N, -n) (the normal is read off
/// the last column). One grid field per requested t-node.
///
/// The half-space systems of the adjoint operator pass X = A*; the operator
/// side is always the caller's explicit choice.
pub fn shifted_sample(
    tensor: &TrigTensor,
    m_matrix: &DMatrix<f64>,
    resolution: usize,
    t_nodes: &[f64],
) -> Result<Vec<GridField>> {
    let d = tensor.d();
    let conjugated = tensor.conjugate_spatial(m_matrix);
    let normal: Vec<f64> = (0..d).map(|i| -m_matrix[(i, d - 1)]).collect();
    let mut out = Vec::with_capacity(t_nodes.len());
    for &t in t_nodes {
        let shift: Vec<f64> = normal.iter().map(|ni| ni * t).collect();
        out.push(conjugated.sample_shifted(resolution, &shift)?);
    }
    Ok(out)
}
