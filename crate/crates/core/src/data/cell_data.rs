//! Per-coefficient preparation shared by every boundary-data kernel.

use crate::cell::{
    homogenized_tensor, solve_correctors, solve_flux_correctors, CorrectorSet, FluxCorrectorSet,
    HomogenizedTensor,
};
use crate::error::Result;
use crate::fields::TrigTensor;
use crate::krylov::GmresConfig;

/// Everything the homogenized-data formulas need from one coefficient tensor,
/// independent of the boundary normal: the adjoint coefficients, their
/// correctors and flux correctors, and both effective tensors.
///
/// Prepared once per coefficient tensor and resolution; the per-normal lifted
/// solves are layered on top by the kernel builders. The corrector and flux
/// sets are the serializable pieces; this bundle itself is rebuilt from them.
#[derive(Debug, Clone)]
pub struct CellData {
    pub tensor: TrigTensor,
    pub adjoint: TrigTensor,
    pub resolution: usize,
    /// Correctors of the adjoint coefficients, component order (k, β, γ).
    pub chistar: CorrectorSet,
    /// Effective tensor of the original coefficients.
    pub ahat: HomogenizedTensor,
    /// Effective tensor of the adjoint coefficients.
    pub ahat_star: HomogenizedTensor,
    /// Flux correctors of the adjoint coefficients, component order
    /// (i, j, k, α, β).
    pub fluxstar: FluxCorrectorSet,
}

impl CellData {
    /// Solve the adjoint cell problems and assemble both effective tensors.
    /// The effective tensor of the adjoint equals the adjoint of the
    /// effective tensor, so one corrector family covers both.
    pub fn prepare(tensor: &TrigTensor, resolution: usize, gmres: &GmresConfig) -> Result<Self> {
        let adjoint = tensor.adjoint();
        let chistar = solve_correctors(&adjoint, resolution, gmres)?;
        let ahat_star = homogenized_tensor(&adjoint, &chistar)?;
        let ahat = ahat_star.adjoint();
        let fluxstar = solve_flux_correctors(&adjoint, &chistar, &ahat_star)?;
        Ok(CellData {
            tensor: tensor.clone(),
            adjoint,
            resolution,
            chistar,
            ahat,
            ahat_star,
            fluxstar,
        })
    }
}
