//! Cell problems on the torus: correctors, the effective tensor, and flux
//! correctors with their skew potential.

pub mod correctors;
pub mod flux;
pub mod homogenized;

pub use correctors::{solve_correctors, CellOperator, CorrectorSet, MeanSymbolPrecond};
pub use flux::{flux_defect, solve_flux_correctors, FluxCorrectorSet, FLUX_MEAN_TOL};
pub use homogenized::{directional_matrix, homogenized_tensor, HomogenizedTensor};
