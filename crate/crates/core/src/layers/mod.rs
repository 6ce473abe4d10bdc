//! Lifted half-space boundary layer systems on T^d × (0, T): discretization,
//! operator, preconditioner, solver drivers, tail and decay diagnostics, and
//! the pull-back to the physical half space.

pub mod disc;
pub mod halfspace;
pub mod operator;
pub mod precond;
pub mod solve;
pub mod tail;
pub mod weighted;

pub use disc::{Closure, Discretization, GradedMesh, NormalQuality};
pub use halfspace::{halfspace_reconstruct, HalfSpaceEvaluator};
pub use operator::{BottomRow, BoundaryData, LayerOperator, TopRow};
pub use precond::MeanLayerPrecond;
pub use solve::{
    solve_corrector_dirichlet, solve_dirichlet_layer, solve_flux_neumann, solve_forced_layer,
    solve_neumann_layer, LayerKind, LiftedSolution,
};
pub use tail::{estimate_tail, fit_decay, DecayFit, DecayProfile, DecayRow, TailEstimate};
pub use weighted::{weighted_norm_diagnostic, ForcingSamples, WeightedDiagnostic};
