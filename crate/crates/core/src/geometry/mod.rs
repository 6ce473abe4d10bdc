//! Boundary geometry: tangent frames, Diophantine quality of normals, and
//! convex-surface sampling.

pub mod diophantine;
pub mod frame;
pub mod surface;

pub use diophantine::{kappa, DiophantineReport, RATIONAL_TOL};
pub use frame::{build_frame, build_frame_branch, Frame, FrameBranch, POLE_TOL};
pub use surface::{
    kappa_statistics, sample_boundary, ConvexSurface, KappaStatistics, SurfaceSample,
};
