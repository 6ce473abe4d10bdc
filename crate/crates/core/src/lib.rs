//! Numerical laboratory for periodic homogenization with oscillating
//! boundary data.
//!
//! The library covers the full pipeline from coefficient tensors to
//! homogenized boundary data:
//!
//! * [`fields`]: trig-polynomial coefficient tensors on the unit torus,
//!   collocation samples, spectral calculus, ellipticity scans;
//! * [`cell`]: correctors, homogenized tensors, flux correctors;
//! * [`geometry`]: tangent frames, the Diophantine quality κ of a boundary
//!   normal, quasi-uniform samples of convex surfaces;
//! * [`layers`]: lifted half-space systems on T^d × (0, T) with Dirichlet or
//!   Neumann data, boundary layer tails, decay diagnostics;
//! * [`data`]: the explicit formulas turning oscillating Dirichlet/Neumann
//!   data into their homogenized effective data;
//! * [`experiments`]: continuity sweeps, Hölder-exponent and κ-weighted fits;
//! * [`oracles`]: independent reference implementations (quadrature, strip
//!   finite differences, closed forms) used by the self-test suite.

pub mod cell;
pub mod data;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod geometry;
pub mod krylov;
pub mod layers;
pub mod oracles;
pub mod presets;
pub mod selftest;
pub mod stats;

pub use error::{Error, Result};
