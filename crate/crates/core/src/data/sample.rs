//! Boundary-data samples and the boundary layer tail map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{GridField, TrigTensor};
use crate::geometry::build_frame;
use crate::layers::{solve_dirichlet_layer, Discretization, LayerKind, NormalQuality, TailEstimate};

/// Grid sizes and tolerances behind one boundary-data value, kept with the
/// sample so downstream fits can audit their inputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub resolution: usize,
    pub t_max: f64,
    pub node_count: usize,
    pub gmres_tol: f64,
    /// Worst GMRES iteration count over the lifted solves behind the value.
    pub max_iterations: usize,
    /// Worst interior residual over those solves.
    pub max_interior_residual: f64,
    /// Worst tail spread over those solves.
    pub max_tail_spread: f64,
}

/// One evaluated boundary point: the homogenized Dirichlet value f̄(x) ∈ R^m
/// or the homogenized Neumann value ḡ(x) ∈ R^{m·d·d} (flattened (γ, j, k)).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryDataSample {
    pub x: Vec<f64>,
    pub normal: Vec<f64>,
    pub kappa_hat: f64,
    pub kind: LayerKind,
    pub value: Vec<f64>,
    /// True only when every lifted solve behind the value had a trusted tail.
    pub trusted: bool,
    pub provenance: Provenance,
}

/// Reject discretizations that do not certify a usable normal: the
/// homogenized-data formulas are defined only where the normal has positive
/// Diophantine constant.
pub(crate) fn required_quality(disc: &Discretization) -> Result<NormalQuality> {
    let q = disc.quality.ok_or_else(|| {
        Error::Usage(
            "homogenized boundary data needs the Diophantine quality of the normal; \
             run kappa(n) and attach the result to the discretization"
                .into(),
        )
    })?;
    if q.rational || q.kappa_hat <= 0.0 {
        return Err(Error::Hypothesis(
            "the homogenized-data formulas hold only for normals with positive \
             Diophantine constant; this normal was detected as rational"
                .into(),
        ));
    }
    disc.validate(true)?;
    Ok(q)
}

/// Boundary layer tail of the half-space Dirichlet problem with data φ:
/// the far-field constant the solution settles to. Pass the coefficients
/// that should be lifted; the adjoint convention is the caller's choice.
pub fn tail_map(
    tensor: &TrigTensor,
    normal: &[f64],
    phi: &GridField,
    disc: &Discretization,
) -> Result<TailEstimate> {
    required_quality(disc)?;
    let frame = build_frame(normal)?;
    let sol = solve_dirichlet_layer(tensor, &frame, phi, disc)?;
    Ok(TailEstimate {
        value: sol.tail.clone(),
        spread: sol.tail_spread,
        trusted: sol.trusted,
    })
}
