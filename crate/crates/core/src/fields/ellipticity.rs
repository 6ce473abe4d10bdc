//! Pointwise ellipticity scan.
//!
//! At each grid point the quadratic form ξ ↦ a_{ij}^{αβ} ξ_i^α ξ_j^β over
//! ξ ∈ R^{m×d} is the symmetric part of the (m·d)×(m·d) matrix
//! Q[(i,α),(j,β)] = a_{ij}^{αβ}; its extreme eigenvalues must sit inside
//! [λ, 1/λ].

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::GridField;
use super::trig::tensor_index;
use crate::error::{Error, Result};

/// Slack granted to the declared bounds; round-off from sampling only.
pub const ELLIPTICITY_SCAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EllipticityReport {
    pub lambda_declared: f64,
    /// Smallest eigenvalue of the symmetrized form over all grid points.
    pub lambda_min_observed: f64,
    /// Largest eigenvalue over all grid points (checked against 1/λ).
    pub lambda_max_observed: f64,
    pub pass: bool,
    /// Flat grid index attaining the smallest eigenvalue.
    pub worst_point: usize,
}

/// Scan a sampled coefficient field (component shape (d,d,m,m)).
pub fn check_ellipticity(field: &GridField, lambda: f64) -> Result<EllipticityReport> {
    let d = field.d();
    let shape = field.comp_shape();
    if shape.len() != 4 || shape[0] != d || shape[1] != d || shape[2] != shape[3] {
        return Err(Error::Usage(format!(
            "ellipticity scan expects a (d,d,m,m) coefficient field, got {shape:?}"
        )));
    }
    let m = shape[2];
    let nd = m * d;
    let grid_len = field.grid_len();

    let extremes: Vec<(f64, f64)> = (0..grid_len)
        .into_par_iter()
        .map(|p| {
            let mut q = DMatrix::<f64>::zeros(nd, nd);
            for i in 0..d {
                for j in 0..d {
                    for a in 0..m {
                        for b in 0..m {
                            let v = field.comp_by_flat(tensor_index(d, m, i, j, a, b))[p];
                            q[(i * m + a, j * m + b)] = v;
                        }
                    }
                }
            }
            let sym = (&q + q.transpose()) * 0.5;
            let eig = sym.symmetric_eigen();
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &ev in eig.eigenvalues.iter() {
                lo = lo.min(ev);
                hi = hi.max(ev);
            }
            (lo, hi)
        })
        .collect();

    let mut lambda_min = f64::INFINITY;
    let mut lambda_max = f64::NEG_INFINITY;
    let mut worst = 0;
    for (p, &(lo, hi)) in extremes.iter().enumerate() {
        if lo < lambda_min {
            lambda_min = lo;
            worst = p;
        }
        lambda_max = lambda_max.max(hi);
    }
    let pass = lambda_min >= lambda - ELLIPTICITY_SCAN_TOL
        && lambda_max <= 1.0 / lambda + ELLIPTICITY_SCAN_TOL;
    Ok(EllipticityReport {
        lambda_declared: lambda,
        lambda_min_observed: lambda_min,
        lambda_max_observed: lambda_max,
        pass,
        worst_point: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::trig::TrigTensor;

    #[test]
    fn identity_reports_unit_bounds() {
        let t = TrigTensor::identity(2, 1);
        let f = t.sample(8).unwrap();
        let r = check_ellipticity(&f, 1.0).unwrap();
        assert!(r.pass);
        assert!((r.lambda_min_observed - 1.0).abs() < 1e-14);
        assert!((r.lambda_max_observed - 1.0).abs() < 1e-14);
    }
}
