//! Flux correctors: the skew potential φ of the divergence-free, mean-zero
//! flux defect
//!
//!     b_{jk}^{αβ} = a*_{jk}^{αβ} + a*_{jl}^{αγ} ∂_l χ*_k^{γβ} - â*_{jk}^{αβ}.
//!
//! With f_{jk} the zero-mean solution of Δf = b (exact in Fourier space),
//! φ_{ij,k} = ∂_i f_{jk} - ∂_j f_{ik} is antisymmetric in (i,j) and satisfies
//! ∂_i φ_{ij,k} = b_{jk}: the column divergence Σ_i ∂_i f_{ik} is harmonic
//! with zero mean, hence vanishes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::correctors::CorrectorSet;
use super::homogenized::HomogenizedTensor;
use crate::error::{Error, Result};
use crate::fields::{tensor_index, GridField, SpectralGrid, TrigTensor, TWO_PI};

/// Loud-failure bound on |mean b|: the defect must be exactly mean-free up to
/// quadrature noise, anything larger means the effective tensor and the
/// correctors disagree.
pub const FLUX_MEAN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FluxCorrectorSet {
    pub coefficient_hash: String,
    pub resolution: usize,
    pub d: usize,
    pub m: usize,
    /// Component order (i, j, k, α, β); antisymmetric in (i, j) by
    /// construction.
    pub phi: GridField,
    /// max |Σ_i ∂_i φ_{ij,k} - b_{jk}| over the grid, relative to max |b|.
    pub divergence_residual: f64,
    /// Largest |mean b| encountered (already below `FLUX_MEAN_TOL`).
    pub mean_defect: f64,
}

impl FluxCorrectorSet {
    pub fn matches(&self, trig: &TrigTensor, resolution: usize) -> Result<()> {
        if self.coefficient_hash != trig.content_hash() {
            return Err(Error::Usage(
                "flux corrector set was computed for a different coefficient tensor".into(),
            ));
        }
        if self.resolution != resolution {
            return Err(Error::Usage(format!(
                "flux corrector set resolution {} does not match requested {resolution}",
                self.resolution
            )));
        }
        Ok(())
    }
}

/// Pointwise flux defect b as a grid field with component order (j, k, α, β).
pub fn flux_defect(
    astar: &TrigTensor,
    chistar: &CorrectorSet,
    ahat_star: &HomogenizedTensor,
) -> Result<GridField> {
    chistar.matches(astar, chistar.resolution)?;
    let (d, m) = (astar.d(), astar.m());
    let n = chistar.resolution;
    let a = astar.sample(n)?;
    let grads = chistar.gradients()?;
    let g = a.grid_len();
    let mut b = GridField::zeros(d, n, &[d, d, m, m]);
    for j in 0..d {
        for k in 0..d {
            for alpha in 0..m {
                for beta in 0..m {
                    let dst = b.comp_mut(&[j, k, alpha, beta]);
                    let base = a.comp_by_flat(tensor_index(d, m, j, k, alpha, beta));
                    let hat = ahat_star.entry(j, k, alpha, beta);
                    for p in 0..g {
                        dst[p] = base[p] - hat;
                    }
                    for l in 0..d {
                        for gamma in 0..m {
                            let al = a.comp_by_flat(tensor_index(d, m, j, l, alpha, gamma));
                            let gc = grads.comp(&[k, beta, gamma, l]);
                            let dst = b.comp_mut(&[j, k, alpha, beta]);
                            for p in 0..g {
                                dst[p] += al[p] * gc[p];
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(b)
}

/// Build the flux correctors of the adjoint coefficients. Fails loudly when
/// the defect is not mean-free or the skew potential does not reproduce it.
pub fn solve_flux_correctors(
    astar: &TrigTensor,
    chistar: &CorrectorSet,
    ahat_star: &HomogenizedTensor,
) -> Result<FluxCorrectorSet> {
    let (d, m) = (astar.d(), astar.m());
    let n = chistar.resolution;
    let grid = SpectralGrid::new(d, n)?;
    let g = grid.len();
    let b = flux_defect(astar, chistar, ahat_star)?;

    let scale = b.max_abs().max(1.0);
    let mut mean_defect = 0.0f64;
    for (c, mean) in b.mean().into_iter().enumerate() {
        if mean.abs() > FLUX_MEAN_TOL * scale {
            let beta = c % m;
            let alpha = (c / m) % m;
            let k = (c / (m * m)) % d;
            let j = c / (m * m * d);
            return Err(Error::Consistency(format!(
                "flux defect b[{j}][{k}]^({alpha},{beta}) has mean {mean:.3e} \
                 (tolerance {FLUX_MEAN_TOL:.0e} x scale {scale:.3e}); \
                 effective tensor and correctors are inconsistent"
            )));
        }
        mean_defect = mean_defect.max(mean.abs());
    }

    // Zero-mean potential f: Δf = b, solved exactly per Fourier mode. The
    // mean row is dropped (it is below FLUX_MEAN_TOL), so f is well defined.
    let mut f_hat: Vec<Vec<Complex64>> = Vec::with_capacity(b.comp_len());
    let mut kvec = vec![0i64; d];
    for c in 0..b.comp_len() {
        let mut coeffs = vec![Complex64::default(); g];
        grid.forward(b.comp_by_flat(c), &mut coeffs);
        for (flat, v) in coeffs.iter_mut().enumerate() {
            grid.k_vector(flat, &mut kvec);
            let k2: f64 = kvec.iter().map(|&ki| (ki * ki) as f64).sum();
            if k2 == 0.0 {
                *v = Complex64::default();
            } else {
                *v /= -TWO_PI * TWO_PI * k2;
            }
        }
        f_hat.push(coeffs);
    }

    // φ_{ij,k} = ∂_i f_{jk} - ∂_j f_{ik}; fill i < j, mirror with sign.
    let mut phi = GridField::zeros(d, n, &[d, d, d, m, m]);
    let mut buf = vec![Complex64::default(); g];
    let mut slot = vec![0.0; g];
    for i in 0..d {
        for j in (i + 1)..d {
            for k in 0..d {
                for alpha in 0..m {
                    for beta in 0..m {
                        buf.copy_from_slice(&f_hat[tensor_index(d, m, j, k, alpha, beta)]);
                        grid.differentiate(&mut buf, i);
                        let im = grid.inverse_real(&buf, &mut slot);
                        debug_assert!(im < 1e-10);
                        phi.comp_mut(&[i, j, k, alpha, beta]).copy_from_slice(&slot);

                        buf.copy_from_slice(&f_hat[tensor_index(d, m, i, k, alpha, beta)]);
                        grid.differentiate(&mut buf, j);
                        grid.inverse_real(&buf, &mut slot);
                        let dst = phi.comp_mut(&[i, j, k, alpha, beta]);
                        for (v, s) in dst.iter_mut().zip(&slot) {
                            *v -= s;
                        }
                        let mirrored = phi.comp(&[i, j, k, alpha, beta]).to_vec();
                        let lower = phi.comp_mut(&[j, i, k, alpha, beta]);
                        for (v, s) in lower.iter_mut().zip(&mirrored) {
                            *v = -s;
                        }
                    }
                }
            }
        }
    }

    // Verify ∂_i φ_{ij,k} = b_{jk} pointwise.
    let grads = crate::fields::gradient(&grid, &phi)?;
    let mut divergence_residual = 0.0f64;
    for j in 0..d {
        for k in 0..d {
            for alpha in 0..m {
                for beta in 0..m {
                    let bc = b.comp(&[j, k, alpha, beta]);
                    for p in 0..g {
                        let mut div = 0.0;
                        for i in 0..d {
                            div += grads.comp(&[i, j, k, alpha, beta, i])[p];
                        }
                        divergence_residual = divergence_residual.max((div - bc[p]).abs());
                    }
                }
            }
        }
    }
    divergence_residual /= scale;
    if divergence_residual > 1e-8 {
        return Err(Error::Consistency(format!(
            "skew potential misses the flux defect by {divergence_residual:.3e} relative \
             (tolerance 1e-8); increase the corrector resolution"
        )));
    }

    Ok(FluxCorrectorSet {
        coefficient_hash: astar.content_hash(),
        resolution: n,
        d,
        m,
        phi,
        divergence_residual,
        mean_defect,
    })
}
