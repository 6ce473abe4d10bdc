//! Periodic cell problems on the unit torus.
//!
//! For each column direction j and system index β the corrector χ_j^β is the
//! mean-zero periodic solution of
//!
//!     -∂_i ( a_{ik}^{αγ}(θ) ∂_k χ_j^{γβ} ) = ∂_i a_{ij}^{αβ}(θ),
//!
//! discretized by trigonometric collocation (derivatives exact, products
//! pointwise) and solved with GMRES preconditioned by the inverse symbol of
//! the mean-coefficient operator, which makes the iteration count independent
//! of the resolution.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{gradient, tensor_index, GridField, SpectralGrid, TrigTensor};
use crate::krylov::{gmres, GmresConfig, GmresStats, LinearOp, Preconditioner};

/// Spectral application of χ ↦ -div(A ∇χ) for R^m-valued χ.
pub struct CellOperator {
    grid: SpectralGrid,
    a: GridField,
    d: usize,
    m: usize,
}

impl CellOperator {
    pub fn new(trig: &TrigTensor, resolution: usize) -> Result<Self> {
        let grid = SpectralGrid::new(trig.d(), resolution)?;
        let a = trig.sample(resolution)?;
        Ok(CellOperator {
            grid,
            a,
            d: trig.d(),
            m: trig.m(),
        })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn coefficient(&self) -> &GridField {
        &self.a
    }

    /// Right-hand side ∂_i a_{ij}^{αβ} for a fixed column (j, β), flattened
    /// component-major ([α][grid]).
    pub fn rhs(&self, j: usize, beta: usize) -> Vec<f64> {
        let g = self.grid.len();
        let mut out = vec![0.0; self.m * g];
        let mut acc = vec![Complex64::default(); g];
        let mut buf = vec![Complex64::default(); g];
        for alpha in 0..self.m {
            acc.iter_mut().for_each(|v| *v = Complex64::default());
            for i in 0..self.d {
                let comp = self.a.comp_by_flat(tensor_index(self.d, self.m, i, j, alpha, beta));
                self.grid.forward(comp, &mut buf);
                self.grid.differentiate(&mut buf, i);
                for (a, b) in acc.iter_mut().zip(&buf) {
                    *a += b;
                }
            }
            let im = self.grid.inverse_real(&acc, &mut out[alpha * g..(alpha + 1) * g]);
            debug_assert!(im < 1e-10);
        }
        out
    }
}

impl LinearOp for CellOperator {
    fn dim(&self) -> usize {
        self.m * self.grid.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let g = self.grid.len();
        let (d, m) = (self.d, self.m);
        // Spectral gradient of every component.
        let mut grads = vec![0.0; m * d * g];
        let mut coeffs = vec![Complex64::default(); g];
        let mut buf = vec![Complex64::default(); g];
        for gamma in 0..m {
            self.grid.forward(&x[gamma * g..(gamma + 1) * g], &mut coeffs);
            for l in 0..d {
                buf.copy_from_slice(&coeffs);
                self.grid.differentiate(&mut buf, l);
                self.grid
                    .inverse_real(&buf, &mut grads[(gamma * d + l) * g..(gamma * d + l + 1) * g]);
            }
        }
        // Pointwise flux F_i^α = a_{il}^{αγ} ∂_l x^γ, then y = -div F.
        let mut flux = vec![0.0; g];
        let mut div = vec![Complex64::default(); g];
        for alpha in 0..m {
            div.iter_mut().for_each(|v| *v = Complex64::default());
            for i in 0..d {
                flux.iter_mut().for_each(|v| *v = 0.0);
                for l in 0..d {
                    for gamma in 0..m {
                        let a = self.a.comp_by_flat(tensor_index(d, m, i, l, alpha, gamma));
                        let gr = &grads[(gamma * d + l) * g..(gamma * d + l + 1) * g];
                        for p in 0..g {
                            flux[p] += a[p] * gr[p];
                        }
                    }
                }
                self.grid.forward(&flux, &mut buf);
                self.grid.differentiate(&mut buf, i);
                for (acc, b) in div.iter_mut().zip(&buf) {
                    *acc += b;
                }
            }
            let dst = &mut y[alpha * g..(alpha + 1) * g];
            self.grid.inverse_real(&div, dst);
            dst.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Inverse symbol of the constant-mean operator: per wavenumber the m×m
/// matrix ((2π)² Ā_{il}^{αγ} k_i k_l)⁻¹, zero on the mean mode.
pub struct MeanSymbolPrecond {
    grid: SpectralGrid,
    m: usize,
    /// Row-major m×m inverse per wavenumber.
    inv: Vec<f64>,
}

impl MeanSymbolPrecond {
    pub fn new(trig: &TrigTensor, grid: &SpectralGrid) -> Result<Self> {
        let (d, m) = (trig.d(), trig.m());
        let mean = trig.mean_tensor();
        let g = grid.len();
        let mut inv = vec![0.0; m * m * g];
        let mut k = vec![0i64; d];
        let two_pi = crate::fields::TWO_PI;
        for flat in 0..g {
            grid.k_vector(flat, &mut k);
            if k.iter().all(|&c| c == 0) {
                continue;
            }
            let mut s = nalgebra::DMatrix::<f64>::zeros(m, m);
            for alpha in 0..m {
                for gamma in 0..m {
                    let mut acc = 0.0;
                    for i in 0..d {
                        for l in 0..d {
                            acc += mean[tensor_index(d, m, i, l, alpha, gamma)]
                                * (k[i] as f64)
                                * (k[l] as f64);
                        }
                    }
                    s[(alpha, gamma)] = two_pi * two_pi * acc;
                }
            }
            let sinv = s.try_inverse().ok_or_else(|| {
                Error::Hypothesis(format!(
                    "mean-coefficient symbol is singular at k = {k:?}; the mean tensor is not elliptic"
                ))
            })?;
            for alpha in 0..m {
                for gamma in 0..m {
                    inv[(alpha * m + gamma) * g + flat] = sinv[(alpha, gamma)];
                }
            }
        }
        Ok(MeanSymbolPrecond {
            grid: grid.clone(),
            m,
            inv,
        })
    }
}

impl Preconditioner for MeanSymbolPrecond {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let g = self.grid.len();
        let m = self.m;
        let mut rhat = vec![Complex64::default(); m * g];
        for gamma in 0..m {
            let mut buf = vec![Complex64::default(); g];
            self.grid.forward(&r[gamma * g..(gamma + 1) * g], &mut buf);
            rhat[gamma * g..(gamma + 1) * g].copy_from_slice(&buf);
        }
        let mut zhat = vec![Complex64::default(); g];
        for alpha in 0..m {
            zhat.iter_mut().for_each(|v| *v = Complex64::default());
            for gamma in 0..m {
                let w = &self.inv[(alpha * m + gamma) * g..(alpha * m + gamma + 1) * g];
                let rg = &rhat[gamma * g..(gamma + 1) * g];
                for p in 0..g {
                    zhat[p] += w[p] * rg[p];
                }
            }
            self.grid
                .inverse_real(&zhat, &mut z[alpha * g..(alpha + 1) * g]);
        }
    }
}

/// The full corrector family of one coefficient tensor at one resolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrectorSet {
    pub coefficient_hash: String,
    pub resolution: usize,
    pub d: usize,
    pub m: usize,
    /// Component order (j, β, γ): γ-component of χ_j^β.
    pub chi: GridField,
    /// Relative residual per (j, β) column, row-major (j*m + β).
    pub residuals: Vec<f64>,
    pub iterations: Vec<usize>,
}

impl CorrectorSet {
    pub fn matches(&self, trig: &TrigTensor, resolution: usize) -> Result<()> {
        if self.coefficient_hash != trig.content_hash() {
            return Err(Error::Usage(
                "corrector set was computed for a different coefficient tensor".into(),
            ));
        }
        if self.resolution != resolution {
            return Err(Error::Usage(format!(
                "corrector set resolution {} does not match requested {resolution}",
                self.resolution
            )));
        }
        Ok(())
    }

    /// Gradient field with component order (j, β, γ, l) = ∂_l χ_j^{γβ}.
    pub fn gradients(&self) -> Result<GridField> {
        let grid = SpectralGrid::new(self.d, self.resolution)?;
        gradient(&grid, &self.chi)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0f64, |a, &b| a.max(b))
    }
}

/// Solve all d·m cell problems of the given tensor. Columns run in parallel;
/// assembly order is fixed, so reruns are bit-identical.
pub fn solve_correctors(
    trig: &TrigTensor,
    resolution: usize,
    cfg: &GmresConfig,
) -> Result<CorrectorSet> {
    let (d, m) = (trig.d(), trig.m());
    let op = CellOperator::new(trig, resolution)?;
    let pre = MeanSymbolPrecond::new(trig, op.grid())?;
    let g = op.grid().len();

    let columns: Vec<(usize, usize)> = (0..d)
        .flat_map(|j| (0..m).map(move |beta| (j, beta)))
        .collect();
    let solves: Vec<(Vec<f64>, GmresStats)> = columns
        .par_iter()
        .map(|&(j, beta)| {
            let b = op.rhs(j, beta);
            let mut x = vec![0.0; op.dim()];
            let stats = gmres(&op, &pre, &b, &mut x, cfg)?;
            // Mean-zero normalization (exact subtraction).
            for gamma in 0..m {
                let block = &mut x[gamma * g..(gamma + 1) * g];
                let mean = block.iter().sum::<f64>() / g as f64;
                block.iter_mut().for_each(|v| *v -= mean);
            }
            Ok((x, stats))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut chi = GridField::zeros(d, resolution, &[d, m, m]);
    let mut residuals = Vec::with_capacity(columns.len());
    let mut iterations = Vec::with_capacity(columns.len());
    for (&(j, beta), (x, stats)) in columns.iter().zip(&solves) {
        for gamma in 0..m {
            chi.comp_mut(&[j, beta, gamma])
                .copy_from_slice(&x[gamma * g..(gamma + 1) * g]);
        }
        residuals.push(stats.residual);
        iterations.push(stats.iterations);
    }
    Ok(CorrectorSet {
        coefficient_hash: trig.content_hash(),
        resolution,
        d,
        m,
        chi,
        residuals,
        iterations,
    })
}
