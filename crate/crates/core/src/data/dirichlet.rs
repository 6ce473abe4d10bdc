//! Homogenized Dirichlet data: the effective boundary value f̄(x) that the
//! oscillating data f(x, x/ε) converges to.
//!
//! For a boundary point with unit normal n the value is a fixed θ-average
//!
//!   f̄^α(x) = H^{αβ} ∫ [δ^{γβ} + n_ℓ n_k ∂_ℓ χ*_k^{γβ}(θ)
//!            − n_k ∂_t V^{γβ}_k(θ, 0)] a_{ij}^{γν}(θ) n_i n_j f^ν(x, θ) dθ,
//!
//! where χ* are the adjoint correctors, V^β_k solves the lifted adjoint
//! half-space system with boundary data −χ*^β_k, and H = (â_{ij} n_i n_j)^{-1}
//! inverts the directional contraction of the plain effective tensor. The
//! orientation of H is pinned by consistency: a Green identity between the
//! plain lifted solution and adjoint corrector test functions shows the
//! bracket integrates to (â_{ij} n_i n_j)^{βν} against constant data, so this
//! H (and only this H, once the system is not symmetric) makes constant
//! coefficients reproduce the data average and θ-constant data reproduce
//! itself. The kernel depends on (A, n, disc) only, so one build serves every
//! boundary point sharing the normal.

use serde::{Deserialize, Serialize};

use crate::cell::directional_matrix;
use crate::data::cell_data::CellData;
use crate::data::sample::{required_quality, BoundaryDataSample, Provenance};
use crate::data::trace_l2_distance;
use crate::error::{Error, Result};
use crate::fields::GridField;
use crate::geometry::Frame;
use crate::layers::{solve_corrector_dirichlet, Discretization, LayerKind};

/// The θ-kernel of the homogenized Dirichlet data for one normal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirichletKernel {
    pub d: usize,
    pub m: usize,
    pub normal: Vec<f64>,
    pub kappa_hat: f64,
    /// K^{αν}(θ), component order (α, ν).
    kernel: GridField,
    /// Boundary traces ∂_t V^{γβ}_k(θ, 0), component order (k, β, γ). The
    /// boundary data −χ*^β_k of these solves does not depend on the normal,
    /// so differencing the traces of two kernels isolates exactly how the
    /// lifted operator moves with n.
    trace: GridField,
    pub trusted: bool,
    pub provenance: Provenance,
}

impl DirichletKernel {
    /// Run the m·d corrector-data lifted solves for this normal and fold the
    /// formula into a single kernel field. Solves run sequentially in a fixed
    /// order, so rebuilds are bit-identical.
    pub fn new(cell: &CellData, frame: &Frame, disc: &Discretization) -> Result<Self> {
        let quality = required_quality(disc)?;
        let d = cell.tensor.d();
        let m = cell.tensor.m();
        if frame.d() != d {
            return Err(Error::Usage(format!(
                "frame dimension {} does not match coefficient dimension {d}",
                frame.d()
            )));
        }
        let res = disc.resolution;
        let n = frame.normal();
        let h = directional_matrix(&cell.ahat, n)?;

        // w^{γβ}(θ) = δ^{γβ} + n_ℓ n_k ∂_ℓ χ*_k^{γβ} − n_k ∂_t V^{γβ}_k(θ, 0).
        let grads = cell.chistar.gradients()?;
        let mut w = GridField::zeros(d, res, &[m, m]);
        for gamma in 0..m {
            for beta in 0..m {
                let dst = w.comp_mut(&[gamma, beta]);
                if gamma == beta {
                    dst.fill(1.0);
                }
                for k in 0..d {
                    for l in 0..d {
                        let weight = n[l] * n[k];
                        if weight == 0.0 {
                            continue;
                        }
                        for (o, s) in dst.iter_mut().zip(grads.comp(&[k, beta, gamma, l])) {
                            *o += weight * s;
                        }
                    }
                }
            }
        }

        let mut trusted = true;
        let mut max_iterations = 0usize;
        let mut max_interior_residual = 0.0f64;
        let mut max_tail_spread = 0.0f64;
        let mut trace = GridField::zeros(d, res, &[d, m, m]);
        for k in 0..d {
            for beta in 0..m {
                let sol =
                    solve_corrector_dirichlet(&cell.adjoint, &cell.chistar, frame, k, beta, disc)?;
                trusted &= sol.trusted;
                max_iterations = max_iterations.max(sol.stats.iterations);
                max_interior_residual = max_interior_residual.max(sol.interior_residual);
                max_tail_spread = max_tail_spread.max(sol.tail_spread);
                let dtv0 = sol.boundary_time_derivative();
                for gamma in 0..m {
                    let src = dtv0.comp(&[gamma]);
                    trace.comp_mut(&[k, beta, gamma]).copy_from_slice(src);
                    let dst = w.comp_mut(&[gamma, beta]);
                    for (o, s) in dst.iter_mut().zip(src) {
                        *o -= n[k] * s;
                    }
                }
            }
        }

        // K^{αν}(θ) = H^{αβ} w^{γβ}(θ) a_{ij}^{γν}(θ) n_i n_j.
        let a = cell.tensor.sample(res)?;
        let g = a.grid_len();
        let mut s = GridField::zeros(d, res, &[m, m]);
        for gamma in 0..m {
            for nu in 0..m {
                let dst = s.comp_mut(&[gamma, nu]);
                for i in 0..d {
                    for j in 0..d {
                        let weight = n[i] * n[j];
                        if weight == 0.0 {
                            continue;
                        }
                        let src = a.comp(&[i, j, gamma, nu]);
                        for (o, v) in dst.iter_mut().zip(src) {
                            *o += weight * v;
                        }
                    }
                }
            }
        }
        let mut kernel = GridField::zeros(d, res, &[m, m]);
        for alpha in 0..m {
            for nu in 0..m {
                let dst = kernel.comp_mut(&[alpha, nu]);
                for beta in 0..m {
                    for gamma in 0..m {
                        let hv = h[(alpha, beta)];
                        let wc = w.comp(&[gamma, beta]);
                        let sc = s.comp(&[gamma, nu]);
                        for idx in 0..g {
                            dst[idx] += hv * wc[idx] * sc[idx];
                        }
                    }
                }
            }
        }

        Ok(DirichletKernel {
            d,
            m,
            normal: n.to_vec(),
            kappa_hat: quality.kappa_hat,
            kernel,
            trace,
            trusted,
            provenance: Provenance {
                resolution: res,
                t_max: disc.mesh.t_max(),
                node_count: disc.mesh.node_count(),
                gmres_tol: disc.gmres.tol,
                max_iterations,
                max_interior_residual,
                max_tail_spread,
            },
        })
    }

    /// Kernel values K^{αν}(θ), component order (α, ν).
    pub fn kernel(&self) -> &GridField {
        &self.kernel
    }

    /// Boundary traces ∂_t V^{γβ}_k(θ, 0), component order (k, β, γ).
    pub fn boundary_trace(&self) -> &GridField {
        &self.trace
    }

    /// L²_θ distance between the boundary traces of two kernels, aggregated
    /// over the solve family: sqrt(Σ_{k,β,γ} ∫ |∂_tV₁ − ∂_tV₂|²(θ, 0) dθ).
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        trace_l2_distance(&self.trace, &other.trace)
    }

    /// f̄^α = mean_θ K^{αν}(θ) f^ν(θ) for one boundary point's data slice
    /// f = f(x, ·), component order (ν).
    pub fn apply(&self, f_slice: &GridField) -> Result<Vec<f64>> {
        if f_slice.d() != self.d
            || f_slice.n() != self.kernel.n()
            || f_slice.comp_len() != self.m
        {
            return Err(Error::Usage(format!(
                "Dirichlet data slice must live on the kernel grid with {} components",
                self.m
            )));
        }
        let g = self.kernel.grid_len() as f64;
        let mut out = vec![0.0; self.m];
        for alpha in 0..self.m {
            let mut acc = 0.0;
            for nu in 0..self.m {
                let kc = self.kernel.comp(&[alpha, nu]);
                let fc = f_slice.comp(&[nu]);
                acc += kc.iter().zip(fc).map(|(a, b)| a * b).sum::<f64>();
            }
            out[alpha] = acc / g;
        }
        Ok(out)
    }

    /// Largest row L¹ norm max_α mean_θ Σ_ν |K^{αν}|; bounds |f̄| ≤ L¹ · max|f|.
    pub fn l1_norm(&self) -> f64 {
        let g = self.kernel.grid_len() as f64;
        (0..self.m)
            .map(|alpha| {
                (0..self.m)
                    .map(|nu| {
                        self.kernel
                            .comp(&[alpha, nu])
                            .iter()
                            .map(|v| v.abs())
                            .sum::<f64>()
                    })
                    .sum::<f64>()
                    / g
            })
            .fold(0.0f64, f64::max)
    }

    /// Evaluate one boundary point into a records-ready sample.
    pub fn sample(&self, x: &[f64], f_slice: &GridField) -> Result<BoundaryDataSample> {
        Ok(BoundaryDataSample {
            x: x.to_vec(),
            normal: self.normal.clone(),
            kappa_hat: self.kappa_hat,
            kind: LayerKind::Dirichlet,
            value: self.apply(f_slice)?,
            trusted: self.trusted,
            provenance: self.provenance.clone(),
        })
    }
}

/// One-shot evaluation of the homogenized Dirichlet data at a single point.
/// Builds the kernel and applies it; reuse [`DirichletKernel`] directly when
/// several points share the normal.
pub fn dirichlet_data(
    cell: &CellData,
    frame: &Frame,
    f_slice: &GridField,
    disc: &Discretization,
) -> Result<Vec<f64>> {
    DirichletKernel::new(cell, frame, disc)?.apply(f_slice)
}
