//! Homogenized Neumann data: the effective first-order data ḡ_{jk}(x) that
//! the oscillating Neumann data T_{ℓr}·∇g_{ℓr}(x, x/ε) converges to.
//!
//! For a boundary point with unit normal n,
//!
//!   ḡ_{jk}^γ(x) = c_j^{γβ} · mean_θ [ T_{ℓr} · P^{νβ}_k(θ) ] g_{ℓr}^ν(x, θ),
//!
//! with T_{ℓr} = n_ℓ e_r − n_r e_ℓ, the constant front factor
//! c_j^{γβ} = n_i â_{ji}^{αγ} h^{αβ}, h = (â*_{ij} n_i n_j)^{-1}, and the
//! direction kernel
//!
//!   P^{νβ}_k(θ) = e_k δ^{νβ} + ∇_θ χ*^{νβ}_k(θ) + ∇_θ U^{νβ}_k(θ, 0),
//!
//! where U^β_k solves the lifted half-space Neumann problem whose conormal
//! datum is built from the adjoint flux correctors. Everything depends on
//! (A, n, disc) only, so one build serves every point sharing the normal.

use serde::{Deserialize, Serialize};

use crate::cell::directional_matrix;
use crate::data::cell_data::CellData;
use crate::data::sample::{required_quality, BoundaryDataSample, Provenance};
use crate::data::trace_l2_distance;
use crate::error::{Error, Result};
use crate::fields::GridField;
use crate::geometry::Frame;
use crate::layers::{solve_flux_neumann, Discretization, LayerKind};

/// The θ-kernel of the homogenized Neumann data for one normal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeumannKernel {
    pub d: usize,
    pub m: usize,
    pub normal: Vec<f64>,
    pub kappa_hat: f64,
    /// P^{νβ}_k(θ), component order (k, β, ν, ℓ) where ℓ is the gradient axis.
    direction: GridField,
    /// c_j^{γβ}, flattened (j, γ, β) row-major. Contracting with the normal
    /// gives n_j c_j^{γβ} = δ^{γβ} because (â*_{ij} n_i n_j) is the transpose
    /// of (â_{ij} n_i n_j); that gauge identity is what makes θ-independent
    /// data feed through the effective problem unchanged.
    pub(crate) front: Vec<f64>,
    pub trusted: bool,
    pub provenance: Provenance,
}

impl NeumannKernel {
    /// Run the m·d flux-data lifted Neumann solves for this normal and fold
    /// the formula into a direction kernel plus constant front factor.
    /// Solves run sequentially in a fixed order, so rebuilds are
    /// bit-identical.
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
        let h = directional_matrix(&cell.ahat_star, n)?;

        // P^{νβ}_k = e_k δ^{νβ} + ∇χ*^{νβ}_k, then + ∇U^{νβ}_k(·, 0) per solve.
        let grads = cell.chistar.gradients()?;
        let mut direction = GridField::zeros(d, res, &[d, m, m, d]);
        for k in 0..d {
            for beta in 0..m {
                for nu in 0..m {
                    for l in 0..d {
                        let dst = direction.comp_mut(&[k, beta, nu, l]);
                        if nu == beta && l == k {
                            dst.fill(1.0);
                        }
                        let src = grads.comp(&[k, beta, nu, l]);
                        for (o, s) in dst.iter_mut().zip(src) {
                            *o += s;
                        }
                    }
                }
            }
        }

        let mut trusted = true;
        let mut max_iterations = 0usize;
        let mut max_interior_residual = 0.0f64;
        let mut max_tail_spread = 0.0f64;
        for k in 0..d {
            for beta in 0..m {
                let sol = solve_flux_neumann(&cell.adjoint, &cell.fluxstar, frame, k, beta, disc)?;
                trusted &= sol.trusted;
                max_iterations = max_iterations.max(sol.stats.iterations);
                max_interior_residual = max_interior_residual.max(sol.interior_residual);
                max_tail_spread = max_tail_spread.max(sol.tail_spread);
                let gu = sol.boundary_gradient()?;
                for nu in 0..m {
                    for l in 0..d {
                        let src = gu.comp(&[nu, l]);
                        let dst = direction.comp_mut(&[k, beta, nu, l]);
                        for (o, s) in dst.iter_mut().zip(src) {
                            *o += s;
                        }
                    }
                }
            }
        }

        // c_j^{γβ} = n_i â_{ji}^{αγ} h^{αβ}.
        let mut front = vec![0.0; d * m * m];
        for j in 0..d {
            for gamma in 0..m {
                for beta in 0..m {
                    let mut acc = 0.0;
                    for alpha in 0..m {
                        let mut na = 0.0;
                        for i in 0..d {
                            na += n[i] * cell.ahat.entry(j, i, alpha, gamma);
                        }
                        acc += na * h[(alpha, beta)];
                    }
                    front[(j * m + gamma) * m + beta] = acc;
                }
            }
        }

        Ok(NeumannKernel {
            d,
            m,
            normal: n.to_vec(),
            kappa_hat: quality.kappa_hat,
            direction,
            front,
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

    /// Direction kernel P^{νβ}_k(θ), component order (k, β, ν, ℓ).
    pub fn direction(&self) -> &GridField {
        &self.direction
    }

    /// L²_θ distance between the boundary gradient traces of two kernels,
    /// aggregated over the solve family:
    /// sqrt(Σ_{k,β,ν,ℓ} ∫ |∂_ℓU₁ − ∂_ℓU₂|²(θ, 0) dθ). Differencing the
    /// direction kernels gives exactly this, because the e_kδ^{νβ} and
    /// ∇χ* terms do not depend on the normal and cancel.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        trace_l2_distance(&self.direction, &other.direction)
    }

    /// ḡ_{jk}^γ for one boundary point's data slice g = g(x, ·), component
    /// order (ℓ, r, ν). Returns the flattened (γ, j, k) array of length
    /// m·d·d.
    pub fn apply(&self, g_slice: &GridField) -> Result<Vec<f64>> {
        let (d, m) = (self.d, self.m);
        if g_slice.d() != d
            || g_slice.n() != self.direction.n()
            || g_slice.comp_len() != d * d * m
        {
            return Err(Error::Usage(format!(
                "Neumann data slice must live on the kernel grid with component \
                 shape [{d}, {d}, {m}]"
            )));
        }
        let n = &self.normal;
        let g = self.direction.grid_len() as f64;
        // inner[β][k] = Σ_{ν,ℓ,r} mean_θ (n_ℓ P^{νβ}_k[r] − n_r P^{νβ}_k[ℓ]) g^ν_{ℓr}.
        let mut inner = vec![0.0; m * d];
        for beta in 0..m {
            for k in 0..d {
                let mut acc = 0.0;
                for nu in 0..m {
                    for l in 0..d {
                        for r in 0..d {
                            if l == r {
                                continue;
                            }
                            let gc = g_slice.comp(&[l, r, nu]);
                            let pr = self.direction.comp(&[k, beta, nu, r]);
                            let pl = self.direction.comp(&[k, beta, nu, l]);
                            let mut dot = 0.0;
                            for idx in 0..gc.len() {
                                dot += (n[l] * pr[idx] - n[r] * pl[idx]) * gc[idx];
                            }
                            acc += dot;
                        }
                    }
                }
                inner[beta * d + k] = acc / g;
            }
        }
        let mut out = vec![0.0; m * d * d];
        for gamma in 0..m {
            for j in 0..d {
                for k in 0..d {
                    let mut acc = 0.0;
                    for beta in 0..m {
                        acc += self.front[(j * m + gamma) * m + beta] * inner[beta * d + k];
                    }
                    out[(gamma * d + j) * d + k] = acc;
                }
            }
        }
        Ok(out)
    }

    /// Largest combined L¹ norm over output components; bounds
    /// |ḡ| ≤ L¹ · max|g|.
    pub fn l1_norm(&self) -> f64 {
        let (d, m) = (self.d, self.m);
        let n = &self.normal;
        let g = self.direction.grid_len() as f64;
        // row[β][k] = Σ_{ν,ℓ,r} mean_θ |n_ℓ P^{νβ}_k[r] − n_r P^{νβ}_k[ℓ]|.
        let mut row = vec![0.0; m * d];
        for beta in 0..m {
            for k in 0..d {
                let mut acc = 0.0;
                for nu in 0..m {
                    for l in 0..d {
                        for r in 0..d {
                            if l == r {
                                continue;
                            }
                            let pr = self.direction.comp(&[k, beta, nu, r]);
                            let pl = self.direction.comp(&[k, beta, nu, l]);
                            acc += pr
                                .iter()
                                .zip(pl)
                                .map(|(a, b)| (n[l] * a - n[r] * b).abs())
                                .sum::<f64>();
                        }
                    }
                }
                row[beta * d + k] = acc / g;
            }
        }
        let mut worst = 0.0f64;
        for gamma in 0..m {
            for j in 0..d {
                for k in 0..d {
                    let mut acc = 0.0;
                    for beta in 0..m {
                        acc += self.front[(j * m + gamma) * m + beta].abs() * row[beta * d + k];
                    }
                    worst = worst.max(acc);
                }
            }
        }
        worst
    }

    /// Evaluate one boundary point into a records-ready sample.
    pub fn sample(&self, x: &[f64], g_slice: &GridField) -> Result<BoundaryDataSample> {
        Ok(BoundaryDataSample {
            x: x.to_vec(),
            normal: self.normal.clone(),
            kappa_hat: self.kappa_hat,
            kind: LayerKind::Neumann,
            value: self.apply(g_slice)?,
            trusted: self.trusted,
            provenance: self.provenance.clone(),
        })
    }
}

/// One-shot evaluation of the homogenized Neumann data at a single point.
/// Builds the kernel and applies it; reuse [`NeumannKernel`] directly when
/// several points share the normal.
pub fn neumann_data(
    cell: &CellData,
    frame: &Frame,
    g_slice: &GridField,
    disc: &Discretization,
) -> Result<Vec<f64>> {
    NeumannKernel::new(cell, frame, disc)?.apply(g_slice)
}
