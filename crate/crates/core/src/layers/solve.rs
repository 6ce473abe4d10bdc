//! Drivers for the lifted half-space systems.
//!
//! Every driver takes the coefficient tensor that is lifted as-is into
//! B(θ, t) = Mᵀ X(θ − tn) M. The half-space systems behind the homogenized
//! boundary data lift the adjoint tensor, so those callers pass the adjoint
//! explicitly; nothing here takes an adjoint implicitly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cell::{CorrectorSet, FluxCorrectorSet};
use crate::error::{Error, Result};
use crate::fields::{GridField, SpectralGrid, TrigTensor};
use crate::geometry::Frame;
use crate::krylov::{gmres, GmresStats, LinearOp};
use crate::layers::disc::{Closure, Discretization};
use crate::layers::operator::{BottomRow, BoundaryData, LayerOperator, TopRow};
use crate::layers::precond::MeanLayerPrecond;
use crate::layers::tail::{compute_profile, estimate_tail, DecayProfile};
use crate::stats::lagrange_derivative_weights;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerKind {
    Dirichlet,
    Neumann,
}

/// A solved lifted system: slice values on the full t-mesh, tail estimate,
/// residual split, decay table and solver statistics.
#[derive(Debug, Clone)]
pub struct LiftedSolution {
    pub kind: LayerKind,
    pub resolution: usize,
    pub mesh: crate::layers::disc::GradedMesh,
    pub closure: Closure,
    pub normal: Vec<f64>,
    values: Vec<GridField>,
    pub tail: Vec<f64>,
    pub tail_spread: f64,
    pub trusted: bool,
    pub interior_residual: f64,
    pub boundary_residual: f64,
    pub stats: GmresStats,
    pub profile: DecayProfile,
}

impl LiftedSolution {
    pub fn d(&self) -> usize {
        self.values[0].d()
    }

    pub fn m(&self) -> usize {
        self.values[0].comp_len()
    }

    /// Slice values V(·, t_j), one field (comp [m]) per t-node.
    pub fn values(&self) -> &[GridField] {
        &self.values
    }

    pub fn slice(&self, j: usize) -> &GridField {
        &self.values[j]
    }

    /// ∂_t V(·, 0) by a one-sided cubic stencil on the first four t-nodes.
    pub fn boundary_time_derivative(&self) -> GridField {
        let nodes = self.mesh.nodes();
        let take = nodes.len().min(4);
        let w = lagrange_derivative_weights(&nodes[..take], 0.0);
        let mut out = GridField::zeros(self.d(), self.values[0].n(), &[self.m()]);
        for (j, &wj) in w.iter().enumerate() {
            out.axpy(wj, &self.values[j]);
        }
        out
    }

    /// Full θ-gradient of the boundary slice, comp [m, d].
    pub fn boundary_gradient(&self) -> Result<GridField> {
        let grid = SpectralGrid::new(self.d(), self.values[0].n())?;
        crate::fields::gradient(&grid, &self.values[0])
    }
}

enum LayerSource<'a> {
    Dirichlet(&'a GridField),
    Neumann(&'a GridField),
}

fn solve_pass(
    tensor: &TrigTensor,
    frame: &Frame,
    disc: &Discretization,
    source: &LayerSource,
    top: TopRow,
    top_values: Option<&[f64]>,
) -> Result<(LayerOperator, Vec<f64>, Vec<f64>, GmresStats)> {
    let bottom = match source {
        LayerSource::Dirichlet(_) => BottomRow::Dirichlet,
        LayerSource::Neumann(_) => BottomRow::Neumann,
    };
    let op = LayerOperator::new(tensor, frame, disc.resolution, &disc.mesh, bottom, top)?;
    let pre = MeanLayerPrecond::new(&op)?;
    let data = match source {
        LayerSource::Dirichlet(phi) => BoundaryData::Dirichlet(phi),
        LayerSource::Neumann(g) => BoundaryData::Neumann(g),
    };
    let rhs = op.assemble_rhs(&data, top_values)?;
    let mut x = vec![0.0; op.dim()];
    let stats = gmres(&op, &pre, &rhs, &mut x, &disc.gmres)?;
    Ok((op, x, rhs, stats))
}

fn run_layer(
    tensor: &TrigTensor,
    frame: &Frame,
    disc: &Discretization,
    source: LayerSource,
) -> Result<LiftedSolution> {
    let kind = match source {
        LayerSource::Dirichlet(_) => LayerKind::Dirichlet,
        LayerSource::Neumann(_) => LayerKind::Neumann,
    };
    disc.validate(kind == LayerKind::Neumann)?;

    let (op, x, rhs, stats) = solve_pass(tensor, frame, disc, &source, TopRow::ZeroNeumann, None)?;
    let m = op.m();
    let g = op.grid().len();
    let sl = m * g;

    let assemble_values = |op: &LayerOperator, x: &[f64], pinned: Option<&[f64]>| -> Vec<f64> {
        let mut full = op.embed(x);
        if let LayerSource::Dirichlet(phi) = &source {
            full[..sl].copy_from_slice(phi.data());
        }
        if let Some(tail) = pinned {
            let last = disc.mesh.interval_count();
            for gamma in 0..m {
                full[last * sl + gamma * g..last * sl + (gamma + 1) * g].fill(tail[gamma]);
            }
        }
        full
    };

    let (op, x, rhs, stats, pinned) = if disc.closure == Closure::TailDirichlet {
        let full = assemble_values(&op, &x, None);
        let values = split_slices(&op, &full);
        let first = estimate_tail(&disc.mesh, &values, disc.gmres.tol);
        let (op2, x2, rhs2, stats2) =
            solve_pass(tensor, frame, disc, &source, TopRow::Dirichlet, Some(&first.value))?;
        (op2, x2, rhs2, stats2, Some(first.value))
    } else {
        (op, x, rhs, stats, None)
    };

    let (interior_residual, boundary_residual) = op.residual_components(&x, &rhs);
    let mut full = assemble_values(&op, &x, pinned.as_deref());

    // The conormal problem fixes U only up to a constant; pin the θ-mean of
    // the boundary slice to zero.
    if kind == LayerKind::Neumann {
        for gamma in 0..m {
            let mean =
                full[gamma * g..(gamma + 1) * g].iter().sum::<f64>() / g as f64;
            for j in 0..disc.mesh.node_count() {
                for v in full[j * sl + gamma * g..j * sl + (gamma + 1) * g].iter_mut() {
                    *v -= mean;
                }
            }
        }
    }

    let values = split_slices(&op, &full);
    let tail_est = estimate_tail(&disc.mesh, &values, disc.gmres.tol);
    let profile = compute_profile(&op, &full, &tail_est.value);

    Ok(LiftedSolution {
        kind,
        resolution: disc.resolution,
        mesh: disc.mesh.clone(),
        closure: disc.closure,
        normal: frame.normal().to_vec(),
        values,
        tail: tail_est.value,
        tail_spread: tail_est.spread,
        trusted: tail_est.trusted,
        interior_residual,
        boundary_residual,
        stats,
        profile,
    })
}

fn split_slices(op: &LayerOperator, full: &[f64]) -> Vec<GridField> {
    let sl = op.m() * op.grid().len();
    let d = op.d();
    let n = op.grid().n();
    full.chunks(sl)
        .map(|c| GridField::from_parts(d, n, vec![op.m()], c.to_vec()).expect("slice shape"))
        .collect()
}

/// Solves the lifted Dirichlet system with boundary values φ at t = 0.
pub fn solve_dirichlet_layer(
    tensor: &TrigTensor,
    frame: &Frame,
    phi: &GridField,
    disc: &Discretization,
) -> Result<LiftedSolution> {
    run_layer(tensor, frame, disc, LayerSource::Dirichlet(phi))
}

/// Dirichlet layer with corrector boundary data φ = −χ_k^β taken from the
/// supplied corrector set (computed for the same tensor that is lifted here).
pub fn solve_corrector_dirichlet(
    tensor: &TrigTensor,
    correctors: &CorrectorSet,
    frame: &Frame,
    k: usize,
    beta: usize,
    disc: &Discretization,
) -> Result<LiftedSolution> {
    correctors.matches(tensor, disc.resolution)?;
    let d = correctors.d;
    let m = correctors.m;
    if k >= d || beta >= m {
        return Err(Error::Usage(format!(
            "corrector data index (k = {k}, beta = {beta}) out of range for d = {d}, m = {m}"
        )));
    }
    let mut phi = GridField::zeros(d, correctors.resolution, &[m]);
    for gamma in 0..m {
        let src = correctors.chi.comp(&[k, beta, gamma]);
        phi.comp_mut(&[gamma]).copy_from_slice(src);
    }
    phi.scale(-1.0);
    run_layer(tensor, frame, disc, LayerSource::Dirichlet(&phi))
}

/// Solves the lifted Neumann system with conormal datum g = T·∇_θ φ at t = 0.
/// The solution is normalized to θ-mean zero on the boundary slice.
pub fn solve_neumann_layer(
    tensor: &TrigTensor,
    frame: &Frame,
    phi: &GridField,
    t_vec: &[f64],
    disc: &Discretization,
) -> Result<LiftedSolution> {
    let d = tensor.d();
    if t_vec.len() != d {
        return Err(Error::Usage(format!(
            "tangent vector has {} components, expected {d}",
            t_vec.len()
        )));
    }
    let norm = t_vec.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 1.0 + 1e-12 {
        return Err(Error::Usage(format!(
            "tangent vector must have length at most 1, got {norm}"
        )));
    }
    let dot: f64 = t_vec
        .iter()
        .zip(frame.normal())
        .map(|(a, b)| a * b)
        .sum();
    if dot.abs() > 1e-10 {
        return Err(Error::Usage(format!(
            "tangent vector is not orthogonal to the normal: T·n = {dot:e}"
        )));
    }
    let grid = SpectralGrid::new(d, disc.resolution)?;
    if phi.d() != d || phi.n() != disc.resolution || phi.comp_len() != tensor.m() {
        return Err(Error::Usage(
            "boundary field must live on the solver grid with one value per component".into(),
        ));
    }
    let weights = grid.directional_weights(t_vec);
    let mut g = GridField::zeros(d, disc.resolution, &[tensor.m()]);
    let mut coeffs = vec![Complex64::default(); grid.len()];
    for gamma in 0..tensor.m() {
        grid.forward(phi.comp(&[gamma]), &mut coeffs);
        for (c, &w) in coeffs.iter_mut().zip(&weights) {
            *c = Complex64::new(-c.im * w, c.re * w);
        }
        grid.inverse_real(&coeffs, g.comp_mut(&[gamma]));
    }
    run_layer(tensor, frame, disc, LayerSource::Neumann(&g))
}

/// Solves the lifted Neumann system with the flux-corrector datum
/// g = ½ Σ_{ij} T_{ij}·∇_θ φ_{ij,k}^{·β}, T_{ij} = n_i e_j − n_j e_i.
pub fn solve_flux_neumann(
    tensor: &TrigTensor,
    flux: &FluxCorrectorSet,
    frame: &Frame,
    k: usize,
    beta: usize,
    disc: &Discretization,
) -> Result<LiftedSolution> {
    flux.matches(tensor, disc.resolution)?;
    let d = flux.d;
    let m = flux.m;
    if k >= d || beta >= m {
        return Err(Error::Usage(format!(
            "flux data index (k = {k}, beta = {beta}) out of range for d = {d}, m = {m}"
        )));
    }
    let grid = SpectralGrid::new(d, disc.resolution)?;
    let n = frame.normal();
    let mut g = GridField::zeros(d, disc.resolution, &[m]);
    let mut coeffs = vec![Complex64::default(); grid.len()];
    let mut acc = vec![Complex64::default(); grid.len()];
    for alpha in 0..m {
        acc.fill(Complex64::default());
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                let mut t_ij = vec![0.0; d];
                t_ij[j] += n[i];
                t_ij[i] -= n[j];
                let weights = grid.directional_weights(&t_ij);
                grid.forward(flux.phi.comp(&[i, j, k, alpha, beta]), &mut coeffs);
                for (a, (c, &w)) in acc.iter_mut().zip(coeffs.iter().zip(&weights)) {
                    *a += Complex64::new(-c.im * w, c.re * w) * 0.5;
                }
            }
        }
        grid.inverse_real(&acc, g.comp_mut(&[alpha]));
    }
    run_layer(tensor, frame, disc, LayerSource::Neumann(&g))
}

/// Solves the forced system −D·(B D U) = D·G + H with U(·, 0) = 0 (used by
/// the weighted-norm diagnostic). Forcing samples as in
/// [`LayerOperator::assemble_forced_rhs`].
pub fn solve_forced_layer(
    tensor: &TrigTensor,
    frame: &Frame,
    disc: &Discretization,
    g_tan_nodes: &[GridField],
    g_t_mids: &[GridField],
    h_nodes: &[GridField],
) -> Result<LiftedSolution> {
    disc.validate(false)?;
    let op = LayerOperator::new(
        tensor,
        frame,
        disc.resolution,
        &disc.mesh,
        BottomRow::Dirichlet,
        TopRow::ZeroNeumann,
    )?;
    let pre = MeanLayerPrecond::new(&op)?;
    let rhs = op.assemble_forced_rhs(g_tan_nodes, g_t_mids, h_nodes)?;
    let mut x = vec![0.0; op.dim()];
    let stats = gmres(&op, &pre, &rhs, &mut x, &disc.gmres)?;
    let (interior_residual, boundary_residual) = op.residual_components(&x, &rhs);
    let full = op.embed(&x);
    let values = split_slices(&op, &full);
    let tail_est = estimate_tail(&disc.mesh, &values, disc.gmres.tol);
    let profile = compute_profile(&op, &full, &tail_est.value);
    Ok(LiftedSolution {
        kind: LayerKind::Dirichlet,
        resolution: disc.resolution,
        mesh: disc.mesh.clone(),
        closure: disc.closure,
        normal: frame.normal().to_vec(),
        values,
        tail: tail_est.value,
        tail_spread: tail_est.spread,
        trusted: tail_est.trusted,
        interior_residual,
        boundary_residual,
        stats,
        profile,
    })
}
