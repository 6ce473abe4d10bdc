//! Discrete operator for the lifted half-space systems on T^d × (0, T).
//!
//! The unknown V(θ, t) is collocated on the periodic θ-grid and on a graded
//! t-mesh. Tangential derivatives D_q = τ_q·∇_θ are spectral; the transversal
//! direction uses a conservative flux form: midpoint fluxes
//!     F_i = B_{dd}(m_i)·(V_{i+1} − V_i)/h_i + Σ_q B_{dq}(m_i)·avg(D_q V)
//! are differenced across each node cell, and the tangential part
//! Σ_p D_p [ Σ_q B_{pq} D_q V + B_{pd} ∂_t V ] is collocated at the nodes with
//! a second-order nonuniform three-point stencil for ∂_t V.
//!
//! Boundary rows: a Dirichlet end eliminates the boundary slice (the data is
//! folded into the right-hand side, so the boundary condition holds exactly);
//! a Neumann bottom uses the half-cell [0, h_1/2] with the given conormal flux,
//! and the artificial top closes with zero conormal flux over [T − h_J/2, T].
//!
//! A Neumann bottom also carries a mean-lock term γ·P₀(V(·,0)) on the θ-modes
//! whose tangential symbol vanishes (the θ-mean, Nyquist rows and, for rational
//! normals, every mode orthogonal to the tangent plane). On those modes the
//! conormal problem only determines V up to a constant shift per mode; the lock
//! selects the representative with vanishing degenerate content at t = 0 and
//! keeps both the operator and its preconditioner nonsingular. Compatible data
//! (mean-free, with no content on the degenerate modes) is unaffected.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{shifted_sample, GridField, SpectralGrid, TrigTensor};
use crate::geometry::Frame;
use crate::layers::disc::GradedMesh;
use crate::krylov::LinearOp;
use crate::stats::lagrange_derivative_weights;

/// How the physical boundary t = 0 enters the linear system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BottomRow {
    /// Slice 0 is eliminated; its values are data.
    Dirichlet,
    /// Slice 0 is an unknown with a prescribed conormal flux.
    Neumann,
}

/// How the artificial cap t = T enters the linear system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopRow {
    /// Zero conormal flux over the final half cell.
    ZeroNeumann,
    /// Slice J is eliminated and pinned to supplied values.
    Dirichlet,
}

/// Boundary data for the right-hand side at t = 0.
pub enum BoundaryData<'a> {
    /// V(θ, 0) = φ(θ); requires a Dirichlet bottom row.
    Dirichlet(&'a GridField),
    /// −(B D V)_d(θ, 0) = g(θ); requires a Neumann bottom row.
    Neumann(&'a GridField),
}

/// Symbol magnitudes below this count as a vanishing tangential frequency.
const DEGENERATE_SYMBOL_TOL: f64 = 1e-9;

pub struct LayerOperator {
    grid: SpectralGrid,
    d: usize,
    m: usize,
    mesh: GradedMesh,
    bottom: BottomRow,
    top: TopRow,
    /// Lifted coefficient B(θ, t_j) at the mesh nodes, comp [d, d, m, m].
    b_nodes: Vec<GridField>,
    /// B(θ, m_i) at the interval midpoints.
    b_mids: Vec<GridField>,
    /// Mean of the lifted tensor over (θ, t); constant because the θ-average
    /// of a shifted sample does not depend on the shift.
    mean_b: Vec<f64>,
    /// Spectral multiplier 2π(τ_q·k) per tangential direction, Nyquist zeroed.
    tang_weights: Vec<Vec<f64>>,
    /// Per node: first stencil node and three weights for ∂_t at that node.
    dt_stencil: Vec<(usize, [f64; 3])>,
    /// θ-modes with vanishing tangential symbol (incl. k = 0 and Nyquist rows).
    degenerate: Vec<bool>,
    /// Mean-lock strength for a Neumann bottom row.
    gamma: f64,
}

impl LayerOperator {
    /// Assembles the lifted operator for the supplied coefficient tensor.
    /// The tensor is the operator side of the half-space system; callers
    /// solving the adjoint systems pass the adjoint tensor explicitly.
    pub fn new(
        tensor: &TrigTensor,
        frame: &Frame,
        resolution: usize,
        mesh: &GradedMesh,
        bottom: BottomRow,
        top: TopRow,
    ) -> Result<Self> {
        let d = tensor.d();
        let m = tensor.m();
        if frame.d() != d {
            return Err(Error::Usage(format!(
                "frame dimension {} does not match the coefficient dimension {}",
                frame.d(),
                d
            )));
        }
        if resolution < tensor.min_resolution() {
            return Err(Error::Usage(format!(
                "resolution {} cannot carry the coefficient bandwidth; need at least {}",
                resolution,
                tensor.min_resolution()
            )));
        }
        let grid = SpectralGrid::new(d, resolution)?;
        let b_nodes = shifted_sample(tensor, frame.matrix(), resolution, mesh.nodes())?;
        let b_mids = shifted_sample(tensor, frame.matrix(), resolution, &mesh.midpoints())?;
        let mean_b = tensor.conjugate_spatial(frame.matrix()).mean_tensor();

        let mut tang_weights = Vec::with_capacity(d - 1);
        for q in 0..d - 1 {
            tang_weights.push(grid.directional_weights(&frame.tangent(q)));
        }

        let nodes = mesh.nodes();
        let last = mesh.interval_count();
        let mut dt_stencil = Vec::with_capacity(nodes.len());
        for j in 0..nodes.len() {
            let base = j.clamp(1, last - 1) - 1;
            let w = lagrange_derivative_weights(&nodes[base..base + 3], nodes[j]);
            dt_stencil.push((base, [w[0], w[1], w[2]]));
        }

        let degenerate: Vec<bool> = (0..grid.len())
            .map(|flat| {
                tang_weights
                    .iter()
                    .all(|w| w[flat].abs() <= DEGENERATE_SYMBOL_TOL)
            })
            .collect();

        let gamma = 1.0 / (mesh.step(0) * mesh.step(0));

        Ok(LayerOperator {
            grid,
            d,
            m,
            mesh: mesh.clone(),
            bottom,
            top,
            b_nodes,
            b_mids,
            mean_b,
            tang_weights,
            dt_stencil,
            degenerate,
            gamma,
        })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn mesh(&self) -> &GradedMesh {
        &self.mesh
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn bottom(&self) -> BottomRow {
        self.bottom
    }

    pub fn top(&self) -> TopRow {
        self.top
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub(crate) fn mean_tensor(&self) -> &[f64] {
        &self.mean_b
    }

    pub(crate) fn tangential_weights(&self) -> &[Vec<f64>] {
        &self.tang_weights
    }

    pub(crate) fn degenerate_modes(&self) -> &[bool] {
        &self.degenerate
    }

    /// Index of the first slice that is an unknown.
    pub fn active_lo(&self) -> usize {
        match self.bottom {
            BottomRow::Dirichlet => 1,
            BottomRow::Neumann => 0,
        }
    }

    /// Index of the last slice that is an unknown.
    pub fn active_hi(&self) -> usize {
        match self.top {
            TopRow::ZeroNeumann => self.mesh.interval_count(),
            TopRow::Dirichlet => self.mesh.interval_count() - 1,
        }
    }

    pub fn active_slices(&self) -> usize {
        self.active_hi() - self.active_lo() + 1
    }

    fn slice_len(&self) -> usize {
        self.m * self.grid.len()
    }

    fn full_len(&self) -> usize {
        self.mesh.node_count() * self.slice_len()
    }

    /// Zero-padded full vector with the active part copied in place.
    pub fn embed(&self, active: &[f64]) -> Vec<f64> {
        debug_assert_eq!(active.len(), self.dim());
        let mut full = vec![0.0; self.full_len()];
        let lo = self.active_lo() * self.slice_len();
        full[lo..lo + active.len()].copy_from_slice(active);
        full
    }

    fn extract(&self, full: &[f64], active: &mut [f64]) {
        let lo = self.active_lo() * self.slice_len();
        active.copy_from_slice(&full[lo..lo + active.len()]);
    }

    /// D_q V at every node, laid out as [(j·(d−1) + q)·m + γ]·g.
    fn tangential_derivatives(&self, full: &[f64]) -> Vec<f64> {
        let g = self.grid.len();
        let m = self.m;
        let dm1 = self.d - 1;
        let sl = self.slice_len();
        let block = dm1 * m * g;
        let mut out = vec![0.0; self.mesh.node_count() * block];
        out.par_chunks_mut(block).enumerate().for_each(|(j, chunk)| {
            let mut coeffs = vec![Complex64::default(); g];
            let mut tmp = vec![Complex64::default(); g];
            for gamma in 0..m {
                let src = &full[j * sl + gamma * g..j * sl + (gamma + 1) * g];
                self.grid.forward(src, &mut coeffs);
                for q in 0..dm1 {
                    let w = &self.tang_weights[q];
                    for (i, c) in coeffs.iter().enumerate() {
                        tmp[i] = Complex64::new(-c.im * w[i], c.re * w[i]);
                    }
                    let dst = &mut chunk[(q * m + gamma) * g..(q * m + gamma + 1) * g];
                    self.grid.inverse_real(&tmp, dst);
                }
            }
        });
        out
    }

    /// ∂_t V at every node via the per-node three-point stencil.
    fn time_derivatives(&self, full: &[f64]) -> Vec<f64> {
        let g = self.grid.len();
        let m = self.m;
        let sl = self.slice_len();
        let mut out = vec![0.0; self.mesh.node_count() * m * g];
        out.par_chunks_mut(m * g).enumerate().for_each(|(j, chunk)| {
            let (base, w) = self.dt_stencil[j];
            for gamma in 0..m {
                let dst = &mut chunk[gamma * g..(gamma + 1) * g];
                for (s, &ws) in w.iter().enumerate() {
                    let src = &full[(base + s) * sl + gamma * g..(base + s) * sl + (gamma + 1) * g];
                    for (v, &x) in dst.iter_mut().zip(src) {
                        *v += ws * x;
                    }
                }
            }
        });
        out
    }

    /// Conormal midpoint fluxes F_i, laid out as [i·m + α]·g.
    fn midpoint_fluxes(&self, full: &[f64], tder: &[f64]) -> Vec<f64> {
        let g = self.grid.len();
        let m = self.m;
        let d = self.d;
        let dm1 = d - 1;
        let sl = self.slice_len();
        let tblock = dm1 * m * g;
        let mut out = vec![0.0; self.mesh.interval_count() * m * g];
        out.par_chunks_mut(m * g).enumerate().for_each(|(i, chunk)| {
            let h = self.mesh.step(i);
            let bm = &self.b_mids[i];
            for alpha in 0..m {
                let dst = &mut chunk[alpha * g..(alpha + 1) * g];
                for beta in 0..m {
                    let bdd = bm.comp(&[dm1, dm1, alpha, beta]);
                    let lo = &full[i * sl + beta * g..i * sl + (beta + 1) * g];
                    let hi = &full[(i + 1) * sl + beta * g..(i + 1) * sl + (beta + 1) * g];
                    for p in 0..g {
                        dst[p] += bdd[p] * (hi[p] - lo[p]) / h;
                    }
                    for q in 0..dm1 {
                        let bdq = bm.comp(&[dm1, q, alpha, beta]);
                        let tlo = &tder[i * tblock + (q * m + beta) * g
                            ..i * tblock + (q * m + beta + 1) * g];
                        let thi = &tder[(i + 1) * tblock + (q * m + beta) * g
                            ..(i + 1) * tblock + (q * m + beta + 1) * g];
                        for p in 0..g {
                            dst[p] += bdq[p] * 0.5 * (tlo[p] + thi[p]);
                        }
                    }
                }
            }
        });
        out
    }

    /// Degenerate-mode projection of slice 0, per component (Neumann lock).
    fn degenerate_part_of_bottom(&self, full: &[f64]) -> Vec<f64> {
        let g = self.grid.len();
        let m = self.m;
        let mut out = vec![0.0; m * g];
        let mut coeffs = vec![Complex64::default(); g];
        for gamma in 0..m {
            self.grid.forward(&full[gamma * g..(gamma + 1) * g], &mut coeffs);
            for (flat, c) in coeffs.iter_mut().enumerate() {
                if !self.degenerate[flat] {
                    *c = Complex64::default();
                }
            }
            self.grid
                .inverse_real(&coeffs, &mut out[gamma * g..(gamma + 1) * g]);
        }
        out
    }

    /// Derivative tables of a full slice vector for the decay diagnostics:
    /// tangential derivatives laid out [(j·(d−1)+q)·m+γ]·g and ∂_t values
    /// laid out [(j·m+γ)]·g.
    pub(crate) fn derivative_tables(&self, full: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (
            self.tangential_derivatives(full),
            self.time_derivatives(full),
        )
    }

    /// Applies the operator on the full slice range, boundary rows included.
    fn apply_full(&self, full: &[f64], out: &mut [f64]) {
        let g = self.grid.len();
        let m = self.m;
        let d = self.d;
        let dm1 = d - 1;
        let sl = self.slice_len();
        let tblock = dm1 * m * g;
        let last = self.mesh.interval_count();

        let tder = self.tangential_derivatives(full);
        let tdot = self.time_derivatives(full);
        let flux = self.midpoint_fluxes(full, &tder);
        let lock = match self.bottom {
            BottomRow::Neumann => Some(self.degenerate_part_of_bottom(full)),
            BottomRow::Dirichlet => None,
        };

        out.par_chunks_mut(sl).enumerate().for_each(|(j, row)| {
            row.fill(0.0);
            let bn = &self.b_nodes[j];
            let mut s_hat = vec![Complex64::default(); m * g];
            let mut s_val = vec![0.0; g];
            let mut coeffs = vec![Complex64::default(); g];
            // Tangential part: row −= Σ_p D_p S_p with
            // S_p = Σ_q B_pq D_q V + B_pd ∂_t V.
            for p in 0..dm1 {
                let w = &self.tang_weights[p];
                for alpha in 0..m {
                    s_val.fill(0.0);
                    for beta in 0..m {
                        let bpq_t = bn.comp(&[p, dm1, alpha, beta]);
                        let td = &tdot[j * m * g + beta * g..j * m * g + (beta + 1) * g];
                        for i in 0..g {
                            s_val[i] += bpq_t[i] * td[i];
                        }
                        for q in 0..dm1 {
                            let bpq = bn.comp(&[p, q, alpha, beta]);
                            let tq = &tder[j * tblock + (q * m + beta) * g
                                ..j * tblock + (q * m + beta + 1) * g];
                            for i in 0..g {
                                s_val[i] += bpq[i] * tq[i];
                            }
                        }
                    }
                    self.grid.forward(&s_val, &mut coeffs);
                    let acc = &mut s_hat[alpha * g..(alpha + 1) * g];
                    for i in 0..g {
                        // i·w · Ŝ accumulated over p.
                        let c = coeffs[i];
                        acc[i] += Complex64::new(-c.im * w[i], c.re * w[i]);
                    }
                }
            }
            for alpha in 0..m {
                self.grid
                    .inverse_real(&s_hat[alpha * g..(alpha + 1) * g], &mut s_val);
                let dst = &mut row[alpha * g..(alpha + 1) * g];
                for i in 0..g {
                    dst[i] = -s_val[i];
                }
            }
            // Transversal flux differences.
            if j == 0 {
                let half = self.mesh.step(0) / 2.0;
                for alpha in 0..m {
                    let f0 = &flux[alpha * g..(alpha + 1) * g];
                    let dst = &mut row[alpha * g..(alpha + 1) * g];
                    for i in 0..g {
                        dst[i] -= f0[i] / half;
                    }
                }
                if let Some(lock) = &lock {
                    for v in row.iter_mut().zip(lock.iter()) {
                        *v.0 += self.gamma * v.1;
                    }
                }
            } else if j == last {
                let half = self.mesh.step(last - 1) / 2.0;
                for alpha in 0..m {
                    let ftop = &flux[(last - 1) * m * g + alpha * g
                        ..(last - 1) * m * g + (alpha + 1) * g];
                    let dst = &mut row[alpha * g..(alpha + 1) * g];
                    for i in 0..g {
                        dst[i] += ftop[i] / half;
                    }
                }
            } else {
                let delta = (self.mesh.step(j - 1) + self.mesh.step(j)) / 2.0;
                for alpha in 0..m {
                    let fj = &flux[j * m * g + alpha * g..j * m * g + (alpha + 1) * g];
                    let fjm = &flux[(j - 1) * m * g + alpha * g..(j - 1) * m * g + (alpha + 1) * g];
                    let dst = &mut row[alpha * g..(alpha + 1) * g];
                    for i in 0..g {
                        dst[i] -= (fj[i] - fjm[i]) / delta;
                    }
                }
            }
        });
    }

    /// Accumulates sign·Σ_p D_p field[p, γ] into out (comp-major m·g slice).
    fn add_tangential_divergence(&self, field: &GridField, sign: f64, out: &mut [f64]) {
        let g = self.grid.len();
        let m = self.m;
        let dm1 = self.d - 1;
        let mut coeffs = vec![Complex64::default(); g];
        let mut acc = vec![Complex64::default(); g];
        let mut vals = vec![0.0; g];
        for gamma in 0..m {
            acc.fill(Complex64::default());
            for p in 0..dm1 {
                let w = &self.tang_weights[p];
                self.grid.forward(field.comp_by_flat(p * m + gamma), &mut coeffs);
                for i in 0..g {
                    let c = coeffs[i];
                    acc[i] += Complex64::new(-c.im * w[i], c.re * w[i]);
                }
            }
            self.grid.inverse_real(&acc, &mut vals);
            for (o, &v) in out[gamma * g..(gamma + 1) * g].iter_mut().zip(&vals) {
                *o += sign * v;
            }
        }
    }

    fn check_slice_field(&self, field: &GridField, comps: usize, what: &str) -> Result<()> {
        if field.d() != self.d || field.n() != self.grid.n() || field.comp_len() != comps {
            return Err(Error::Usage(format!(
                "{} must be a {}-component field on the {}^{} operator grid",
                what,
                comps,
                self.grid.n(),
                self.d
            )));
        }
        Ok(())
    }

    /// Right-hand side for boundary data at t = 0 (active rows only). With a
    /// Dirichlet top row the cap values (one constant per component) are
    /// folded in as well.
    pub fn assemble_rhs(
        &self,
        data: &BoundaryData,
        top_values: Option<&[f64]>,
    ) -> Result<Vec<f64>> {
        let sl = self.slice_len();
        let g = self.grid.len();
        let mut embedded = vec![0.0; self.full_len()];
        let mut any = false;
        match data {
            BoundaryData::Dirichlet(phi) => {
                if self.bottom != BottomRow::Dirichlet {
                    return Err(Error::Usage(
                        "Dirichlet data needs an operator with an eliminated bottom row".into(),
                    ));
                }
                self.check_slice_field(phi, self.m, "Dirichlet data")?;
                embedded[..sl].copy_from_slice(phi.data());
                any = true;
            }
            BoundaryData::Neumann(gdat) => {
                if self.bottom != BottomRow::Neumann {
                    return Err(Error::Usage(
                        "conormal data needs an operator with a Neumann bottom row".into(),
                    ));
                }
                self.check_slice_field(gdat, self.m, "conormal data")?;
            }
        }
        match (self.top, top_values) {
            (TopRow::Dirichlet, Some(values)) => {
                if values.len() != self.m {
                    return Err(Error::Usage(format!(
                        "cap values must have {} components",
                        self.m
                    )));
                }
                let last = self.mesh.interval_count();
                for gamma in 0..self.m {
                    embedded[last * sl + gamma * g..last * sl + (gamma + 1) * g]
                        .fill(values[gamma]);
                }
                any = true;
            }
            (TopRow::Dirichlet, None) => {
                return Err(Error::Usage(
                    "an eliminated top row needs cap values for the right-hand side".into(),
                ));
            }
            (TopRow::ZeroNeumann, Some(_)) => {
                return Err(Error::Usage(
                    "cap values are only meaningful with an eliminated top row".into(),
                ));
            }
            (TopRow::ZeroNeumann, None) => {}
        }

        let mut rhs = vec![0.0; self.dim()];
        if any {
            let mut full = vec![0.0; self.full_len()];
            self.apply_full(&embedded, &mut full);
            self.extract(&full, &mut rhs);
            for v in rhs.iter_mut() {
                *v = -*v;
            }
        }
        if let BoundaryData::Neumann(gdat) = data {
            let scale = 2.0 / self.mesh.step(0);
            for (r, &v) in rhs[..sl].iter_mut().zip(gdat.data()) {
                *r += scale * v;
            }
        }
        Ok(rhs)
    }

    /// Right-hand side for a forced system −D·(B D U) = D·G + H with U(·,0) = 0.
    /// The tangential components of G are sampled at the nodes (comp [d−1, m]),
    /// its transversal component at the interval midpoints (comp [m]), and H at
    /// the nodes (comp [m]).
    pub fn assemble_forced_rhs(
        &self,
        g_tan_nodes: &[GridField],
        g_t_mids: &[GridField],
        h_nodes: &[GridField],
    ) -> Result<Vec<f64>> {
        if self.bottom != BottomRow::Dirichlet {
            return Err(Error::Usage(
                "forced systems are posed with a homogeneous Dirichlet bottom row".into(),
            ));
        }
        let jn = self.mesh.node_count();
        let last = self.mesh.interval_count();
        if g_tan_nodes.len() != jn || h_nodes.len() != jn || g_t_mids.len() != last {
            return Err(Error::Usage(
                "forcing samples must cover every node and midpoint".into(),
            ));
        }
        for f in g_tan_nodes {
            self.check_slice_field(f, (self.d - 1) * self.m, "tangential forcing")?;
        }
        for f in g_t_mids {
            self.check_slice_field(f, self.m, "transversal forcing")?;
        }
        for f in h_nodes {
            self.check_slice_field(f, self.m, "zero-order forcing")?;
        }

        let sl = self.slice_len();
        let g = self.grid.len();
        let lo = self.active_lo();
        let hi = self.active_hi();
        let mut rhs = vec![0.0; self.dim()];
        for j in lo..=hi {
            let row = &mut rhs[(j - lo) * sl..(j - lo + 1) * sl];
            for (o, &v) in row.iter_mut().zip(h_nodes[j].data()) {
                *o += v;
            }
            self.add_tangential_divergence(&g_tan_nodes[j], 1.0, row);
            if j == last {
                let half = self.mesh.step(last - 1) / 2.0;
                for gamma in 0..self.m {
                    let gt = g_t_mids[last - 1].comp_by_flat(gamma);
                    for (o, &v) in row[gamma * g..(gamma + 1) * g].iter_mut().zip(gt) {
                        *o -= v / half;
                    }
                }
            } else {
                let delta = (self.mesh.step(j - 1) + self.mesh.step(j)) / 2.0;
                for gamma in 0..self.m {
                    let ghi = g_t_mids[j].comp_by_flat(gamma);
                    let glo = g_t_mids[j - 1].comp_by_flat(gamma);
                    for ((o, &a), &b) in row[gamma * g..(gamma + 1) * g]
                        .iter_mut()
                        .zip(ghi)
                        .zip(glo)
                    {
                        *o += (a - b) / delta;
                    }
                }
            }
        }
        Ok(rhs)
    }

    /// RMS residual split into interior rows and the conormal boundary row
    /// (the latter rescaled by h_1/2, so it reads in flux units; zero for a
    /// Dirichlet bottom).
    pub fn residual_components(&self, x_active: &[f64], rhs_active: &[f64]) -> (f64, f64) {
        let sl = self.slice_len();
        let mut ax = vec![0.0; self.dim()];
        self.apply(x_active, &mut ax);
        let rms = |s: &[f64]| {
            if s.is_empty() {
                0.0
            } else {
                (s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64).sqrt()
            }
        };
        let r: Vec<f64> = rhs_active
            .iter()
            .zip(&ax)
            .map(|(&b, &a)| b - a)
            .collect();
        match self.bottom {
            BottomRow::Neumann => {
                let scale = self.mesh.step(0) / 2.0;
                let boundary = rms(&r[..sl]) * scale;
                (rms(&r[sl..]), boundary)
            }
            BottomRow::Dirichlet => (rms(&r), 0.0),
        }
    }
}

impl LinearOp for LayerOperator {
    fn dim(&self) -> usize {
        self.active_slices() * self.slice_len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let full = self.embed(x);
        let mut out = vec![0.0; self.full_len()];
        self.apply_full(&full, &mut out);
        self.extract(&out, y);
    }
}
