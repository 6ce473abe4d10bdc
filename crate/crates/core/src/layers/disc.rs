//! Discretization plumbing for the lifted half-space systems: graded t-mesh,
//! far-field closure, solver settings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DiophantineReport;
use crate::krylov::GmresConfig;

/// Strictly increasing node list 0 = t_0 < ... < t_J = T. The layer is
/// steepest near t = 0, so the default mesh grows geometrically from a fine
/// first step up to a capped step size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradedMesh {
    nodes: Vec<f64>,
}

impl GradedMesh {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::config(
                "mesh",
                format!("need at least 3 t-nodes, got {}", nodes.len()),
            ));
        }
        if nodes[0] != 0.0 {
            return Err(Error::config(
                "mesh",
                format!("first node must be 0, got {}", nodes[0]),
            ));
        }
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::config(
                    "mesh",
                    format!("nodes must increase strictly; saw {} then {}", w[0], w[1]),
                ));
            }
        }
        Ok(GradedMesh { nodes })
    }

    /// Geometric grading: first step h0, growth `ratio`, steps capped at
    /// `cap`, last step stretched to land exactly on `t_max`.
    pub fn geometric(h0: f64, ratio: f64, cap: f64, t_max: f64) -> Result<Self> {
        if !(h0 > 0.0) || !(ratio >= 1.0) || !(cap >= h0) || !(t_max > 2.0 * h0) {
            return Err(Error::config(
                "mesh",
                format!(
                    "invalid grading: h0 = {h0}, ratio = {ratio}, cap = {cap}, t_max = {t_max}"
                ),
            ));
        }
        let mut nodes = vec![0.0];
        let mut t = 0.0;
        let mut h = h0;
        while t + 1.5 * h < t_max {
            t += h;
            nodes.push(t);
            h = (h * ratio).min(cap);
        }
        nodes.push(t_max);
        GradedMesh::from_nodes(nodes)
    }

    /// Default grading tied to the θ-resolution.
    pub fn default_mesh(n_theta: usize, t_max: f64) -> Result<Self> {
        GradedMesh::geometric(1.0 / n_theta as f64, 1.05, 0.25, t_max)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, j: usize) -> f64 {
        self.nodes[j]
    }

    /// Number of nodes, J + 1.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of intervals, J.
    pub fn interval_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn t_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Width of interval i = [t_i, t_{i+1}].
    pub fn step(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        0.5 * (self.nodes[i] + self.nodes[i + 1])
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.interval_count()).map(|i| self.midpoint(i)).collect()
    }
}

/// Far-field treatment at t = T.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Closure {
    /// ∂-conormal zero at the top: consistent with an unknown constant tail.
    ZeroNeumann,
    /// Two-pass: estimate the tail under zero-Neumann, then re-solve with the
    /// top slice pinned to it.
    TailDirichlet,
}

/// Diophantine quality of the normal, carried into the solver so it can
/// enforce depth and solvability hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalQuality {
    pub kappa_hat: f64,
    pub rational: bool,
}

impl From<&DiophantineReport> for NormalQuality {
    fn from(r: &DiophantineReport) -> Self {
        NormalQuality {
            kappa_hat: r.kappa_hat,
            rational: r.rational_detected,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Discretization {
    /// θ-resolution per axis (power of two).
    pub resolution: usize,
    pub mesh: GradedMesh,
    pub closure: Closure,
    pub gmres: GmresConfig,
    /// Optional Diophantine report for the normal; enables the depth check
    /// and the rational-normal guards.
    pub quality: Option<NormalQuality>,
}

impl Discretization {
    pub fn new(resolution: usize, t_max: f64) -> Result<Self> {
        Ok(Discretization {
            resolution,
            mesh: GradedMesh::default_mesh(resolution, t_max)?,
            closure: Closure::ZeroNeumann,
            gmres: GmresConfig::default(),
            quality: None,
        })
    }

    pub fn with_quality(mut self, q: NormalQuality) -> Self {
        self.quality = Some(q);
        self
    }

    pub fn with_closure(mut self, c: Closure) -> Self {
        self.closure = c;
        self
    }

    /// Shared validity checks. `needs_diophantine` is set by the Neumann
    /// solvers, whose half-space problem is only known to be well posed for
    /// quasi-periodic (irrational) shifts.
    pub fn validate(&self, needs_diophantine: bool) -> Result<()> {
        if let Some(q) = &self.quality {
            let needed = 10.0 / q.kappa_hat.max(0.1);
            if self.mesh.t_max() < needed {
                return Err(Error::Usage(format!(
                    "depth T = {} is too shallow for kappa_hat = {:.4}: the tail \
                     flattens at scale 1/kappa, so T >= {needed:.1} is required",
                    self.mesh.t_max(),
                    q.kappa_hat
                )));
            }
            let degenerate = q.rational || q.kappa_hat <= 0.0;
            if degenerate && needs_diophantine {
                return Err(Error::Hypothesis(
                    "the normal is rational (kappa_hat = 0): the half-space Neumann \
                     problem is only solvable for quasi-periodic shifts, i.e. normals \
                     with positive Diophantine constant"
                        .into(),
                ));
            }
            if degenerate && self.closure == Closure::TailDirichlet {
                return Err(Error::Hypothesis(
                    "tail-Dirichlet closure needs a well-defined boundary layer tail, \
                     which rational normals (kappa_hat = 0) do not have: the half-space \
                     limit depends on the hyperplane offset"
                        .into(),
                ));
            }
        }
        Ok(())
    }
}
