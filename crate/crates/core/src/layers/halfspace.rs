//! Pull-back of lifted solutions to the physical half space
//! Ω_{n,s} = {x : x·n + s < 0} via u^s(x) = V(θ, t) with
//! θ = x − (x·n + s) n and t = −(x·n + s).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::SpectralGrid;
use crate::layers::solve::LiftedSolution;
use crate::stats::lagrange_value_weights;

/// Evaluator holding the θ-spectra of every slice for interpolation:
/// trigonometric in θ, piecewise cubic across the t-nodes.
pub struct HalfSpaceEvaluator {
    grid: SpectralGrid,
    m: usize,
    nodes: Vec<f64>,
    normal: Vec<f64>,
    /// Per slice, per component: θ-Fourier coefficients.
    coeffs: Vec<Vec<Complex64>>,
}

impl HalfSpaceEvaluator {
    pub fn new(solution: &LiftedSolution) -> Result<Self> {
        let grid = SpectralGrid::new(solution.d(), solution.resolution)?;
        let m = solution.m();
        let g = grid.len();
        let mut coeffs = Vec::with_capacity(solution.values().len() * m);
        for slice in solution.values() {
            for gamma in 0..m {
                let mut c = vec![Complex64::default(); g];
                grid.forward(slice.comp(&[gamma]), &mut c);
                coeffs.push(c);
            }
        }
        Ok(HalfSpaceEvaluator {
            grid,
            m,
            nodes: solution.mesh.nodes().to_vec(),
            normal: solution.normal.clone(),
            coeffs,
        })
    }

    pub fn t_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// V(θ, t) with trigonometric interpolation in θ and cubic interpolation
    /// across the bracketing t-nodes.
    pub fn lifted_value(&self, theta: &[f64], t: f64) -> Result<Vec<f64>> {
        if theta.len() != self.grid.d() {
            return Err(Error::Usage(format!(
                "point has {} components, expected {}",
                theta.len(),
                self.grid.d()
            )));
        }
        let t_max = self.t_max();
        if !(t >= -1e-12 && t <= t_max + 1e-12) {
            return Err(Error::Range(format!(
                "depth t = {t} outside the solved range [0, {t_max}]"
            )));
        }
        let t = t.clamp(0.0, t_max);
        // Bracketing interval, then a four-node window clipped to the mesh.
        let seg = match self.nodes.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(j) => j.min(self.nodes.len() - 2),
            Err(j) => j - 1,
        };
        let width = self.nodes.len().min(4);
        let lo = seg.saturating_sub(1).min(self.nodes.len() - width);
        let w = lagrange_value_weights(&self.nodes[lo..lo + width], t);
        let mut out = vec![0.0; self.m];
        for (s, &ws) in w.iter().enumerate() {
            if ws == 0.0 {
                continue;
            }
            for gamma in 0..self.m {
                let c = &self.coeffs[(lo + s) * self.m + gamma];
                out[gamma] += ws * self.grid.evaluate_at(c, theta).re;
            }
        }
        Ok(out)
    }

    /// u^s(x) for a point with x·n + s ≤ 0, mapped onto the lifted cylinder.
    pub fn reconstruct(&self, s: f64, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.normal.len() {
            return Err(Error::Usage(format!(
                "point has {} components, expected {}",
                x.len(),
                self.normal.len()
            )));
        }
        let depth: f64 = x.iter().zip(&self.normal).map(|(a, b)| a * b).sum::<f64>() + s;
        if depth > 1e-12 {
            return Err(Error::Range(format!(
                "point lies outside the half space: x·n + s = {depth:e} > 0"
            )));
        }
        let t = -depth;
        let theta: Vec<f64> = x
            .iter()
            .zip(&self.normal)
            .map(|(xi, ni)| xi + t * ni)
            .collect();
        self.lifted_value(&theta, t)
    }
}

/// One-shot reconstruction; prefer the evaluator for repeated queries.
pub fn halfspace_reconstruct(solution: &LiftedSolution, s: f64, x: &[f64]) -> Result<Vec<f64>> {
    HalfSpaceEvaluator::new(solution)?.reconstruct(s, x)
}
