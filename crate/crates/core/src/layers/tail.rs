//! Tail extraction and decay diagnostics for lifted solutions.
//!
//! The tail is the constant the solution flattens to as t → ∞. It is read as
//! the θ-mean averaged over the final quarter of t-nodes; the spread across
//! that window is the uncertainty, and a tail is only trusted when the spread
//! is below ten times the solver tolerance (otherwise T was too shallow for
//! the normal's Diophantine quality).

use serde::{Deserialize, Serialize};

use crate::fields::GridField;
use crate::layers::disc::GradedMesh;
use crate::layers::operator::LayerOperator;
use crate::stats::{fit_line, LineFit};

#[derive(Debug, Clone)]
pub struct TailEstimate {
    /// Estimated far-field constant per component.
    pub value: Vec<f64>,
    /// Largest deviation of a window slice mean from the estimate.
    pub spread: f64,
    pub trusted: bool,
}

/// θ-mean of V over the final quarter of t-nodes, with spread and trust flag.
pub fn estimate_tail(mesh: &GradedMesh, values: &[GridField], tol: f64) -> TailEstimate {
    let t_lo = 0.75 * mesh.t_max();
    let mut window: Vec<usize> = (0..values.len())
        .filter(|&j| mesh.node(j) >= t_lo)
        .collect();
    if window.len() < 2 {
        window = vec![values.len() - 2, values.len() - 1];
    }
    let m = values[0].comp_len();
    let mut tail = vec![0.0; m];
    let means: Vec<Vec<f64>> = window.iter().map(|&j| values[j].mean()).collect();
    for mean in &means {
        for (t, &v) in tail.iter_mut().zip(mean) {
            *t += v;
        }
    }
    for t in tail.iter_mut() {
        *t /= window.len() as f64;
    }
    let mut spread: f64 = 0.0;
    for mean in &means {
        for (t, &v) in tail.iter().zip(mean) {
            spread = spread.max((v - t).abs());
        }
    }
    TailEstimate {
        value: tail,
        spread,
        trusted: spread < 10.0 * tol,
    }
}

/// One t-node of the decay table: L²_θ and max_θ norms of the tangential
/// gradient, the t-derivative and the deviation from the tail, the pointwise
/// decay indicator max_θ(|N^T∇_θV| + |∂_tV|), and the cumulative energy
/// ∫₀^t ∫ (|N^T∇_θV|² + |∂_tV|²).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayRow {
    pub t: f64,
    pub grad_l2: f64,
    pub dt_l2: f64,
    pub dev_l2: f64,
    pub grad_max: f64,
    pub dt_max: f64,
    pub dev_max: f64,
    pub rate_max: f64,
    pub energy_cum: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DecayProfile {
    pub rows: Vec<DecayRow>,
}

impl DecayProfile {
    pub fn total_energy(&self) -> f64 {
        self.rows.last().map(|r| r.energy_cum).unwrap_or(0.0)
    }

    /// Energy accumulated after the given time, as a fraction of the total.
    pub fn late_energy_fraction(&self, t_from: f64) -> f64 {
        let total = self.total_energy();
        if total == 0.0 {
            return 0.0;
        }
        let at = self
            .rows
            .iter()
            .take_while(|r| r.t < t_from)
            .last()
            .map(|r| r.energy_cum)
            .unwrap_or(0.0);
        (total - at) / total
    }
}

/// Per-node decay table of a solved layer. `full` is the solution on every
/// slice (boundary data included), `tail` the estimated far-field constant.
pub(crate) fn compute_profile(op: &LayerOperator, full: &[f64], tail: &[f64]) -> DecayProfile {
    let g = op.grid().len();
    let m = op.m();
    let dm1 = op.d() - 1;
    let mesh = op.mesh();
    let (tder, tdot) = op.derivative_tables(full);
    let mut rows = Vec::with_capacity(mesh.node_count());
    let mut energy = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for j in 0..mesh.node_count() {
        let mut grad_sq_l2 = 0.0;
        let mut dt_sq_l2 = 0.0;
        let mut dev_sq_l2 = 0.0;
        let mut grad_max: f64 = 0.0;
        let mut dt_max: f64 = 0.0;
        let mut dev_max: f64 = 0.0;
        let mut rate_max: f64 = 0.0;
        for p in 0..g {
            let mut gsq = 0.0;
            for q in 0..dm1 {
                for gamma in 0..m {
                    let v = tder[((j * dm1 + q) * m + gamma) * g + p];
                    gsq += v * v;
                }
            }
            let mut tsq = 0.0;
            let mut dsq = 0.0;
            for gamma in 0..m {
                let v = tdot[(j * m + gamma) * g + p];
                tsq += v * v;
                let dev = full[(j * m + gamma) * g + p] - tail[gamma];
                dsq += dev * dev;
            }
            grad_sq_l2 += gsq;
            dt_sq_l2 += tsq;
            dev_sq_l2 += dsq;
            grad_max = grad_max.max(gsq.sqrt());
            dt_max = dt_max.max(tsq.sqrt());
            dev_max = dev_max.max(dsq.sqrt());
            rate_max = rate_max.max(gsq.sqrt() + tsq.sqrt());
        }
        let gf = g as f64;
        let integrand = (grad_sq_l2 + dt_sq_l2) / gf;
        let t = mesh.node(j);
        if let Some((tp, ip)) = prev {
            energy += 0.5 * (integrand + ip) * (t - tp);
        }
        prev = Some((t, integrand));
        rows.push(DecayRow {
            t,
            grad_l2: (grad_sq_l2 / gf).sqrt(),
            dt_l2: (dt_sq_l2 / gf).sqrt(),
            dev_l2: (dev_sq_l2 / gf).sqrt(),
            grad_max,
            dt_max,
            dev_max,
            rate_max,
            energy_cum: energy,
        });
    }
    DecayProfile { rows }
}

/// Log-log decay fits of the pointwise indicator max_θ(|N^T∇_θV| + |∂_tV|).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayFit {
    /// Regression of ln(rate) against ln(1 + t) on [1, T/2].
    pub plain: Option<LineFit>,
    /// Regression of ln(rate) against ln(1 + κ̂ t) on [2/κ̂, T/2].
    pub kappa: Option<LineFit>,
    /// Set when the profile had no positive values to regress on (already
    /// decayed to rounding, e.g. constant data).
    pub degenerate: bool,
}

pub fn fit_decay(profile: &DecayProfile, kappa_hat: Option<f64>) -> DecayFit {
    let t_hi = profile.rows.last().map(|r| r.t).unwrap_or(0.0) / 2.0;
    let window_fit = |t_lo: f64, x_of_t: &dyn Fn(f64) -> f64| -> Option<LineFit> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for r in &profile.rows {
            if r.t >= t_lo && r.t <= t_hi && r.rate_max > 1e-300 {
                xs.push(x_of_t(r.t));
                ys.push(r.rate_max.ln());
            }
        }
        fit_line(&xs, &ys)
    };
    let plain = window_fit(1.0, &|t| (1.0 + t).ln());
    let kappa = kappa_hat.filter(|&k| k > 0.0).and_then(|k| {
        window_fit(2.0 / k, &|t| (1.0 + k * t).ln())
    });
    DecayFit {
        degenerate: plain.is_none(),
        plain,
        kappa,
    }
}
