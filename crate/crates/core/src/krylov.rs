//! Restarted GMRES with right preconditioning.
//!
//! Both the cell problems and the lifted half-space systems are nonsymmetric
//! (the coefficient tensor need not be symmetric), so GMRES is the shared
//! driver. Preconditioners invert the constant-coefficient part of each
//! operator exactly; with mild contrast the iteration count is resolution
//! independent.
//!
//! All inner products are sequential, so runs are bit-reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait LinearOp {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

/// Identity preconditioner for small or well-conditioned systems.
pub struct NoPrecond;

impl Preconditioner for NoPrecond {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GmresConfig {
    /// Relative residual target (vs. the right-hand side norm).
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        GmresConfig {
            tol: 1e-10,
            max_iter: 10_000,
            restart: 40,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GmresStats {
    pub iterations: usize,
    /// Final relative residual.
    pub residual: f64,
    /// Relative residual after every iteration.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solve A x = b for the preconditioned operator A M⁻¹, returning x = M⁻¹ u.
/// `x` carries the initial guess and receives the solution.
pub fn gmres(
    op: &dyn LinearOp,
    pre: &dyn Preconditioner,
    b: &[f64],
    x: &mut [f64],
    cfg: &GmresConfig,
) -> Result<GmresStats> {
    let n = op.dim();
    assert_eq!(b.len(), n);
    assert_eq!(x.len(), n);

    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(GmresStats {
            iterations: 0,
            residual: 0.0,
            history: vec![],
        });
    }

    let restart = cfg.restart.max(1);
    let mut history = Vec::new();
    let mut total_iters = 0usize;

    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    // Krylov basis of the preconditioned residual space.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(restart + 1);
    let mut last_cycle_start_res = f64::INFINITY;

    loop {
        op.apply(x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let beta = norm(&r);
        let rel = beta / b_norm;
        if rel <= cfg.tol {
            return Ok(GmresStats {
                iterations: total_iters,
                residual: rel,
                history,
            });
        }
        if total_iters >= cfg.max_iter {
            return Err(Error::Solver {
                iterations: total_iters,
                residual: rel,
                history,
            });
        }
        // Stagnation over a whole restart cycle: bail out with the history.
        if rel > last_cycle_start_res * 0.999 {
            return Err(Error::Solver {
                iterations: total_iters,
                residual: rel,
                history,
            });
        }
        last_cycle_start_res = rel;

        basis.clear();
        let mut v0 = r.clone();
        v0.iter_mut().for_each(|v| *v /= beta);
        basis.push(v0);

        // Hessenberg factorization updated by Givens rotations.
        let mut h = vec![vec![0.0f64; restart]; restart + 1];
        let mut cs = vec![0.0f64; restart];
        let mut sn = vec![0.0f64; restart];
        let mut g = vec![0.0f64; restart + 1];
        g[0] = beta;

        let mut k_used = 0;
        for k in 0..restart {
            if total_iters >= cfg.max_iter {
                break;
            }
            pre.apply(&basis[k], &mut z);
            op.apply(&z, &mut w);
            // Modified Gram-Schmidt.
            for (i, vi) in basis.iter().enumerate() {
                let hik = dot(&w, vi);
                h[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(vi) {
                    *wj -= hik * vj;
                }
            }
            let hk1 = norm(&w);
            h[k + 1][k] = hk1;
            if hk1 > 0.0 {
                let mut vk = w.clone();
                vk.iter_mut().for_each(|v| *v /= hk1);
                basis.push(vk);
            }
            // Apply accumulated rotations to the new column.
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let denom = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            if denom == 0.0 {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = h[k][k] / denom;
                sn[k] = h[k + 1][k] / denom;
            }
            h[k][k] = cs[k] * h[k][k] + sn[k] * h[k + 1][k];
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];

            total_iters += 1;
            k_used = k + 1;
            let rel_est = g[k + 1].abs() / b_norm;
            history.push(rel_est);
            if rel_est <= cfg.tol || hk1 == 0.0 {
                break;
            }
        }

        // Back substitution for the least-squares coefficients.
        let mut y = vec![0.0f64; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in (i + 1)..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        // x += M⁻¹ (V y)
        w.iter_mut().for_each(|v| *v = 0.0);
        for (j, &yj) in y.iter().enumerate() {
            for (wi, vi) in w.iter_mut().zip(&basis[j]) {
                *wi += yj * vi;
            }
        }
        pre.apply(&w, &mut z);
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi += zi;
        }
    }
}
