//! Mean-coefficient preconditioner for the lifted systems.
//!
//! Averaging the lifted tensor over θ removes the t-dependence as well (the
//! θ-mean of a shifted sample is shift independent), so the averaged operator
//! has constant coefficients and block-diagonalizes over θ-modes. Each mode
//! leaves a complex block-tridiagonal system along the t-mesh (blocks of size
//! m × m), which is factored once by block elimination and reused in every
//! preconditioner application.
//!
//! The boundary rows mirror the true operator except that ∂_t V in the
//! tangential flux is differenced first order at the ends, which keeps the
//! mode systems tridiagonal. A Neumann bottom row carries the same mean-lock
//! term γ on the degenerate modes as the true operator, so both stay
//! nonsingular together.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{tensor_index, SpectralGrid};
use crate::krylov::Preconditioner;
use crate::layers::operator::LayerOperator;

struct ModeFactor {
    /// Sub-diagonal blocks A_j (coupling to the previous slice), row-major.
    sub: Vec<Complex64>,
    /// LU-factored pivot blocks U_j.
    lu: Vec<Complex64>,
    piv: Vec<usize>,
    /// W_j = U_j⁻¹ C_j for the back-substitution.
    w: Vec<Complex64>,
}

pub struct MeanLayerPrecond {
    grid: SpectralGrid,
    m: usize,
    slices: usize,
    modes: Vec<ModeFactor>,
}

fn lu_factor(a: &mut [Complex64], piv: &mut [usize], m: usize) -> Result<()> {
    for col in 0..m {
        let mut best = col;
        let mut best_val = a[col * m + col].norm_sqr();
        for row in col + 1..m {
            let v = a[row * m + col].norm_sqr();
            if v > best_val {
                best_val = v;
                best = row;
            }
        }
        if best_val == 0.0 {
            return Err(Error::Hypothesis(
                "a mean-coefficient mode block is singular; the averaged tensor violates \
                 ellipticity on this tangential frequency"
                    .into(),
            ));
        }
        piv[col] = best;
        if best != col {
            for c in 0..m {
                a.swap(col * m + c, best * m + c);
            }
        }
        let inv = Complex64::new(1.0, 0.0) / a[col * m + col];
        for row in col + 1..m {
            let f = a[row * m + col] * inv;
            a[row * m + col] = f;
            for c in col + 1..m {
                let sub = f * a[col * m + c];
                a[row * m + c] -= sub;
            }
        }
    }
    Ok(())
}

fn lu_solve(a: &[Complex64], piv: &[usize], m: usize, x: &mut [Complex64]) {
    for col in 0..m {
        if piv[col] != col {
            x.swap(col, piv[col]);
        }
        for row in col + 1..m {
            let f = a[row * m + col] * x[col];
            x[row] -= f;
        }
    }
    for row in (0..m).rev() {
        let mut v = x[row];
        for c in row + 1..m {
            v -= a[row * m + c] * x[c];
        }
        x[row] = v / a[row * m + row];
    }
}

/// out −= a · x for row-major m × m blocks.
fn block_mul_sub(a: &[Complex64], x: &[Complex64], out: &mut [Complex64], m: usize) {
    for row in 0..m {
        let mut acc = Complex64::default();
        for c in 0..m {
            acc += a[row * m + c] * x[c];
        }
        out[row] -= acc;
    }
}

impl MeanLayerPrecond {
    pub fn new(op: &LayerOperator) -> Result<Self> {
        let grid = op.grid().clone();
        let g = grid.len();
        let d = op.d();
        let m = op.m();
        let dm1 = d - 1;
        let mesh = op.mesh();
        let lo = op.active_lo();
        let hi = op.active_hi();
        let slices = op.active_slices();
        let last = mesh.interval_count();
        let mean_b = op.mean_tensor();
        let weights = op.tangential_weights();
        let degenerate = op.degenerate_modes();
        let gamma = op.gamma();
        let mm = m * m;

        let modes: Result<Vec<ModeFactor>> = (0..g)
            .into_par_iter()
            .map(|kf| {
                // Mode coefficients: β_dd, Gd = Σ_q iω_q β_dq, Gt = Σ_p iω_p β_pd,
                // Q = Σ_pq ω_p ω_q β_pq.
                let mut bdd = vec![Complex64::default(); mm];
                let mut gd = vec![Complex64::default(); mm];
                let mut gt = vec![Complex64::default(); mm];
                let mut qq = vec![Complex64::default(); mm];
                for alpha in 0..m {
                    for beta in 0..m {
                        let e = alpha * m + beta;
                        bdd[e] = mean_b[tensor_index(d, m, dm1, dm1, alpha, beta)].into();
                        for q in 0..dm1 {
                            let wq = weights[q][kf];
                            gd[e] += Complex64::new(0.0, wq)
                                * mean_b[tensor_index(d, m, dm1, q, alpha, beta)];
                            gt[e] += Complex64::new(0.0, wq)
                                * mean_b[tensor_index(d, m, q, dm1, alpha, beta)];
                            for p in 0..dm1 {
                                qq[e] += Complex64::new(weights[p][kf] * wq, 0.0)
                                    * mean_b[tensor_index(d, m, p, q, alpha, beta)];
                            }
                        }
                    }
                }

                let mut sub = vec![Complex64::default(); (slices - 1) * mm];
                let mut lu = vec![Complex64::default(); slices * mm];
                let mut sup = vec![Complex64::default(); (slices - 1) * mm];
                let combine =
                    |dst: &mut [Complex64], cb: f64, cgd: f64, cgt: f64, cq: f64, diag: f64| {
                        for e in 0..mm {
                            dst[e] = cb * bdd[e] + cgd * gd[e] + cgt * gt[e] + cq * qq[e];
                        }
                        for a in 0..m {
                            dst[a * m + a] += diag;
                        }
                    };

                for j in lo..=hi {
                    let s = j - lo;
                    if j == 0 {
                        // Neumann bottom row, first-order ∂_t in the tangential flux.
                        let h = mesh.step(0);
                        let lock = if degenerate[kf] { gamma } else { 0.0 };
                        combine(
                            &mut lu[..mm],
                            2.0 / (h * h),
                            -1.0 / h,
                            1.0 / h,
                            1.0,
                            lock,
                        );
                        combine(
                            &mut sup[..mm],
                            -2.0 / (h * h),
                            -1.0 / h,
                            -1.0 / h,
                            0.0,
                            0.0,
                        );
                    } else if j == last {
                        let h = mesh.step(last - 1);
                        combine(
                            &mut lu[s * mm..(s + 1) * mm],
                            2.0 / (h * h),
                            1.0 / h,
                            -1.0 / h,
                            1.0,
                            0.0,
                        );
                        combine(
                            &mut sub[(s - 1) * mm..s * mm],
                            -2.0 / (h * h),
                            1.0 / h,
                            1.0 / h,
                            0.0,
                            0.0,
                        );
                    } else {
                        let hm = mesh.step(j - 1);
                        let hp = mesh.step(j);
                        let delta = (hm + hp) / 2.0;
                        let cm = -hp / (hm * (hm + hp));
                        let cp = hm / (hp * (hm + hp));
                        let c0 = (hp - hm) / (hm * hp);
                        combine(
                            &mut lu[s * mm..(s + 1) * mm],
                            (1.0 / hm + 1.0 / hp) / delta,
                            0.0,
                            -c0,
                            1.0,
                            0.0,
                        );
                        if s > 0 {
                            combine(
                                &mut sub[(s - 1) * mm..s * mm],
                                -1.0 / (hm * delta),
                                0.5 / delta,
                                -cm,
                                0.0,
                                0.0,
                            );
                        }
                        if s + 1 < slices {
                            combine(
                                &mut sup[s * mm..(s + 1) * mm],
                                -1.0 / (hp * delta),
                                -0.5 / delta,
                                -cp,
                                0.0,
                                0.0,
                            );
                        }
                    }
                }

                // Block elimination: U_0 = D_0, U_j = D_j − A_j W_{j−1},
                // W_j = U_j⁻¹ C_j.
                let mut piv = vec![0usize; slices * m];
                let mut w = vec![Complex64::default(); (slices - 1) * mm];
                lu_factor(&mut lu[..mm], &mut piv[..m], m)?;
                for s in 1..slices {
                    {
                        let (prev, cur) = w.split_at_mut((s - 1) * mm);
                        let _ = prev;
                        let wj = &mut cur[..mm];
                        wj.copy_from_slice(&sup[(s - 1) * mm..s * mm]);
                        // Solve U_{s−1} W = C_{s−1} column by column.
                        let f = &lu[(s - 1) * mm..s * mm];
                        let p = &piv[(s - 1) * m..s * m];
                        let mut col = vec![Complex64::default(); m];
                        for c in 0..m {
                            for r in 0..m {
                                col[r] = wj[r * m + c];
                            }
                            lu_solve(f, p, m, &mut col);
                            for r in 0..m {
                                wj[r * m + c] = col[r];
                            }
                        }
                    }
                    // U_s = D_s − A_s W_{s−1}.
                    let a = &sub[(s - 1) * mm..s * mm];
                    let wprev: Vec<Complex64> = w[(s - 1) * mm..s * mm].to_vec();
                    let u = &mut lu[s * mm..(s + 1) * mm];
                    for row in 0..m {
                        for c in 0..m {
                            let mut acc = Complex64::default();
                            for k in 0..m {
                                acc += a[row * m + k] * wprev[k * m + c];
                            }
                            u[row * m + c] -= acc;
                        }
                    }
                    let (lo_part, hi_part) = lu.split_at_mut(s * mm);
                    let _ = lo_part;
                    lu_factor(&mut hi_part[..mm], &mut piv[s * m..(s + 1) * m], m)?;
                }
                Ok(ModeFactor { sub, lu, piv, w })
            })
            .collect();

        Ok(MeanLayerPrecond {
            grid,
            m,
            slices,
            modes: modes?,
        })
    }

    fn solve_mode(&self, kf: usize, x: &mut [Complex64]) {
        let m = self.m;
        let mm = m * m;
        let f = &self.modes[kf];
        // Forward sweep: v_j = U_j⁻¹ (b_j − A_j v_{j−1}), in place.
        lu_solve(&f.lu[..mm], &f.piv[..m], m, &mut x[..m]);
        for s in 1..self.slices {
            let (prev, cur) = x.split_at_mut(s * m);
            block_mul_sub(
                &f.sub[(s - 1) * mm..s * mm],
                &prev[(s - 1) * m..],
                &mut cur[..m],
                m,
            );
            lu_solve(
                &f.lu[s * mm..(s + 1) * mm],
                &f.piv[s * m..(s + 1) * m],
                m,
                &mut cur[..m],
            );
        }
        // Back substitution: x_j = v_j − W_j x_{j+1}.
        for s in (0..self.slices - 1).rev() {
            let (cur, next) = x.split_at_mut((s + 1) * m);
            block_mul_sub(&f.w[s * mm..(s + 1) * mm], &next[..m], &mut cur[s * m..], m);
        }
    }
}

impl Preconditioner for MeanLayerPrecond {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let g = self.grid.len();
        let m = self.m;
        let slices = self.slices;
        debug_assert_eq!(r.len(), slices * m * g);

        // θ-transform of every slice component.
        let mut rhat = vec![Complex64::default(); slices * m * g];
        rhat.par_chunks_mut(g)
            .zip(r.par_chunks(g))
            .for_each(|(chunk, src)| {
                self.grid.forward(src, chunk);
            });

        // Transpose to per-mode right-hand sides and solve.
        let mut modes = vec![Complex64::default(); g * slices * m];
        modes
            .par_chunks_mut(slices * m)
            .enumerate()
            .for_each(|(kf, dst)| {
                for s in 0..slices {
                    for c in 0..m {
                        dst[s * m + c] = rhat[(s * m + c) * g + kf];
                    }
                }
                self.solve_mode(kf, dst);
            });

        // Transpose back and return to values.
        rhat.par_chunks_mut(g).enumerate().for_each(|(sc, chunk)| {
            for kf in 0..g {
                chunk[kf] = modes[kf * slices * m + sc];
            }
        });
        z.par_chunks_mut(g)
            .zip(rhat.par_chunks(g))
            .for_each(|(dst, src)| {
                self.grid.inverse_real(src, dst);
            });
    }
}
