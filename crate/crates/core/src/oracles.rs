//! Independent reference solutions used to cross-check the production solvers.
//!
//! Everything here is deliberately built on different numerics than the main
//! code paths: closed-form exponential profiles for identity coefficients,
//! plain quadrature for one-dimensional means, and a conservative
//! finite-difference strip solver for axis-aligned normals where the lifted
//! problem decouples into independent periodic strips. The integration suite
//! certifies the spectral/Krylov solvers by agreement with these references.

use nalgebra::{DMatrix, DVector};
use nalgebra::linalg::LU;
use nalgebra::Dyn;

use crate::error::{Error, Result};
use crate::fields::{GridField, SpectralGrid, TrigTensor, TWO_PI};
use crate::geometry::Frame;
use crate::layers::GradedMesh;

/// Euclidean length of the tangential part of a wavenumber: |N^T k| =
/// sqrt(sum_q (tau_q . k)^2) for the tangent columns tau_q of the frame.
pub fn tangential_frequency(frame: &Frame, k: &[i64]) -> f64 {
    let d = frame.d();
    debug_assert_eq!(k.len(), d);
    let mut sum = 0.0;
    for q in 0..d - 1 {
        let tau = frame.tangent(q);
        let dot: f64 = tau
            .iter()
            .zip(k.iter())
            .map(|(t, &kc)| t * kc as f64)
            .sum();
        sum += dot * dot;
    }
    sum.sqrt()
}

/// cos(2 pi k . theta) sampled on the grid as a single-component field.
pub fn cosine_slice(k: &[i64], resolution: usize) -> Result<GridField> {
    let d = k.len();
    let grid = SpectralGrid::new(d, resolution)?;
    let mut field = GridField::zeros(d, resolution, &[1]);
    let mut theta = vec![0.0; d];
    let data = field.comp_mut(&[0]);
    for flat in 0..grid.len() {
        grid.theta(flat, &mut theta);
        let phase: f64 = k
            .iter()
            .zip(theta.iter())
            .map(|(&kc, th)| kc as f64 * th)
            .sum();
        data[flat] = (TWO_PI * phase).cos();
    }
    Ok(field)
}

/// Closed-form half-space solution for identity coefficients and Dirichlet
/// data cos(2 pi k . theta): slice j holds cos(2 pi k . theta) times
/// exp(-2 pi |N^T k| t_j). Scalar equations only.
pub fn analytic_dirichlet_slices(
    frame: &Frame,
    k: &[i64],
    resolution: usize,
    nodes: &[f64],
) -> Result<Vec<GridField>> {
    let base = cosine_slice(k, resolution)?;
    let omega = tangential_frequency(frame, k);
    Ok(nodes
        .iter()
        .map(|&t| {
            let mut slice = base.clone();
            slice.scale((-TWO_PI * omega * t).exp());
            slice
        })
        .collect())
}

/// Closed-form half-space solution for identity coefficients and the Neumann
/// datum induced by phi = cos(2 pi k . theta) through a tangent direction
/// field T: g = T . grad phi. The solution is
/// -((T . k)/|N^T k|) sin(2 pi k . theta) exp(-2 pi |N^T k| t), which has a
/// zero-mean boundary slice, matching the solver normalization. The mode must
/// not be tangentially degenerate.
pub fn analytic_neumann_slices(
    frame: &Frame,
    k: &[i64],
    t_vec: &[f64],
    resolution: usize,
    nodes: &[f64],
) -> Result<Vec<GridField>> {
    let d = frame.d();
    let omega = tangential_frequency(frame, k);
    if omega < 1e-9 {
        return Err(Error::Hypothesis(format!(
            "mode k = {k:?} is tangentially degenerate for this normal; the \
             half-space Neumann problem has no decaying solution for it"
        )));
    }
    let dot: f64 = t_vec
        .iter()
        .zip(k.iter())
        .map(|(t, &kc)| t * kc as f64)
        .sum();
    let amp = -dot / omega;
    let grid = SpectralGrid::new(d, resolution)?;
    let mut theta = vec![0.0; d];
    Ok(nodes
        .iter()
        .map(|&t| {
            let decay = (-TWO_PI * omega * t).exp();
            let mut slice = GridField::zeros(d, resolution, &[1]);
            let data = slice.comp_mut(&[0]);
            for flat in 0..grid.len() {
                grid.theta(flat, &mut theta);
                let phase: f64 = k
                    .iter()
                    .zip(theta.iter())
                    .map(|(&kc, th)| kc as f64 * th)
                    .sum();
                data[flat] = amp * decay * (TWO_PI * phase).sin();
            }
            slice
        })
        .collect())
}

/// Mean of a smooth 1-periodic function over one period by the n-point
/// rectangle rule, which is spectrally accurate for periodic integrands.
pub fn periodic_mean(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    let step = 1.0 / n as f64;
    (0..n).map(|i| f(i as f64 * step)).sum::<f64>() * step
}

/// Graded half-space mesh whose nodes are all integer multiples of `delta`:
/// `plateau` steps of size delta, then plateau steps of 2 delta, then of
/// 4 delta, then steps of 8 delta out to `t_max`. Keeping every node on the
/// delta lattice lets two solvers share node coordinates exactly.
pub fn doubling_mesh(delta: f64, plateau: usize, t_max: f64) -> Result<GradedMesh> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::config("delta", "mesh step must be positive"));
    }
    if plateau == 0 {
        return Err(Error::config("plateau", "plateau must be positive"));
    }
    let mut multiples: Vec<u64> = vec![0];
    let mut m = 0u64;
    for level in 0..3u64 {
        let step = 1u64 << level;
        for _ in 0..plateau {
            m += step;
            multiples.push(m);
        }
    }
    let top = (t_max / delta + 0.5).floor() as u64;
    if top <= m + 8 {
        return Err(Error::config(
            "t_max",
            format!(
                "domain depth {t_max} is too shallow for the graded plateaus; \
                 need at least {} mesh steps",
                m + 16
            ),
        ));
    }
    m += 8;
    while m < top {
        multiples.push(m);
        m += 8;
    }
    multiples.push(top);
    let nodes: Vec<f64> = multiples.iter().map(|&k| k as f64 * delta).collect();
    GradedMesh::from_nodes(nodes)
}

/// Solution of the decoupled strip problem at one theta_2 grid line:
/// `values[j][p]` approximates W(theta_1 = p/resolution, t = nodes[j]).
#[derive(Debug, Clone)]
pub struct StripSolution {
    pub resolution: usize,
    pub h: f64,
    pub theta2: f64,
    pub nodes: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl StripSolution {
    /// Index of the node equal to `t` up to rounding, if present.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        self.nodes
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
    }
}

/// Periodic couplings of one unknown line to itself and its two neighbours:
/// `sub[p]`, `diag[p]`, `sup[p]` multiply entries p-1, p, p+1 (mod n).
#[derive(Clone)]
struct Band3 {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
}

impl Band3 {
    fn zeros(n: usize) -> Self {
        Band3 {
            sub: vec![0.0; n],
            diag: vec![0.0; n],
            sup: vec![0.0; n],
        }
    }

    fn add(&mut self, p: usize, offset: i64, v: f64) {
        match offset {
            -1 => self.sub[p] += v,
            0 => self.diag[p] += v,
            1 => self.sup[p] += v,
            _ => unreachable!("strip stencil only touches nearest neighbours"),
        }
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let n = self.diag.len();
        let mut out = DMatrix::zeros(n, n);
        for p in 0..n {
            out[(p, p)] += self.diag[p];
            out[(p, (p + 1) % n)] += self.sup[p];
            out[(p, (p + n - 1) % n)] += self.sub[p];
        }
        out
    }

    fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        let n = self.diag.len();
        for p in 0..n {
            out[p] = self.sub[p] * x[(p + n - 1) % n]
                + self.diag[p] * x[p]
                + self.sup[p] * x[(p + 1) % n];
        }
    }

    fn mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.diag.len();
        let mut out = DMatrix::zeros(n, x.ncols());
        for p in 0..n {
            let pm = (p + n - 1) % n;
            let pp = (p + 1) % n;
            for c in 0..x.ncols() {
                out[(p, c)] = self.sub[p] * x[(pm, c)]
                    + self.diag[p] * x[(p, c)]
                    + self.sup[p] * x[(pp, c)];
            }
        }
        out
    }
}

struct StripCoefficients {
    /// Tangential-block entries at theta midpoints and t nodes (rows 1..=J).
    b11: Vec<Vec<f64>>,
    b12: Vec<Vec<f64>>,
    /// Normal-flux entries at theta nodes and t midpoints (intervals 0..J).
    b21: Vec<Vec<f64>>,
    b22: Vec<Vec<f64>>,
}

fn strip_coefficients(
    tensor: &TrigTensor,
    frame: &Frame,
    theta2: f64,
    resolution: usize,
    h: f64,
    j_count: usize,
) -> StripCoefficients {
    let conjugated = tensor.conjugate_spatial(frame.matrix());
    let n1 = frame.normal()[0];
    let n2 = frame.normal()[1];
    let ht = 1.0 / resolution as f64;
    let eval = |theta1: f64, t: f64| -> Vec<f64> {
        conjugated.eval_at(&[theta1 - t * n1, theta2 - t * n2])
    };
    let mut b11 = vec![vec![0.0; resolution]; j_count + 1];
    let mut b12 = vec![vec![0.0; resolution]; j_count + 1];
    for j in 1..=j_count {
        let t = j as f64 * h;
        for p in 0..resolution {
            let v = eval((p as f64 + 0.5) * ht, t);
            b11[j][p] = v[0];
            b12[j][p] = v[1];
        }
    }
    let mut b21 = vec![vec![0.0; resolution]; j_count];
    let mut b22 = vec![vec![0.0; resolution]; j_count];
    for i in 0..j_count {
        let t = (i as f64 + 0.5) * h;
        for p in 0..resolution {
            let v = eval(p as f64 * ht, t);
            b21[i][p] = v[2];
            b22[i][p] = v[3];
        }
    }
    StripCoefficients { b11, b12, b21, b22 }
}

/// Assemble the three stencil blocks of row j: couplings to W_{j-1}, W_j,
/// W_{j+1}. The scheme is the conservative midpoint one described on
/// `strip_dirichlet`.
fn strip_row(
    coef: &StripCoefficients,
    resolution: usize,
    h: f64,
    j: usize,
    j_count: usize,
) -> (Band3, Band3, Band3) {
    let n = resolution;
    let ht = 1.0 / n as f64;
    let top = j == j_count;
    let mut below = Band3::zeros(n);
    let mut here = Band3::zeros(n);
    let mut above = Band3::zeros(n);
    for p in 0..n {
        // Tangential flux difference -(G_{p+1/2} - G_{p-1/2})/ht with
        // G_{q+1/2} = b11 (W[q+1]-W[q])/ht + b12 (DtW[q]+DtW[q+1])/2.
        for (q_off, sgn) in [(0i64, -1.0 / ht), (-1i64, 1.0 / ht)] {
            let q = (p as i64 + q_off).rem_euclid(n as i64) as usize;
            let w = sgn * coef.b11[j][q] / ht;
            here.add(p, q_off + 1, w);
            here.add(p, q_off, -w);
            let c12 = sgn * coef.b12[j][q] * 0.5;
            for r_off in [q_off, q_off + 1] {
                if top {
                    // One-sided time derivative at the cap.
                    here.add(p, r_off, c12 / h);
                    below.add(p, r_off, -c12 / h);
                } else {
                    // Central time derivative.
                    above.add(p, r_off, c12 / (2.0 * h));
                    below.add(p, r_off, -c12 / (2.0 * h));
                }
            }
        }
        // Normal flux difference -(F_{j+1/2} - F_{j-1/2})/h, or at the cap
        // the zero-flux closure +F_{J-1/2}/(h/2), with
        // F_{i+1/2} = b21 (DthetaW_i + DthetaW_{i+1})/2 + b22 (W_{i+1}-W_i)/h.
        let mut terms: Vec<(usize, f64)> = Vec::with_capacity(2);
        if top {
            terms.push((j - 1, 2.0 / h));
        } else {
            terms.push((j, -1.0 / h));
            terms.push((j - 1, 1.0 / h));
        }
        for &(i, sgn) in &terms {
            let w = sgn * coef.b22[i][p] / h;
            if i == j {
                above.add(p, 0, w);
                here.add(p, 0, -w);
            } else {
                here.add(p, 0, w);
                below.add(p, 0, -w);
            }
            let c21 = sgn * coef.b21[i][p] * 0.5 / (2.0 * ht);
            for level in [i, i + 1] {
                let block = if level + 1 == j {
                    &mut below
                } else if level == j {
                    &mut here
                } else {
                    &mut above
                };
                block.add(p, 1, c21);
                block.add(p, -1, -c21);
            }
        }
    }
    (below, here, above)
}

/// Independent reference solver for the half-space Dirichlet layer over the
/// axis-aligned normal n = e_2 in two dimensions with scalar coefficients.
///
/// For that normal the lifted problem involves no theta_2 derivatives, so it
/// decouples into one periodic strip problem per theta_2 grid line:
///
///   -d/dtheta1 (B11 dW/dtheta1 + B12 dW/dt)
///   -d/dt      (B21 dW/dtheta1 + B22 dW/dt) = 0
///
/// on the strip T^1 x (0, t_max), with coefficients B evaluated at
/// (theta1 - t n1, theta2 - t n2), data W(theta1, 0) = phi(theta1), and a
/// zero-conormal-flux cap at t_max. The discretization is a second-order
/// conservative finite-difference scheme on a uniform mesh: midpoint fluxes
/// in both directions, central time derivatives inside, a one-sided one at
/// the cap, and a half-cell balance for the cap row. The block-tridiagonal
/// system is solved by direct elimination, so no Krylov machinery is shared
/// with the production path.
pub fn strip_dirichlet(
    tensor: &TrigTensor,
    frame: &Frame,
    theta2: f64,
    phi: &dyn Fn(f64) -> f64,
    resolution: usize,
    h: f64,
    t_max: f64,
) -> Result<StripSolution> {
    if tensor.d() != 2 || frame.d() != 2 {
        return Err(Error::Usage(
            "the strip reference solver is written for two dimensions".into(),
        ));
    }
    if tensor.m() != 1 {
        return Err(Error::Usage(
            "the strip reference solver handles scalar equations only".into(),
        ));
    }
    if frame.normal()[0].abs() > 1e-12 || (frame.normal()[1] - 1.0).abs() > 1e-12 {
        return Err(Error::Usage(
            "the strip reduction needs the axis normal e_2; other normals \
             couple the theta_2 lines"
                .into(),
        ));
    }
    if resolution < 8 {
        return Err(Error::config(
            "resolution",
            "strip solver needs at least 8 points per period",
        ));
    }
    if !(h > 0.0) || !(t_max > 0.0) {
        return Err(Error::config("h", "mesh step and depth must be positive"));
    }
    let j_count = (t_max / h).round() as usize;
    if j_count < 4 {
        return Err(Error::config("t_max", "strip mesh needs at least 4 steps"));
    }
    if (j_count as f64 * h - t_max).abs() > 1e-9 * t_max.max(1.0) {
        return Err(Error::config(
            "h",
            format!("step {h} does not divide the depth {t_max}"),
        ));
    }
    let n = resolution;
    let coef = strip_coefficients(tensor, frame, theta2, n, h, j_count);
    let ht = 1.0 / n as f64;
    let phivec: Vec<f64> = (0..n).map(|p| phi(p as f64 * ht)).collect();

    // Forward block elimination. Row storage index r = j - 1.
    let mut factors: Vec<LU<f64, Dyn, Dyn>> = Vec::with_capacity(j_count);
    let mut upper: Vec<Band3> = Vec::with_capacity(j_count);
    let mut rhs: Vec<DVector<f64>> = Vec::with_capacity(j_count);
    for j in 1..=j_count {
        let (below, here, above) = strip_row(&coef, n, h, j, j_count);
        let mut b = DVector::zeros(n);
        if j == 1 {
            let mut tmp = vec![0.0; n];
            below.mul_vec(&phivec, &mut tmp);
            for p in 0..n {
                b[p] = -tmp[p];
            }
        }
        let mut dense = here.to_dense();
        if j > 1 {
            let prev = factors.last().expect("previous factor present");
            let coupling = prev.solve(&upper[j - 2].to_dense()).ok_or_else(|| {
                Error::Consistency("strip elimination hit a singular block".into())
            })?;
            dense -= below.mul_dense(&coupling);
            let carried = prev.solve(&rhs[j - 2]).ok_or_else(|| {
                Error::Consistency("strip elimination hit a singular block".into())
            })?;
            let mut folded = vec![0.0; n];
            below.mul_vec(carried.as_slice(), &mut folded);
            for p in 0..n {
                b[p] -= folded[p];
            }
        }
        factors.push(dense.lu());
        upper.push(above);
        rhs.push(b);
    }

    // Back substitution.
    let mut lines: Vec<Vec<f64>> = vec![Vec::new(); j_count];
    let last = factors[j_count - 1]
        .solve(&rhs[j_count - 1])
        .ok_or_else(|| Error::Consistency("strip back substitution failed".into()))?;
    lines[j_count - 1] = last.as_slice().to_vec();
    for r in (0..j_count - 1).rev() {
        let mut b = rhs[r].clone();
        let mut coupled = vec![0.0; n];
        upper[r].mul_vec(&lines[r + 1], &mut coupled);
        for p in 0..n {
            b[p] -= coupled[p];
        }
        let sol = factors[r]
            .solve(&b)
            .ok_or_else(|| Error::Consistency("strip back substitution failed".into()))?;
        lines[r] = sol.as_slice().to_vec();
    }

    let mut values = Vec::with_capacity(j_count + 1);
    values.push(phivec);
    values.extend(lines);
    let nodes: Vec<f64> = (0..=j_count).map(|j| j as f64 * h).collect();
    Ok(StripSolution {
        resolution: n,
        h,
        theta2,
        nodes,
        values,
    })
}

/// Richardson-extrapolated strip solution: solves at (resolution, h) and at
/// one or two jointly refined levels (2x points, half the step), restricts
/// the finer solutions to the coarse lattice, and eliminates the leading
/// error terms. With three levels the scheme's quadratic and quartic error
/// terms both cancel, leaving a reference accurate well beyond any single
/// affordable mesh.
pub fn strip_dirichlet_richardson(
    tensor: &TrigTensor,
    frame: &Frame,
    theta2: f64,
    phi: &dyn Fn(f64) -> f64,
    resolution: usize,
    h: f64,
    t_max: f64,
    levels: usize,
) -> Result<StripSolution> {
    if !(2..=3).contains(&levels) {
        return Err(Error::config(
            "levels",
            "joint Richardson refinement supports 2 or 3 levels",
        ));
    }
    let mut solutions = Vec::with_capacity(levels);
    for level in 0..levels {
        let factor = 1usize << level;
        solutions.push(strip_dirichlet(
            tensor,
            frame,
            theta2,
            phi,
            resolution * factor,
            h / factor as f64,
            t_max,
        )?);
    }
    let node_count = solutions[0].nodes.len();
    let restricted: Vec<Vec<Vec<f64>>> = solutions
        .iter()
        .enumerate()
        .map(|(level, s)| {
            let factor = 1usize << level;
            (0..node_count)
                .map(|j| {
                    (0..resolution)
                        .map(|p| s.values[j * factor][p * factor])
                        .collect()
                })
                .collect()
        })
        .collect();
    let eliminate = |fine: &[Vec<f64>], coarse: &[Vec<f64>], weight: f64| -> Vec<Vec<f64>> {
        fine.iter()
            .zip(coarse.iter())
            .map(|(f, c)| {
                f.iter()
                    .zip(c.iter())
                    .map(|(&vf, &vc)| (weight * vf - vc) / (weight - 1.0))
                    .collect()
            })
            .collect()
    };
    let values = if levels == 2 {
        eliminate(&restricted[1], &restricted[0], 4.0)
    } else {
        let first = eliminate(&restricted[1], &restricted[0], 4.0);
        let second = eliminate(&restricted[2], &restricted[1], 4.0);
        eliminate(&second, &first, 16.0)
    };
    Ok(StripSolution {
        resolution,
        h,
        theta2,
        nodes: solutions[0].nodes.clone(),
        values,
    })
}
