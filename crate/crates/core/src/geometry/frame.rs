//! Orthogonal tangent frames M = (N, -n) for a unit normal n.
//!
//! Two fixed Householder branches cover the sphere: the reflection through
//! v = n + e_d maps e_d to -n (pole at n = -e_d), the one through v = n - e_d
//! maps e_d to n (pole at n = +e_d). Columns 1..d-1 of the reflection are the
//! tangent columns N; the last column is forced to -n. The default
//! constructor picks the branch by hemisphere (sign of n_d), so it is smooth
//! and Lipschitz (|N₁ - N₂| ≤ 4|n₁ - n₂|) away from the seam n_d = 0 within
//! each hemisphere.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance to the branch pole below which the construction degenerates.
pub const POLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameBranch {
    /// Reflection axis v = n + e_d; pole at n = -e_d. Used for n_d ≥ 0.
    Upper,
    /// Reflection axis v = n - e_d; pole at n = +e_d. Used for n_d < 0.
    Lower,
}

#[derive(Debug, Clone)]
pub struct Frame {
    normal: Vec<f64>,
    matrix: DMatrix<f64>,
    branch: FrameBranch,
}

impl Frame {
    pub fn d(&self) -> usize {
        self.normal.len()
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    /// The full orthogonal matrix (N, -n), columns in that order.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn branch(&self) -> FrameBranch {
        self.branch
    }

    /// Tangent column τ_q, 0 ≤ q < d-1.
    pub fn tangent(&self, q: usize) -> Vec<f64> {
        debug_assert!(q + 1 < self.d());
        (0..self.d()).map(|i| self.matrix[(i, q)]).collect()
    }

    /// Frobenius distance of tangent blocks, |N₁ - N₂|.
    pub fn tangent_distance(&self, other: &Frame) -> f64 {
        let d = self.d();
        let mut s = 0.0;
        for q in 0..d - 1 {
            for i in 0..d {
                let diff = self.matrix[(i, q)] - other.matrix[(i, q)];
                s += diff * diff;
            }
        }
        s.sqrt()
    }
}

fn unit_normal(n: &[f64]) -> Result<Vec<f64>> {
    if n.len() < 2 {
        return Err(Error::config("normal", "need at least two components"));
    }
    let len = n.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(len > 0.0) || !len.is_finite() {
        return Err(Error::config("normal", "normal must be a nonzero vector"));
    }
    Ok(n.iter().map(|x| x / len).collect())
}

/// Build the frame on a caller-chosen branch; errors near that branch's pole.
pub fn build_frame_branch(normal: &[f64], branch: FrameBranch) -> Result<Frame> {
    let n = unit_normal(normal)?;
    let d = n.len();
    let sign = match branch {
        FrameBranch::Upper => 1.0,
        FrameBranch::Lower => -1.0,
    };
    // v = n + sign·e_d; |v|² = 2(1 + sign·n_d).
    let mut v = n.clone();
    v[d - 1] += sign;
    let v2: f64 = v.iter().map(|x| x * x).sum();
    if v2.sqrt() < POLE_TOL {
        return Err(Error::Hypothesis(format!(
            "normal is within {POLE_TOL:.0e} of the {branch:?} branch pole; build the frame on the {} branch instead",
            match branch {
                FrameBranch::Upper => "Lower",
                FrameBranch::Lower => "Upper",
            }
        )));
    }
    // Householder columns H e_j = e_j - 2 v v_j / |v|².
    let mut m = DMatrix::<f64>::zeros(d, d);
    for j in 0..d - 1 {
        for i in 0..d {
            let h = if i == j { 1.0 } else { 0.0 };
            m[(i, j)] = h - 2.0 * v[i] * v[j] / v2;
        }
    }
    for i in 0..d {
        m[(i, d - 1)] = -n[i];
    }
    // The last Householder column is ±n, so replacing it by -n keeps the
    // matrix orthogonal on both branches.
    debug_assert!({
        let prod = m.transpose() * &m;
        let mut dev = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let id = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((prod[(i, j)] - id).abs());
            }
        }
        dev < 1e-12
    });
    Ok(Frame {
        normal: n,
        matrix: m,
        branch,
    })
}

/// Deterministic hemisphere rule: n_d ≥ 0 picks the Upper branch, which puts
/// the pole a distance ≥ √2 away.
pub fn build_frame(normal: &[f64]) -> Result<Frame> {
    let n = unit_normal(normal)?;
    let branch = if n[n.len() - 1] >= 0.0 {
        FrameBranch::Upper
    } else {
        FrameBranch::Lower
    };
    build_frame_branch(&n, branch)
}
