//! Diophantine quality of a direction: how badly lattice vectors align with
//! the normal. The solvability and decay theory for half-space layers is
//! quantified by
//!
//!     κ(n) = inf over ξ ∈ Z^d \ {0} of |(I - n⊗n) ξ| · |ξ|²,
//!
//! which is positive for almost every n but zero whenever some lattice vector
//! is parallel to n ("rational" normal). The infimum is not computable; the
//! box-truncated minimum over 0 < |ξ|_∞ ≤ cutoff is, it is monotone
//! nonincreasing in the cutoff, and every report records the cutoff used.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this the truncated minimum is treated as an exact rational hit.
pub const RATIONAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiophantineReport {
    pub normal: Vec<f64>,
    pub cutoff: i64,
    /// min over 0 < |ξ|_∞ ≤ cutoff of |(I - n⊗n)ξ| |ξ|².
    pub kappa_hat: f64,
    /// Lattice vector attaining the minimum (first in lexicographic order).
    pub minimizer: Vec<i64>,
    pub rational_detected: bool,
}

fn max_cutoff(d: usize) -> i64 {
    match d {
        0 | 1 => 0,
        2 => 4096,
        3 => 256,
        _ => 32,
    }
}

/// Exhaustive box search. Cost grows as cutoff^d, hence the per-dimension cap.
pub fn kappa(normal: &[f64], cutoff: i64) -> Result<DiophantineReport> {
    let d = normal.len();
    if d < 2 {
        return Err(Error::config("normal", "need at least two components"));
    }
    if cutoff < 1 {
        return Err(Error::config("cutoff", "cutoff must be at least 1"));
    }
    if cutoff > max_cutoff(d) {
        return Err(Error::config(
            "cutoff",
            format!(
                "cutoff {cutoff} exceeds the cap {} for d = {d} (cost grows as cutoff^d)",
                max_cutoff(d)
            ),
        ));
    }
    let len = normal.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(len > 0.0) {
        return Err(Error::config("normal", "normal must be nonzero"));
    }
    let n: Vec<f64> = normal.iter().map(|x| x / len).collect();

    // ξ and -ξ give the same value; fix the first nonzero component positive
    // and scan the first axis in parallel.
    let side = (2 * cutoff + 1) as usize;
    let rest = side.pow((d - 1) as u32);
    let per_axis: Vec<(f64, Vec<i64>)> = (0..=cutoff)
        .into_par_iter()
        .map(|x0| {
            let mut best = f64::INFINITY;
            let mut arg = vec![0i64; d];
            let mut xi = vec![0i64; d];
            xi[0] = x0;
            for idx in 0..rest {
                let mut r = idx;
                for axis in (1..d).rev() {
                    xi[axis] = (r % side) as i64 - cutoff;
                    r /= side;
                }
                if x0 == 0 {
                    // Keep only the lexicographically positive half.
                    match xi[1..].iter().find(|&&c| c != 0) {
                        None => continue,
                        Some(&c) if c < 0 => continue,
                        _ => {}
                    }
                }
                let dot: f64 = xi.iter().zip(&n).map(|(&k, &ni)| k as f64 * ni).sum();
                let norm2: f64 = xi.iter().map(|&k| (k * k) as f64).sum();
                let proj2 = (norm2 - dot * dot).max(0.0);
                let value = proj2.sqrt() * norm2;
                if value < best {
                    best = value;
                    arg.copy_from_slice(&xi);
                }
            }
            (best, arg)
        })
        .collect();

    let mut kappa_hat = f64::INFINITY;
    let mut minimizer = vec![0i64; d];
    for (value, arg) in per_axis {
        if value < kappa_hat {
            kappa_hat = value;
            minimizer = arg;
        }
    }
    Ok(DiophantineReport {
        normal: n,
        cutoff,
        kappa_hat,
        minimizer,
        rational_detected: kappa_hat < RATIONAL_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_normal_is_rational() {
        let r = kappa(&[0.0, 1.0], 10).unwrap();
        assert!(r.rational_detected);
        assert!(r.kappa_hat < RATIONAL_TOL);
        assert_eq!(r.minimizer, vec![0, 1]);
    }

    #[test]
    fn truncation_is_monotone() {
        let n = [1.0, std::f64::consts::SQRT_2];
        let k10 = kappa(&n, 10).unwrap().kappa_hat;
        let k100 = kappa(&n, 100).unwrap().kappa_hat;
        assert!(k100 <= k10 + 1e-15);
    }

    #[test]
    fn antipodal_symmetry() {
        let n = [0.3, -0.5, 0.81];
        let neg: Vec<f64> = n.iter().map(|x| -x).collect();
        let a = kappa(&n, 8).unwrap().kappa_hat;
        let b = kappa(&neg, 8).unwrap().kappa_hat;
        assert!((a - b).abs() < 1e-13);
    }
}
