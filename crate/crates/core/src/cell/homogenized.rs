//! Effective (homogenized) tensor and its directional contractions.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::correctors::CorrectorSet;
use crate::error::{Error, Result};
use crate::fields::{tensor_index, TrigTensor};

/// Constant effective tensor â_{ij}^{αβ} = ∫ a_{ij}^{αβ} + a_{ik}^{αγ} ∂_k χ_j^{γβ}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomogenizedTensor {
    pub d: usize,
    pub m: usize,
    /// Flattened (i, j, α, β), row-major.
    pub entries: Vec<f64>,
}

impl HomogenizedTensor {
    pub fn entry(&self, i: usize, j: usize, alpha: usize, beta: usize) -> f64 {
        self.entries[tensor_index(self.d, self.m, i, j, alpha, beta)]
    }

    /// Adjoint â*_{ij}^{αβ} = â_{ji}^{βα}. Equals the effective tensor of the
    /// adjoint coefficients, which callers verify numerically.
    pub fn adjoint(&self) -> HomogenizedTensor {
        let (d, m) = (self.d, self.m);
        let mut entries = vec![0.0; self.entries.len()];
        for i in 0..d {
            for j in 0..d {
                for a in 0..m {
                    for b in 0..m {
                        entries[tensor_index(d, m, i, j, a, b)] =
                            self.entries[tensor_index(d, m, j, i, b, a)];
                    }
                }
            }
        }
        HomogenizedTensor { d, m, entries }
    }

    /// m×m contraction q^{αβ} = â_{ij}^{αβ} n_i n_j against a unit normal.
    pub fn normal_contraction(&self, normal: &[f64]) -> DMatrix<f64> {
        let (d, m) = (self.d, self.m);
        debug_assert_eq!(normal.len(), d);
        let mut q = DMatrix::<f64>::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                let mut acc = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        acc += self.entry(i, j, a, b) * normal[i] * normal[j];
                    }
                }
                q[(a, b)] = acc;
            }
        }
        q
    }

    /// Constant tensor carrying these entries, reusable wherever trig
    /// coefficients are expected (e.g. as a benchmark operator).
    pub fn as_trig_constant(&self, lambda: f64) -> Result<TrigTensor> {
        let tensor = self
            .entries
            .iter()
            .map(|&v| num_complex::Complex64::new(v, 0.0))
            .collect();
        TrigTensor::new(self.d, self.m, lambda, vec![(vec![0; self.d], tensor)])
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
    }
}

/// Assemble the effective tensor from solved correctors. The integrand mixes
/// a band-limited factor with the spectrally converged corrector gradient, so
/// the grid average is the quadrature.
pub fn homogenized_tensor(
    trig: &TrigTensor,
    correctors: &CorrectorSet,
) -> Result<HomogenizedTensor> {
    correctors.matches(trig, correctors.resolution)?;
    let (d, m) = (trig.d(), trig.m());
    let a = trig.sample(correctors.resolution)?;
    let grads = correctors.gradients()?;
    let g = a.grid_len() as f64;
    let mut entries = vec![0.0; d * d * m * m];
    for i in 0..d {
        for j in 0..d {
            for alpha in 0..m {
                for beta in 0..m {
                    let mut acc = a
                        .comp_by_flat(tensor_index(d, m, i, j, alpha, beta))
                        .iter()
                        .sum::<f64>();
                    for k in 0..d {
                        for gamma in 0..m {
                            let ac = a.comp_by_flat(tensor_index(d, m, i, k, alpha, gamma));
                            let gc = grads.comp(&[j, beta, gamma, k]);
                            acc += ac.iter().zip(gc).map(|(x, y)| x * y).sum::<f64>();
                        }
                    }
                    entries[tensor_index(d, m, i, j, alpha, beta)] = acc / g;
                }
            }
        }
    }
    Ok(HomogenizedTensor { d, m, entries })
}

/// Inverse of the normal contraction: h = (â_{ij} n_i n_j)^{-1} as an m×m
/// matrix. Ellipticity makes the contraction invertible for unit normals.
pub fn directional_matrix(ahat: &HomogenizedTensor, normal: &[f64]) -> Result<DMatrix<f64>> {
    let q = ahat.normal_contraction(normal);
    q.clone().try_inverse().ok_or_else(|| {
        Error::Consistency(format!(
            "normal contraction of the effective tensor is singular for n = {normal:?}; \
             this contradicts ellipticity"
        ))
    })
}
