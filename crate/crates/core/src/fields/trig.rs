//! Coefficient tensors A(θ) = (a_{ij}^{αβ}(θ)) as finite trigonometric
//! polynomials: a map from integer wavenumbers k to complex (d,d,m,m) tensors
//! with the Hermitian symmetry coeff(-k) = conj(coeff(k)), so every sample is
//! real. The trig degree (bandwidth) is the smoothness record: a trig
//! polynomial satisfies every smoothness hypothesis exactly.
//!
//! Tensor components are flattened row-major in the fixed index order
//! (i, j, α, β): spatial row, spatial column, system row, system column.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::grid::GridField;
use super::spectral::{SpectralGrid, TWO_PI};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TrigTensor {
    d: usize,
    m: usize,
    lambda: f64,
    /// Sorted by wavenumber, Hermitian-complete (both k and -k present).
    coeffs: Vec<(Vec<i64>, Vec<Complex64>)>,
}

pub fn tensor_index(d: usize, m: usize, i: usize, j: usize, alpha: usize, beta: usize) -> usize {
    ((i * d + j) * m + alpha) * m + beta
}

impl TrigTensor {
    pub fn new(
        d: usize,
        m: usize,
        lambda: f64,
        entries: Vec<(Vec<i64>, Vec<Complex64>)>,
    ) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(Error::config("d/m", "dimensions must be positive"));
        }
        if !(lambda > 0.0) || lambda > 1.0 {
            return Err(Error::config(
                "lambda",
                format!("ellipticity constant must lie in (0, 1], got {lambda}"),
            ));
        }
        let comp_len = d * d * m * m;
        let mut map: BTreeMap<Vec<i64>, Vec<Complex64>> = BTreeMap::new();
        for (idx, (k, tensor)) in entries.into_iter().enumerate() {
            if k.len() != d {
                return Err(Error::config(
                    format!("coeffs[{idx}].k"),
                    format!("expected {d} components, got {}", k.len()),
                ));
            }
            if tensor.len() != comp_len {
                return Err(Error::config(
                    format!("coeffs[{idx}]"),
                    format!("expected {comp_len} tensor entries, got {}", tensor.len()),
                ));
            }
            if map.insert(k.clone(), tensor).is_some() {
                return Err(Error::config(
                    format!("coeffs[{idx}].k"),
                    format!("duplicate wavenumber {k:?}"),
                ));
            }
        }
        // Hermitian completion: supply missing mirrors, verify present ones.
        let keys: Vec<Vec<i64>> = map.keys().cloned().collect();
        for k in keys {
            let neg: Vec<i64> = k.iter().map(|c| -c).collect();
            let mirror: Vec<Complex64> = map[&k].iter().map(|c| c.conj()).collect();
            match map.get(&neg) {
                Some(existing) => {
                    let dev = existing
                        .iter()
                        .zip(&mirror)
                        .map(|(a, b)| (a - b).norm())
                        .fold(0.0f64, f64::max);
                    if dev > HERMITIAN_TOL {
                        return Err(Error::config(
                            format!("coeffs[k={k:?}]"),
                            format!(
                                "coefficient at -k breaks Hermitian symmetry by {dev:.3e} (> {HERMITIAN_TOL:.0e})"
                            ),
                        ));
                    }
                }
                None => {
                    map.insert(neg, mirror);
                }
            }
        }
        // The k = 0 tensor must be real; the mirror check above already
        // bounded its imaginary part, drop the residue.
        if let Some(zero) = map.get_mut(&vec![0i64; d]) {
            for c in zero.iter_mut() {
                *c = Complex64::new(c.re, 0.0);
            }
        }
        Ok(TrigTensor {
            d,
            m,
            lambda,
            coeffs: map.into_iter().collect(),
        })
    }

    /// The constant identity tensor a_{ij}^{αβ} = δ_{ij} δ^{αβ}.
    pub fn identity(d: usize, m: usize) -> Self {
        let mut tensor = vec![Complex64::default(); d * d * m * m];
        for i in 0..d {
            for alpha in 0..m {
                tensor[tensor_index(d, m, i, i, alpha, alpha)] = Complex64::new(1.0, 0.0);
            }
        }
        TrigTensor::new(d, m, 1.0, vec![(vec![0; d], tensor)]).expect("identity tensor is valid")
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn comp_len(&self) -> usize {
        self.d * self.d * self.m * self.m
    }

    pub fn coeffs(&self) -> &[(Vec<i64>, Vec<Complex64>)] {
        &self.coeffs
    }

    /// Largest |k|_∞ with a nonzero coefficient: the trig degree.
    pub fn bandwidth(&self) -> i64 {
        self.coeffs
            .iter()
            .filter(|(_, t)| t.iter().any(|c| c.norm_sqr() > 0.0))
            .flat_map(|(k, _)| k.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Smallest admissible sampling resolution: the next power of two at or
    /// above the anti-aliasing bound 2·bandwidth + 2.
    pub fn min_resolution(&self) -> usize {
        let bound = (2 * self.bandwidth() + 2).max(4) as usize;
        bound.next_power_of_two()
    }

    /// Adjoint tensor a*_{ij}^{αβ} = a_{ji}^{βα}.
    pub fn adjoint(&self) -> TrigTensor {
        let (d, m) = (self.d, self.m);
        let coeffs = self
            .coeffs
            .iter()
            .map(|(k, t)| {
                let mut out = vec![Complex64::default(); t.len()];
                for i in 0..d {
                    for j in 0..d {
                        for a in 0..m {
                            for b in 0..m {
                                out[tensor_index(d, m, i, j, a, b)] =
                                    t[tensor_index(d, m, j, i, b, a)];
                            }
                        }
                    }
                }
                (k.clone(), out)
            })
            .collect();
        TrigTensor {
            d,
            m,
            lambda: self.lambda,
            coeffs,
        }
    }

    /// Conjugate the spatial indices by an orthogonal matrix:
    /// b_{pq}^{αβ} = Σ_{ij} M_{ip} a_{ij}^{αβ} M_{jq}.
    pub fn conjugate_spatial(&self, mat: &DMatrix<f64>) -> TrigTensor {
        let (d, m) = (self.d, self.m);
        debug_assert_eq!(mat.nrows(), d);
        debug_assert_eq!(mat.ncols(), d);
        let coeffs = self
            .coeffs
            .iter()
            .map(|(k, t)| {
                let mut out = vec![Complex64::default(); t.len()];
                for p in 0..d {
                    for q in 0..d {
                        for a in 0..m {
                            for b in 0..m {
                                let mut acc = Complex64::default();
                                for i in 0..d {
                                    for j in 0..d {
                                        acc += t[tensor_index(d, m, i, j, a, b)]
                                            * (mat[(i, p)] * mat[(j, q)]);
                                    }
                                }
                                out[tensor_index(d, m, p, q, a, b)] = acc;
                            }
                        }
                    }
                }
                (k.clone(), out)
            })
            .collect();
        TrigTensor {
            d,
            m,
            lambda: self.lambda,
            coeffs,
        }
    }

    /// Constant (k = 0) part, i.e. the torus mean.
    pub fn mean_tensor(&self) -> Vec<f64> {
        let zero = vec![0i64; self.d];
        self.coeffs
            .iter()
            .find(|(k, _)| *k == zero)
            .map(|(_, t)| t.iter().map(|c| c.re).collect())
            .unwrap_or_else(|| vec![0.0; self.comp_len()])
    }

    fn check_resolution(&self, n: usize) -> Result<()> {
        let min = (2 * self.bandwidth() + 2).max(4) as usize;
        if n < min {
            return Err(Error::config(
                "resolution",
                format!(
                    "resolution {n} is below the anti-aliasing bound {min} for trig degree {}",
                    self.bandwidth()
                ),
            ));
        }
        Ok(())
    }

    /// Collocation samples on the n^d grid.
    pub fn sample(&self, n: usize) -> Result<GridField> {
        self.sample_shifted(n, &vec![0.0; self.d])
    }

    /// Samples of A(θ - shift); exact because the shift acts as a phase on
    /// each coefficient.
    pub fn sample_shifted(&self, n: usize, shift: &[f64]) -> Result<GridField> {
        self.check_resolution(n)?;
        let grid = SpectralGrid::new(self.d, n)?;
        let mut out = GridField::zeros(self.d, n, &[self.d, self.d, self.m, self.m]);
        let mut buf = vec![Complex64::default(); grid.len()];
        for c in 0..self.comp_len() {
            buf.iter_mut().for_each(|v| *v = Complex64::default());
            for (k, tensor) in &self.coeffs {
                let phase: f64 = k
                    .iter()
                    .zip(shift)
                    .map(|(&ki, &si)| ki as f64 * si)
                    .sum::<f64>()
                    * TWO_PI;
                let rot = Complex64::new(phase.cos(), -phase.sin());
                buf[grid.index_of_k(k)] += tensor[c] * rot;
            }
            let im = grid.inverse_real(&buf, out.comp_by_flat_mut(c));
            if im > 1e-12 {
                return Err(Error::Consistency(format!(
                    "sampling produced imaginary part {im:.3e} (> 1e-12); Hermitian completion broken"
                )));
            }
        }
        Ok(out)
    }

    /// Pointwise evaluation anywhere on the torus (flattened (i,j,α,β)).
    pub fn eval_at(&self, theta: &[f64]) -> Vec<f64> {
        debug_assert_eq!(theta.len(), self.d);
        let mut out = vec![0.0; self.comp_len()];
        for (k, tensor) in &self.coeffs {
            let phase: f64 = k
                .iter()
                .zip(theta)
                .map(|(&ki, &ti)| ki as f64 * ti)
                .sum::<f64>()
                * TWO_PI;
            let e = Complex64::new(phase.cos(), phase.sin());
            for (o, c) in out.iter_mut().zip(tensor) {
                *o += (c * e).re;
            }
        }
        out
    }

    /// Stable content hash: identity of the coefficient tensor for caches.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"blt-coeff-v1");
        h.update((self.d as u64).to_le_bytes());
        h.update((self.m as u64).to_le_bytes());
        h.update(self.lambda.to_le_bytes());
        for (k, tensor) in &self.coeffs {
            for c in k {
                h.update(c.to_le_bytes());
            }
            for v in tensor {
                h.update(v.re.to_le_bytes());
                h.update(v.im.to_le_bytes());
            }
        }
        let digest = h.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Serialization schema for coefficient files:
/// `{ "d", "m", "lambda", "coeffs": [{"k": [...], "re": [[[[...]]]], "im": [[[[...]]]]}] }`
/// with `re`/`im` nested (d,d,m,m) arrays and `im` optional. Missing Hermitian
/// mirrors are completed automatically on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientSpec {
    pub d: usize,
    pub m: usize,
    pub lambda: f64,
    pub coeffs: Vec<CoefficientEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub k: Vec<i64>,
    pub re: Vec<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<Vec<Vec<f64>>>>>,
}

fn flatten_nested(
    nested: &[Vec<Vec<Vec<f64>>>],
    d: usize,
    m: usize,
    path: &str,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(d * d * m * m);
    if nested.len() != d {
        return Err(Error::config(
            path,
            format!("expected {d} spatial rows, got {}", nested.len()),
        ));
    }
    for (i, rows) in nested.iter().enumerate() {
        if rows.len() != d {
            return Err(Error::config(
                format!("{path}[{i}]"),
                format!("expected {d} spatial columns, got {}", rows.len()),
            ));
        }
        for (j, sys) in rows.iter().enumerate() {
            if sys.len() != m {
                return Err(Error::config(
                    format!("{path}[{i}][{j}]"),
                    format!("expected {m} system rows, got {}", sys.len()),
                ));
            }
            for (a, row) in sys.iter().enumerate() {
                if row.len() != m {
                    return Err(Error::config(
                        format!("{path}[{i}][{j}][{a}]"),
                        format!("expected {m} system columns, got {}", row.len()),
                    ));
                }
                out.extend_from_slice(row);
            }
        }
    }
    Ok(out)
}

impl CoefficientSpec {
    pub fn to_tensor(&self) -> Result<TrigTensor> {
        let mut entries = Vec::with_capacity(self.coeffs.len());
        for (idx, entry) in self.coeffs.iter().enumerate() {
            let re = flatten_nested(&entry.re, self.d, self.m, &format!("coeffs[{idx}].re"))?;
            let im = match &entry.im {
                Some(im) => flatten_nested(im, self.d, self.m, &format!("coeffs[{idx}].im"))?,
                None => vec![0.0; re.len()],
            };
            let tensor = re
                .into_iter()
                .zip(im)
                .map(|(r, i)| Complex64::new(r, i))
                .collect();
            entries.push((entry.k.clone(), tensor));
        }
        TrigTensor::new(self.d, self.m, self.lambda, entries)
    }

    pub fn from_tensor(t: &TrigTensor) -> Self {
        let (d, m) = (t.d(), t.m());
        let nest = |f: &dyn Fn(usize) -> f64| -> Vec<Vec<Vec<Vec<f64>>>> {
            (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| {
                            (0..m)
                                .map(|a| {
                                    (0..m).map(|b| f(tensor_index(d, m, i, j, a, b))).collect()
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        };
        CoefficientSpec {
            d,
            m,
            lambda: t.lambda(),
            coeffs: t
                .coeffs()
                .iter()
                .map(|(k, tensor)| CoefficientEntry {
                    k: k.clone(),
                    re: nest(&|c| tensor[c].re),
                    im: Some(nest(&|c| tensor[c].im)),
                })
                .collect(),
        }
    }
}
