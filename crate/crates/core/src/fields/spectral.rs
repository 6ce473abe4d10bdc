//! d-dimensional trigonometric collocation on the unit torus.
//!
//! Conventions, fixed once for the whole crate:
//!   * grid points θ_j = j/N per axis, N a power of two, row-major with axis 0
//!     slowest;
//!   * Fourier representation f(θ) = Σ_k c_k e^{2πi k·θ};
//!   * `forward` produces the c_k (it carries the 1/N^d factor), `inverse`
//!     does not rescale;
//!   * signed wavenumbers k ∈ {-N/2, …, N/2-1}; derivatives zero the Nyquist
//!     row because an odd derivative of a real signal is ill-defined there.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Clone)]
pub struct SpectralGrid {
    d: usize,
    n: usize,
    len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("d", &self.d)
            .field("n", &self.n)
            .finish()
    }
}

impl SpectralGrid {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::config("d", "dimension must be positive"));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::config(
                "resolution",
                format!("grid resolution must be a power of two >= 4, got {n}"),
            ));
        }
        let len = n.checked_pow(d as u32).ok_or_else(|| {
            Error::config("resolution", format!("grid {n}^{d} overflows usize"))
        })?;
        let mut planner = FftPlanner::new();
        Ok(SpectralGrid {
            d,
            n,
            len,
            fwd: planner.plan_fft(n, FftDirection::Forward),
            inv: planner.plan_fft(n, FftDirection::Inverse),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of grid points, n^d.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Stride of `axis` in the row-major flat index.
    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.d - 1 - axis) as u32)
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.d);
        multi.iter().fold(0, |acc, &j| acc * self.n + (j % self.n))
    }

    /// Grid coordinates θ = j/N of a flat index.
    pub fn theta(&self, flat: usize, out: &mut [f64]) {
        let mut rest = flat;
        for axis in (0..self.d).rev() {
            out[axis] = (rest % self.n) as f64 / self.n as f64;
            rest /= self.n;
        }
    }

    /// Signed wavenumber component along `axis` for a flat coefficient index.
    pub fn k_component(&self, flat: usize, axis: usize) -> i64 {
        let idx = (flat / self.stride(axis)) % self.n;
        Self::signed(idx, self.n)
    }

    pub fn k_vector(&self, flat: usize, out: &mut [i64]) {
        let mut rest = flat;
        for axis in (0..self.d).rev() {
            out[axis] = Self::signed(rest % self.n, self.n);
            rest /= self.n;
        }
    }

    fn signed(idx: usize, n: usize) -> i64 {
        if idx < n / 2 {
            idx as i64
        } else {
            idx as i64 - n as i64
        }
    }

    /// True if any component of the wavenumber sits on the Nyquist row.
    pub fn has_nyquist(&self, flat: usize) -> bool {
        let mut rest = flat;
        for _ in 0..self.d {
            if rest % self.n == self.n / 2 {
                return true;
            }
            rest /= self.n;
        }
        false
    }

    /// Buffer position of an integer wavenumber (wrapped mod N).
    pub fn index_of_k(&self, k: &[i64]) -> usize {
        debug_assert_eq!(k.len(), self.d);
        let n = self.n as i64;
        k.iter()
            .fold(0usize, |acc, &c| acc * self.n + (c.rem_euclid(n)) as usize)
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(data.len(), self.len);
        let mut line = vec![Complex64::default(); self.n];
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        for axis in 0..self.d {
            let stride = self.stride(axis);
            if stride == 1 {
                for row in data.chunks_exact_mut(self.n) {
                    fft.process_with_scratch(row, &mut scratch);
                }
            } else {
                let block = stride * self.n;
                for base in (0..self.len).step_by(block) {
                    for off in 0..stride {
                        for (j, slot) in line.iter_mut().enumerate() {
                            *slot = data[base + off + j * stride];
                        }
                        fft.process_with_scratch(&mut line, &mut scratch);
                        for (j, slot) in line.iter().enumerate() {
                            data[base + off + j * stride] = *slot;
                        }
                    }
                }
            }
        }
    }

    /// In-place forward transform; output are the coefficients c_k.
    pub fn forward_complex(&self, data: &mut [Complex64]) {
        self.transform(data, &self.fwd);
        let scale = 1.0 / self.len as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// In-place synthesis from coefficients to point values.
    pub fn inverse_complex(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inv);
    }

    /// Real samples -> coefficients.
    pub fn forward(&self, values: &[f64], coeffs: &mut [Complex64]) {
        debug_assert_eq!(values.len(), self.len);
        debug_assert_eq!(coeffs.len(), self.len);
        for (c, &v) in coeffs.iter_mut().zip(values) {
            *c = Complex64::new(v, 0.0);
        }
        self.forward_complex(coeffs);
    }

    /// Coefficients -> real samples. Returns the largest |Im| encountered so
    /// callers can assert the reality invariant.
    pub fn inverse_real(&self, coeffs: &[Complex64], values: &mut [f64]) -> f64 {
        let mut work = coeffs.to_vec();
        self.inverse_complex(&mut work);
        let mut max_im: f64 = 0.0;
        for (v, w) in values.iter_mut().zip(&work) {
            *v = w.re;
            max_im = max_im.max(w.im.abs());
        }
        max_im
    }

    /// Multiply coefficients by 2πi k_axis (spectral ∂/∂θ_axis).
    pub fn differentiate(&self, coeffs: &mut [Complex64], axis: usize) {
        for flat in 0..self.len {
            let idx = (flat / self.stride(axis)) % self.n;
            let factor = if idx == self.n / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, TWO_PI * Self::signed(idx, self.n) as f64)
            };
            coeffs[flat] *= factor;
        }
    }

    /// Directional spectral weights i·2π(τ·k) as a dense table, Nyquist rows
    /// zeroed. Used by the lifted operator for tangential derivatives.
    pub fn directional_weights(&self, tau: &[f64]) -> Vec<f64> {
        debug_assert_eq!(tau.len(), self.d);
        let mut out = vec![0.0; self.len];
        let mut k = vec![0i64; self.d];
        for flat in 0..self.len {
            if self.has_nyquist(flat) {
                continue;
            }
            self.k_vector(flat, &mut k);
            let dot: f64 = k.iter().zip(tau).map(|(&ki, &ti)| ki as f64 * ti).sum();
            out[flat] = TWO_PI * dot;
        }
        out
    }

    /// Evaluate a coefficient table at an arbitrary point of the torus.
    pub fn evaluate_at(&self, coeffs: &[Complex64], theta: &[f64]) -> Complex64 {
        let mut k = vec![0i64; self.d];
        let mut acc = Complex64::default();
        for (flat, c) in coeffs.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            self.k_vector(flat, &mut k);
            let phase: f64 = k
                .iter()
                .zip(theta)
                .map(|(&ki, &ti)| ki as f64 * ti)
                .sum::<f64>()
                * TWO_PI;
            acc += c * Complex64::new(phase.cos(), phase.sin());
        }
        acc
    }
}
