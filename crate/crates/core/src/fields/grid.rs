//! Real-valued tensor fields sampled on the collocation grid.
//!
//! Storage is component-major: each tensor component is one contiguous n^d
//! block, so transforms and pointwise algebra stream over full blocks.

use serde::{Deserialize, Serialize};

use super::spectral::SpectralGrid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    d: usize,
    n: usize,
    comp_shape: Vec<usize>,
    data: Vec<f64>,
}

impl GridField {
    pub fn zeros(d: usize, n: usize, comp_shape: &[usize]) -> Self {
        let comp_len: usize = comp_shape.iter().product::<usize>().max(1);
        GridField {
            d,
            n,
            comp_shape: comp_shape.to_vec(),
            data: vec![0.0; comp_len * n.pow(d as u32)],
        }
    }

    pub fn from_parts(d: usize, n: usize, comp_shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let comp_len: usize = comp_shape.iter().product::<usize>().max(1);
        if data.len() != comp_len * n.pow(d as u32) {
            return Err(Error::Usage(format!(
                "field data length {} does not match {} components on a {}^{} grid",
                data.len(),
                comp_len,
                n,
                d
            )));
        }
        Ok(GridField {
            d,
            n,
            comp_shape,
            data,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grid_len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn comp_shape(&self) -> &[usize] {
        &self.comp_shape
    }

    pub fn comp_len(&self) -> usize {
        self.comp_shape.iter().product::<usize>().max(1)
    }

    pub fn grid(&self) -> Result<SpectralGrid> {
        SpectralGrid::new(self.d, self.n)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn comp_flat_index(&self, comp: &[usize]) -> usize {
        debug_assert_eq!(comp.len(), self.comp_shape.len());
        comp.iter()
            .zip(&self.comp_shape)
            .fold(0, |acc, (&c, &s)| {
                debug_assert!(c < s);
                acc * s + c
            })
    }

    /// One tensor component as a contiguous grid block.
    pub fn comp(&self, comp: &[usize]) -> &[f64] {
        self.comp_by_flat(self.comp_flat_index(comp))
    }

    pub fn comp_mut(&mut self, comp: &[usize]) -> &mut [f64] {
        let idx = self.comp_flat_index(comp);
        self.comp_by_flat_mut(idx)
    }

    pub fn comp_by_flat(&self, comp_flat: usize) -> &[f64] {
        let g = self.grid_len();
        &self.data[comp_flat * g..(comp_flat + 1) * g]
    }

    pub fn comp_by_flat_mut(&mut self, comp_flat: usize) -> &mut [f64] {
        let g = self.grid_len();
        &mut self.data[comp_flat * g..(comp_flat + 1) * g]
    }

    pub fn value_at(&self, comp: &[usize], grid_flat: usize) -> f64 {
        self.comp(comp)[grid_flat]
    }

    /// Cell average per component (the grid sum is the exact torus integral
    /// for band-limited integrands).
    pub fn mean(&self) -> Vec<f64> {
        let g = self.grid_len() as f64;
        (0..self.comp_len())
            .map(|c| self.comp_by_flat(c).iter().sum::<f64>() / g)
            .collect()
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn axpy(&mut self, a: f64, other: &GridField) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Discrete L² norm: sqrt(mean over grid, summed over components).
    pub fn l2_norm(&self) -> f64 {
        let g = self.grid_len() as f64;
        (self.data.iter().map(|v| v * v).sum::<f64>() / g).sqrt()
    }
}

/// Spectral gradient: appends one trailing index of length d with
/// out[comp, l] = ∂ field[comp] / ∂θ_l.
pub fn gradient(grid: &SpectralGrid, field: &GridField) -> Result<GridField> {
    if grid.d() != field.d() || grid.n() != field.n() {
        return Err(Error::Usage(
            "gradient: grid and field dimensions disagree".into(),
        ));
    }
    let d = field.d();
    let mut shape = field.comp_shape().to_vec();
    shape.push(d);
    let mut out = GridField::zeros(d, field.n(), &shape);
    let mut coeffs = vec![num_complex::Complex64::default(); grid.len()];
    let mut dcoeffs = vec![num_complex::Complex64::default(); grid.len()];
    for c in 0..field.comp_len() {
        grid.forward(field.comp_by_flat(c), &mut coeffs);
        for axis in 0..d {
            dcoeffs.copy_from_slice(&coeffs);
            grid.differentiate(&mut dcoeffs, axis);
            let block = out.comp_by_flat_mut(c * d + axis);
            let im = grid.inverse_real(&dcoeffs, block);
            debug_assert!(im < 1e-10, "gradient produced imaginary part {im}");
        }
    }
    Ok(out)
}
