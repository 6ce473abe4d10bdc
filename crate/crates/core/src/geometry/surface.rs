//! Quasi-uniform samples of origin-centered ellipsoids with outward normals
//! and surface-measure quadrature weights, plus κ statistics over a surface.
//!
//! Supported boundary class: smooth, bounded, strictly convex — realized here
//! as ellipsoids Σ x_i²/a_i² = 1 for d ∈ {2, 3}. Samples carry half-step
//! parameter offsets so generic configurations avoid exactly rational normals
//! such as the coordinate axes; rational hits are still detected and reported.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::diophantine::{kappa, DiophantineReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvexSurface {
    /// Ellipsoid semi-axes, one per dimension, all positive.
    pub semi_axes: Vec<f64>,
}

impl ConvexSurface {
    pub fn sphere(d: usize, radius: f64) -> Self {
        ConvexSurface {
            semi_axes: vec![radius; d],
        }
    }

    pub fn d(&self) -> usize {
        self.semi_axes.len()
    }

    fn validate(&self) -> Result<()> {
        let d = self.d();
        if d != 2 && d != 3 {
            return Err(Error::config(
                "surface.semi_axes",
                format!("ellipsoid sampling is implemented for d in {{2, 3}}, got d = {d}"),
            ));
        }
        if self.semi_axes.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::config(
                "surface.semi_axes",
                "all semi-axes must be positive",
            ));
        }
        Ok(())
    }

    /// Outward unit normal at a surface point: gradient of Σ x_i²/a_i².
    pub fn normal_at(&self, x: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = x
            .iter()
            .zip(&self.semi_axes)
            .map(|(&xi, &ai)| xi / (ai * ai))
            .collect();
        let len = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        g.iter_mut().for_each(|v| *v /= len);
        g
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceSample {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
    /// Quadrature weight: the sample's share of the surface measure.
    pub weight: f64,
}

/// Deterministic quasi-uniform boundary sample.
///
/// d = 2: uniform parameter angles with arc-length weights (midpoint rule,
/// spectrally accurate for smooth integrands on the closed curve).
/// d = 3: Fibonacci sphere mapped to the ellipsoid with the exact area
/// element a₁a₂a₃·|(u₁/a₁, u₂/a₂, u₃/a₃)| of the map u ↦ (a_i u_i).
pub fn sample_boundary(surface: &ConvexSurface, count: usize) -> Result<Vec<SurfaceSample>> {
    surface.validate()?;
    if count < 2 {
        return Err(Error::config("count", "need at least two samples"));
    }
    let axes = &surface.semi_axes;
    let mut out = Vec::with_capacity(count);
    match surface.d() {
        2 => {
            let (a, b) = (axes[0], axes[1]);
            let step = std::f64::consts::TAU / count as f64;
            for i in 0..count {
                let phi = (i as f64 + 0.5) * step;
                let x = vec![a * phi.cos(), b * phi.sin()];
                let speed = ((a * phi.sin()).powi(2) + (b * phi.cos()).powi(2)).sqrt();
                out.push(SurfaceSample {
                    normal: surface.normal_at(&x),
                    point: x,
                    weight: speed * step,
                });
            }
        }
        3 => {
            let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
            let sphere_w = 4.0 * std::f64::consts::PI / count as f64;
            for i in 0..count {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let az = std::f64::consts::TAU * (i as f64 + 0.5) / golden;
                let u = [r * az.cos(), r * az.sin(), z];
                let x: Vec<f64> = u.iter().zip(axes).map(|(&ui, &ai)| ai * ui).collect();
                let stretch: f64 = u
                    .iter()
                    .zip(axes)
                    .map(|(&ui, &ai)| (ui / ai) * (ui / ai))
                    .sum::<f64>()
                    .sqrt()
                    * axes.iter().product::<f64>();
                out.push(SurfaceSample {
                    normal: surface.normal_at(&x),
                    point: x,
                    weight: stretch * sphere_w,
                });
            }
        }
        _ => unreachable!(),
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KappaStatistics {
    pub count: usize,
    pub cutoff: i64,
    pub q: f64,
    /// Σ w · κ̂(n)^{-q} over non-rational samples (for q = 0 this is the
    /// total area including rational hits, since κ⁰ := 1).
    pub value: f64,
    /// Σ w over all samples: the surface area estimate.
    pub area: f64,
    pub rational_hits: usize,
    /// Smallest κ̂ seen over the non-rational samples.
    pub kappa_min: f64,
}

/// Quadrature of κ̂(n(x))^{-q} over the boundary.
pub fn kappa_statistics(
    surface: &ConvexSurface,
    count: usize,
    cutoff: i64,
    q: f64,
) -> Result<KappaStatistics> {
    let samples = sample_boundary(surface, count)?;
    let reports: Vec<DiophantineReport> = samples
        .par_iter()
        .map(|s| kappa(&s.normal, cutoff))
        .collect::<Result<Vec<_>>>()?;

    let mut value = 0.0;
    let mut area = 0.0;
    let mut hits = 0usize;
    let mut kappa_min = f64::INFINITY;
    for (s, r) in samples.iter().zip(&reports) {
        area += s.weight;
        if r.rational_detected {
            hits += 1;
            if q == 0.0 {
                value += s.weight;
            }
            continue;
        }
        kappa_min = kappa_min.min(r.kappa_hat);
        value += s.weight * r.kappa_hat.powf(-q);
    }
    Ok(KappaStatistics {
        count,
        cutoff,
        q,
        value,
        area,
        rational_hits: hits,
        kappa_min,
    })
}
