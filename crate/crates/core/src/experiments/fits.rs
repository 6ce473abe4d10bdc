//! Surface-level fits: the empirical Hölder exponent of the boundary layer
//! tail map over a convex surface, weighted L^p summaries of its tangential
//! gradients, the κ̂-weighted constant regression, and quadrature stability
//! checks for ∫ κ̂^{-q} dσ.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{CellData, DirichletKernel};
use crate::error::{Error, Result};
use crate::fields::GridField;
use crate::geometry::{
    build_frame, kappa, kappa_statistics, sample_boundary, ConvexSurface, KappaStatistics,
};
use crate::krylov::GmresConfig;
use crate::stats::{fit_line, weighted_lp_norm, LineFit};

use super::sweeps::{ContinuityRecord, MeshSpec, DEGENERATE_FLOOR};

/// Pairwise differences at or below this are treated as exact equality; when
/// every pair sits here the exponent is reported as exact instead of fitted.
pub const EXACT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolderConfig {
    pub surface: ConvexSurface,
    /// Boundary samples to draw.
    pub sample_count: usize,
    /// Lattice cutoff for the per-sample κ̂ screen.
    pub cutoff: i64,
    /// θ-resolution per axis.
    pub resolution: usize,
    pub mesh: MeshSpec,
    pub gmres: GmresConfig,
    /// Abort when fewer trusted samples survive.
    pub min_samples: usize,
    /// Pairs beyond this normal separation are ignored.
    pub max_separation: f64,
    /// Log-spaced bins for the upper envelope.
    pub envelope_bins: usize,
    /// Gate for the fitted exponent; the regularity theory gives every
    /// exponent below 1, so the default 0.8 is a conservative under-estimate.
    pub alpha_gate: f64,
}

impl HolderConfig {
    pub fn new(surface: ConvexSurface, sample_count: usize, cutoff: i64) -> Self {
        HolderConfig {
            surface,
            sample_count,
            cutoff,
            resolution: 32,
            mesh: MeshSpec::default(),
            gmres: GmresConfig::default(),
            min_samples: 50,
            max_separation: 0.2,
            envelope_bins: 12,
            alpha_gate: 0.8,
        }
    }
}

/// Homogenized data evaluated at one surface sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceValue {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
    pub kappa_hat: f64,
    /// Share of the surface measure carried by the sample.
    pub weight: f64,
    pub value: Vec<f64>,
    pub trusted: bool,
}

/// One upper-envelope point: the worst pair inside a separation bin.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub separation: f64,
    pub difference: f64,
}

/// Weighted empirical L^p summary of the tangential gradient magnitudes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LpSummary {
    pub p: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolderReport {
    /// Every evaluated sample, untrusted ones flagged.
    pub points: Vec<SurfaceValue>,
    pub trusted_count: usize,
    pub skipped: Vec<String>,
    /// Pairs within the separation window.
    pub pair_count: usize,
    /// True when every pairwise difference is ≤ the exactness tolerance
    /// (coefficient collapse): the map is constant to working precision and
    /// no finite exponent is fitted.
    pub exact: bool,
    pub alpha_hat: Option<f64>,
    pub envelope: Vec<EnvelopePoint>,
    pub envelope_fit: Option<LineFit>,
    pub gradient_lp: Vec<LpSummary>,
    pub alpha_gate: f64,
    pub passes_gate: bool,
}

/// Evaluate the homogenized Dirichlet data of `f_slice` over a surface sample
/// and fit the upper-envelope Hölder exponent of its normal dependence. Also
/// reports weighted L^p summaries (p ∈ {2, 4, 8}) of discrete tangential
/// gradients, the desk-scale stand-in for first-order Sobolev control.
pub fn holder_fit(
    cell: &CellData,
    cfg: &HolderConfig,
    f_slice: &GridField,
) -> Result<HolderReport> {
    if cfg.min_samples < 2 {
        return Err(Error::config("min_samples", "need at least 2"));
    }
    if !(cfg.max_separation > 0.0) {
        return Err(Error::config("max_separation", "must be positive"));
    }
    let samples = sample_boundary(&cfg.surface, cfg.sample_count)?;

    let evaluated: Vec<std::result::Result<SurfaceValue, String>> = samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let r = kappa(&s.normal, cfg.cutoff).map_err(|e| format!("sample #{i}: {e}"))?;
            if r.rational_detected {
                return Err(format!(
                    "sample #{i}: normal detected as rational at cutoff {} (minimizer {:?})",
                    cfg.cutoff, r.minimizer
                ));
            }
            let run = || -> Result<SurfaceValue> {
                let frame = build_frame(&s.normal)?;
                let disc =
                    cfg.mesh
                        .discretization(cfg.resolution, &cfg.gmres, &r, r.kappa_hat)?;
                let kernel = DirichletKernel::new(cell, &frame, &disc)?;
                Ok(SurfaceValue {
                    point: s.point.clone(),
                    normal: kernel.normal.clone(),
                    kappa_hat: r.kappa_hat,
                    weight: s.weight,
                    value: kernel.apply(f_slice)?,
                    trusted: kernel.trusted,
                })
            };
            run().map_err(|e| format!("sample #{i}: {e}"))
        })
        .collect();

    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for item in evaluated {
        match item {
            Ok(v) => points.push(v),
            Err(reason) => skipped.push(reason),
        }
    }
    let trusted: Vec<&SurfaceValue> = points.iter().filter(|p| p.trusted).collect();
    if trusted.len() < cfg.min_samples {
        return Err(Error::Usage(format!(
            "only {} trusted samples out of {} requested survive the κ̂ and \
             tail checks; the Hölder fit needs at least {}",
            trusted.len(),
            cfg.sample_count,
            cfg.min_samples
        )));
    }
    let trusted_count = trusted.len();

    // All pairwise differences within the separation window.
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for i in 0..trusted.len() {
        for j in (i + 1)..trusted.len() {
            let sep = euclid(&trusted[i].normal, &trusted[j].normal);
            if sep > 0.0 && sep <= cfg.max_separation {
                pairs.push((sep, euclid(&trusted[i].value, &trusted[j].value)));
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::Usage(
            "no sample pairs fall within the separation window; enlarge the \
             sample or the window"
                .into(),
        ));
    }
    let pair_count = pairs.len();

    let gradient_lp = gradient_lp_summaries(&trusted)?;

    let exact = pairs.iter().all(|&(_, diff)| diff <= EXACT_TOL);
    if exact {
        drop(trusted);
        return Ok(HolderReport {
            points,
            trusted_count,
            skipped,
            pair_count,
            exact: true,
            alpha_hat: None,
            envelope: Vec::new(),
            envelope_fit: None,
            gradient_lp,
            alpha_gate: cfg.alpha_gate,
            passes_gate: true,
        });
    }

    // Upper envelope on log-spaced separation bins: Hölder bounds constrain
    // the worst pair, not the average, so each bin contributes its maximum.
    let smin = pairs
        .iter()
        .map(|&(s, _)| s)
        .fold(f64::INFINITY, f64::min);
    let smax = cfg.max_separation;
    let bins = cfg.envelope_bins.max(2);
    let log_lo = smin.ln();
    let log_w = (smax.ln() - log_lo).max(f64::MIN_POSITIVE);
    let mut best: Vec<Option<(f64, f64)>> = vec![None; bins];
    for &(sep, diff) in &pairs {
        if diff <= DEGENERATE_FLOOR {
            continue;
        }
        let pos = ((sep.ln() - log_lo) / log_w * bins as f64).floor() as usize;
        let b = pos.min(bins - 1);
        if best[b].map(|(_, d)| diff > d).unwrap_or(true) {
            best[b] = Some((sep, diff));
        }
    }
    let envelope: Vec<EnvelopePoint> = best
        .into_iter()
        .flatten()
        .map(|(separation, difference)| EnvelopePoint {
            separation,
            difference,
        })
        .collect();
    if envelope.len() < 2 {
        return Err(Error::Usage(format!(
            "the upper envelope has {} nonempty separation bins; at least 2 \
             are needed to fit an exponent",
            envelope.len()
        )));
    }
    let xs: Vec<f64> = envelope.iter().map(|e| e.separation.ln()).collect();
    let ys: Vec<f64> = envelope.iter().map(|e| e.difference.ln()).collect();
    let fit = fit_line(&xs, &ys);
    let alpha_hat = fit.map(|f| f.slope);
    drop(trusted);
    Ok(HolderReport {
        points,
        trusted_count,
        skipped,
        pair_count,
        exact: false,
        alpha_hat,
        envelope,
        envelope_fit: fit,
        gradient_lp,
        alpha_gate: cfg.alpha_gate,
        passes_gate: alpha_hat.map(|a| a >= cfg.alpha_gate).unwrap_or(false),
    })
}

/// Discrete tangential gradient magnitudes over the trusted samples and
/// their weighted L^p summaries for p ∈ {2, 4, 8}. Each sample fits a local
/// affine model of the data on its nearest neighbors, restricted to the
/// tangent plane of its normal.
fn gradient_lp_summaries(trusted: &[&SurfaceValue]) -> Result<Vec<LpSummary>> {
    let n = trusted.len();
    let d = trusted[0].point.len();
    let m = trusted[0].value.len();
    let neighbors = if d == 2 { 4 } else { 8 };
    if n <= neighbors {
        return Err(Error::Usage(format!(
            "{n} trusted samples cannot support {neighbors}-neighbor \
             tangential gradients"
        )));
    }
    let mut magnitudes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut dist: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (euclid(&trusted[i].point, &trusted[j].point), j))
            .collect();
        dist.sort_by(|a, b| a.partial_cmp(b).unwrap());
        dist.truncate(neighbors);

        let frame = build_frame(&trusted[i].normal)?;
        let q = d - 1;
        // Model Δv ≈ G u + c per component over tangential coordinates u.
        let rows = dist.len();
        let cols = q + 1;
        let mut a = nalgebra::DMatrix::<f64>::zeros(rows, cols);
        let mut rhs = nalgebra::DMatrix::<f64>::zeros(rows, m);
        for (row, &(_, j)) in dist.iter().enumerate() {
            let dx: Vec<f64> = trusted[j]
                .point
                .iter()
                .zip(&trusted[i].point)
                .map(|(a, b)| a - b)
                .collect();
            for t in 0..q {
                let tangent = frame.tangent(t);
                a[(row, t)] = dx.iter().zip(&tangent).map(|(x, y)| x * y).sum();
            }
            a[(row, q)] = 1.0;
            for c in 0..m {
                rhs[(row, c)] = trusted[j].value[c] - trusted[i].value[c];
            }
        }
        let at = a.transpose();
        let gram = &at * &a;
        let sol = gram
            .lu()
            .solve(&(&at * &rhs))
            .ok_or_else(|| Error::Usage("degenerate neighbor configuration".into()))?;
        let mut mag2 = 0.0;
        for t in 0..q {
            for c in 0..m {
                mag2 += sol[(t, c)] * sol[(t, c)];
            }
        }
        magnitudes.push(mag2.sqrt());
        weights.push(trusted[i].weight);
    }
    Ok([2.0, 4.0, 8.0]
        .iter()
        .map(|&p| LpSummary {
            p,
            value: weighted_lp_norm(&magnitudes, &weights, p),
        })
        .collect())
}

/// κ̂-weighted constant regression over continuity records:
/// log(diff / |Δn|) against log κ̂, slope −σ̂ and intercept log Ĉ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KappaFit {
    pub sigma_hat: Option<f64>,
    pub c_hat: Option<f64>,
    pub fit: Option<LineFit>,
    /// Per-record residuals of the fit, in record order over the used
    /// records.
    pub residuals: Vec<f64>,
    /// Decades of κ̂ spanned by the usable records.
    pub spread_decades: f64,
    pub used: usize,
    /// True when the fit was withheld; `reason` says why.
    pub suppressed: bool,
    pub reason: Option<String>,
}

/// Minimum κ̂ spread (in decades) for the constant regression to mean
/// anything; below it the fit is suppressed and flagged.
pub const MIN_KAPPA_DECADES: f64 = 1.5;

pub fn kappa_weighted_fit(records: &[ContinuityRecord]) -> KappaFit {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in records {
        if r.difference > DEGENERATE_FLOOR && r.separation > 0.0 && r.kappa > 0.0 {
            xs.push(r.kappa.ln());
            ys.push((r.difference / r.separation).ln());
        }
    }
    let suppress = |spread: f64, used: usize, reason: String| KappaFit {
        sigma_hat: None,
        c_hat: None,
        fit: None,
        residuals: Vec::new(),
        spread_decades: spread,
        used,
        suppressed: true,
        reason: Some(reason),
    };
    if xs.len() < 2 {
        return suppress(
            0.0,
            xs.len(),
            format!("{} usable records; at least 2 are needed", xs.len()),
        );
    }
    let spread = (xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - xs.iter().cloned().fold(f64::INFINITY, f64::min))
        / std::f64::consts::LN_10;
    if spread < MIN_KAPPA_DECADES {
        return suppress(
            spread,
            xs.len(),
            format!(
                "records span {spread:.2} decades of κ̂; at least \
                 {MIN_KAPPA_DECADES} are needed for the constant regression"
            ),
        );
    }
    match fit_line(&xs, &ys) {
        Some(fit) => {
            let residuals = xs
                .iter()
                .zip(&ys)
                .map(|(&x, &y)| y - (fit.intercept + fit.slope * x))
                .collect();
            KappaFit {
                sigma_hat: Some(-fit.slope),
                c_hat: Some(fit.intercept.exp()),
                fit: Some(fit),
                residuals,
                spread_decades: spread,
                used: xs.len(),
                suppressed: false,
                reason: None,
            }
        }
        None => suppress(spread, xs.len(), "degenerate regression inputs".into()),
    }
}

/// Stability report for the quadrature of ∫ κ̂^{-q} dσ under sample and
/// cutoff doubling.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegrabilityReport {
    pub q: f64,
    pub base: KappaStatistics,
    pub doubled_samples: KappaStatistics,
    pub doubled_cutoff: KappaStatistics,
    /// |doubled − base| / base for the two refinements.
    pub sample_change: f64,
    pub cutoff_change: f64,
    pub tolerance: f64,
    pub stable: bool,
}

/// Quadrature of κ̂^{-q} over the surface at the base resolution, then with
/// the sample count doubled and with the lattice cutoff doubled. A finite
/// integral shows up as small relative movement under both refinements.
pub fn integrability_stability(
    surface: &ConvexSurface,
    count: usize,
    cutoff: i64,
    q: f64,
    tolerance: f64,
) -> Result<IntegrabilityReport> {
    let base = kappa_statistics(surface, count, cutoff, q)?;
    let doubled_samples = kappa_statistics(surface, 2 * count, cutoff, q)?;
    let doubled_cutoff = kappa_statistics(surface, count, 2 * cutoff, q)?;
    if !(base.value.is_finite() && base.value > 0.0) {
        return Err(Error::Consistency(format!(
            "base quadrature value {} is not a positive finite number",
            base.value
        )));
    }
    let sample_change = (doubled_samples.value - base.value).abs() / base.value;
    let cutoff_change = (doubled_cutoff.value - base.value).abs() / base.value;
    let stable = sample_change <= tolerance && cutoff_change <= tolerance;
    Ok(IntegrabilityReport {
        q,
        base,
        doubled_samples,
        doubled_cutoff,
        sample_change,
        cutoff_change,
        tolerance,
        stable,
    })
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
