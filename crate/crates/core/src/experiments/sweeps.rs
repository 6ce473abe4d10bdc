//! Continuity sweeps: measure how fast the homogenized boundary data and the
//! lifted boundary traces move when the normal moves, pair by pair, and fit
//! the log-log modulus. The continuity estimates predict a Lipschitz modulus
//! (slope 1) with a constant degrading like κ̂^{-σ}, so pairs are kept inside
//! one κ̂ band and the κ̂ dependence is fitted separately.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{CellData, DirichletKernel, NeumannKernel};
use crate::error::{Error, Result};
use crate::fields::GridField;
use crate::geometry::{build_frame, kappa, DiophantineReport};
use crate::krylov::GmresConfig;
use crate::layers::{Discretization, GradedMesh, NormalQuality};
use crate::stats::{fit_line, LineFit};

/// Differences at or below this floor count as exact collapse, not as data
/// points for the log-log fits (they would otherwise contribute log of
/// rounding noise).
pub const DEGENERATE_FLOOR: f64 = 1e-11;

/// Graded-mesh template instantiated per normal. Depth is tied to the
/// Diophantine quality: the layer flattens at scale 1/κ̂, and the certified
/// depth is 10/max(κ̂, 0.1) times a safety margin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshSpec {
    /// First time step.
    pub h0: f64,
    /// Geometric growth factor of successive steps.
    pub ratio: f64,
    /// Step-size cap.
    pub cap: f64,
    /// Multiplier on the minimum certified depth.
    pub depth_margin: f64,
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec {
            h0: 0.02,
            ratio: 1.04,
            cap: 0.25,
            depth_margin: 1.05,
        }
    }
}

impl MeshSpec {
    /// Build the discretization for one normal. `kappa_ref` sets the depth
    /// (pass the κ̂-band floor to give every member of a sweep the identical
    /// mesh, or the normal's own κ̂ for standalone solves); the report's
    /// quality is attached so the solver can enforce its hypotheses.
    pub fn discretization(
        &self,
        resolution: usize,
        gmres: &GmresConfig,
        report: &DiophantineReport,
        kappa_ref: f64,
    ) -> Result<Discretization> {
        let t_max = self.depth_margin * 10.0 / kappa_ref.max(0.1);
        let mut disc = Discretization::new(resolution, t_max)?;
        disc.mesh = GradedMesh::geometric(self.h0, self.ratio, self.cap, t_max)?;
        disc.gmres = gmres.clone();
        disc.quality = Some(NormalQuality::from(report));
        Ok(disc)
    }
}

/// Where the normal pairs of a sweep come from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum PairSource {
    /// Perturb each base normal along random great circles and re-filter by
    /// κ̂, so both members of an accepted pair land in the configured band.
    GreatCircles { base_normals: Vec<Vec<f64>> },
    /// Explicit pair list; members detected as rational are skipped with a
    /// recorded reason, everything else is accepted as given.
    Explicit { pairs: Vec<[Vec<f64>; 2]> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub source: PairSource,
    /// Target separations |n₁ − n₂|, each in (0, 0.3].
    pub deltas: Vec<f64>,
    /// Pairs to accept per base normal and separation.
    pub pairs_per_delta: usize,
    /// κ̂ acceptance band [lo, hi] for generated pairs; also sets the shared
    /// mesh depth through its floor.
    pub kappa_band: [f64; 2],
    /// Lattice cutoff for the κ̂ screen.
    pub cutoff: i64,
    /// θ-resolution per axis.
    pub resolution: usize,
    pub mesh: MeshSpec,
    pub gmres: GmresConfig,
    /// Seed of the pair generator; identical configs replay identical pairs.
    pub seed: u64,
    /// Gate for the fitted log-log slopes. The continuity estimates predict
    /// slope 1; the default 0.9 is a conservative under-estimate.
    pub slope_gate: f64,
    /// Exponents σ for which empirical constants max diff·κ^σ/|Δn| are
    /// reported.
    pub sigmas: Vec<f64>,
}

impl SweepConfig {
    /// Sweep around a handful of base normals with the standard separations.
    pub fn around(base_normals: Vec<Vec<f64>>, kappa_band: [f64; 2], cutoff: i64) -> Self {
        SweepConfig {
            source: PairSource::GreatCircles { base_normals },
            deltas: vec![1e-1, 3e-2, 1e-2],
            pairs_per_delta: 4,
            kappa_band,
            cutoff,
            resolution: 32,
            mesh: MeshSpec::default(),
            gmres: GmresConfig::default(),
            seed: 1,
            slope_gate: 0.9,
            sigmas: vec![0.5],
        }
    }

    fn validate(&self) -> Result<()> {
        if self.deltas.is_empty() {
            return Err(Error::config("deltas", "need at least one separation"));
        }
        for &d in &self.deltas {
            if !(d > 0.0 && d <= 0.3) {
                return Err(Error::config(
                    "deltas",
                    format!("separations must lie in (0, 0.3], got {d}"),
                ));
            }
        }
        if !(self.kappa_band[0] > 0.0 && self.kappa_band[1] >= self.kappa_band[0]) {
            return Err(Error::config(
                "kappa_band",
                format!(
                    "band must satisfy 0 < lo <= hi, got [{}, {}]",
                    self.kappa_band[0], self.kappa_band[1]
                ),
            ));
        }
        if self.pairs_per_delta == 0 {
            return Err(Error::config("pairs_per_delta", "must be at least 1"));
        }
        Ok(())
    }
}

/// Which difference a record measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DifferenceKind {
    /// L²_θ norm of the difference of lifted boundary traces (∂_tV(·,0) for
    /// Dirichlet, ∇_θU(·,0) for Neumann), aggregated over the solve family.
    Trace,
    /// Euclidean distance between the homogenized data values.
    Data,
}

/// One measured difference for one normal pair. Every pair yields two
/// records, a trace record and a data record, sharing geometry and runtime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRecord {
    pub n1: Vec<f64>,
    pub n2: Vec<f64>,
    /// |n₁ − n₂|.
    pub separation: f64,
    /// max(κ̂(n₁), κ̂(n₂)): the continuity constants degrade with the better
    /// of the two qualities.
    pub kappa: f64,
    pub kind: DifferenceKind,
    pub difference: f64,
    pub trusted: bool,
    /// Wall-clock seconds spent on the pair (both kernel builds). Volatile
    /// across reruns, so the deterministic CSV omits it.
    pub runtime: f64,
}

/// Log-log fit of difference against separation for one record kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    /// None when every difference sits at the collapse floor; the slope is
    /// then reported as zero.
    pub fit: Option<LineFit>,
    /// True on total collapse (all differences ≤ the floor).
    pub degenerate: bool,
    /// Records entering the fit.
    pub used: usize,
    /// Records dropped for sitting at or below the floor.
    pub floored: usize,
    /// fit slope ≥ gate; None while degenerate.
    pub passes_gate: Option<bool>,
}

impl FitReport {
    /// Slope with the degenerate collapse reported as exactly zero.
    pub fn slope(&self) -> f64 {
        self.fit.map(|f| f.slope).unwrap_or(0.0)
    }
}

/// Empirical constant sup |diff|·κ^σ/|Δn| at one exponent σ.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SigmaConstant {
    pub sigma: f64,
    pub c_hat: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    /// Two records per accepted pair, trace first, in planning order.
    pub records: Vec<ContinuityRecord>,
    /// Reasons for pairs or bases that were skipped.
    pub skipped: Vec<String>,
    pub trace_fit: FitReport,
    pub data_fit: FitReport,
    pub trace_constants: Vec<SigmaConstant>,
    pub data_constants: Vec<SigmaConstant>,
    pub slope_gate: f64,
}

enum Family {
    Dirichlet,
    Neumann,
}

/// Dirichlet continuity sweep: for each accepted pair, records the L²_θ
/// difference of the corrector-data boundary traces ∂_tV(·,0) and the
/// difference |f̄₁ − f̄₂| of the homogenized data for `f_slice`.
pub fn continuity_sweep_dirichlet(
    cell: &CellData,
    cfg: &SweepConfig,
    f_slice: &GridField,
) -> Result<SweepReport> {
    sweep(cell, cfg, f_slice, Family::Dirichlet)
}

/// Neumann continuity sweep: trace records measure the L²_θ difference of
/// the flux-data boundary gradients ∇_θU(·,0), data records |ḡ₁ − ḡ₂| for
/// `g_slice`.
pub fn continuity_sweep_neumann(
    cell: &CellData,
    cfg: &SweepConfig,
    g_slice: &GridField,
) -> Result<SweepReport> {
    sweep(cell, cfg, g_slice, Family::Neumann)
}

fn sweep(
    cell: &CellData,
    cfg: &SweepConfig,
    data_slice: &GridField,
    family: Family,
) -> Result<SweepReport> {
    cfg.validate()?;
    let (pairs, skipped) = plan_pairs(cfg)?;
    let kappa_floor = cfg.kappa_band[0];

    let computed: Result<Vec<[ContinuityRecord; 2]>> = pairs
        .par_iter()
        .map(|p| pair_records(cell, cfg, data_slice, &family, p, kappa_floor))
        .collect();
    let mut records = Vec::with_capacity(2 * pairs.len());
    for pair in computed? {
        let [trace, data] = pair;
        records.push(trace);
        records.push(data);
    }

    let trace_fit = fit_records(&records, DifferenceKind::Trace, cfg.slope_gate);
    let data_fit = fit_records(&records, DifferenceKind::Data, cfg.slope_gate);
    let trace_constants = sigma_constants(&records, DifferenceKind::Trace, &cfg.sigmas);
    let data_constants = sigma_constants(&records, DifferenceKind::Data, &cfg.sigmas);
    Ok(SweepReport {
        records,
        skipped,
        trace_fit,
        data_fit,
        trace_constants,
        data_constants,
        slope_gate: cfg.slope_gate,
    })
}

struct PlannedPair {
    n1: Vec<f64>,
    n2: Vec<f64>,
    r1: DiophantineReport,
    r2: DiophantineReport,
}

/// Deterministic pair generation. Candidates are drawn sequentially from a
/// seeded stream, so identical configs replay identical pair lists; the
/// parallelism lives in the solves afterwards.
fn plan_pairs(cfg: &SweepConfig) -> Result<(Vec<PlannedPair>, Vec<String>)> {
    let [lo, hi] = cfg.kappa_band;
    let mut pairs = Vec::new();
    let mut skipped = Vec::new();
    match &cfg.source {
        PairSource::GreatCircles { base_normals } => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            for (bi, base) in base_normals.iter().enumerate() {
                let b = unit(base)?;
                let rb = kappa(&b, cfg.cutoff)?;
                if rb.rational_detected {
                    skipped.push(format!(
                        "base normal #{bi} is rational at cutoff {} (minimizer {:?}); skipped",
                        cfg.cutoff, rb.minimizer
                    ));
                    continue;
                }
                for &delta in &cfg.deltas {
                    let psi = 2.0 * (delta / 2.0).asin();
                    let mut accepted = 0usize;
                    let mut attempts = 0usize;
                    let budget = 200 * cfg.pairs_per_delta;
                    while accepted < cfg.pairs_per_delta && attempts < budget {
                        attempts += 1;
                        let tau = random_tangent(&mut rng, &b);
                        let s = rng.gen_range(-0.15..0.15f64);
                        let n1 = circle_point(&b, &tau, s);
                        let n2 = circle_point(&b, &tau, s + psi);
                        let r1 = kappa(&n1, cfg.cutoff)?;
                        if r1.rational_detected || r1.kappa_hat < lo || r1.kappa_hat > hi {
                            continue;
                        }
                        let r2 = kappa(&n2, cfg.cutoff)?;
                        if r2.rational_detected || r2.kappa_hat < lo || r2.kappa_hat > hi {
                            continue;
                        }
                        pairs.push(PlannedPair { n1, n2, r1, r2 });
                        accepted += 1;
                    }
                    if accepted < cfg.pairs_per_delta {
                        skipped.push(format!(
                            "base #{bi}, separation {delta}: found {accepted} of {} pairs \
                             inside the κ̂ band [{lo}, {hi}] in {attempts} attempts",
                            cfg.pairs_per_delta
                        ));
                    }
                }
            }
        }
        PairSource::Explicit { pairs: list } => {
            for (pi, [a, b]) in list.iter().enumerate() {
                let n1 = unit(a)?;
                let n2 = unit(b)?;
                let r1 = kappa(&n1, cfg.cutoff)?;
                let r2 = kappa(&n2, cfg.cutoff)?;
                if r1.rational_detected || r2.rational_detected {
                    skipped.push(format!(
                        "pair #{pi}: member detected as rational at cutoff {}; skipped",
                        cfg.cutoff
                    ));
                    continue;
                }
                pairs.push(PlannedPair { n1, n2, r1, r2 });
            }
        }
    }
    Ok((pairs, skipped))
}

fn pair_records(
    cell: &CellData,
    cfg: &SweepConfig,
    data_slice: &GridField,
    family: &Family,
    p: &PlannedPair,
    kappa_floor: f64,
) -> Result<[ContinuityRecord; 2]> {
    let start = Instant::now();
    // One shared depth per sweep, set by the band floor (explicit pairs fall
    // back to the pair's own worst quality): both members then see the
    // identical mesh and the difference isolates the moving operator.
    let depth_kappa = kappa_floor.min(p.r1.kappa_hat).min(p.r2.kappa_hat);
    let frame1 = build_frame(&p.n1)?;
    let frame2 = build_frame(&p.n2)?;
    let disc1 = cfg
        .mesh
        .discretization(cfg.resolution, &cfg.gmres, &p.r1, depth_kappa)?;
    let disc2 = cfg
        .mesh
        .discretization(cfg.resolution, &cfg.gmres, &p.r2, depth_kappa)?;

    let (trace_diff, data_diff, trusted) = match family {
        Family::Dirichlet => {
            let k1 = DirichletKernel::new(cell, &frame1, &disc1)?;
            let k2 = DirichletKernel::new(cell, &frame2, &disc2)?;
            let trace = k1.trace_distance(&k2)?;
            let data = euclid(&k1.apply(data_slice)?, &k2.apply(data_slice)?);
            (trace, data, k1.trusted && k2.trusted)
        }
        Family::Neumann => {
            let k1 = NeumannKernel::new(cell, &frame1, &disc1)?;
            let k2 = NeumannKernel::new(cell, &frame2, &disc2)?;
            let trace = k1.trace_distance(&k2)?;
            let data = euclid(&k1.apply(data_slice)?, &k2.apply(data_slice)?);
            (trace, data, k1.trusted && k2.trusted)
        }
    };
    let runtime = start.elapsed().as_secs_f64();

    // Canonical member order makes the record literally symmetric in the
    // input pair.
    let ((n1, k1), (n2, k2)) = if lex_le(&p.n1, &p.n2) {
        ((&p.n1, p.r1.kappa_hat), (&p.n2, p.r2.kappa_hat))
    } else {
        ((&p.n2, p.r2.kappa_hat), (&p.n1, p.r1.kappa_hat))
    };
    let separation = {
        let mut s = 0.0;
        for (a, b) in n1.iter().zip(n2) {
            s += (a - b) * (a - b);
        }
        s.sqrt()
    };
    let base = ContinuityRecord {
        n1: n1.clone(),
        n2: n2.clone(),
        separation,
        kappa: k1.max(k2),
        kind: DifferenceKind::Trace,
        difference: trace_diff,
        trusted,
        runtime,
    };
    let mut data_record = base.clone();
    data_record.kind = DifferenceKind::Data;
    data_record.difference = data_diff;
    Ok([base, data_record])
}

fn fit_records(records: &[ContinuityRecord], kind: DifferenceKind, gate: f64) -> FitReport {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut floored = 0usize;
    for r in records.iter().filter(|r| r.kind == kind) {
        if r.difference <= DEGENERATE_FLOOR || r.separation <= 0.0 {
            floored += 1;
            continue;
        }
        xs.push(r.separation.ln());
        ys.push(r.difference.ln());
    }
    if xs.is_empty() {
        return FitReport {
            fit: None,
            degenerate: true,
            used: 0,
            floored,
            passes_gate: None,
        };
    }
    let fit = fit_line(&xs, &ys);
    FitReport {
        degenerate: false,
        used: xs.len(),
        floored,
        passes_gate: fit.map(|f| f.slope >= gate),
        fit,
    }
}

fn sigma_constants(
    records: &[ContinuityRecord],
    kind: DifferenceKind,
    sigmas: &[f64],
) -> Vec<SigmaConstant> {
    sigmas
        .iter()
        .map(|&sigma| {
            let c_hat = records
                .iter()
                .filter(|r| r.kind == kind && r.separation > 0.0)
                .map(|r| r.difference * r.kappa.powf(sigma) / r.separation)
                .fold(0.0f64, f64::max);
            SigmaConstant { sigma, c_hat }
        })
        .collect()
}

fn unit(v: &[f64]) -> Result<Vec<f64>> {
    let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(len > 0.0) || !len.is_finite() {
        return Err(Error::config("normal", "normals must be nonzero and finite"));
    }
    Ok(v.iter().map(|x| x / len).collect())
}

fn lex_le(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    true
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Random unit tangent at `b`: rejection-sampled from the cube, projected
/// onto the tangent plane. For d = 2 there is only one tangent line, so the
/// draw only picks its sign (the great circle is the whole circle).
fn random_tangent(rng: &mut ChaCha8Rng, b: &[f64]) -> Vec<f64> {
    let d = b.len();
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
        let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
        let mut t: Vec<f64> = v.iter().zip(b).map(|(x, y)| x - dot * y).collect();
        let len = t.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-3 {
            t.iter_mut().for_each(|x| *x /= len);
            return t;
        }
    }
}

fn circle_point(b: &[f64], tau: &[f64], angle: f64) -> Vec<f64> {
    let (c, s) = (angle.cos(), angle.sin());
    let mut p: Vec<f64> = b.iter().zip(tau).map(|(x, y)| c * x + s * y).collect();
    let len = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    p.iter_mut().for_each(|x| *x /= len);
    p
}
