//! Curated coefficient tensors, boundary data fields, and reference normals
//! shared by the experiments, the self-test suite, and the CLI. Everything
//! here is a finite trig polynomial with hand-checked ellipticity, so presets
//! satisfy every smoothness hypothesis exactly and have reproducible hashes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{tensor_index, GridField, SpectralGrid, TrigTensor, TWO_PI};
use crate::geometry::{kappa, DiophantineReport};

/// Amplitude of the laminate oscillation 1 + r·cos(2πθ₁).
pub const LAMINATE_AMPLITUDE: f64 = 0.5;

/// Harmonic mean of 1 + r·cos over one period: √(1 − r²). This is the exact
/// effective coefficient along the lamination axis.
pub fn laminate_harmonic_mean() -> f64 {
    (1.0 - LAMINATE_AMPLITUDE * LAMINATE_AMPLITUDE).sqrt()
}

/// κ̂ of the normal ∝ (1, √2) at any lattice cutoff ≥ 1: the minimizing
/// vector is ξ = (1, 1), giving 2(√2 − 1)/√3.
pub const GOLDEN_KAPPA_2D: f64 = 0.47829262347620055;

/// Unit normal proportional to (1, √2): badly approximable slope, so its κ̂
/// stays pinned at [`GOLDEN_KAPPA_2D`] as the cutoff grows.
pub fn golden_normal_2d() -> Vec<f64> {
    let s3 = 3f64.sqrt();
    vec![1.0 / s3, 2f64.sqrt() / s3]
}

/// Unit normal proportional to (1, 2^{1/3}, 2^{2/3}); the coordinates span a
/// cubic number field, which keeps simultaneous rational approximation poor.
pub fn cubic_normal_3d() -> Vec<f64> {
    let v = [1.0, 2f64.powf(1.0 / 3.0), 2f64.powf(2.0 / 3.0)];
    let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / len).collect()
}

fn scalar_entry(d: usize, k: Vec<i64>, value: Complex64) -> (Vec<i64>, Vec<Complex64>) {
    let mut t = vec![Complex64::default(); d * d];
    for i in 0..d {
        t[tensor_index(d, 1, i, i, 0, 0)] = value;
    }
    (k, t)
}

/// Scalar laminate on d = 2: a(θ) = (1 + 0.5·cos 2πθ₁)·δ_{ij}. The effective
/// tensor is diag(harmonic mean, arithmetic mean) = diag(√3/2, 1).
pub fn laminate() -> TrigTensor {
    let r = LAMINATE_AMPLITUDE;
    TrigTensor::new(
        2,
        1,
        0.4,
        vec![
            scalar_entry(2, vec![0, 0], Complex64::new(1.0, 0.0)),
            scalar_entry(2, vec![1, 0], Complex64::new(r / 2.0, 0.0)),
        ],
    )
    .expect("laminate preset is valid")
}

/// Scalar laminate whose pointwise values are the truncated reciprocal of
/// [`laminate`]: the degree-8 Fourier truncation of 1/(1 + 0.5·cos 2πθ₁).
/// Its effective tensor leans the other way (harmonic mean above 1).
pub fn laminate_reciprocal() -> TrigTensor {
    let r = LAMINATE_AMPLITUDE;
    let root = (1.0 - r * r).sqrt();
    let beta = (1.0 - root) / r;
    let mut entries = vec![scalar_entry(2, vec![0, 0], Complex64::new(1.0 / root, 0.0))];
    for k in 1..=8i64 {
        let c = (-beta).powi(k as i32) / root;
        entries.push(scalar_entry(2, vec![k, 0], Complex64::new(c, 0.0)));
    }
    TrigTensor::new(2, 1, 0.4, entries).expect("reciprocal laminate preset is valid")
}

/// Scalar d = 2 coefficient oscillating in both axes with a symmetric
/// off-diagonal part; the workhorse variable preset.
pub fn mix2() -> TrigTensor {
    let diag = |v: f64| scalar_entry(2, vec![0, 0], Complex64::new(v, 0.0));
    let mut entries = vec![diag(1.0)];
    // δ_{ij}·(0.3 cos 2πθ₁ + 0.2 cos 2π(θ₁+θ₂))
    entries.push(scalar_entry(2, vec![1, 0], Complex64::new(0.15, 0.0)));
    entries.push(scalar_entry(2, vec![1, 1], Complex64::new(0.10, 0.0)));
    // symmetric off-diagonal 0.15 cos 2πθ₂ on a₁₂ = a₂₁
    let mut off = vec![Complex64::default(); 4];
    off[tensor_index(2, 1, 0, 1, 0, 0)] = Complex64::new(0.075, 0.0);
    off[tensor_index(2, 1, 1, 0, 0, 0)] = Complex64::new(0.075, 0.0);
    entries.push((vec![0, 1], off));
    TrigTensor::new(2, 1, 0.3, entries).expect("mix2 preset is valid")
}

/// Scalar d = 2 anisotropic coefficient: independent oscillations on the two
/// diagonal entries with different mean stiffness.
pub fn aniso2() -> TrigTensor {
    let mut mean = vec![Complex64::default(); 4];
    mean[tensor_index(2, 1, 0, 0, 0, 0)] = Complex64::new(2.0, 0.0);
    mean[tensor_index(2, 1, 1, 1, 0, 0)] = Complex64::new(1.0, 0.0);
    let mut osc_a = vec![Complex64::default(); 4];
    osc_a[tensor_index(2, 1, 0, 0, 0, 0)] = Complex64::new(0.5, 0.0);
    let mut osc_b = vec![Complex64::default(); 4];
    osc_b[tensor_index(2, 1, 1, 1, 0, 0)] = Complex64::new(0.25, 0.0);
    TrigTensor::new(
        2,
        1,
        0.25,
        vec![(vec![0, 0], mean), (vec![0, 1], osc_a), (vec![1, 0], osc_b)],
    )
    .expect("aniso2 preset is valid")
}

/// Non-self-adjoint m = 2 system on d = 2: constant coupling matrix
/// Q = [[2, 0.3], [−0.1, 1]] times δ_{ij}, plus scalar oscillations on the
/// diagonal blocks.
pub fn sys2() -> TrigTensor {
    let q = [[2.0, 0.3], [-0.1, 1.0]];
    let mut mean = vec![Complex64::default(); 16];
    for i in 0..2 {
        for (alpha, row) in q.iter().enumerate() {
            for (beta, &v) in row.iter().enumerate() {
                mean[tensor_index(2, 2, i, i, alpha, beta)] = Complex64::new(v, 0.0);
            }
        }
    }
    let mut osc_a = vec![Complex64::default(); 16];
    let mut osc_b = vec![Complex64::default(); 16];
    for i in 0..2 {
        osc_a[tensor_index(2, 2, i, i, 0, 0)] = Complex64::new(0.075, 0.0);
        osc_b[tensor_index(2, 2, i, i, 1, 1)] = Complex64::new(0.05, 0.0);
    }
    TrigTensor::new(
        2,
        2,
        0.4,
        vec![(vec![0, 0], mean), (vec![1, 0], osc_a), (vec![1, 1], osc_b)],
    )
    .expect("sys2 preset is valid")
}

/// Scalar d = 3 coefficient with oscillations along one axis and one mixed
/// direction.
pub fn mix3() -> TrigTensor {
    TrigTensor::new(
        3,
        1,
        0.4,
        vec![
            scalar_entry(3, vec![0, 0, 0], Complex64::new(1.0, 0.0)),
            scalar_entry(3, vec![1, 0, 0], Complex64::new(0.125, 0.0)),
            scalar_entry(3, vec![0, 1, 1], Complex64::new(0.1, 0.0)),
        ],
    )
    .expect("mix3 preset is valid")
}

/// Coefficient preset by name; the error lists the catalogue.
pub fn coefficient_preset(name: &str) -> Result<TrigTensor> {
    match name {
        "identity2" => Ok(TrigTensor::identity(2, 1)),
        "identity3" => Ok(TrigTensor::identity(3, 1)),
        "identity2-sys" => Ok(TrigTensor::identity(2, 2)),
        "laminate" => Ok(laminate()),
        "laminate-reciprocal" => Ok(laminate_reciprocal()),
        "mix2" => Ok(mix2()),
        "aniso2" => Ok(aniso2()),
        "sys2" => Ok(sys2()),
        "mix3" => Ok(mix3()),
        other => Err(Error::config(
            "coefficient",
            format!(
                "unknown coefficient preset `{other}`; available: identity2, \
                 identity3, identity2-sys, laminate, laminate-reciprocal, \
                 mix2, aniso2, sys2, mix3"
            ),
        )),
    }
}

/// Smooth nonconstant Dirichlet data slice f(θ), component order (ν):
/// f^ν(θ) = cos(2πθ·k₁ + 0.2ν) + 0.5·sin(2πθ·k₂ − 0.3ν) with k₁ = e₁ and
/// k₂ = (1, …, 1).
pub fn trig_dirichlet_slice(d: usize, m: usize, resolution: usize) -> Result<GridField> {
    let grid = SpectralGrid::new(d, resolution)?;
    let mut field = GridField::zeros(d, resolution, &[m]);
    let mut theta = vec![0.0; d];
    for nu in 0..m {
        let comp = field.comp_mut(&[nu]);
        for (flat, v) in comp.iter_mut().enumerate() {
            grid.theta(flat, &mut theta);
            let k1 = theta[0];
            let k2: f64 = theta.iter().sum();
            *v = (TWO_PI * k1 + 0.2 * nu as f64).cos()
                + 0.5 * (TWO_PI * k2 - 0.3 * nu as f64).sin();
        }
    }
    Ok(field)
}

/// Constant Dirichlet data slice f^ν ≡ 0.7 + 0.1ν.
pub fn constant_dirichlet_slice(d: usize, m: usize, resolution: usize) -> Result<GridField> {
    let mut field = GridField::zeros(d, resolution, &[m]);
    for nu in 0..m {
        field.comp_mut(&[nu]).fill(0.7 + 0.1 * nu as f64);
    }
    Ok(field)
}

/// Dirichlet data preset by name: `constant`, `trig`, or `zero`.
pub fn dirichlet_slice(name: &str, d: usize, m: usize, resolution: usize) -> Result<GridField> {
    match name {
        "constant" => constant_dirichlet_slice(d, m, resolution),
        "trig" => trig_dirichlet_slice(d, m, resolution),
        "zero" => Ok(GridField::zeros(d, resolution, &[m])),
        other => Err(Error::config(
            "data",
            format!("unknown Dirichlet data preset `{other}`; available: constant, trig, zero"),
        )),
    }
}

/// Smooth nonconstant Neumann data slice g(θ), component order (ℓ, r, ν):
/// g^ν_{ℓr}(θ) = c_{ℓrν}·(1 + 0.6·cos(2πθ·k + φ_{ℓrν})) with k = (1, …, 1).
pub fn trig_neumann_slice(d: usize, m: usize, resolution: usize) -> Result<GridField> {
    let grid = SpectralGrid::new(d, resolution)?;
    let mut field = GridField::zeros(d, resolution, &[d, d, m]);
    let mut theta = vec![0.0; d];
    for l in 0..d {
        for r in 0..d {
            for nu in 0..m {
                let c = 0.4 + 0.15 * l as f64 - 0.1 * r as f64 + 0.05 * nu as f64;
                let phase = 0.3 * (l + 2 * r + 3 * nu) as f64;
                let comp = field.comp_mut(&[l, r, nu]);
                for (flat, v) in comp.iter_mut().enumerate() {
                    grid.theta(flat, &mut theta);
                    let s: f64 = theta.iter().sum();
                    *v = c * (1.0 + 0.6 * (TWO_PI * s + phase).cos());
                }
            }
        }
    }
    Ok(field)
}

/// Constant Neumann data slice g^ν_{ℓr} ≡ 0.4 + 0.15ℓ − 0.1r + 0.05ν.
pub fn constant_neumann_slice(d: usize, m: usize, resolution: usize) -> Result<GridField> {
    let mut field = GridField::zeros(d, resolution, &[d, d, m]);
    for l in 0..d {
        for r in 0..d {
            for nu in 0..m {
                field
                    .comp_mut(&[l, r, nu])
                    .fill(0.4 + 0.15 * l as f64 - 0.1 * r as f64 + 0.05 * nu as f64);
            }
        }
    }
    Ok(field)
}

/// Neumann data preset by name: `constant`, `trig`, or `zero`.
pub fn neumann_slice(name: &str, d: usize, m: usize, resolution: usize) -> Result<GridField> {
    match name {
        "constant" => constant_neumann_slice(d, m, resolution),
        "trig" => trig_neumann_slice(d, m, resolution),
        "zero" => Ok(GridField::zeros(d, resolution, &[d, d, m])),
        other => Err(Error::config(
            "data",
            format!("unknown Neumann data preset `{other}`; available: constant, trig, zero"),
        )),
    }
}

/// Normal preset by name; the error lists the catalogue.
pub fn normal_preset(name: &str) -> Result<Vec<f64>> {
    match name {
        "golden2" => Ok(golden_normal_2d()),
        "cubic3" => Ok(cubic_normal_3d()),
        "axis2" => Ok(vec![0.0, 1.0]),
        "axis3" => Ok(vec![0.0, 0.0, 1.0]),
        other => Err(Error::config(
            "normal",
            format!("unknown normal preset `{other}`; available: golden2, cubic3, axis2, axis3"),
        )),
    }
}

/// Deterministic scan for a unit normal whose κ̂ at `cutoff` lands inside
/// [lo, hi]. d = 2 walks golden-angle points on the circle; d = 3 walks a
/// Fibonacci sphere. Useful for assembling normals that span a κ̂ range.
pub fn scan_normal_with_kappa(
    d: usize,
    lo: f64,
    hi: f64,
    cutoff: i64,
    max_attempts: usize,
) -> Result<(Vec<f64>, DiophantineReport)> {
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::config("kappa range", "need 0 < lo <= hi"));
    }
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    for k in 0..max_attempts {
        let n: Vec<f64> = match d {
            2 => {
                let phi = TWO_PI * (((k as f64 + 0.5) * golden) % 1.0) / 7.3;
                vec![phi.cos(), phi.sin()]
            }
            3 => {
                let z = 1.0 - 2.0 * ((k as f64 + 0.5) / max_attempts as f64);
                let r = (1.0 - z * z).max(0.0).sqrt();
                let az = TWO_PI * (k as f64 + 0.5) / golden;
                vec![r * az.cos(), r * az.sin(), z]
            }
            _ => {
                return Err(Error::config(
                    "d",
                    "normal scanning is implemented for d in {2, 3}",
                ))
            }
        };
        let report = kappa(&n, cutoff)?;
        if !report.rational_detected && report.kappa_hat >= lo && report.kappa_hat <= hi {
            return Ok((report.normal.clone(), report));
        }
    }
    Err(Error::Usage(format!(
        "no normal with κ̂ in [{lo}, {hi}] at cutoff {cutoff} found in \
         {max_attempts} attempts"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::check_ellipticity;

    #[test]
    fn golden_normal_kappa_is_frozen() {
        let r = kappa(&golden_normal_2d(), 512).unwrap();
        assert!(!r.rational_detected);
        assert!(
            (r.kappa_hat - GOLDEN_KAPPA_2D).abs() < 1e-12,
            "kappa_hat = {:.17}",
            r.kappa_hat
        );
        assert_eq!(r.minimizer, vec![1, 1]);
    }

    #[test]
    fn reciprocal_laminate_tracks_the_true_reciprocal() {
        let a = laminate().sample(64).unwrap();
        let b = laminate_reciprocal().sample(64).unwrap();
        let ac = a.comp(&[0, 0, 0, 0]);
        let bc = b.comp(&[0, 0, 0, 0]);
        let worst = ac
            .iter()
            .zip(bc)
            .map(|(x, y)| (x * y - 1.0).abs())
            .fold(0.0f64, f64::max);
        // Degree-8 truncation of a geometric Fourier tail with ratio ~0.268.
        assert!(worst < 1e-4, "pointwise reciprocal defect {worst:.3e}");
    }

    #[test]
    fn all_presets_are_elliptic() {
        for name in [
            "identity2",
            "identity3",
            "identity2-sys",
            "laminate",
            "laminate-reciprocal",
            "mix2",
            "aniso2",
            "sys2",
            "mix3",
        ] {
            let t = coefficient_preset(name).unwrap();
            let res = if t.d() == 3 { 16 } else { 32 };
            let scan = check_ellipticity(&t.sample(res).unwrap(), t.lambda()).unwrap();
            assert!(
                scan.pass,
                "{name}: eigenvalue range [{}, {}] vs declared {}",
                scan.lambda_min_observed,
                scan.lambda_max_observed,
                t.lambda()
            );
        }
        assert!(coefficient_preset("nope").is_err());
    }

    #[test]
    fn scan_finds_the_requested_kappa_band() {
        let (n, r) = scan_normal_with_kappa(2, 0.05, 0.5, 128, 4000).unwrap();
        assert!(r.kappa_hat >= 0.05 && r.kappa_hat <= 0.5);
        let len: f64 = n.iter().map(|x| x * x).sum::<f64>();
        assert!((len - 1.0).abs() < 1e-12);
    }

    #[test]
    fn data_presets_have_the_right_shapes() {
        let f = dirichlet_slice("trig", 2, 2, 16).unwrap();
        assert_eq!(f.comp_len(), 2);
        let g = neumann_slice("trig", 3, 1, 8).unwrap();
        assert_eq!(g.comp_len(), 9);
        let c = dirichlet_slice("constant", 2, 1, 8).unwrap();
        assert!(c.comp(&[0]).iter().all(|&v| (v - 0.7).abs() < 1e-15));
        assert!(dirichlet_slice("nope", 2, 1, 8).is_err());
        assert!(neumann_slice("nope", 2, 1, 8).is_err());
    }
}
