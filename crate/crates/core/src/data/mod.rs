//! Homogenized boundary data: the explicit kernels that turn oscillating
//! Dirichlet or Neumann data into the effective data of the limit problem,
//! plus the standalone boundary layer tail map.

pub mod cell_data;
pub mod dirichlet;
pub mod neumann;
pub mod sample;

pub use cell_data::CellData;
pub use dirichlet::{dirichlet_data, DirichletKernel};
pub use neumann::{neumann_data, NeumannKernel};
pub use sample::{tail_map, BoundaryDataSample, Provenance};

use crate::error::{Error, Result};
use crate::fields::GridField;

/// L²(T^d) distance between two trace fields, aggregated in ℓ² over their
/// component families: sqrt(Σ_comp ∫ |a − b|² dθ) with unit torus measure.
pub(crate) fn trace_l2_distance(a: &GridField, b: &GridField) -> Result<f64> {
    if a.d() != b.d() || a.n() != b.n() || a.comp_len() != b.comp_len() {
        return Err(Error::Usage(
            "trace fields live on different grids; rebuild both kernels with \
             the same resolution"
                .into(),
        ));
    }
    let g = a.grid_len() as f64;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum();
    Ok((sum / g).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{homogenized_tensor, solve_correctors};
    use crate::error::Error;
    use crate::fields::{tensor_index, GridField, SpectralGrid, TrigTensor, TWO_PI};
    use crate::geometry::{build_frame, kappa, Frame};
    use crate::layers::{Discretization, GradedMesh, LayerKind, NormalQuality};
    use num_complex::Complex64;

    /// Normal proportional to (1, √2): badly approximable, so kappa_hat is
    /// comfortably positive at a small lattice cutoff.
    fn golden_normal() -> Vec<f64> {
        let s3 = 3f64.sqrt();
        vec![1.0 / s3, 2f64.sqrt() / s3]
    }

    /// Frame plus a quality-certified discretization deep enough for the
    /// normal, with a custom graded mesh.
    fn certified_disc(
        normal: &[f64],
        resolution: usize,
        h0: f64,
        ratio: f64,
    ) -> (Frame, Discretization) {
        let report = kappa(normal, 512).unwrap();
        let frame = build_frame(normal).unwrap();
        let t_max = 1.05 * 10.0 / report.kappa_hat.max(0.1);
        let mut disc = Discretization::new(resolution, t_max).unwrap();
        disc.mesh = GradedMesh::geometric(h0, ratio, 0.25, t_max).unwrap();
        disc.quality = Some(NormalQuality::from(&report));
        (frame, disc)
    }

    /// Scalar laminate a(θ) = 1 + 0.5 cos(2πθ_1) times the identity in (i, j).
    fn laminate() -> TrigTensor {
        let eye = |v: f64| {
            let mut t = vec![Complex64::default(); 4];
            t[tensor_index(2, 1, 0, 0, 0, 0)] = Complex64::new(v, 0.0);
            t[tensor_index(2, 1, 1, 1, 0, 0)] = Complex64::new(v, 0.0);
            t
        };
        TrigTensor::new(
            2,
            1,
            0.5,
            vec![(vec![0, 0], eye(1.0)), (vec![1, 0], eye(0.25))],
        )
        .unwrap()
    }

    /// Scalar d = 2 tensor with a variable skew part, so the adjoint genuinely
    /// differs from the original.
    fn skew_scalar() -> TrigTensor {
        let d = 2;
        let m = 1;
        let idx = |i, j| tensor_index(d, m, i, j, 0, 0);
        let mut mean = vec![Complex64::default(); 4];
        mean[idx(0, 0)] = Complex64::new(2.0, 0.0);
        mean[idx(1, 1)] = Complex64::new(1.5, 0.0);
        mean[idx(0, 1)] = Complex64::new(0.2, 0.0);
        mean[idx(1, 0)] = Complex64::new(-0.1, 0.0);
        // cos(2πθ_1) on the diagonal, cos(2π(θ_1+θ_2)) on a_{01} only.
        let mut first = vec![Complex64::default(); 4];
        first[idx(0, 0)] = Complex64::new(0.3, 0.0);
        let mut mixed = vec![Complex64::default(); 4];
        mixed[idx(0, 1)] = Complex64::new(0.075, 0.0);
        TrigTensor::new(
            d,
            m,
            0.5,
            vec![
                (vec![0, 0], mean),
                (vec![1, 0], first),
                (vec![1, 1], mixed),
            ],
        )
        .unwrap()
    }

    /// Constant d = 2, m = 2 system a_{ij}^{αβ} = δ_{ij} Q^{αβ} with a
    /// nonsymmetric Q, the sharpest probe of index orientation.
    fn constant_system() -> TrigTensor {
        let d = 2;
        let m = 2;
        let q = [[2.0, 0.3], [-0.1, 1.0]];
        let mut mean = vec![Complex64::default(); d * d * m * m];
        for i in 0..d {
            for a in 0..m {
                for b in 0..m {
                    mean[tensor_index(d, m, i, i, a, b)] = Complex64::new(q[a][b], 0.0);
                }
            }
        }
        TrigTensor::new(d, m, 0.5, vec![(vec![0, 0], mean)]).unwrap()
    }

    /// Variable nonsymmetric m = 2 system: constant_system plus a small
    /// oscillation on the (0,0) diagonal block.
    fn variable_system() -> TrigTensor {
        let d = 2;
        let m = 2;
        let q = [[2.0, 0.3], [-0.1, 1.0]];
        let mut mean = vec![Complex64::default(); d * d * m * m];
        for i in 0..d {
            for a in 0..m {
                for b in 0..m {
                    mean[tensor_index(d, m, i, i, a, b)] = Complex64::new(q[a][b], 0.0);
                }
            }
        }
        let mut osc = vec![Complex64::default(); d * d * m * m];
        for i in 0..d {
            osc[tensor_index(d, m, i, i, 0, 0)] = Complex64::new(0.15, 0.0);
            osc[tensor_index(d, m, i, i, 1, 1)] = Complex64::new(0.1, 0.0);
        }
        TrigTensor::new(d, m, 0.4, vec![(vec![0, 0], mean), (vec![1, 0], osc)]).unwrap()
    }

    /// Scalar field c0 + Σ amp_k cos(2π k·θ) with one component.
    fn oscillating_scalar(n: usize, c0: f64, modes: &[(i64, i64, f64)]) -> GridField {
        let grid = SpectralGrid::new(2, n).unwrap();
        let mut f = GridField::zeros(2, n, &[1]);
        let mut theta = vec![0.0; 2];
        for p in 0..grid.len() {
            grid.theta(p, &mut theta);
            let mut v = c0;
            for &(k1, k2, amp) in modes {
                v += amp * (TWO_PI * (k1 as f64 * theta[0] + k2 as f64 * theta[1])).cos();
            }
            f.comp_mut(&[0])[p] = v;
        }
        f
    }

    fn prepare(tensor: &TrigTensor, resolution: usize) -> CellData {
        CellData::prepare(tensor, resolution, &Default::default()).unwrap()
    }

    #[test]
    fn identity_coefficients_collapse_the_dirichlet_formula() {
        let tensor = TrigTensor::identity(2, 1);
        let cell = prepare(&tensor, 32);
        let (frame, disc) = certified_disc(&golden_normal(), 32, 0.02, 1.05);
        let kernel = DirichletKernel::new(&cell, &frame, &disc).unwrap();

        let dev = kernel
            .kernel()
            .comp(&[0, 0])
            .iter()
            .map(|v| (v - 1.0).abs())
            .fold(0.0f64, f64::max);
        assert!(dev < 1e-8, "identity kernel should be 1, max dev {dev:.2e}");

        let f = oscillating_scalar(32, 0.3, &[(1, 0, 1.0), (1, 1, 0.25)]);
        let fbar = kernel.apply(&f).unwrap();
        assert!(
            (fbar[0] - 0.3).abs() < 1e-8,
            "identity coefficients must average the data, got {}",
            fbar[0]
        );

        let zero = GridField::zeros(2, 32, &[1]);
        assert_eq!(kernel.apply(&zero).unwrap(), vec![0.0]);

        let sample = kernel.sample(&[0.2, 0.7], &f).unwrap();
        assert_eq!(sample.kind, LayerKind::Dirichlet);
        assert_eq!(sample.trusted, kernel.trusted);
        assert_eq!(sample.value, fbar);
        assert!(sample.kappa_hat > 0.0);
    }

    #[test]
    fn constant_nonsymmetric_systems_average_the_dirichlet_data() {
        let tensor = constant_system();
        let cell = prepare(&tensor, 16);
        let (frame, disc) = certified_disc(&golden_normal(), 16, 0.02, 1.05);
        let kernel = DirichletKernel::new(&cell, &frame, &disc).unwrap();

        // For constant coefficients the kernel must reduce to δ^{αν}; any
        // transposed inverse in the front factor breaks this for
        // nonsymmetric Q at order one.
        for alpha in 0..2 {
            for nu in 0..2 {
                let want = if alpha == nu { 1.0 } else { 0.0 };
                let dev = kernel
                    .kernel()
                    .comp(&[alpha, nu])
                    .iter()
                    .map(|v| (v - want).abs())
                    .fold(0.0f64, f64::max);
                assert!(
                    dev < 1e-8,
                    "kernel component ({alpha}, {nu}) should be {want}, max dev {dev:.2e}"
                );
            }
        }

        let mut f = GridField::zeros(2, 16, &[2]);
        let f0 = oscillating_scalar(16, -0.2, &[(1, 0, 0.8)]);
        let f1 = oscillating_scalar(16, 0.9, &[(0, 1, 0.5)]);
        f.comp_mut(&[0]).copy_from_slice(f0.comp(&[0]));
        f.comp_mut(&[1]).copy_from_slice(f1.comp(&[0]));
        let fbar = kernel.apply(&f).unwrap();
        assert!((fbar[0] + 0.2).abs() < 1e-8);
        assert!((fbar[1] - 0.9).abs() < 1e-8);
    }

    #[test]
    fn identity_coefficients_collapse_the_neumann_formula() {
        let tensor = TrigTensor::identity(2, 1);
        let cell = prepare(&tensor, 32);
        let (frame, disc) = certified_disc(&golden_normal(), 32, 0.02, 1.05);
        let kernel = NeumannKernel::new(&cell, &frame, &disc).unwrap();
        let n = frame.normal().to_vec();

        // g_{ℓr} slices with distinct exact means.
        let means = [[0.3, 1.0], [-0.5, 2.0]];
        let mut g = GridField::zeros(2, 32, &[2, 2, 1]);
        for l in 0..2 {
            for r in 0..2 {
                let slice = oscillating_scalar(32, means[l][r], &[(1, 1, 0.4)]);
                g.comp_mut(&[l, r, 0]).copy_from_slice(slice.comp(&[0]));
            }
        }
        let got = kernel.apply(&g).unwrap();
        for j in 0..2 {
            for k in 0..2 {
                let mut want = 0.0;
                for l in 0..2 {
                    for r in 0..2 {
                        let t_lr_k =
                            n[l] * if r == k { 1.0 } else { 0.0 } - n[r] * if l == k { 1.0 } else { 0.0 };
                        want += n[j] * t_lr_k * means[l][r];
                    }
                }
                let have = got[j * 2 + k];
                assert!(
                    (have - want).abs() < 1e-8,
                    "entry (j = {j}, k = {k}): got {have}, want {want}"
                );
            }
        }

        let zero = GridField::zeros(2, 32, &[2, 2, 1]);
        assert_eq!(kernel.apply(&zero).unwrap(), vec![0.0; 4]);

        let sample = kernel.sample(&[0.1, 0.4], &g).unwrap();
        assert_eq!(sample.kind, LayerKind::Neumann);
        assert_eq!(sample.value.len(), 4);
    }

    #[test]
    fn neumann_front_contracts_to_the_identity_along_the_normal() {
        let tensor = variable_system();
        let cell = prepare(&tensor, 32);
        let (frame, disc) = certified_disc(&golden_normal(), 32, 0.03, 1.05);
        let kernel = NeumannKernel::new(&cell, &frame, &disc).unwrap();
        let n = frame.normal();
        let m = 2;
        for gamma in 0..m {
            for beta in 0..m {
                let mut acc = 0.0;
                for j in 0..2 {
                    acc += n[j] * kernel.front[(j * m + gamma) * m + beta];
                }
                let want = if gamma == beta { 1.0 } else { 0.0 };
                assert!(
                    (acc - want).abs() < 1e-9,
                    "n_j c_j^({gamma},{beta}) = {acc}, want {want}"
                );
            }
        }
    }

    #[test]
    fn constant_coefficients_leave_only_the_mean_term_in_the_neumann_direction() {
        let tensor = constant_system();
        let cell = prepare(&tensor, 16);
        let (frame, disc) = certified_disc(&golden_normal(), 16, 0.02, 1.05);
        let kernel = NeumannKernel::new(&cell, &frame, &disc).unwrap();
        for k in 0..2 {
            for beta in 0..2 {
                for nu in 0..2 {
                    for l in 0..2 {
                        let want = if nu == beta && l == k { 1.0 } else { 0.0 };
                        let dev = kernel
                            .direction()
                            .comp(&[k, beta, nu, l])
                            .iter()
                            .map(|v| (v - want).abs())
                            .fold(0.0f64, f64::max);
                        assert!(
                            dev < 1e-9,
                            "direction ({k},{beta},{nu},{l}) should be constant {want}, dev {dev:.2e}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn homogenized_data_is_linear_in_the_boundary_data() {
        let tensor = laminate();
        let cell = prepare(&tensor, 32);
        let (frame, disc) = certified_disc(&golden_normal(), 32, 0.02, 1.05);

        let dk = DirichletKernel::new(&cell, &frame, &disc).unwrap();
        let f1 = oscillating_scalar(32, 0.4, &[(1, 0, 0.7)]);
        let f2 = oscillating_scalar(32, -0.1, &[(0, 1, 0.3), (2, 1, 0.2)]);
        let mut combo = f1.clone();
        combo.scale(2.0);
        combo.axpy(-3.0, &f2);
        let a = dk.apply(&f1).unwrap();
        let b = dk.apply(&f2).unwrap();
        let c = dk.apply(&combo).unwrap();
        assert!((c[0] - (2.0 * a[0] - 3.0 * b[0])).abs() < 1e-10);

        // Boundedness against the kernel L¹ norm.
        let l1 = dk.l1_norm();
        assert!(l1.is_finite() && l1 > 0.0);
        assert!(a[0].abs() <= l1 * f1.max_abs() + 1e-12);

        let nk = NeumannKernel::new(&cell, &frame, &disc).unwrap();
        let mut g1 = GridField::zeros(2, 32, &[2, 2, 1]);
        let mut g2 = GridField::zeros(2, 32, &[2, 2, 1]);
        for l in 0..2 {
            for r in 0..2 {
                let s1 = oscillating_scalar(32, 0.2 * (l as f64 - r as f64), &[(1, 0, 0.5)]);
                let s2 = oscillating_scalar(32, 0.1 + r as f64, &[(1, 1, 0.3)]);
                g1.comp_mut(&[l, r, 0]).copy_from_slice(s1.comp(&[0]));
                g2.comp_mut(&[l, r, 0]).copy_from_slice(s2.comp(&[0]));
            }
        }
        let mut gcombo = g1.clone();
        gcombo.scale(2.0);
        gcombo.axpy(-3.0, &g2);
        let ga = nk.apply(&g1).unwrap();
        let gb = nk.apply(&g2).unwrap();
        let gc = nk.apply(&gcombo).unwrap();
        for i in 0..gc.len() {
            assert!((gc[i] - (2.0 * ga[i] - 3.0 * gb[i])).abs() < 1e-10);
        }
        let gl1 = nk.l1_norm();
        assert!(gl1.is_finite() && gl1 > 0.0);
        let gmax = ga.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        assert!(gmax <= gl1 * g1.max_abs() + 1e-12);
    }

    #[test]
    fn constant_dirichlet_data_reproduces_itself() {
        // Scalar laminate on a fine mesh: tight tolerance.
        let tensor = laminate();
        let cell = prepare(&tensor, 32);
        let (frame, disc) = certified_disc(&golden_normal(), 32, 0.002, 1.01);
        let kernel = DirichletKernel::new(&cell, &frame, &disc).unwrap();
        let mut f = GridField::zeros(2, 32, &[1]);
        f.comp_mut(&[0]).fill(0.8);
        let fbar = kernel.apply(&f).unwrap();
        assert!(
            (fbar[0] - 0.8).abs() < 1e-5,
            "non-oscillating data must homogenize to itself, got {} (dev {:.2e})",
            fbar[0],
            (fbar[0] - 0.8).abs()
        );

        // Variable nonsymmetric system on a default mesh: the identity still
        // pins the index orientation, which breaks at order one if wrong.
        let tensor = variable_system();
        let cell = prepare(&tensor, 32);
        let (frame, disc) = certified_disc(&golden_normal(), 32, 0.03, 1.05);
        let kernel = DirichletKernel::new(&cell, &frame, &disc).unwrap();
        let mut f = GridField::zeros(2, 32, &[2]);
        f.comp_mut(&[0]).fill(0.6);
        f.comp_mut(&[1]).fill(-1.1);
        let fbar = kernel.apply(&f).unwrap();
        assert!(
            (fbar[0] - 0.6).abs() < 2e-3 && (fbar[1] + 1.1).abs() < 2e-3,
            "got ({}, {}), want (0.6, -1.1)",
            fbar[0],
            fbar[1]
        );
    }

    #[test]
    fn dirichlet_formula_matches_the_boundary_layer_tail() {
        // The formula assembles the tail of the plain lifted Dirichlet
        // problem from adjoint ingredients; compare against the tail computed
        // directly. The skew part makes adjoint and plain genuinely differ.
        let tensor = skew_scalar();
        let cell = prepare(&tensor, 32);
        let normal = golden_normal();
        let (frame, disc) = certified_disc(&normal, 32, 0.005, 1.02);
        let kernel = DirichletKernel::new(&cell, &frame, &disc).unwrap();

        let f = oscillating_scalar(32, 0.4, &[(1, 0, -0.3), (0, 1, 0.2)]);
        let fbar = kernel.apply(&f).unwrap();

        let tail = tail_map(&tensor, &normal, &f, &disc).unwrap();
        assert!(tail.trusted);
        assert!(
            (fbar[0] - tail.value[0]).abs() < 5e-4,
            "formula {} vs direct tail {} (dev {:.2e})",
            fbar[0],
            tail.value[0],
            (fbar[0] - tail.value[0]).abs()
        );
    }

    #[test]
    fn tail_map_averages_data_for_constant_coefficients() {
        let d = 2;
        let idx = |i, j| tensor_index(d, 1, i, j, 0, 0);
        let mut mean = vec![Complex64::default(); 4];
        mean[idx(0, 0)] = Complex64::new(2.0, 0.0);
        mean[idx(1, 1)] = Complex64::new(1.0, 0.0);
        let tensor = TrigTensor::new(d, 1, 1.0, vec![(vec![0, 0], mean)]).unwrap();
        let normal = golden_normal();
        let (_, disc) = certified_disc(&normal, 32, 0.02, 1.05);
        let phi = oscillating_scalar(32, 0.4, &[(1, 0, 1.0)]);
        let tail = tail_map(&tensor, &normal, &phi, &disc).unwrap();
        assert!(tail.trusted);
        assert!(
            (tail.value[0] - 0.4).abs() < 1e-8,
            "constant-coefficient tail must be the data mean, got {}",
            tail.value[0]
        );

        // Constant data rides through any coefficients unchanged.
        let tensor = laminate();
        let mut phi = GridField::zeros(2, 32, &[1]);
        phi.comp_mut(&[0]).fill(0.7);
        let tail = tail_map(&tensor, &normal, &phi, &disc).unwrap();
        assert!((tail.value[0] - 0.7).abs() < 1e-9);
    }

    #[test]
    fn boundary_data_requires_a_certified_diophantine_normal() {
        let tensor = laminate();
        let cell = prepare(&tensor, 32);
        let normal = golden_normal();
        let frame = build_frame(&normal).unwrap();

        // No quality attached: refused with usage guidance.
        let disc = Discretization::new(32, 30.0).unwrap();
        match DirichletKernel::new(&cell, &frame, &disc) {
            Err(Error::Usage(msg)) => assert!(msg.contains("kappa"), "{msg}"),
            other => panic!("expected a usage error, got {other:?}"),
        }

        // Rational normal: refused as a hypothesis violation.
        let axis = vec![0.0, 1.0];
        let report = kappa(&axis, 64).unwrap();
        assert!(report.rational_detected);
        let frame_axis = build_frame(&axis).unwrap();
        let disc_axis = Discretization::new(32, 120.0)
            .unwrap()
            .with_quality(NormalQuality::from(&report));
        match NeumannKernel::new(&cell, &frame_axis, &disc_axis) {
            Err(Error::Hypothesis(msg)) => assert!(msg.contains("rational"), "{msg}"),
            other => panic!("expected a hypothesis error, got {other:?}"),
        }
        let phi = oscillating_scalar(32, 0.0, &[(1, 0, 1.0)]);
        assert!(tail_map(&tensor, &axis, &phi, &disc_axis).is_err());
    }

    #[test]
    fn cell_preparation_matches_directly_solved_effective_tensors() {
        let tensor = skew_scalar();
        let cell = prepare(&tensor, 32);
        let chi = solve_correctors(&tensor, 32, &Default::default()).unwrap();
        let direct = homogenized_tensor(&tensor, &chi).unwrap();
        for (a, b) in cell.ahat.entries.iter().zip(&direct.entries) {
            assert!(
                (a - b).abs() < 1e-8,
                "adjoint-of-effective must match effective-of-plain: {a} vs {b}"
            );
        }
    }
}
