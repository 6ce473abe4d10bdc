//! Coefficient-tensor algebra and spectral calculus, checked against direct
//! pointwise evaluation and closed-form derivatives.

use num_complex::Complex64;
use proptest::prelude::*;

use blt_core::fields::{
    check_ellipticity, gradient, shifted_sample, tensor_index, GridField, SpectralGrid,
    TrigTensor, TWO_PI,
};
use blt_core::geometry::build_frame;
use blt_core::presets::{golden_normal_2d, laminate_reciprocal, mix2, sys2};

#[test]
fn shifted_samples_match_pointwise_evaluation() {
    let tensor = mix2();
    let frame = build_frame(&golden_normal_2d()).unwrap();
    let nodes = [0.0, 0.3, 1.7];
    let n = 32;
    let slices = shifted_sample(&tensor, frame.matrix(), n, &nodes).unwrap();
    let conjugated = tensor.conjugate_spatial(frame.matrix());
    let normal = frame.normal();
    let grid = SpectralGrid::new(2, n).unwrap();
    let mut theta = [0.0; 2];
    let mut worst = 0.0f64;
    for (slice, &t) in slices.iter().zip(nodes.iter()) {
        for flat in (0..grid.len()).step_by(97) {
            grid.theta(flat, &mut theta);
            let point = [theta[0] - t * normal[0], theta[1] - t * normal[1]];
            let direct = conjugated.eval_at(&point);
            for c in 0..direct.len() {
                worst = worst.max((slice.comp_by_flat(c)[flat] - direct[c]).abs());
            }
        }
    }
    assert!(worst < 1e-12, "shifted sample deviates by {worst:.3e}");
}

#[test]
fn adjoint_samples_are_the_transposed_samples() {
    let tensor = sys2();
    let adj = tensor.adjoint();
    let n = 32;
    let a = tensor.sample(n).unwrap();
    let b = adj.sample(n).unwrap();
    let (d, m) = (2, 2);
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            for alpha in 0..m {
                for beta in 0..m {
                    let x = a.comp_by_flat(tensor_index(d, m, i, j, alpha, beta));
                    let y = b.comp_by_flat(tensor_index(d, m, j, i, beta, alpha));
                    for (u, v) in x.iter().zip(y.iter()) {
                        worst = worst.max((u - v).abs());
                    }
                }
            }
        }
    }
    assert!(worst < 1e-13, "adjoint transpose deviates by {worst:.3e}");
}

#[test]
fn coarse_grids_that_alias_the_coefficients_are_rejected() {
    let tensor = laminate_reciprocal();
    assert!(tensor.bandwidth() >= 8);
    assert!(tensor.sample(16).is_err());
    assert!(tensor.sample(tensor.min_resolution()).is_ok());
}

#[test]
fn spectral_gradient_matches_the_closed_form_in_three_dimensions() {
    let n = 16;
    let grid = SpectralGrid::new(3, n).unwrap();
    let mut field = GridField::zeros(3, n, &[1]);
    let mut theta = [0.0; 3];
    {
        let data = field.comp_mut(&[0]);
        for flat in 0..grid.len() {
            grid.theta(flat, &mut theta);
            data[flat] = (TWO_PI * (2.0 * theta[0] - theta[1] + 3.0 * theta[2])).sin();
        }
    }
    let grad = gradient(&grid, &field).unwrap();
    let factors = [2.0, -1.0, 3.0];
    let mut worst = 0.0f64;
    for (axis, &factor) in factors.iter().enumerate() {
        let comp = grad.comp(&[0, axis]);
        for flat in 0..grid.len() {
            grid.theta(flat, &mut theta);
            let expect = TWO_PI
                * factor
                * (TWO_PI * (2.0 * theta[0] - theta[1] + 3.0 * theta[2])).cos();
            worst = worst.max((comp[flat] - expect).abs());
        }
    }
    assert!(worst < 1e-10, "gradient off by {worst:.3e}");
}

#[test]
fn ellipticity_scan_flags_a_degenerate_tensor() {
    let mut entries = vec![Complex64::new(1.0, 0.0); 4];
    entries[tensor_index(2, 1, 0, 1, 0, 0)] = Complex64::new(0.0, 0.0);
    entries[tensor_index(2, 1, 1, 0, 0, 0)] = Complex64::new(0.0, 0.0);
    let mut osc = vec![Complex64::new(0.0, 0.0); 4];
    osc[tensor_index(2, 1, 0, 0, 0, 0)] = Complex64::new(0.6, 0.0);
    osc[tensor_index(2, 1, 1, 1, 0, 0)] = Complex64::new(0.6, 0.0);
    // a(θ) = 1 + 1.2 cos(2πθ₁) on the diagonal dips to -0.2 < 0.
    let tensor = TrigTensor::new(
        2,
        1,
        0.5,
        vec![(vec![0, 0], entries), (vec![1, 0], osc)],
    )
    .unwrap();
    let field = tensor.sample(32).unwrap();
    let report = check_ellipticity(&field, 0.5).unwrap();
    assert!(!report.pass);
    assert!(report.lambda_min_observed < 0.0);
    assert!(report.worst_point < 32 * 32);
}

#[test]
fn tensor_index_enumerates_components_without_collisions() {
    let (d, m) = (3, 2);
    let mut seen = vec![false; d * d * m * m];
    for i in 0..d {
        for j in 0..d {
            for alpha in 0..m {
                for beta in 0..m {
                    let idx = tensor_index(d, m, i, j, alpha, beta);
                    assert!(!seen[idx]);
                    seen[idx] = true;
                }
            }
        }
    }
    assert!(seen.iter().all(|&s| s));
}

/// Strategy: a small random coefficient tensor. The zero mode is real and
/// diagonal-dominant; one-sided oscillating modes get random complex entries.
fn arb_tensor() -> impl Strategy<Value = TrigTensor> {
    let dims = prop_oneof![Just((2usize, 1usize)), Just((2, 2)), Just((3, 1))];
    dims.prop_flat_map(|(d, m)| {
        let comp = d * d * m * m;
        let k_entry = prop::collection::vec(-2i64..=2, d)
            .prop_filter("nonzero", |k| k.iter().any(|&c| c != 0))
            .prop_map(|mut k| {
                // Keep one wavenumber per mirror pair.
                if *k.iter().find(|&&c| c != 0).unwrap() < 0 {
                    k.iter_mut().for_each(|c| *c = -*c);
                }
                k
            });
        let modes = prop::collection::btree_set(k_entry, 1..3);
        let values = prop::collection::vec(
            prop::collection::vec((-0.3f64..0.3, -0.3f64..0.3), comp),
            1..3,
        );
        (Just((d, m)), modes, values).prop_map(|((d, m), modes, values)| {
            let comp = d * d * m * m;
            let mut entries = Vec::new();
            let mut zero = vec![Complex64::new(0.0, 0.0); comp];
            for i in 0..d {
                for alpha in 0..m {
                    zero[tensor_index(d, m, i, i, alpha, alpha)] = Complex64::new(2.0, 0.0);
                }
            }
            entries.push((vec![0i64; d], zero));
            for (k, vals) in modes.into_iter().zip(values.into_iter().cycle()) {
                let tensor: Vec<Complex64> = (0..comp)
                    .map(|c| {
                        let (re, im) = vals[c % vals.len()];
                        Complex64::new(re, im)
                    })
                    .collect();
                entries.push((k, tensor));
            }
            TrigTensor::new(d, m, 0.5, entries).expect("generated tensor is valid")
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn adjoint_is_an_involution(tensor in arb_tensor()) {
        prop_assert_eq!(tensor.adjoint().adjoint(), tensor);
    }

    #[test]
    fn frame_conjugation_round_trips(tensor in arb_tensor(), seed in 0.1f64..6.0) {
        let d = tensor.d();
        let mut normal: Vec<f64> = (0..d)
            .map(|i| (seed + 1.3 * i as f64).sin() + 0.1)
            .collect();
        let len = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        normal.iter_mut().for_each(|v| *v /= len);
        let frame = build_frame(&normal).unwrap();
        let m = frame.matrix();
        let back = tensor
            .conjugate_spatial(m)
            .conjugate_spatial(&m.transpose());
        let a = tensor.coeffs();
        let b = back.coeffs();
        prop_assert_eq!(a.len(), b.len());
        for ((ka, va), (kb, vb)) in a.iter().zip(b.iter()) {
            prop_assert_eq!(ka, kb);
            for (x, y) in va.iter().zip(vb.iter()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn grid_means_agree_with_the_zero_mode(tensor in arb_tensor()) {
        let field = tensor.sample(tensor.min_resolution()).unwrap();
        let means = field.mean();
        let zero = tensor.mean_tensor();
        for (a, b) in means.iter().zip(zero.iter()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
