//! Cell problems, effective tensors, and flux potentials, checked against
//! closed forms (laminate), algebraic identities (adjoint transposition), and
//! energy bounds (Voigt-Reuss sandwich).

use num_complex::Complex64;
use proptest::prelude::*;

use blt_core::cell::{homogenized_tensor, solve_correctors, solve_flux_correctors};
use blt_core::fields::{check_ellipticity, tensor_index, TrigTensor, TWO_PI};
use blt_core::krylov::GmresConfig;
use blt_core::oracles::periodic_mean;
use blt_core::presets::{laminate, sys2, LAMINATE_AMPLITUDE};

fn gmres() -> GmresConfig {
    GmresConfig::default()
}

#[test]
fn identity_coefficients_have_silent_correctors_for_systems() {
    let tensor = TrigTensor::identity(2, 2);
    let set = solve_correctors(&tensor, 16, &gmres()).unwrap();
    assert!(set.chi.max_abs() <= 1e-12);
    assert!(set.max_residual() <= 1e-10);
    let ahat = homogenized_tensor(&tensor, &set).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            for alpha in 0..2 {
                for beta in 0..2 {
                    let expect = if i == j && alpha == beta { 1.0 } else { 0.0 };
                    assert!(
                        (ahat.entry(i, j, alpha, beta) - expect).abs() <= 1e-12,
                        "entry ({i},{j},{alpha},{beta})"
                    );
                }
            }
        }
    }
}

#[test]
fn laminate_corrector_gradient_matches_the_closed_form() {
    // For a scalar laminate a(θ₁), the corrector along the oscillation axis
    // satisfies a(1 + χ') = const; the constant is the harmonic mean H, so
    // ∂₁χ₁ = H/a - 1 and the transverse corrector vanishes identically.
    let tensor = laminate();
    let n = 64;
    let set = solve_correctors(&tensor, n, &gmres()).unwrap();
    let grads = set.gradients().unwrap();
    let profile = |x: f64| 1.0 + LAMINATE_AMPLITUDE * (TWO_PI * x).cos();
    let harmonic = 1.0 / periodic_mean(|x| 1.0 / profile(x), 1001);

    let d1 = grads.comp(&[0, 0, 0, 0]);
    let d2 = grads.comp(&[0, 0, 0, 1]);
    let mut worst = 0.0f64;
    for p in 0..n {
        let theta1 = p as f64 / n as f64;
        let expect = harmonic / profile(theta1) - 1.0;
        for q in 0..n {
            let flat = p * n + q;
            worst = worst.max((d1[flat] - expect).abs());
            worst = worst.max(d2[flat].abs());
        }
    }
    assert!(worst < 1e-9, "laminate gradient off by {worst:.3e}");
    // The transverse corrector is zero.
    let chi2 = set.chi.comp(&[1, 0, 0]);
    let max2 = chi2.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    assert!(max2 < 1e-10, "transverse corrector reaches {max2:.3e}");
}

#[test]
fn effective_tensor_of_the_laminate_shows_both_means() {
    let tensor = laminate();
    let set = solve_correctors(&tensor, 64, &gmres()).unwrap();
    let ahat = homogenized_tensor(&tensor, &set).unwrap();
    let profile = |x: f64| 1.0 + LAMINATE_AMPLITUDE * (TWO_PI * x).cos();
    let harmonic = 1.0 / periodic_mean(|x| 1.0 / profile(x), 1001);
    let arithmetic = periodic_mean(profile, 1001);
    assert!((ahat.entry(0, 0, 0, 0) - harmonic).abs() < 1e-6);
    assert!((ahat.entry(1, 1, 0, 0) - arithmetic).abs() < 1e-6);
    assert!(ahat.entry(0, 1, 0, 0).abs() < 1e-10);
    assert!(ahat.entry(1, 0, 0, 0).abs() < 1e-10);
}

#[test]
fn homogenization_commutes_with_taking_the_adjoint() {
    let tensor = sys2();
    let n = 32;
    let ahat = {
        let set = solve_correctors(&tensor, n, &gmres()).unwrap();
        homogenized_tensor(&tensor, &set).unwrap()
    };
    let ahat_star = {
        let adj = tensor.adjoint();
        let set = solve_correctors(&adj, n, &gmres()).unwrap();
        homogenized_tensor(&adj, &set).unwrap()
    };
    let (d, m) = (2, 2);
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            for alpha in 0..m {
                for beta in 0..m {
                    let diff =
                        ahat.entry(i, j, alpha, beta) - ahat_star.entry(j, i, beta, alpha);
                    worst = worst.max(diff.abs());
                }
            }
        }
    }
    assert!(worst < 1e-9, "adjoint relation broken by {worst:.3e}");
}

#[test]
fn flux_potentials_are_antisymmetric_and_reproduce_the_defect() {
    let astar = sys2().adjoint();
    let set = solve_correctors(&astar, 32, &gmres()).unwrap();
    let ahat = homogenized_tensor(&astar, &set).unwrap();
    let flux = solve_flux_correctors(&astar, &set, &ahat).unwrap();
    let (d, m) = (2, 2);
    let mut skew = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for alpha in 0..m {
                    for beta in 0..m {
                        let a = flux.phi.comp(&[i, j, k, alpha, beta]);
                        let b = flux.phi.comp(&[j, i, k, alpha, beta]);
                        for (x, y) in a.iter().zip(b.iter()) {
                            skew = skew.max((x + y).abs());
                        }
                    }
                }
            }
        }
    }
    assert!(skew <= 1e-12, "asymmetry {skew:.3e}");
    assert!(
        flux.divergence_residual <= 1e-8,
        "divergence residual {:.3e}",
        flux.divergence_residual
    );
}

#[test]
fn corrector_solves_are_bit_identical_across_reruns() {
    let tensor = sys2();
    let a = solve_correctors(&tensor, 32, &gmres()).unwrap();
    let b = solve_correctors(&tensor, 32, &gmres()).unwrap();
    assert_eq!(a.chi.data(), b.chi.data());
    assert_eq!(a.residuals, b.residuals);
}

#[test]
fn corrector_components_have_zero_mean() {
    let tensor = sys2();
    let set = solve_correctors(&tensor, 32, &gmres()).unwrap();
    for mean in set.chi.mean() {
        assert!(mean.abs() < 1e-14);
    }
}

/// Random symmetric scalar coefficient in two dimensions, elliptic by
/// construction: 2·I plus a few bounded cosine modes.
fn arb_symmetric_scalar() -> impl Strategy<Value = TrigTensor> {
    let k_entry = prop::collection::vec(-2i64..=2, 2)
        .prop_filter("nonzero", |k| k.iter().any(|&c| c != 0))
        .prop_map(|mut k| {
            if *k.iter().find(|&&c| c != 0).unwrap() < 0 {
                k.iter_mut().for_each(|c| *c = -*c);
            }
            k
        });
    let modes = prop::collection::btree_set(k_entry, 1..3);
    (modes, prop::collection::vec(-0.25f64..0.25, 6)).prop_map(|(modes, amps)| {
        let mut entries = Vec::new();
        let mut zero = vec![Complex64::new(0.0, 0.0); 4];
        zero[tensor_index(2, 1, 0, 0, 0, 0)] = Complex64::new(2.0, 0.0);
        zero[tensor_index(2, 1, 1, 1, 0, 0)] = Complex64::new(2.0, 0.0);
        entries.push((vec![0i64, 0], zero));
        for (mi, k) in modes.into_iter().enumerate() {
            let mut tensor = vec![Complex64::new(0.0, 0.0); 4];
            let a11 = amps[(3 * mi) % amps.len()];
            let a22 = amps[(3 * mi + 1) % amps.len()];
            let a12 = amps[(3 * mi + 2) % amps.len()] * 0.5;
            tensor[tensor_index(2, 1, 0, 0, 0, 0)] = Complex64::new(a11, 0.0);
            tensor[tensor_index(2, 1, 1, 1, 0, 0)] = Complex64::new(a22, 0.0);
            tensor[tensor_index(2, 1, 0, 1, 0, 0)] = Complex64::new(a12, 0.0);
            tensor[tensor_index(2, 1, 1, 0, 0, 0)] = Complex64::new(a12, 0.0);
            entries.push((k, tensor));
        }
        TrigTensor::new(2, 1, 0.25, entries).expect("generated tensor is valid")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Voigt-Reuss sandwich: the symmetric effective tensor of a symmetric
    /// scalar coefficient stays inside the observed pointwise eigenvalue
    /// range.
    #[test]
    fn effective_tensor_respects_energy_bounds(tensor in arb_symmetric_scalar()) {
        let n = 32;
        let field = tensor.sample(n).unwrap();
        let scan = check_ellipticity(&field, tensor.lambda()).unwrap();
        prop_assume!(scan.lambda_min_observed > 0.05);
        let set = solve_correctors(&tensor, n, &gmres()).unwrap();
        let ahat = homogenized_tensor(&tensor, &set).unwrap();
        // Symmetric part eigenvalues of the 2x2 effective tensor.
        let a = ahat.entry(0, 0, 0, 0);
        let b = 0.5 * (ahat.entry(0, 1, 0, 0) + ahat.entry(1, 0, 0, 0));
        let c = ahat.entry(1, 1, 0, 0);
        let mid = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        let lo = mid - rad;
        let hi = mid + rad;
        prop_assert!(lo >= scan.lambda_min_observed - 1e-8,
            "effective low eig {lo} under pointwise min {}", scan.lambda_min_observed);
        prop_assert!(hi <= scan.lambda_max_observed + 1e-8,
            "effective high eig {hi} over pointwise max {}", scan.lambda_max_observed);
    }
}
