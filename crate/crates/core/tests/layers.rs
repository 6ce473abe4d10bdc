//! Lifted half-space solves checked against closed forms, the independent
//! strip solver, and structural invariances (frame choice, determinism,
//! closure consistency).

use blt_core::cell::{homogenized_tensor, solve_correctors, solve_flux_correctors};
use blt_core::fields::{GridField, SpectralGrid, TrigTensor, TWO_PI};
use blt_core::geometry::{build_frame, build_frame_branch, kappa, FrameBranch};
use blt_core::krylov::GmresConfig;
use blt_core::layers::{
    solve_corrector_dirichlet, solve_dirichlet_layer, solve_flux_neumann, solve_neumann_layer,
    Closure, Discretization, GradedMesh, NormalQuality,
};
use blt_core::oracles::{
    analytic_dirichlet_slices, analytic_neumann_slices, doubling_mesh, strip_dirichlet_richardson,
    tangential_frequency,
};
use blt_core::presets::{golden_normal_2d, mix2};

fn cosine_field(k: &[i64], resolution: usize) -> GridField {
    let d = k.len();
    let grid = SpectralGrid::new(d, resolution).unwrap();
    let mut field = GridField::zeros(d, resolution, &[1]);
    let mut theta = vec![0.0; d];
    let data = field.comp_mut(&[0]);
    for flat in 0..grid.len() {
        grid.theta(flat, &mut theta);
        let phase: f64 = k.iter().zip(&theta).map(|(&kc, &th)| kc as f64 * th).sum();
        data[flat] = (TWO_PI * phase).cos();
    }
    field
}

fn max_slice_error(got: &[GridField], want: &[GridField]) -> f64 {
    got.iter()
        .zip(want.iter())
        .map(|(g, w)| {
            let mut diff = g.clone();
            diff.axpy(-1.0, w);
            diff.max_abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn identity_dirichlet_layer_follows_the_analytic_profile() {
    let tensor = TrigTensor::identity(2, 1);
    let normal = golden_normal_2d();
    let frame = build_frame(&normal).unwrap();
    let k = [1i64, 1];
    let phi = cosine_field(&k, 32);
    let mut disc = Discretization::new(32, 8.0).unwrap();
    disc.mesh = GradedMesh::geometric(0.005, 1.05, 0.05, 8.0).unwrap();
    let solution = solve_dirichlet_layer(&tensor, &frame, &phi, &disc).unwrap();
    let reference = analytic_dirichlet_slices(&frame, &k, 32, solution.mesh.nodes()).unwrap();
    let err = max_slice_error(solution.values(), &reference);
    assert!(err < 1e-3, "analytic profile missed by {err:.3e}");
    // The tail of a decaying mode is zero.
    assert!(solution.tail.iter().all(|v| v.abs() < 1e-4));
}

#[test]
fn identity_neumann_layer_follows_the_analytic_profile() {
    let tensor = TrigTensor::identity(2, 1);
    let normal = golden_normal_2d();
    let frame = build_frame(&normal).unwrap();
    let report = kappa(&normal, 40).unwrap();
    let k = [1i64, 1];
    let phi = cosine_field(&k, 32);
    let t_vec = frame.tangent(0);
    assert!(tangential_frequency(&frame, &k) > 0.2);
    let t_max = 22.0;
    let mut disc = Discretization::new(32, t_max).unwrap();
    disc.mesh = GradedMesh::geometric(0.005, 1.05, 0.05, t_max).unwrap();
    disc.quality = Some(NormalQuality::from(&report));
    let solution = solve_neumann_layer(&tensor, &frame, &phi, &t_vec, &disc).unwrap();
    let reference =
        analytic_neumann_slices(&frame, &k, &t_vec, 32, solution.mesh.nodes()).unwrap();
    let err = max_slice_error(solution.values(), &reference);
    assert!(err < 1e-3, "analytic Neumann profile missed by {err:.3e}");
}

#[test]
fn boundary_time_derivative_matches_the_analytic_rate() {
    let tensor = TrigTensor::identity(2, 1);
    let frame = build_frame(&golden_normal_2d()).unwrap();
    let k = [1i64, 0];
    let omega = tangential_frequency(&frame, &k);
    let phi = cosine_field(&k, 32);
    let mut disc = Discretization::new(32, 8.0).unwrap();
    disc.mesh = GradedMesh::geometric(0.002, 1.04, 0.05, 8.0).unwrap();
    let solution = solve_dirichlet_layer(&tensor, &frame, &phi, &disc).unwrap();
    let dt = solution.boundary_time_derivative();
    let grid = SpectralGrid::new(2, 32).unwrap();
    let mut theta = [0.0; 2];
    let mut worst = 0.0f64;
    let comp = dt.comp(&[0]);
    for flat in 0..grid.len() {
        grid.theta(flat, &mut theta);
        let expect = -TWO_PI * omega * (TWO_PI * theta[0]).cos();
        worst = worst.max((comp[flat] - expect).abs());
    }
    assert!(worst < 1e-3, "boundary rate off by {worst:.3e}");
}

#[test]
fn layer_solutions_do_not_depend_on_the_frame_branch() {
    let tensor = mix2();
    let normal = golden_normal_2d();
    let upper = build_frame_branch(&normal, FrameBranch::Upper).unwrap();
    let lower = build_frame_branch(&normal, FrameBranch::Lower).unwrap();
    assert!(upper.tangent_distance(&lower) > 0.1, "branches coincide");
    let phi = cosine_field(&[1, 0], 16);
    let mut disc = Discretization::new(16, 6.0).unwrap();
    disc.mesh = GradedMesh::geometric(0.01, 1.05, 0.05, 6.0).unwrap();
    let a = solve_dirichlet_layer(&tensor, &upper, &phi, &disc).unwrap();
    let b = solve_dirichlet_layer(&tensor, &lower, &phi, &disc).unwrap();
    let err = max_slice_error(a.values(), b.values());
    assert!(err < 1e-8, "frame dependence {err:.3e}");
    for (x, y) in a.tail.iter().zip(b.tail.iter()) {
        assert!((x - y).abs() < 1e-8);
    }
}

#[test]
fn rational_normals_are_guarded_where_the_theory_needs_them() {
    let tensor = mix2();
    let frame = build_frame(&[0.0, 1.0]).unwrap();
    let report = kappa(&[0.0, 1.0], 40).unwrap();
    let phi = cosine_field(&[1, 0], 16);
    let quality = NormalQuality::from(&report);

    // Neumann over a rational normal is rejected.
    let disc = Discretization::new(16, 6.0)
        .unwrap()
        .with_quality(quality.clone());
    let t_vec = frame.tangent(0);
    let err = solve_neumann_layer(&tensor, &frame, &phi, &t_vec, &disc);
    assert!(err.is_err(), "rational Neumann must fail");

    // The tail-pinning closure needs a genuine tail, so it is rejected too.
    let disc = Discretization::new(16, 6.0)
        .unwrap()
        .with_quality(quality)
        .with_closure(Closure::TailDirichlet);
    assert!(solve_dirichlet_layer(&tensor, &frame, &phi, &disc).is_err());

    // Dirichlet with the flux cap is fine.
    let disc = Discretization::new(16, 6.0).unwrap();
    assert!(solve_dirichlet_layer(&tensor, &frame, &phi, &disc).is_ok());
}

#[test]
fn both_closures_agree_on_the_tail() {
    let tensor = mix2();
    let normal = golden_normal_2d();
    let frame = build_frame(&normal).unwrap();
    let report = kappa(&normal, 40).unwrap();
    let t_max = 22.0;
    let phi = cosine_field(&[1, 0], 16);
    let mut base = Discretization::new(16, t_max).unwrap();
    base.mesh = GradedMesh::geometric(0.01, 1.05, 0.1, t_max).unwrap();
    base.quality = Some(NormalQuality::from(&report));

    let flux_cap = solve_dirichlet_layer(&tensor, &frame, &phi, &base).unwrap();
    let pinned = {
        let disc = base.clone().with_closure(Closure::TailDirichlet);
        solve_dirichlet_layer(&tensor, &frame, &phi, &disc).unwrap()
    };
    assert!(flux_cap.trusted);
    assert!(pinned.trusted);
    for (a, b) in flux_cap.tail.iter().zip(pinned.tail.iter()) {
        assert!((a - b).abs() < 1e-6, "closure tails differ: {a} vs {b}");
    }
}

#[test]
fn corrector_data_layers_vanish_for_identity_coefficients() {
    let tensor = TrigTensor::identity(2, 1);
    let correctors = solve_correctors(&tensor, 16, &GmresConfig::default()).unwrap();
    let frame = build_frame(&golden_normal_2d()).unwrap();
    let mut disc = Discretization::new(16, 6.0).unwrap();
    disc.mesh = GradedMesh::geometric(0.01, 1.05, 0.1, 6.0).unwrap();
    for k in 0..2 {
        let sol = solve_corrector_dirichlet(&tensor, &correctors, &frame, k, 0, &disc).unwrap();
        let peak = sol
            .values()
            .iter()
            .map(|s| s.max_abs())
            .fold(0.0f64, f64::max);
        assert!(peak <= 1e-10, "corrector layer k={k} peaks at {peak:.3e}");
    }

    let ahat = homogenized_tensor(&tensor, &correctors).unwrap();
    let flux = solve_flux_correctors(&tensor, &correctors, &ahat).unwrap();
    let report = kappa(&golden_normal_2d(), 40).unwrap();
    let mut ndisc = Discretization::new(16, 22.0).unwrap();
    ndisc.mesh = GradedMesh::geometric(0.01, 1.05, 0.1, 22.0).unwrap();
    ndisc.quality = Some(NormalQuality::from(&report));
    for k in 0..2 {
        let sol = solve_flux_neumann(&tensor, &flux, &frame, k, 0, &ndisc).unwrap();
        let peak = sol
            .values()
            .iter()
            .map(|s| s.max_abs())
            .fold(0.0f64, f64::max);
        assert!(peak <= 1e-10, "flux layer k={k} peaks at {peak:.3e}");
    }
}

#[test]
fn strip_solver_and_lifted_solver_agree_at_moderate_resolution() {
    let tensor = mix2();
    let frame = build_frame(&[0.0, 1.0]).unwrap();
    let resolution = 16;
    let t_max = 5.0;
    let phi_2d = |t1: f64, t2: f64| {
        (TWO_PI * t1).cos() * (1.0 + 0.4 * (TWO_PI * t2).cos())
            + 0.3 * (TWO_PI * (t1 + t2)).sin()
    };
    let grid = SpectralGrid::new(2, resolution).unwrap();
    let mut phi = GridField::zeros(2, resolution, &[1]);
    let mut theta = [0.0; 2];
    {
        let data = phi.comp_mut(&[0]);
        for flat in 0..grid.len() {
            grid.theta(flat, &mut theta);
            data[flat] = phi_2d(theta[0], theta[1]);
        }
    }
    let mut disc = Discretization::new(resolution, t_max).unwrap();
    disc.mesh = doubling_mesh(0.005, 48, t_max).unwrap();
    let lifted = solve_dirichlet_layer(&tensor, &frame, &phi, &disc).unwrap();

    let q = 3usize;
    let theta2 = q as f64 / resolution as f64;
    let phi_line = |x: f64| phi_2d(x, theta2);
    let strip =
        strip_dirichlet_richardson(&tensor, &frame, theta2, &phi_line, 16, 0.04, t_max, 3)
            .unwrap();
    let mut worst = 0.0f64;
    for (j, &t) in strip.nodes.iter().enumerate() {
        if t > 0.5 * t_max {
            break;
        }
        let jl = disc
            .mesh
            .nodes()
            .iter()
            .position(|&s| s == t)
            .expect("strip node shared with lifted mesh");
        let slice = lifted.values()[jl].comp(&[0]);
        for p in 0..resolution {
            worst = worst.max((slice[p * resolution + q] - strip.values[j][p]).abs());
        }
    }
    assert!(worst < 2e-4, "strip cross-check off by {worst:.3e}");
}

#[test]
fn lifted_solves_are_bit_identical_across_reruns() {
    let tensor = mix2();
    let frame = build_frame(&golden_normal_2d()).unwrap();
    let phi = cosine_field(&[1, 1], 16);
    let mut disc = Discretization::new(16, 6.0).unwrap();
    disc.mesh = GradedMesh::geometric(0.01, 1.05, 0.1, 6.0).unwrap();
    let a = solve_dirichlet_layer(&tensor, &frame, &phi, &disc).unwrap();
    let b = solve_dirichlet_layer(&tensor, &frame, &phi, &disc).unwrap();
    for (x, y) in a.values().iter().zip(b.values().iter()) {
        assert_eq!(x.data(), y.data());
    }
}

#[test]
fn graded_meshes_validate_their_nodes() {
    assert!(GradedMesh::from_nodes(vec![0.0, 0.1, 0.2, 0.5]).is_ok());
    assert!(GradedMesh::from_nodes(vec![0.1, 0.2, 0.3]).is_err());
    assert!(GradedMesh::from_nodes(vec![0.0, 0.2, 0.2]).is_err());
    assert!(GradedMesh::from_nodes(vec![0.0, 0.2]).is_err());
    let mesh = GradedMesh::geometric(0.01, 1.05, 0.1, 4.0).unwrap();
    assert_eq!(mesh.node(0), 0.0);
    assert!((mesh.t_max() - 4.0).abs() < 1e-12);
    for i in 0..mesh.interval_count() {
        assert!(mesh.step(i) > 0.0);
    }
}
