//! Scratch calibration for the strip-oracle comparison. Not part of the
//! final suite; run with --nocapture to read the measured error levels.

use blt_core::fields::{GridField, SpectralGrid, TrigTensor, TWO_PI};
use blt_core::geometry::build_frame;
use blt_core::layers::{solve_dirichlet_layer, Discretization};
use blt_core::oracles::{doubling_mesh, strip_dirichlet_richardson};
use blt_core::presets::mix2;

fn boundary_profile(theta1: f64, theta2: f64) -> f64 {
    (TWO_PI * theta1).cos() * (1.0 + 0.3 * (TWO_PI * theta2).sin())
        + 0.2 * (TWO_PI * (theta1 + theta2)).sin()
}

#[test]
fn strip_calibration() {
    let tensor = mix2();
    let frame = build_frame(&[0.0, 1.0]).unwrap();
    let resolution = 32usize;
    let t_max = 6.0;
    let delta = 0.0025;
    let plateau = 96;

    // Oracle self-error estimate: richardson at base (32, 0.02) vs (64, 0.01),
    // both 3 levels, compared on the common lattice (every 2nd theta point of
    // the finer, every 2nd node).
    let theta2_probe = 9.0 / 32.0;
    let t0 = std::time::Instant::now();
    let phi_line = |x: f64| boundary_profile(x, theta2_probe);
    let r1 = strip_dirichlet_richardson(
        &tensor, &frame, theta2_probe, &phi_line, 32, 0.02, t_max, 3,
    )
    .unwrap();
    println!("oracle base richardson: {:?}", t0.elapsed());
    let t1 = std::time::Instant::now();
    let r2 = strip_dirichlet_richardson(
        &tensor, &frame, theta2_probe, &phi_line, 64, 0.01, t_max, 3,
    )
    .unwrap();
    println!("oracle fine richardson: {:?}", t1.elapsed());
    let mut oracle_err = 0.0f64;
    for (j, &t) in r1.nodes.iter().enumerate() {
        if t > 0.5 * t_max {
            break;
        }
        for p in 0..32 {
            let diff = (r1.values[j][p] - r2.values[2 * j][2 * p]).abs();
            oracle_err = oracle_err.max(diff);
        }
    }
    println!("oracle self-error estimate (base vs fine): {oracle_err:.3e}");

    // Lifted solve on the doubling mesh.
    let grid = SpectralGrid::new(2, resolution).unwrap();
    let mut phi = GridField::zeros(2, resolution, &[1]);
    let mut theta = [0.0; 2];
    {
        let data = phi.comp_mut(&[0]);
        for flat in 0..grid.len() {
            grid.theta(flat, &mut theta);
            data[flat] = boundary_profile(theta[0], theta[1]);
        }
    }
    let mut disc = Discretization::new(resolution, t_max).unwrap();
    disc.mesh = doubling_mesh(delta, plateau, t_max).unwrap();
    println!("lifted mesh nodes: {}", disc.mesh.node_count());
    let t2 = std::time::Instant::now();
    let lifted = solve_dirichlet_layer(&tensor, &frame, &phi, &disc).unwrap();
    println!(
        "lifted solve: {:?}, iters {:?}, residuals {:.2e} / {:.2e}",
        t2.elapsed(),
        lifted.stats.iterations,
        lifted.interior_residual,
        lifted.boundary_residual
    );

    // Lifted self-error estimate: same solve on the twice-refined mesh,
    // compared at shared nodes (every multiple of delta is shared).
    let mut disc_fine = Discretization::new(resolution, t_max).unwrap();
    disc_fine.mesh = doubling_mesh(delta / 2.0, 2 * plateau, t_max).unwrap();
    let t3 = std::time::Instant::now();
    let lifted_fine = solve_dirichlet_layer(&tensor, &frame, &phi, &disc_fine).unwrap();
    println!(
        "lifted fine solve: {:?} ({} nodes)",
        t3.elapsed(),
        disc_fine.mesh.node_count()
    );
    let mut lifted_err = 0.0f64;
    for (j, &t) in disc.mesh.nodes().iter().enumerate() {
        if t > 0.5 * t_max {
            break;
        }
        let jf = disc_fine
            .mesh
            .nodes()
            .iter()
            .position(|&s| s == t)
            .expect("shared node");
        let mut diff = lifted.values()[j].clone();
        diff.axpy(-1.0, &lifted_fine.values()[jf]);
        lifted_err = lifted_err.max(diff.max_abs());
    }
    println!("lifted self-error estimate (mesh vs half-mesh): {lifted_err:.3e}");

    // Cross comparison on three theta_2 lines at the oracle lattice.
    for q in [0usize, 9, 20] {
        let theta2 = q as f64 / resolution as f64;
        let phi_line = |x: f64| boundary_profile(x, theta2);
        let strip = strip_dirichlet_richardson(
            &tensor, &frame, theta2, &phi_line, 32, 0.02, t_max, 3,
        )
        .unwrap();
        let mut cross = 0.0f64;
        let mut checked = 0usize;
        for (j, &t) in strip.nodes.iter().enumerate() {
            if t > 0.5 * t_max {
                break;
            }
            let jl = disc
                .mesh
                .nodes()
                .iter()
                .position(|&s| s == t)
                .expect("oracle node shared with lifted mesh");
            let slice = lifted.values()[jl].comp(&[0]);
            for p in 0..resolution {
                let diff = (slice[p * resolution + q] - strip.values[j][p]).abs();
                cross = cross.max(diff);
            }
            checked += 1;
        }
        println!("line q={q}: cross error {cross:.3e} over {checked} nodes");
    }
}
