//! Reference-solution consistency: the compact-support solution satisfies
//! the discrete equation increasingly well under refinement, and its time
//! factor obeys the Caputo eigenvalue relation.

use subdiff::exact::compact_support_solution;
use subdiff::spaceop::{apply, fractional_laplacian_kernel, Extension, SpatialGrid};
use subdiff::timefrac::{caputo_l1, L1Coefficients, TimeMesh};

/// |∂_τ^α u(x, ·) - D(x) L_h u(·, t)| at interior probes shrinks as both
/// mesh parameters are halved.
#[test]
fn compact_support_pde_residual_decays() {
    let (alpha, s) = (0.5, 0.75);
    let problem = compact_support_solution(alpha, s).unwrap();
    let mut residuals = Vec::new();
    for level in 0..3 {
        let m = 64usize << level;
        let steps = 32usize << level;
        let grid = SpatialGrid::new(2.0, m).unwrap();
        let mesh = TimeMesh::new(0.5 / steps as f64 * 2.0, steps).unwrap();
        let coeffs = L1Coefficients::new(alpha, &mesh).unwrap();
        let kernel =
            fractional_laplacian_kernel(s, grid.spacing(), (8.0 / grid.spacing()) as usize)
                .unwrap();
        let initial = problem.initial.clone();
        let frozen = move |x: f64| initial(x);
        // residual at the probe nodes for the final time
        let n = mesh.steps();
        let t_n = mesh.t(n);
        let field: Vec<f64> =
            grid.nodes().iter().map(|&x| problem.reference.eval(x, t_n)).collect();
        let image = apply(&kernel, &grid, &field, &Extension::Frozen(&frozen)).unwrap();
        let mut worst = 0.0f64;
        for &x_probe in &[0.0f64, 0.34375] {
            let j = ((x_probe - grid.node(0)) / grid.spacing()).round() as usize;
            let hist: Vec<f64> =
                (0..=n).map(|k| problem.reference.eval(grid.node(j), mesh.t(k))).collect();
            let lhs = caputo_l1(&hist, &coeffs).unwrap();
            let rhs = (problem.diffusivity)(grid.node(j)) * image[j];
            worst = worst.max((lhs - rhs).abs());
        }
        residuals.push(worst);
    }
    assert!(
        residuals[1] < residuals[0] && residuals[2] < residuals[1],
        "residuals not decreasing: {residuals:?}"
    );
}

/// ∂_τ^α E_α(-t^α) approaches -E_α(-t_n^α) under mesh refinement.
#[test]
fn eigen_relation_through_l1() {
    let problem = compact_support_solution(0.5, 0.5).unwrap();
    let x_probe = 0.25;
    let mut defects = Vec::new();
    for &steps in &[128usize, 256, 512] {
        let mesh = TimeMesh::new(1.0 / steps as f64, steps).unwrap();
        let coeffs = L1Coefficients::new(0.5, &mesh).unwrap();
        let hist: Vec<f64> =
            (0..=steps).map(|k| problem.reference.eval(x_probe, mesh.t(k))).collect();
        let lhs = caputo_l1(&hist, &coeffs).unwrap();
        defects.push((lhs + hist[steps]).abs());
    }
    assert!(defects[2] < defects[1] && defects[1] < defects[0], "{defects:?}");
    assert!(defects[2] < 5e-3);
}

/// Reference evaluators are even in x when the data are even.
#[test]
fn references_even_in_x() {
    let problem = compact_support_solution(0.4, 0.6).unwrap();
    for &t in &[0.0, 0.3, 1.0] {
        for &x in &[0.1, 0.55, 0.975] {
            let a = problem.reference.eval(x, t);
            let b = problem.reference.eval(-x, t);
            assert!((a - b).abs() < 1e-15);
        }
    }
}
