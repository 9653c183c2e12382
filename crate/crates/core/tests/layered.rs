//! Spectral solutions in media with several interfaces against the
//! finite-difference oracle.

use layerheat::eigen::SpectralProblem;
use layerheat::fd::{compare, fd_solve, FdGrid};
use layerheat::field::{BumpField, GaussianBump};
use layerheat::heat::{solve_grid, HeatScenario};
use layerheat::media::{InterfaceCoupling, LayeredMedium};
use layerheat::quadrature::QuadratureSpec;
use layerheat::transforms::SpectralWeightMode;

fn probes(xs: &[f64], ys: &[f64]) -> Vec<(f64, Vec<f64>)> {
    xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, vec![y]))).collect()
}

#[test]
fn three_layers_match_finite_differences() {
    let medium = LayeredMedium::new(vec![-0.5, 0.6], vec![1.0, 1.6, 0.8], 1).unwrap();
    let problem = SpectralProblem::new(medium, InterfaceCoupling::ideal_contact(1.3, 2).unwrap()).unwrap();
    // one Gaussian spread over all three layers, continuous across both interfaces
    let bumps = (0..3).map(|l| GaussianBump::isotropic(l, 1.0, vec![0.1, 0.0], 0.35)).collect();
    let g = BumpField::new(1, bumps).unwrap();
    let spec = QuadratureSpec::default();
    let mode = SpectralWeightMode::standard(1, &spec).unwrap();
    let pts = probes(&[-1.2, -0.7, -0.3, 0.0, 0.3, 0.8, 1.3], &[-0.3, 0.2]);
    let sc = HeatScenario::new(problem, &g, vec![0.05, 0.2], &pts, mode, spec).unwrap();
    let spectral = solve_grid(&sc).unwrap();
    assert!(spectral.converged);
    let grid = FdGrid::auto(&sc, 0.01, 0.01, 5e-4).unwrap();
    let (fd, _) = fd_solve(&sc, &grid).unwrap();
    let rep = compare(&spectral.samples, &fd).unwrap();
    assert_eq!(rep.per_layer.len(), 3);
    assert!(rep.l2_rel <= 1e-3, "{rep:?}");
}

#[test]
fn contrast_interface_matches_finite_differences() {
    // strong contrast: a2/a1 = 3 and ν = 0.4
    let medium = LayeredMedium::new(vec![0.0], vec![0.7, 2.1], 1).unwrap();
    let problem = SpectralProblem::new(medium, InterfaceCoupling::ideal_contact(0.4, 1).unwrap()).unwrap();
    let g = BumpField::new(
        1,
        vec![GaussianBump::isotropic(0, 1.0, vec![-1.0, 0.1], 0.25), GaussianBump::isotropic(1, -0.5, vec![1.5, -0.2], 0.4)],
    )
    .unwrap();
    let spec = QuadratureSpec::default();
    let mode = SpectralWeightMode::standard(1, &spec).unwrap();
    let pts = probes(&[-1.4, -0.9, -0.4, -0.1, 0.1, 0.5, 1.2, 1.8], &[0.0, 0.3]);
    let sc = HeatScenario::new(problem, &g, vec![0.1], &pts, mode, spec).unwrap();
    let spectral = solve_grid(&sc).unwrap();
    let grid = FdGrid::auto(&sc, 0.01, 0.01, 5e-4).unwrap();
    let (fd, _) = fd_solve(&sc, &grid).unwrap();
    let rep = compare(&spectral.samples, &fd).unwrap();
    assert!(rep.l2_rel <= 1e-3, "{rep:?}");
}
