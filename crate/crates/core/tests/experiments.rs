mod common;

use std::f64::consts::PI;

use common::*;
use hm3d::dynamics::{linear_symbol, Model, State};
use hm3d::experiments::*;
use hm3d::integrator::{Scheme, StepperConfig};
use hm3d::profiles::Profile;
use hm3d::spectral::{Domain, Grid, Mode};

#[test]
fn grid_sizes_carry_the_ball() {
    assert_eq!(grid_size_for_radius(4), 14);
    assert_eq!(grid_size_for_radius(8), 26);
    assert_eq!(grid_size_for_radius(16), 50);
    for m in 1..40 {
        let n = grid_size_for_radius(m);
        let g = Grid::cube(1.0, n).unwrap();
        assert!(g.dealias_cutoff().iter().all(|&k| k >= m as i64));
        assert_eq!(n % 2, 0);
    }
}

#[test]
fn difference_norms_match_energy() {
    let g = Grid::cube(2.0, 12).unwrap();
    let a = random_state(g, [3, 3, 3], 1);
    let b = random_state(g, [3, 3, 3], 2);
    let (w, u) = difference_norms(&a, &b).unwrap();
    let mut d = a.clone();
    d.axpy(-1.0, &b);
    assert!(rel_err(w * w + u * u, d.energy2()) < 1e-13);
    assert_eq!(difference_norms(&a, &a).unwrap(), (0.0, 0.0));
    assert!(difference_norms(&a, &State::zeros(Grid::cube(2.0, 8).unwrap())).is_err());
}

#[test]
fn growth_fit_examples() {
    let t: Vec<f64> = (0..11).map(|i| 0.1 * i as f64).collect();
    let d: Vec<f64> = t.iter().map(|t| 3.0 * (-1.7 * t).exp()).collect();
    let (a, ex) = fit_growth(&t, &d).unwrap();
    assert!((a + 1.7).abs() < 1e-13);
    assert!(ex.abs() < 1e-13);
    assert_eq!(fit_growth(&t, &vec![0.0; 11]).unwrap(), (0.0, 0.0));
    assert!(fit_growth(&t[..1], &d[..1]).is_err());
    let mut bad = d.clone();
    bad[0] = 0.0;
    assert!(fit_growth(&t, &bad).is_err());
}

#[test]
fn convergence_rejects_bad_radii() {
    let setup = ConvergenceSetup { l: 2.0 * PI, re: 10.0, eps: 0.5, nonlinear: true };
    let cfg = StepperConfig::new(1e-2, 0.1).unwrap();
    let build = |d: &Domain| Profile::TaylorGreenH.build(d, 1.0, 0);
    for radii in [&[][..], &[4][..], &[4, 12][..], &[0, 0][..]] {
        assert!(galerkin_convergence(setup, &cfg, radii, build).is_err());
    }
}

#[test]
fn convergence_of_resolved_single_mode_is_at_rounding() {
    let setup = ConvergenceSetup { l: 2.0 * PI, re: 20.0, eps: 0.7, nonlinear: true };
    let cfg = StepperConfig::new(1e-2, 0.2).unwrap();
    let r = galerkin_convergence(setup, &cfg, &[2, 4], |d| Profile::SingleMode([1, 0, 1]).build(d, 1.0, 0))
        .unwrap();
    assert_eq!(r.levels.len(), 1);
    assert!(r.levels[0].total() < 1e-14, "{:?}", r.levels);
    assert!(r.decays(10.0, 1e-10));
}

#[test]
fn convergence_of_analytic_data_decays() {
    let setup = ConvergenceSetup { l: 2.0 * PI, re: 50.0, eps: 0.5, nonlinear: true };
    let cfg = StepperConfig::new(1e-2, 0.2).unwrap();
    let r = galerkin_convergence(setup, &cfg, &[2, 4, 8], |d| Profile::TaylorGreenH.build(d, 1.0, 0)).unwrap();
    assert_eq!(r.levels.len(), 2);
    assert!(r.levels[0].total() > 1e-6, "truncation at m=2 should be visible");
    assert!(r.decays(10.0, 1e-10), "{:?}", r.reduction_factors());
}

#[test]
fn zero_perturbation_gives_zero_distance() {
    let g = Grid::cube(2.0 * PI, 8).unwrap();
    let d = Domain::new(g, 20.0, 0.5).unwrap();
    let base = random_state(g, [2, 2, 2], 3);
    let cfg = StepperConfig::new(1e-2, 0.1).unwrap();
    let r = continuous_dependence(&Model::new(d), &cfg, &base, &random_state(g, [2, 2, 2], 4), &[0.0], 1).unwrap();
    assert!(r.runs[0].distance.iter().all(|&x| x == 0.0));
    assert_eq!(r.runs[0].rate, 0.0);
    assert!(continuous_dependence(&Model::new(d), &cfg, &base, &State::zeros(g), &[1e-6], 1).is_err());
}

/// A linear eigenvector perturbation grows at twice the eigenvalue's real part.
#[test]
fn linear_rate_matches_least_stable_eigenvalue() {
    let l = 2.0 * PI;
    let g = Grid::cube(l, 8).unwrap();
    for (re, eps, j) in [(10.0, 0.5, [1, 0, 1]), (50.0, 0.0, [1, 1, 1]), (5.0, 1.5, [0, 2, 1])] {
        let d = Domain::new(g, re, eps).unwrap();
        let a = linear_symbol(&Mode::free(j, l), &d).matrix;
        let lam = a.eigenvalues().into_iter().max_by(|x, y| x.re.total_cmp(&y.re)).unwrap();
        let m = a.0;
        let v = [m[0][1], lam - m[0][0]];
        let mut dir = State::zeros(g);
        dir.w_hat.set_mode(j, v[0]).unwrap();
        dir.omega_hat.set_mode(j, v[1]).unwrap();
        let mut cfg = StepperConfig::new(1e-2, 1.0).unwrap();
        cfg.scheme = Scheme::IfRk4;
        let r = continuous_dependence(&Model::new(d).linear_only(), &cfg, &State::zeros(g), &dir, &[1e-6, 1e-3], 5)
            .unwrap();
        for run in &r.runs {
            assert!((run.rate - 2.0 * lam.re).abs() < 1e-6 * lam.re.abs().max(1.0), "{} vs {}", run.rate, 2.0 * lam.re);
            assert!(run.max_excess.abs() < 1e-6);
        }
    }
}

#[test]
fn nonlinear_rates_are_amplitude_independent() {
    let g = Grid::cube(2.0 * PI, 12).unwrap();
    let d = Domain::new(g, 50.0, 0.5).unwrap();
    let base = Profile::RandomSmooth { alpha: 2.0, seed: None }.build(&d, 1.0, 0).unwrap();
    let dir = Profile::SingleMode([1, 1, 0]).build(&d, 1.0, 0).unwrap();
    let cfg = StepperConfig::new(5e-3, 0.3).unwrap();
    let r = continuous_dependence(&Model::new(d), &cfg, &base, &dir, &[1e-8, 1e-7, 1e-6], 6).unwrap();
    assert!(r.rate_spread() < 0.01, "{}", r.rate_spread());
    assert!(r.max_excess() < 0.1);
    let dt0 = r.runs.iter().map(|x| x.distance.last().unwrap() / x.distance[0]).collect::<Vec<_>>();
    assert!(dt0.iter().all(|x| rel_err(*x, dt0[0]) < 0.1));
}
