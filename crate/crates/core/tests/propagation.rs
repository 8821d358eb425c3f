use num_complex::Complex64;
use susyqm_core::eigen::solve_potential;
use susyqm_core::grid::{make_grid, ComplexField, Grid1D};
use susyqm_core::potential::{Polynomial, PolynomialW};
use susyqm_core::propagation::*;
use susyqm_core::susy::SuperPotential;
use susyqm_core::{ModelUnits, RealField, SusyError};

fn scaled() -> ModelUnits {
    ModelUnits::scaled()
}

fn coherent(g: &Grid1D, x0: f64) -> ComplexField {
    let f = ComplexField::new(g, g.points().iter().map(|&x| Complex64::new((-0.5 * (x - x0).powi(2)).exp(), 0.0)).collect())
        .unwrap();
    f.normalized()
}

fn mean_x(psi: &ComplexField) -> f64 {
    let g = psi.grid();
    let h = g.spacing();
    psi.values().iter().zip(g.points()).map(|(c, &x)| c.norm_sqr() * x).sum::<f64>() * h
}

fn width(psi: &ComplexField) -> f64 {
    let g = psi.grid();
    let h = g.spacing();
    let m = mean_x(psi);
    (psi.values().iter().zip(g.points()).map(|(c, &x)| c.norm_sqr() * (x - m).powi(2)).sum::<f64>() * h).sqrt()
}

fn ho_w(g: &Grid1D) -> SuperPotential {
    SuperPotential::from_analytic(g, &PolynomialW(Polynomial::new(vec![0.0, 1.0])), scaled())
}

#[test]
fn eigenstates_only_acquire_a_phase() {
    let u = scaled();
    let g = make_grid(-8.0, 8.0, 121).unwrap();
    let v = g.sample(|x| x * x);
    let ground = ComplexField::from_real(&solve_potential(&v, &u, 1).unwrap().states[0]);
    for scheme in [Scheme::ImplicitMidpoint, Scheme::SplitOperator] {
        let cfg = PropagationConfig::new(1e-3, 500, scheme).unwrap();
        let out = propagate(&ground, &v, &u, &cfg).unwrap();
        assert!((ground.dot(&out).norm() - 1.0).abs() <= 1e-8, "{scheme:?}");
    }
}

#[test]
fn norm_is_conserved() {
    let u = scaled();
    let g = make_grid(-8.0, 8.0, 121).unwrap();
    let v = g.sample(|x| x * x);
    let psi = coherent(&g, 1.5);
    for scheme in [Scheme::ImplicitMidpoint, Scheme::SplitOperator] {
        let cfg = PropagationConfig::new(5e-4, 1000, scheme).unwrap();
        let out = propagate(&psi, &v, &u, &cfg).unwrap();
        assert!((out.norm() - 1.0).abs() <= 1e-10, "{scheme:?}");
    }
}

#[test]
fn forward_then_backward_returns() {
    let u = scaled();
    let g = make_grid(-8.0, 8.0, 121).unwrap();
    let v = g.sample(|x| x * x + 0.1 * x.powi(4));
    let psi = coherent(&g, 1.0);
    for scheme in [Scheme::ImplicitMidpoint, Scheme::SplitOperator] {
        let fwd = Propagator::new(&v, &u, scheme, 1e-3).unwrap();
        let back = fwd.reversed().unwrap();
        let out = back.evolve(&fwd.evolve(&psi, 400).unwrap(), 400).unwrap();
        let diff: f64 = out.values().iter().zip(psi.values()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
        assert!((diff * g.spacing()).sqrt() <= 1e-8);
    }
}

#[test]
fn coherent_state_error_is_second_order() {
    let u = scaled();
    let g = make_grid(-10.0, 10.0, 161).unwrap();
    let v = g.sample(|x| x * x);
    let psi = coherent(&g, 1.0);
    let t = 1.0;
    for scheme in [Scheme::ImplicitMidpoint, Scheme::SplitOperator] {
        let err = |dt: f64| {
            let n = (t / dt).round() as usize;
            let cfg = PropagationConfig::new(dt, n, scheme).unwrap();
            let out = propagate(&psi, &v, &u, &cfg).unwrap();
            (mean_x(&out) - (2.0 * t).cos()).abs()
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        assert!(e1 / e2 >= 3.5, "{scheme:?}: {e1:e} -> {e2:e}");
    }
}

#[test]
fn free_packet_spreads() {
    let u = scaled();
    let g = make_grid(-60.0, 60.0, 2048).unwrap();
    let v = RealField::zeros(&g);
    let sigma0 = 1.0;
    let psi = ComplexField::new(
        &g,
        g.points().iter().map(|&x| Complex64::new((-x * x / (4.0 * sigma0 * sigma0)).exp(), 0.0)).collect(),
    )
    .unwrap()
    .normalized();
    let (dt, n) = (1e-2, 300);
    let cfg = PropagationConfig::new(dt, n, Scheme::SplitOperator).unwrap();
    let out = propagate(&psi, &v, &u, &cfg).unwrap();
    let t = dt * n as f64;
    let lam2 = u.kinetic_scale();
    let exact = sigma0 * (1.0 + (lam2 * t / (u.hbar() * sigma0 * sigma0)).powi(2)).sqrt();
    assert!((width(&psi) - sigma0).abs() < 1e-6);
    assert!((width(&out) - exact).abs() <= 1e-4, "{} vs {exact}", width(&out));
}

#[test]
fn oversized_steps_are_rejected() {
    let u = scaled();
    let g = make_grid(-8.0, 8.0, 121).unwrap();
    let v = g.sample(|x| x * x);
    let psi = coherent(&g, 2.0);
    for scheme in [Scheme::ImplicitMidpoint, Scheme::SplitOperator] {
        let cfg = PropagationConfig::new(0.2, 10, scheme).unwrap();
        assert!(matches!(propagate(&psi, &v, &u, &cfg), Err(SusyError::StepTooLarge { .. })), "{scheme:?}");
    }
}

#[test]
fn exact_exponentials_intertwine() {
    let g = make_grid(-8.0, 8.0, 80).unwrap();
    let w = ho_w(&g);
    let r = exact_intertwining_residual(&coherent(&g, 1.0), &w, 1.0).unwrap();
    assert!(r <= 1e-12, "{r:e}");
}

#[test]
fn midpoint_intertwines_to_rounding() {
    let g = make_grid(-8.0, 8.0, 80).unwrap();
    let w = ho_w(&g);
    let cfg = PropagationConfig::new(1e-2, 1, Scheme::ImplicitMidpoint).unwrap();
    let r = intertwining_residual(&coherent(&g, 1.0), &w, 1.0, &cfg).unwrap();
    assert!(r <= 1e-10, "{r:e}");
}

#[test]
fn split_intertwining_converges() {
    let g = make_grid(-8.0, 8.0, 80).unwrap();
    let w = ho_w(&g);
    let psi = coherent(&g, 1.0);
    let res = |dt: f64| {
        let cfg = PropagationConfig::new(dt, 1, Scheme::SplitOperator).unwrap();
        intertwining_residual(&psi, &w, 1.0, &cfg).unwrap()
    };
    let (r1, r2) = (res(1e-3), res(5e-4));
    assert!(r1 <= 1e-5, "{r1:e}");
    assert!(r1 / r2 >= 3.5, "{r1:e} -> {r2:e}");
}

#[test]
fn intertwining_edge_cases() {
    let g = make_grid(-8.0, 8.0, 80).unwrap();
    let w = ho_w(&g);
    let cfg = PropagationConfig::new(1e-3, 1, Scheme::SplitOperator).unwrap();
    assert_eq!(intertwining_residual(&coherent(&g, 1.0), &w, 0.0, &cfg).unwrap(), 0.0);
    let fine = make_grid(-8.0, 8.0, 161).unwrap();
    let ground = coherent(&fine, 0.0);
    assert!(matches!(
        intertwining_residual(&ground, &ho_w(&fine), 1.0, &cfg),
        Err(SusyError::ZeroPartnerState(_))
    ));
}
