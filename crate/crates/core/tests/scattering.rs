use num_complex::Complex64;
use susyqm_core::grid::{make_grid, Grid1D};
use susyqm_core::potential::TanhW;
use susyqm_core::scattering::*;
use susyqm_core::susy::SuperPotential;
use susyqm_core::{ModelUnits, RealField, SusyError};

fn wide() -> Grid1D {
    make_grid(-20.0, 20.0, 16001).unwrap()
}

fn superpotentials(g: &Grid1D) -> Vec<SuperPotential> {
    let u = ModelUnits::scaled();
    [
        TanhW { offset: 0.0, amplitude: 1.0, scale: 1.0 },
        TanhW { offset: 0.4, amplitude: 0.1, scale: 1.0 },
        TanhW { offset: -0.2, amplitude: 0.5, scale: 2.0 },
    ]
    .iter()
    .map(|w| SuperPotential::from_analytic(g, w, u))
    .collect()
}

#[test]
fn free_partner_map_is_identity() {
    let g = make_grid(-10.0, 10.0, 201).unwrap();
    let w = SuperPotential::new(&g, vec![0.0; g.len()], ModelUnits::scaled()).unwrap();
    let s2 = ScatteringAmplitudes { energy: 2.0, k: 2f64.sqrt(), k_prime: 2f64.sqrt(), r: Complex64::new(0.0, 0.0), t: Complex64::new(1.0, 0.0) };
    let s1 = partner_amplitudes(&s2, &w).unwrap();
    assert_eq!(s1.r.norm(), 0.0);
    assert!((s1.t - Complex64::new(1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn partner_map_preserves_moduli() {
    let g = make_grid(-40.0, 40.0, 801).unwrap();
    let w = SuperPotential::from_analytic(&g, &TanhW { offset: 0.4, amplitude: 0.1, scale: 1.0 }, ModelUnits::scaled());
    assert!((w.w_minus() - 0.3).abs() < 1e-12 && (w.w_plus() - 0.5).abs() < 1e-12);
    let s2 = ScatteringAmplitudes {
        energy: 1.0,
        k: (1.0f64 - 0.09).sqrt(),
        k_prime: (1.0f64 - 0.25).sqrt(),
        r: Complex64::new(0.3, -0.2),
        t: Complex64::new(0.1, 0.8),
    };
    let s1 = partner_amplitudes(&s2, &w).unwrap();
    assert!((s1.r.norm() - s2.r.norm()).abs() <= 1e-12);
    assert!((s1.t.norm() - s2.t.norm()).abs() <= 1e-12);
    let back = inverse_partner_amplitudes(&s1, &w).unwrap();
    assert!((back.r - s2.r).norm() < 1e-14 && (back.t - s2.t).norm() < 1e-14);
    let closed = ScatteringAmplitudes { energy: 0.2, ..s2 };
    assert!(matches!(partner_amplitudes(&closed, &w), Err(SusyError::ClosedChannel { .. })));
}

#[test]
fn free_potential() {
    let g = make_grid(-10.0, 10.0, 401).unwrap();
    let s = solve_scattering(&RealField::zeros(&g), 0.7, &ModelUnits::scaled()).unwrap();
    assert!(s.r.norm() < 1e-12);
    assert!((s.t.norm() - 1.0).abs() < 1e-12);
}

#[test]
fn square_barrier_matches_closed_form() {
    let g = make_grid(-10.0, 10.0, 2021).unwrap();
    let v = g.sample(|x| if x.abs() < 0.5 { 1.0 } else { 0.0 });
    let (e, v0, a) = (2.0f64, 1.0f64, 1.0f64);
    let s = solve_scattering(&v, e, &ModelUnits::scaled()).unwrap();
    let q = (e - v0).sqrt();
    let exact = 1.0 / (1.0 + v0 * v0 * (q * a).sin().powi(2) / (4.0 * e * (e - v0)));
    assert!((s.t.norm_sqr() - exact).abs() < 1e-6, "{} vs {exact}", s.t.norm_sqr());
    assert!(s.flux_defect().abs() < 1e-6);
}

#[test]
fn poschl_teller_is_reflectionless() {
    let g = wide();
    let v = g.sample(|x| 1.0 - 2.0 / x.cosh().powi(2));
    for e in [1.5, 2.0, 4.0] {
        let s = solve_scattering(&v, e, &ModelUnits::scaled()).unwrap();
        assert!(s.r.norm() <= 1e-6, "E={e} |R|={}", s.r.norm());
    }
}

#[test]
fn tanh_partner_oracle_is_reflectionless() {
    let g = wide();
    let w = &superpotentials(&g)[0];
    for e in [1.2, 2.5, 6.0] {
        let (s1, s2) = partner_scattering(w, e).unwrap();
        assert!(s2.r.norm() < 1e-8, "{}", s2.r.norm());
        assert!(s1.r.norm() <= 1e-6);
    }
}

#[test]
fn partner_probabilities_and_mapping_agree() {
    let g = wide();
    for w in superpotentials(&g) {
        let floor = w.w_minus().powi(2).max(w.w_plus().powi(2));
        for i in 0..20 {
            let e = floor + 0.1 + 0.25 * i as f64;
            let (s1, s2) = partner_scattering(&w, e).unwrap();
            assert!((s1.r.norm() - s2.r.norm()).abs() <= 1e-5);
            assert!((s1.t.norm() - s2.t.norm()).abs() <= 1e-5);
            let mapped = partner_amplitudes(&s2, &w).unwrap();
            assert!((mapped.r - s1.r).norm() <= 1e-5, "E={e}");
            assert!((mapped.t - s1.t).norm() <= 1e-5, "E={e}");
            let inverse = inverse_partner_amplitudes(&s1, &w).unwrap();
            assert!((inverse.r - s2.r).norm() <= 1e-5 && (inverse.t - s2.t).norm() <= 1e-5);
            for s in [s1, s2] {
                assert!(s.flux_defect().abs() <= 1e-6);
                assert!((s.k - (e - w.w_minus().powi(2)).sqrt()).abs() <= 1e-8);
                assert!((s.k_prime - (e - w.w_plus().powi(2)).sqrt()).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn heavier_particle_rescales_wavenumbers() {
    let g = make_grid(-10.0, 10.0, 2021).unwrap();
    let v = g.sample(|x| if x.abs() < 0.5 { 1.0 } else { 0.0 });
    let u = ModelUnits::new(1.0, 2.0).unwrap();
    let s = solve_scattering(&v, 2.0, &u).unwrap();
    assert!((s.k - 8f64.sqrt()).abs() < 1e-12);
    assert!(s.flux_defect().abs() < 1e-6);
}
