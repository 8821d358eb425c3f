use nalgebra::DMatrix;
use proptest::prelude::*;
use susyqm_core::eigen::{eigenvalues, solve_potential};
use susyqm_core::grid::make_grid;
use susyqm_core::multidim::*;
use susyqm_core::potential::{Polynomial, Potential};
use susyqm_core::susy::{build_hierarchy, riccati_potential, superpotential_from_density, Sector, DEFAULT_DENSITY_FLOOR};
use susyqm_core::{ModelUnits, SusyError};

fn scaled() -> ModelUnits {
    ModelUnits::scaled()
}

fn ho_grid() -> Grid2D {
    Grid2D::square(-7.0, 7.0, 60).unwrap()
}

fn gaussian(g: &Grid2D) -> Field2D {
    g.sample(|x, y| (-0.5 * (x * x + y * y)).exp()).normalized()
}

/// Squared norm of the projection of `psi` onto the span of `basis`.
fn subspace_overlap(psi: &Field2D, basis: &[Field2D]) -> f64 {
    let m = DMatrix::from_fn(basis.len(), basis.len(), |i, j| basis[i].dot(&basis[j]));
    let b = nalgebra::DVector::from_iterator(basis.len(), basis.iter().map(|f| f.dot(psi)));
    let c = m.clone().cholesky().unwrap().solve(&b);
    b.dot(&c) / psi.dot(psi)
}

#[test]
fn oscillator_superpotential_is_linear() {
    let g = ho_grid();
    let w = vector_superpotential(&gaussian(&g), &scaled()).unwrap();
    for p in 0..g.len() {
        let (x, y) = g.point(p);
        assert!((w.field().x()[p] - x).abs() < 1e-8 && (w.field().y()[p] - y).abs() < 1e-8, "at ({x}, {y})");
    }
}

#[test]
fn separable_state_gives_separable_superpotential() {
    let g = Grid2D::square(-3.0, 3.0, 41).unwrap();
    let psi = g.sample(|x, y| (-0.25 * x.powi(4) - 0.3 * x).exp() * (-(y - 0.2).powi(2)).exp());
    let w = vector_superpotential(&psi, &scaled()).unwrap();
    for i in 0..g.nx() {
        let col: Vec<f64> =
            (0..g.ny()).map(|j| g.index(i, j)).filter(|&p| w.support()[p]).map(|p| w.field().x()[p]).collect();
        let spread = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - col.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 1e-10, "column {i}: {spread:e}");
    }
}

#[test]
fn radial_state_gives_radial_superpotential() {
    let g = Grid2D::square(-4.0, 4.0, 41).unwrap();
    let psi = g.sample(|x, y| {
        let r2 = x * x + y * y;
        (-0.15 * r2 - 0.005 * r2 * r2).exp()
    });
    let w = vector_superpotential(&psi, &scaled()).unwrap();
    for p in 0..g.len() {
        let (x, y) = g.point(p);
        assert!((x * w.field().y()[p] - y * w.field().x()[p]).abs() <= 1e-8);
    }
}

#[test]
fn superpotential_rejects_bad_states() {
    let g = Grid2D::square(-3.0, 3.0, 21).unwrap();
    assert!(matches!(vector_superpotential(&Field2D::zeros(&g), &scaled()), Err(SusyError::DegenerateDensity { .. })));
    let narrow = g.sample(|x, y| (-40.0 * (x * x + y * y)).exp());
    assert!(matches!(vector_superpotential(&narrow, &scaled()), Err(SusyError::DegenerateDensity { .. })));
    assert!(vector_superpotential(&g.sample(|x, y| x + 0.1 * y), &scaled()).is_err());
}

#[test]
fn oscillator_riccati_relation_and_negative_control() {
    let g = ho_grid();
    let v0 = g.sample(|x, y| x * x + y * y);
    let w = vector_superpotential(&gaussian(&g), &scaled()).unwrap();
    assert!(scalar_sector1_check(&w, &v0, 2.0).unwrap() <= 1e-6);
    let doubled = VectorSuperpotential::from_fn(&g, |x, y| (2.0 * x, 2.0 * y), scaled()).unwrap();
    assert!(scalar_sector1_check(&doubled, &v0, 2.0).unwrap() > 1.0);
}

#[test]
fn embedded_one_dimensional_riccati_relation() {
    let u = scaled();
    let line = make_grid(-3.0, 3.0, 241).unwrap();
    let sextic = Polynomial::sextic();
    let s = solve_potential(&sextic.sample(&line), &u, 1).unwrap();
    let f = s.states[0].values().to_vec();
    let gy = make_grid(-5.0, 5.0, 61).unwrap();
    let g = Grid2D::new(line.clone(), gy);
    let psi = Field2D::new(&g, (0..g.len()).map(|p| {
        let (i, _) = g.coords(p);
        let (_, y) = g.point(p);
        f[i] * (-0.5 * y * y).exp()
    }).collect()).unwrap();
    let v0 = g.sample(|x, y| sextic.value(x) + y * y);
    let w = vector_superpotential(&psi, &u).unwrap();
    let r = scalar_sector1_check(&w, &v0, s.energies[0] + 1.0).unwrap();
    assert!(r <= 1e-6, "{r:e}");
}

#[test]
fn naive_partner_of_the_oscillator() {
    let u = scaled();
    let g = Grid2D::square(-6.0, 6.0, 40).unwrap();
    let w = vector_superpotential(&gaussian(&g), &u).unwrap();
    let u2 = naive_scalar_partner(&w);
    for p in 0..g.len() {
        let (x, y) = g.point(p);
        let want = x * x + y * y + 2.0;
        assert!((u2.values()[p] - want).abs() <= 1e-9 * want, "at ({x}, {y})");
    }
    // Ground of U₂ against the n + m = 2 level of H₁ − E₀ (levels 0, 2, 2, 4, 4, 4).
    let partner = solve_potential_2d(&u2, &u, 1).unwrap();
    let shifted = solve_potential_2d(&g.sample(|x, y| x * x + y * y - 2.0), &u, 6).unwrap();
    for e in &shifted.energies[3..6] {
        assert!((partner.energies[0] - e).abs() <= 1e-6, "{} vs {e}", partner.energies[0]);
    }
}

#[test]
fn naive_partner_reduces_to_one_dimension() {
    let u = scaled();
    let line = make_grid(-3.0, 3.0, 241).unwrap();
    let sextic = Polynomial::sextic();
    let s = solve_potential(&sextic.sample(&line), &u, 1).unwrap();
    let rho = s.states[0].map(|_, p| p * p);
    let w1 = superpotential_from_density(&rho, u, DEFAULT_DENSITY_FLOOR).unwrap();
    let v2_line = riccati_potential(&w1, Sector::Plus);
    let g = Grid2D::new(line, make_grid(-5.0, 5.0, 31).unwrap());
    let f = s.states[0].values().to_vec();
    let psi = Field2D::new(&g, (0..g.len()).map(|p| {
        let (i, _) = g.coords(p);
        let (_, y) = g.point(p);
        f[i] * (-0.5 * y * y).exp()
    }).collect()).unwrap();
    let w = vector_superpotential(&psi, &u).unwrap();
    let u2 = naive_scalar_partner(&w);
    for p in (0..g.len()).filter(|&p| w.support()[p]) {
        let (i, _) = g.coords(p);
        let (_, y) = g.point(p);
        let want = v2_line.values()[i] + y * y + 1.0;
        assert!((u2.values()[p] - want).abs() < 1e-6 * want.abs().max(1.0), "at {p}");
    }
}

#[test]
fn discrete_isospectrality_is_exact() {
    let g = Grid2D::new(make_grid(-3.0, 3.0, 11).unwrap(), make_grid(-2.0, 2.0, 9).unwrap());
    let w = VectorSuperpotential::from_fn(&g, |x, y| (x + 0.3 * (2.0 * y).sin(), 1.5 * y - 0.2 * x * y), scaled()).unwrap();
    let op = tensor_sector_hamiltonian(&w);
    let b = op.stacked_charges();
    let h1 = b.transpose() * &b;
    let h2 = op.assemble();
    assert!((&h2 - &b * b.transpose()).abs().max() < 1e-12 * h2.abs().max());
    let e1 = eigenvalues(&h1);
    let e2 = eigenvalues(&h2);
    let n = g.len();
    let norm = e1[n - 1];
    assert!(e2[..n].iter().all(|e| e.abs() < 1e-10 * norm));
    for (a, b) in e1.iter().zip(&e2[n..]) {
        assert!((a - b).abs() <= 1e-10 * norm, "{a} vs {b}");
    }
}

#[test]
fn zero_superpotential_spectrum() {
    // With W = 0 the off-diagonal blocks D_x D_yᵀ survive, so the nonzero
    // spectrum is one copy of the free kinetic spectrum, padded with N zeros.
    let g = Grid2D::square(-2.0, 2.0, 8).unwrap();
    let op = tensor_sector_hamiltonian(&VectorSuperpotential::from_fn(&g, |_, _| (0.0, 0.0), scaled()).unwrap());
    let dx = op.charge_matrix(Axis::X);
    let dy = op.charge_matrix(Axis::Y);
    let free = eigenvalues(&(dx.transpose() * &dx + dy.transpose() * &dy));
    let e2 = eigenvalues(&op.assemble());
    let n = g.len();
    let norm = free[n - 1];
    assert!(e2[..n].iter().all(|e| e.abs() < 1e-10 * norm));
    for (a, b) in free.iter().zip(&e2[n..]) {
        assert!((a - b).abs() <= 1e-10 * norm);
    }
}

#[test]
fn oscillator_tensor_sector() {
    let u = scaled();
    let g = ho_grid();
    let psi0 = gaussian(&g);
    let w = vector_superpotential(&psi0, &u).unwrap();
    let op = tensor_sector_hamiltonian(&w);
    let spec = tensor_ground_state(&op, 3).unwrap();
    assert!((spec.energies[0] - 2.0).abs() <= 1e-6 && (spec.energies[1] - 2.0).abs() <= 1e-6, "{:?}", spec.energies);
    assert!((spec.energies[2] - 4.0).abs() <= 1e-6);
    let low = spec.lowest_subspace();
    assert_eq!(low.len(), 2);

    let region: Vec<bool> = psi0.values().iter().map(|p| p * p > 1e-10 * psi0.max_abs().powi(2)).collect();
    let (best, ratio) = nodeless_combination(low, Some(&region)).unwrap();
    assert!(ratio >= 1e-8, "{ratio:e}");
    assert!(best.magnitude().iter().all(|&m| m > 0.0));

    let direct = solve_potential_2d(&g.sample(|x, y| x * x + y * y), &u, 3).unwrap();
    assert!(((direct.energies[1] - direct.energies[0]) - spec.energies[0]).abs() <= 1e-6);
    let excited = &direct.states[1..3];
    for v in low {
        let psi1 = descend_state(v, spec.energies[0], &w).unwrap();
        let o = subspace_overlap(&psi1, excited);
        assert!(o >= 1.0 - 1e-6, "overlap {o}");
        assert!((vector_rayleigh_quotient(&op, v).unwrap() - spec.energies[0]).abs() <= 1e-10);
    }

    // Intertwining: A⃗ψ₁ of a sector-1 excited state is an H₂ eigenvector.
    let gap = direct.energies[1] - direct.energies[0];
    let image = w.gradient_charge(&direct.states[1]).unwrap();
    let h_image = op.apply_field(&image).unwrap();
    let diff = VectorField2::new(
        &g,
        h_image.x().iter().zip(image.x()).map(|(h, a)| h - gap * a).collect(),
        h_image.y().iter().zip(image.y()).map(|(h, a)| h - gap * a).collect(),
    )
    .unwrap();
    assert!(diff.norm() <= 1e-6 * image.norm(), "{:e}", diff.norm() / image.norm());
}

#[test]
fn closed_form_descent() {
    let u = scaled();
    let g = ho_grid();
    let w = VectorSuperpotential::from_fn(&g, |x, y| (x, y), u).unwrap();
    let e = g.sample(|x, y| (-0.5 * (x * x + y * y)).exp());
    let zero = Field2D::zeros(&g);
    for (v, target) in [
        (VectorField2::new(&g, e.values().to_vec(), zero.values().to_vec()).unwrap(), g.sample(|x, y| x * (-0.5 * (x * x + y * y)).exp())),
        (VectorField2::new(&g, zero.values().to_vec(), e.values().to_vec()).unwrap(), g.sample(|x, y| y * (-0.5 * (x * x + y * y)).exp())),
    ] {
        let psi = descend_state(&v, 2.0, &w).unwrap();
        let o = psi.dot(&target.normalized()).powi(2);
        assert!(o >= 1.0 - 1e-8, "{o}");
    }
    // Round trip through A⃗.
    let psi1 = g.sample(|x, y| x * (-0.5 * (x * x + y * y)).exp()).normalized();
    let up = w.gradient_charge(&psi1).unwrap().scaled(1.0 / 2f64.sqrt());
    let back = descend_state(&up, 2.0, &w).unwrap();
    assert!(back.dot(&psi1).powi(2) >= 1.0 - 1e-8);
}

#[test]
fn rayleigh_quotient_examples() {
    let g = ho_grid();
    let w = VectorSuperpotential::from_fn(&g, |x, y| (x, y), scaled()).unwrap();
    let op = tensor_sector_hamiltonian(&w);
    let e = gaussian(&g);
    let trial = VectorField2::new(&g, e.values().to_vec(), vec![0.0; g.len()]).unwrap();
    let q = vector_rayleigh_quotient(&op, &trial).unwrap();
    assert!(q >= 2.0 - 1e-9);
    let q7 = vector_rayleigh_quotient(&op, &trial.scaled(7.0)).unwrap();
    assert!((q - q7).abs() <= 1e-12 * q);
}

fn small_operator() -> (TensorSectorOperator, f64) {
    let g = Grid2D::square(-4.0, 4.0, 10).unwrap();
    let w = VectorSuperpotential::from_fn(&g, |x, y| (x + 0.2 * y, y - 0.1 * x * x), scaled()).unwrap();
    let op = tensor_sector_hamiltonian(&w);
    let n = g.len();
    let lowest_nonzero = eigenvalues(&op.assemble())[n];
    (op, lowest_nonzero)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn rayleigh_quotient_bounds_the_lowest_level(seed in any::<u64>()) {
        let (op, floor) = small_operator();
        let g = op.superpotential().grid().clone();
        // Trials in the range of B, where H₂ is bounded below by its lowest nonzero level.
        let r = susyqm_core::krylov::random_block(g.len(), 1, seed).remove(0);
        let psi = Field2D::new(&g, r).unwrap();
        let trial = op.superpotential().gradient_charge(&psi).unwrap();
        prop_assert!(vector_rayleigh_quotient(&op, &trial).unwrap() >= floor - 1e-9);
    }
}

#[test]
fn non_separable_gap_matches_direct_diagonalization() {
    let u = scaled();
    let g = Grid2D::square(-7.0, 7.0, 80).unwrap();
    let v = g.sample(|x, y| x * x + y * y + 0.1 * x * x * y * y);
    let direct = solve_potential_2d(&v, &u, 3).unwrap();
    let gap = direct.energies[1] - direct.energies[0];
    let w = vector_superpotential(&direct.states[0], &u).unwrap();
    let op = tensor_sector_hamiltonian(&w);
    let spec = tensor_ground_state(&op, 2).unwrap();
    assert!((spec.energies[0] - gap).abs() <= 1e-6, "{} vs {gap}", spec.energies[0]);
    for v2 in spec.lowest_subspace() {
        let psi1 = descend_state(v2, spec.energies[0], &w).unwrap();
        assert!(subspace_overlap(&psi1, &direct.states[1..3]) >= 1.0 - 1e-6);
    }
}

#[test]
fn sector3_of_an_embedded_chain() {
    let u = scaled();
    let line = make_grid(-2.0, 2.0, 61).unwrap();
    let h = build_hierarchy(&Polynomial::sextic().sample(&line), u, 3).unwrap();
    let phi: Vec<f64> = h.sectors[1].ground_density.values().iter().map(|r| r.sqrt()).collect();
    let g = Grid2D::new(line.clone(), line);
    let prod: Vec<f64> = (0..g.len()).map(|p| {
        let (i, j) = g.coords(p);
        phi[i] * phi[j]
    }).collect();
    let v0 = VectorField2::new(&g, prod.clone(), prod).unwrap();
    let e02 = h.sectors[1].ground_energy_local;
    let h3 = sector3_hamiltonian(&v0, e02, &u).unwrap();
    let e3 = h3.lowest(1).unwrap().energies[0];
    let want = e02 + 2.0 * h.sectors[2].ground_energy_local;
    assert!((e3 - want).abs() <= 1e-6, "{e3} vs {want}");
}

#[test]
fn sector3_of_gaussian_components() {
    // Each component gives W₂μ = λx_μ, so H₃ = λ²(−∇² + r² + 2) + E₀₂ with ground E₀₂ + 4λ².
    let u = scaled();
    let g = Grid2D::square(-4.0, 4.0, 60).unwrap();
    let a = g.sample(|x, y| (-0.5 * (x * x + y * y)).exp());
    let b = g.sample(|x, y| (-0.5 * (x * x + y * y) + 0.3 * x).exp());
    let v0 = VectorField2::new(&g, a.values().to_vec(), b.values().to_vec()).unwrap();
    let r = sector2_annihilation(&v0, &u).unwrap();
    assert!(r <= 1e-8, "{r:e}");
    let e3 = sector3_hamiltonian(&v0, 0.5, &u).unwrap().lowest(1).unwrap().energies[0];
    let want = 0.5 + 4.0 * u.lambda().powi(2);
    assert!((e3 - want).abs() <= 1e-6, "{e3} vs {want}");
}

#[test]
fn sector3_rejects_vanishing_components() {
    let g = Grid2D::square(-4.0, 4.0, 30).unwrap();
    let e = gaussian(&g);
    let v0 = VectorField2::new(&g, e.values().to_vec(), vec![0.0; g.len()]).unwrap();
    assert!(matches!(sector3_hamiltonian(&v0, 2.0, &scaled()), Err(SusyError::VanishingComponent { component: "y" })));
}
