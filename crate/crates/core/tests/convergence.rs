use susyqm_core::convergence::*;
use susyqm_core::potential::{Polynomial, PolynomialW};
use susyqm_core::{ModelUnits, SusyError};

/// W = x³ + 2x, whose sector-1 potential is x⁶ + 4x⁴ + x² − 2.
fn sextic_w() -> PolynomialW {
    PolynomialW(Polynomial::new(vec![0.0, 2.0, 0.0, 1.0]))
}

const DOMAIN: (f64, f64) = (-5.0, 5.0);

#[test]
fn partner_estimate_is_more_accurate_at_every_size() {
    let ns: Vec<usize> = (15..=40).collect();
    let rows = convergence_study(&sextic_w(), DOMAIN, &ns, 100, &ModelUnits::scaled()).unwrap();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), ns);
    for r in &rows {
        assert!(r.eps02 < r.eps11, "n = {}: {} vs {}", r.n, r.eps02, r.eps11);
        assert_eq!(r.eps11, log_error(r.err11));
    }
    let m = median_error_ratio(&rows);
    assert!((10.0..=1000.0).contains(&m), "median ratio {m}");
}

#[test]
fn self_comparison_hits_the_floor() {
    let rows = convergence_study(&sextic_w(), DOMAIN, &[100], 100, &ModelUnits::scaled()).unwrap();
    assert_eq!(rows[0].eps11, LOG_ERROR_FLOOR);
    assert_eq!(log_error(0.0), -16.0);
}

#[test]
fn reference_must_cover_every_size() {
    let r = convergence_study(&sextic_w(), DOMAIN, &[20, 120], 100, &ModelUnits::scaled());
    assert!(matches!(r, Err(SusyError::InvalidArgument(_))));
}

#[test]
fn refinement_is_monotone() {
    let rows = convergence_study(&sextic_w(), (-6.0, 6.0), &[20, 30, 40, 60], 100, &ModelUnits::scaled()).unwrap();
    for pair in rows.windows(2) {
        assert!(pair[1].err11 <= pair[0].err11.max(1e-12), "{:?}", pair);
    }
}

#[test]
fn results_do_not_depend_on_scheduling() {
    let ns: Vec<usize> = (15..=40).collect();
    let a = convergence_study(&sextic_w(), DOMAIN, &ns, 100, &ModelUnits::scaled()).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| convergence_study(&sextic_w(), DOMAIN, &ns, 100, &ModelUnits::scaled()).unwrap());
    assert_eq!(a, b);
}
