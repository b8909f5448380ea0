use num_complex::Complex64;

use crobs_core::grid::GridSpec;
use crobs_core::io::field_from_json;
use crobs_core::linear::unit_basis;
use crobs_core::report::{compute_grid, compute_jet};
use crobs_core::solvers::{self, SolveConfig};
use crobs_core::{GaussianRational, HarmonicField};

type G = GaussianRational;

#[test]
fn grid_solve_matches_formal_series() {
    let cfg = SolveConfig {
        jet_order: 4,
        ..SolveConfig::default()
    };
    let u = unit_basis(8, 2, 0, 1).add(&unit_basis(8, 1, 1, 0).scale(&G::frac(1, 2)));
    let (series, rep) = solvers::partial_solve_jet(&u, &cfg).unwrap();
    assert!(rep.converged);
    assert!(series[0].is_zero() && series[1].is_zero());
    assert!(!series[2].is_zero());

    let eps = 1e-2;
    let sol = solvers::partial_solve_grid(&u.to_c64().scale(&Complex64::new(eps, 0.0)), &cfg, None)
        .unwrap();
    assert!(sol.report.converged);
    let mut summed = HarmonicField::zero(8);
    for (k, c) in series.iter().enumerate() {
        summed = summed.add(&c.to_c64().scale(&Complex64::new(eps.powi(k as i32), 0.0)));
    }
    let err = sol.psi.sub(&summed).l2_norm() / sol.psi.l2_norm();
    // the first omitted term is O(ε⁵) against a leading O(ε²)
    assert!(err < 1e-5, "relative gap {err:e}");
}

#[test]
fn report_identity_residuals() {
    let phi = field_from_json(
        r#"{"truncation": 4, "coefficients": [
            {"p": 2, "q": 0, "m": 0, "re": "1/3"},
            {"p": 0, "q": 1, "m": -1, "re": "1/4", "im": "-1/2"},
            {"p": 1, "q": 2, "m": 1, "im": "1/5"}]}"#,
    )
    .unwrap();
    let r = compute_jet(&phi, 3, 6).unwrap();
    assert!(
        r.identity_residual.iter().all(|s| s == "0"),
        "{:?}",
        r.identity_residual
    );
    assert_eq!(r.obstruction_integral[0], "0");
    assert_eq!(r.obstruction_integral[1], "0");

    let small = phi.to_c64().scale(&Complex64::new(1e-2, 0.0));
    let g = compute_grid(&small, GridSpec::for_bandwidth(20), 6).unwrap();
    let o: f64 = g.obstruction_integral[0].parse().unwrap();
    let res: f64 = g.identity_residual[0].parse().unwrap();
    assert!(o > 0.0);
    assert!(res <= 1e-9 * o, "{res:e} vs {o:e}");
}

#[test]
fn rigidity_certificate_flags_nonflat() {
    let cfg = SolveConfig::default();
    let phi = unit_basis(8, 3, 0, 1)
        .to_c64()
        .scale(&Complex64::new(1e-2, 0.0));
    let r = solvers::rigidity_certificate(&phi, &cfg).unwrap();
    assert!(r.not_obstruction_flat);
    assert!(r.obstruction_integral > 0.0);
    assert_eq!(r.p1_ratio, 0.0);
    let bad = unit_basis(8, 2, 2, 0).to_c64();
    assert!(solvers::rigidity_certificate(&bad, &cfg).is_err());
}
