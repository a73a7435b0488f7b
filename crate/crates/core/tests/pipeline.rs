mod common;

use common::*;
use evanskit::evans::*;
use evanskit::fredholm::*;
use evanskit::jost::*;
use evanskit::numerics::{ComplexMatrix, C64};
use evanskit::system::catalog::{gap_counterexample, gap_counterexample_truncated};
use evanskit::system::{FactorizationKind, Potential};
use evanskit::Error;

fn sech2_family(k: C64) -> evanskit::Result<(JostContext, evanskit::system::Factorization)> {
    let case = schrodinger_problem(&Potential::poschl_teller(2.0), k, false)?;
    Ok((case.context(SolverSettings::default())?, case.factorization()?))
}

fn zero_family(k: C64) -> evanskit::Result<(JostContext, evanskit::system::Factorization)> {
    let case = schrodinger_problem(&Potential::zero(), k, true)?;
    Ok((case.context(SolverSettings::default())?, case.factorization()?))
}

fn no_nystrom() -> PipelineOptions {
    PipelineOptions { nystrom_nodes: None, ..Default::default() }
}

#[test]
fn column_determinant_matches_evans_determinant() {
    for n in [1.0, 2.0, 5.0] {
        let (ctx, _) = polar_context(gap_counterexample_truncated(n).unwrap(), 20.0);
        let set = solve_jost_set(&ctx, None).unwrap();
        let d = evans_determinant(&ctx.splitting, &set.plus, &set.minus).unwrap();
        let e = evans_from_columns(&ctx.splitting, &set.plus, &set.minus).unwrap();
        assert_eq!(d, e, "n = {n}");
    }
}

#[test]
fn column_determinant_in_a_rotated_basis() {
    let (ctx, _) = polar_context(random_compact_system(5, 1.0, 0.5), 5.0);
    let set = solve_jost_set(&ctx, None).unwrap();
    let d = evans_determinant(&ctx.splitting, &set.plus, &set.minus).unwrap();
    let e = evans_from_columns(&ctx.splitting, &set.plus, &set.minus).unwrap();
    assert!((d - e).norm() < 1e-10 * d.norm(), "{d} vs {e}");
}

#[test]
fn truncated_counterexample_has_explicit_solution() {
    let n = 2.0f64;
    let (ctx, _) = polar_context(gap_counterexample_truncated(n).unwrap(), 20.0);
    let q = ctx.dichotomy();
    let plus = solve_jost_volterra(&ctx, &q, Side::Plus).unwrap();
    let want = ComplexMatrix::from_real_rows(&[&[1.0, -n.sin(), 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 0.0]]);
    assert!(plus.initial.approx_eq(&want, 1e-10, 0.0), "{:?}", plus.initial);
    assert!(plus.ode_residual(&ctx.problem).unwrap() < 1e-6);
}

#[test]
fn counterexample_routes() {
    let (ctx, _) = polar_context(gap_counterexample().unwrap(), 20.0);
    assert!(matches!(check_volterra_hypothesis(&ctx, &[1, 2], Side::Plus), Err(Error::HypothesisViolated { .. })));
    assert!(check_mixed_hypothesis(&ctx).is_ok());
    assert_eq!(default_route(&ctx), Route::Mixed);
    let set = solve_jost_set(&ctx, None).unwrap();
    let (_, d) = evans_of(&ctx, &set).unwrap();
    assert!((d - c(1.0, 0.0)).norm() < 1e-8, "{d}");
    let y2 = &set.plus[1];
    assert!(y2.initial.matmul(ctx.splitting.projection(2)).approx_eq(&y2.initial, 1e-12, 0.0));
}

#[test]
fn routes_agree_on_sech2() {
    let (case, ctx, _) = schrodinger(&Potential::poschl_teller(2.0), c(0.4, 1.3), 20.0);
    let want = jost_function_reference(&case, 20.0).unwrap();
    for route in [Route::Volterra, Route::Weighted, Route::Mixed] {
        let set = solve_jost_set(&ctx, Some(route)).unwrap();
        let d = evans_of(&ctx, &set).unwrap().1;
        assert!((d - want).norm() < 1e-8, "{route:?}: {d} vs {want}");
        for s in set.all() {
            assert!(s.defect_decay_ratio() < 1.0, "{route:?}: defect ratio {}", s.defect_decay_ratio());
        }
    }
}

#[test]
fn split_point_does_not_matter() {
    let (ctx, fac) = polar_context(random_compact_system(9, 1.2, 0.4), 5.0);
    let kernel = build_semiseparable(&ctx, &fac, &ctx.grid(-5.0, 5.0).unwrap()).unwrap();
    let hats = hat_solution(&kernel, 1e-13, 500).unwrap();
    let base = hats.det2(0.0).unwrap();
    for x0 in [-2.0, -0.5, 1.0, 3.0] {
        assert!((hats.det2(x0).unwrap() - base).norm() < 1e-8 * base.norm());
    }
}

#[test]
fn polar_and_schrodinger_factors_agree_on_square_well() {
    let (case, ctx, fac) = schrodinger(&Potential::square_well(-2.0, 1.0).unwrap(), c(-0.2, 0.8), 6.0);
    let polar = evanskit::system::factorize_perturbation(&case.problem, FactorizationKind::Polar).unwrap();
    let grid = ctx.grid(-6.0, 6.0).unwrap();
    let a = det2_semiseparable(&build_semiseparable(&ctx, &fac, &grid).unwrap(), 0.0).unwrap();
    let b = det2_semiseparable(&build_semiseparable(&ctx, &polar, &grid).unwrap(), 0.0).unwrap();
    assert!((a - b).norm() < 1e-8 * a.norm());
}

#[test]
fn plain_and_corrected_nystrom_converge_to_the_same_value() {
    let (ctx, fac) = polar_context(random_compact_system(2, 1.0, 0.5), 4.0);
    let semi = det2_semiseparable(&build_semiseparable(&ctx, &fac, &ctx.grid(-4.0, 4.0).unwrap()).unwrap(), 0.0).unwrap();
    let kernel = build_semiseparable(&ctx, &fac, &nystrom_grid(&ctx, 400).unwrap()).unwrap();
    let plain = det2_nystrom_kernel(&kernel, NystromRule::Plain).unwrap().value;
    let corrected = det2_nystrom_kernel(&kernel, NystromRule::TraceCorrected).unwrap().value;
    assert!((corrected - semi).norm() < 1e-6 * semi.norm());
    assert!((plain - semi).norm() < 3e-2 * semi.norm());
    assert!((corrected - semi).norm() < (plain - semi).norm());
}

#[test]
fn free_family_scans_to_one() {
    let pts = [c(0.5, 0.5), c(-1.0, 2.0), c(2.0, 0.0)];
    let scan = evans_scan(&zero_family, &pts, &PipelineOptions::default(), false);
    for r in &scan.values {
        let r = r.as_ref().unwrap();
        assert!((r.evans_det - c(1.0, 0.0)).norm() < 1e-12);
        assert!(r.identity_residual < 1e-10);
    }
    let count = count_zeros(&zero_family, c(0.0, 1.0), 0.5, 8, 64, &no_nystrom()).unwrap().winding;
    assert_eq!(count, 0);
}

#[test]
fn scan_records_failures_per_point() {
    let pts = [c(0.0, 2.0), c(1.0, 0.0), c(0.0, 1.5)];
    let scan = evans_scan(&sech2_family, &pts, &no_nystrom(), false);
    assert!(scan.values[0].is_ok() && scan.values[2].is_ok());
    assert!(matches!(scan.values[1], Err(Error::InvalidInput(_))));
    assert!(scan.evans_values().is_err());
}

#[test]
fn contour_through_bound_state_is_rejected() {
    // the point at angle -pi/2 is k = i, where D vanishes
    let err = count_zeros(&sech2_family, c(0.0, 1.3), 0.3, 16, 64, &no_nystrom()).unwrap_err();
    assert!(matches!(err, Error::NearZeroContour { .. }), "{err}");
}

#[test]
fn winding_refines_coarse_contours() {
    let count = count_zeros(&sech2_family, c(0.0, 1.0), 0.5, 4, 64, &no_nystrom()).unwrap().winding;
    assert_eq!(count, 1);
}

#[test]
fn report_json_round_trips_values() {
    let (_, ctx, fac) = schrodinger(&Potential::poschl_teller(2.0), c(0.3, 1.5), 20.0);
    let r = verify_identity(&ctx, &fac, &PipelineOptions { nystrom_nodes: Some(200), ..Default::default() }).unwrap();
    let text = serde_json::to_string(&r.to_json()).unwrap();
    let back: serde_json::Value = serde_json::from_str(&text).unwrap();
    let d = back["evans_det"].as_array().unwrap();
    assert_eq!(C64::new(d[0].as_f64().unwrap(), d[1].as_f64().unwrap()), r.evans_det);
}
