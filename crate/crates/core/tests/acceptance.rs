//! One line per acceptance criterion. Runs without the libtest harness so the
//! lines reach the console; exits nonzero when any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use evanskit::evans::*;
use evanskit::fredholm::*;
use evanskit::jost::*;
use evanskit::numerics::{projection_rank, ComplexMatrix, C64};
use evanskit::system::catalog::{gap_counterexample, gap_counterexample_truncated};
use evanskit::system::{factorize_perturbation, FactorizationKind, Potential};
use evanskit::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn sech2() -> Potential {
    Potential::poschl_teller(2.0)
}

fn closed_form(k: C64) -> C64 {
    (k - c(0.0, 1.0)) / (k + c(0.0, 1.0))
}

fn fast() -> PipelineOptions {
    PipelineOptions { nystrom_nodes: None, ..Default::default() }
}

fn free_case() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let (_, ctx, fac) = schrodinger(&Potential::zero(), c(0.0, 2.0), 20.0);
    let mut reports = vec![verify_identity(&ctx, &fac, &PipelineOptions::default()).map_err(fail)?];
    let p = random_compact_system(3, 1.5, 0.0);
    let (ctx, fac) = polar_context(p, 6.0);
    reports.push(verify_identity(&ctx, &fac, &PipelineOptions::default()).map_err(fail)?);
    for r in &reports {
        let one = c(1.0, 0.0);
        let nys = r.det2_nystrom.ok_or("Nyström path missing")?;
        for v in [r.theta + one, r.evans_det, r.det2_semiseparable, nys] {
            worst = worst.max((v - one).norm());
        }
    }
    let elapsed = start.elapsed();
    ensure(worst < 1e-10, format!("largest deviation {worst:.2e}"))?;
    ensure(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("largest deviation {worst:.2e} in {elapsed:.2?}"))
}

fn schrodinger_anchor() -> Outcome {
    let start = Instant::now();
    let k = c(0.0, 2.0);
    let (case, ctx, fac) = schrodinger(&sech2(), k, 20.0);
    let opts = PipelineOptions { nystrom_nodes: Some(2000), ..Default::default() };
    let r = verify_identity(&ctx, &fac, &opts).map_err(fail)?;
    let shoot = jost_function_reference(&case, 20.0).map_err(fail)?;
    let e3 = c(1.0f64.exp() / 3.0, 0.0);
    let grid = nystrom_grid(&ctx, 2000).map_err(fail)?;
    let l = det2_nystrom(&scalar_schrodinger_kernel(&case), &grid).map_err(fail)?.value;
    let nys = r.det2_nystrom.ok_or("Nyström path missing")?;
    let errs = [
        ("D - 1/3", (r.evans_det - c(1.0 / 3.0, 0.0)).norm(), 1e-6),
        ("D - shooting", (r.evans_det - shoot).norm(), 1e-6),
        ("Theta - 1", (r.theta - c(1.0, 0.0)).norm(), 1e-8),
        ("semi-separable - e/3", (r.det2_semiseparable - e3).norm(), 1e-4),
        ("Nystrom K - e/3", (nys - e3).norm(), 1e-4),
        ("Nystrom L - e/3", (l - e3).norm(), 1e-4),
    ];
    let elapsed = start.elapsed();
    for (name, err, tol) in errs {
        ensure(err < tol, format!("{name} = {err:.2e} exceeds {tol:.0e}"))?;
    }
    ensure(elapsed < Duration::from_secs(30), format!("took {elapsed:?}"))?;
    let detail: Vec<String> = errs.iter().map(|(n, e, _)| format!("{n} {e:.1e}")).collect();
    Ok(format!("{} in {elapsed:.1?}", detail.join(", ")))
}

fn sech2_family() -> impl Fn(C64) -> evanskit::Result<(JostContext, evanskit::system::Factorization)> + Sync {
    |k| {
        let case = schrodinger_problem(&sech2(), k, false)?;
        Ok((case.context(SolverSettings::default())?, case.factorization()?))
    }
}

fn scan_accuracy() -> Outcome {
    let points: Vec<C64> = (0..10).map(|i| c(0.0, 1.2 + 1.8 * i as f64 / 9.0)).collect();
    let family = sech2_family();
    let scan = evans_scan(&family, &points, &fast(), false);
    let values = scan.evans_values().map_err(fail)?;
    let worst = points.iter().zip(&values).map(|(&k, &d)| (d - closed_form(k)).norm()).fold(0.0, f64::max);
    ensure(worst < 1e-5, format!("scan deviation {worst:.2e}"))?;
    let h = 1e-3;
    let k = c(0.0, 2.0);
    let at = |dz: C64| evans_at(&family, k + dz, &fast()).map_err(fail);
    // 3x3 stencil: central differences averaged over the neighbouring rows and columns
    let mut dx = c(0.0, 0.0);
    let mut dy = c(0.0, 0.0);
    for s in [-1.0, 0.0, 1.0] {
        let w = if s == 0.0 { 0.5 } else { 0.25 };
        dx += (at(c(h, s * h))? - at(c(-h, s * h))?) * (w / (2.0 * h));
        dy += (at(c(s * h, h))? - at(c(s * h, -h))?) * (w / (2.0 * h));
    }
    let dbar = 0.5 * (dx + c(0.0, 1.0) * dy);
    let dk = 0.5 * (dx - c(0.0, 1.0) * dy);
    let cr = dbar.norm() / dk.norm();
    ensure(cr < 1e-3, format!("Cauchy-Riemann residual {cr:.2e}"))?;
    Ok(format!("scan deviation {worst:.1e}, Cauchy-Riemann residual {cr:.1e}"))
}

fn bound_state() -> Outcome {
    let family = sech2_family();
    let around_i = count_zeros(&family, c(0.0, 1.0), 0.3, 16, 16, &fast()).map_err(fail)?.winding;
    let around_2i = count_zeros(&family, c(0.0, 2.0), 0.3, 16, 16, &fast()).map_err(fail)?.winding;
    ensure(around_i == 1 && around_2i == 0, format!("winding {around_i} about i and {around_2i} about 2i"))?;
    Ok("winding 1 about i, 0 about 2i".into())
}

fn counterexample() -> Outcome {
    let settings = SolverSettings { x_max: 20.0, ..SolverSettings::default() };
    let mut worst_d: f64 = 0.0;
    let mut worst_theta: f64 = 0.0;
    for n in [1.0, 2.0, 5.0] {
        let ctx = JostContext::autonomous(gap_counterexample_truncated(n).map_err(fail)?, settings.clone()).map_err(fail)?;
        let set = solve_jost_set(&ctx, None).map_err(fail)?;
        worst_d = worst_d.max((evans_of(&ctx, &set).map_err(fail)?.1 - c(1.0, 0.0)).norm());
        worst_theta = worst_theta.max(compute_theta(&ctx).map_err(fail)?.norm());
    }
    ensure(worst_d < 1e-8, format!("|D - 1| = {worst_d:.2e}"))?;
    let ctx = JostContext::autonomous(gap_counterexample().map_err(fail)?, settings).map_err(fail)?;
    worst_theta = worst_theta.max(compute_theta(&ctx).map_err(fail)?.norm());
    ensure(worst_theta < 1e-12, format!("|Theta| = {worst_theta:.2e}"))?;
    let fac = factorize_perturbation(&ctx.problem, FactorizationKind::Polar).map_err(fail)?;
    let kernel = build_semiseparable(&ctx, &fac, &nystrom_grid(&ctx, 800).map_err(fail)?).map_err(fail)?;
    let nys = det2_nystrom_kernel(&kernel, NystromRule::default()).map_err(fail)?.value;
    ensure((nys - c(1.0, 0.0)).norm() < 1e-3, format!("Nyström det2 = {nys}"))?;
    let q = ctx.dichotomy();
    let weighted = solve_jost_weighted(&ctx, &q, &|_| 1.0, ctx.splitting.kappa(2), Side::Plus);
    let weighted_msg = match weighted {
        Err(e @ (Error::HypothesisViolated { .. } | Error::ContractionUnachievable { .. } | Error::NonConvergence { .. })) => {
            e.to_string()
        }
        Err(e) => return Err(format!("weighted route failed for the wrong reason: {e}")),
        Ok(_) => return Err("weighted route unexpectedly converged".into()),
    };
    let mixed = solve_jost_mixed(&ctx, 2, Side::Plus).map_err(fail)?;
    ensure(mixed.converged, "mixed route for the second projection did not converge".into())?;
    Ok(format!(
        "|D - 1| {worst_d:.1e}, |Theta| {worst_theta:.1e}, Nyström {:.1e}; weighted: {weighted_msg}",
        (nys - c(1.0, 0.0)).norm()
    ))
}

fn identity_suite() -> Outcome {
    let mut cases: Vec<(String, JostContext, evanskit::system::Factorization)> = Vec::new();
    for (name, v, k, x) in [
        ("zero", Potential::zero(), c(0.0, 2.0), 20.0),
        ("sech2", sech2(), c(0.0, 2.0), 20.0),
        ("square well", Potential::square_well(-1.5, 1.0).map_err(fail)?, c(0.3, 1.0), 6.0),
    ] {
        let (_, ctx, fac) = schrodinger(&v, k, x);
        cases.push((name.into(), ctx, fac));
    }
    for n in [1.0, 2.0, 5.0] {
        let (ctx, fac) = polar_context(gap_counterexample_truncated(n).map_err(fail)?, 20.0);
        cases.push((format!("counterexample n={n}"), ctx, fac));
    }
    let (ctx, fac) = polar_context(random_compact_system(3, 1.5, 0.6), 6.0);
    cases.push(("random 4x4".into(), ctx, fac));
    let mut lines = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, ctx, fac) in &cases {
        let r = verify_identity(ctx, fac, &PipelineOptions::default()).map_err(|e| format!("{name}: {e}"))?;
        ensure(r.identity_residual < 1e-4, format!("{name}: residual {:.2e}", r.identity_residual))?;
        worst = worst.max(r.identity_residual);
        lines.push(format!("{name} {:.0e}", r.identity_residual));
    }
    Ok(format!("largest residual {worst:.1e} ({})", lines.join(", ")))
}

fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn invariance() -> Outcome {
    let (ctx, _) = polar_context(random_compact_system(3, 1.5, 0.6), 6.0);
    let set = solve_jost_set(&ctx, Some(Route::Mixed)).map_err(fail)?;
    let (m, d) = evans_of(&ctx, &set).map_err(fail)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (q1, q2) = (ctx.splitting.projection(1).clone(), ctx.splitting.projection(2).clone());
    let s = q1.matmul(&random_matrix(&mut rng, 4)).matmul(&q2);
    let y1 = &set.plus[0].initial;
    let mut mix: f64 = 0.0;
    for alpha in [1.0, 10.0, -5.0] {
        let shifted = &m + &y1.matmul(&s).scale_real(alpha);
        mix = mix.max((evanskit::numerics::lu_det(&shifted) - d).norm() / d.norm());
    }
    ensure(mix < 1e-10, format!("lower-mode mixing changed D by {mix:.2e}"))?;

    let with_tau = |tau: f64| -> Result<C64, String> {
        let ctx = ctx.with_settings(SolverSettings { tau, ..ctx.settings.clone() }).map_err(fail)?;
        let set = solve_jost_set(&ctx, Some(Route::Mixed)).map_err(fail)?;
        Ok(evans_of(&ctx, &set).map_err(fail)?.1)
    };
    let tau_gap = (with_tau(1.0)? - with_tau(2.0)?).norm();
    ensure(tau_gap < 1e-7, format!("tau doubling moved D by {tau_gap:.2e}"))?;

    let mut ratio: f64 = 0.0;
    for _ in 0..3 {
        let blocks: Vec<ComplexMatrix> =
            ctx.splitting.projections().iter().map(|q| q.matmul(&random_matrix(&mut rng, 4)).matmul(q)).collect();
        let frame = ReferenceFrame::new(&ctx.splitting, blocks).map_err(fail)?;
        let tilde = frame.framed_solutions(&set.plus, &set.minus).map_err(fail)?;
        ratio = ratio.max((evans_ratio(&frame, &tilde).map_err(fail)? - d).norm() / d.norm());
    }
    ensure(ratio < 1e-6, format!("frame ratio deviates by {ratio:.2e}"))?;

    let (case, sctx, sfac) = schrodinger(&sech2(), c(0.3, 1.4), 20.0);
    let polar = factorize_perturbation(&case.problem, FactorizationKind::Polar).map_err(fail)?;
    let grid = sctx.grid(-20.0, 20.0).map_err(fail)?;
    let a = det2_semiseparable(&build_semiseparable(&sctx, &sfac, &grid).map_err(fail)?, 0.0).map_err(fail)?;
    let b = det2_semiseparable(&build_semiseparable(&sctx, &polar, &grid).map_err(fail)?, 0.0).map_err(fail)?;
    let fac_gap = (a - b).norm() / a.norm();
    ensure(fac_gap < 1e-6, format!("factorizations disagree by {fac_gap:.2e}"))?;
    Ok(format!("mixing {mix:.1e}, tau {tau_gap:.1e}, frames {ratio:.1e}, factorization {fac_gap:.1e}"))
}

fn dichotomy_claims() -> Outcome {
    let mut contexts = Vec::new();
    let (_, ctx, _) = schrodinger(&sech2(), c(0.0, 2.0), 20.0);
    contexts.push(ctx);
    contexts.push(polar_context(random_compact_system(3, 1.5, 0.6), 6.0).0);
    contexts.push(polar_context(gap_counterexample_truncated(5.0).map_err(fail)?, 20.0).0);
    for ctx in &contexts {
        let q = ctx.dichotomy();
        let set = solve_jost_set(ctx, None).map_err(fail)?;
        let p = perturbed_range_projection(&q, &set.plus).map_err(fail)?;
        ensure(projection_rank(&p) == projection_rank(&q), format!("{}: rank P != rank Q", ctx.problem.name))?;
    }
    let ctx = &contexts[0];
    let set = solve_jost_set(ctx, None).map_err(fail)?;
    let plus = solution_exponent(&set.plus[0], 5.0, 20.0).map_err(fail)?;
    let minus = solution_exponent(&set.minus[0], -20.0, -5.0).map_err(fail)?;
    let (kp, km) = (ctx.splitting.kappa(1), ctx.splitting.kappa(2));
    let gap = (plus - kp).abs().max((minus - km).abs());
    ensure(gap < 5e-2, format!("window rates {plus:.4} and {minus:.4} against {kp} and {km}"))?;
    Ok(format!("ranks agree on {} problems, window rates {plus:.4} and {minus:.4}", contexts.len()))
}

fn truncation_convergence() -> Outcome {
    let k = c(0.0, 2.0);
    let det2 = |v: &Potential| -> Result<C64, String> {
        let (_, ctx, fac) = schrodinger(v, k, 20.0);
        let kernel = build_semiseparable(&ctx, &fac, &ctx.grid(-20.0, 20.0).map_err(fail)?).map_err(fail)?;
        det2_semiseparable(&kernel, 0.0).map_err(fail)
    };
    let full = det2(&sech2())?;
    let errs: Vec<f64> =
        [2.0, 5.0, 10.0].iter().map(|&n| det2(&sech2().truncated(n)).map(|v| (v - full).norm())).collect::<Result<_, _>>()?;
    ensure(errs.windows(2).all(|w| w[1] < w[0]), format!("errors {errs:?} not decreasing"))?;
    Ok(format!("errors {:.1e}, {:.1e}, {:.1e}", errs[0], errs[1], errs[2]))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("free case", free_case),
        ("Schrödinger anchor", schrodinger_anchor),
        ("scan accuracy", scan_accuracy),
        ("bound-state detection", bound_state),
        ("gap counterexample", counterexample),
        ("identity suite", identity_suite),
        ("invariance suite", invariance),
        ("dichotomy rank and window rates", dichotomy_claims),
        ("truncation convergence", truncation_convergence),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
