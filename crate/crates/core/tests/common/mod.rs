#![allow(dead_code)]

use std::sync::Arc;

use evanskit::evans::{schrodinger_problem, SchrodingerCase};
use evanskit::jost::{JostContext, SolverSettings};
use evanskit::numerics::{inverse, ComplexMatrix, C64};
use evanskit::system::{
    factorize_perturbation, Coefficient, Factorization, FactorizationKind, Perturbation, Potential, ProblemDefinition,
    SupportDescriptor,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn schrodinger(potential: &Potential, k: C64, x_max: f64) -> (SchrodingerCase, JostContext, Factorization) {
    let case = schrodinger_problem(potential, k, false).unwrap();
    let ctx = case.context(SolverSettings { x_max, ..SolverSettings::default() }).unwrap();
    let fac = case.factorization().unwrap();
    (case, ctx, fac)
}

pub fn polar_context(problem: ProblemDefinition, x_max: f64) -> (JostContext, Factorization) {
    let ctx = JostContext::autonomous(problem, SolverSettings { x_max, ..SolverSettings::default() }).unwrap();
    let fac = factorize_perturbation(&ctx.problem, FactorizationKind::Polar).unwrap();
    (ctx, fac)
}

/// Random 4x4 coefficient with spectrum {-1.5, -0.6 +- 0.8i, 1.2} and a
/// smooth perturbation supported in [-h, h].
pub fn random_compact_system(seed: u64, h: f64, strength: f64) -> ProblemDefinition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m =
        |r: usize, cc: usize| ComplexMatrix::from_fn(r, cc, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let t = &ComplexMatrix::identity(4) + &m(4, 4).scale_real(0.4);
    let lam = ComplexMatrix::diag(&[c(-1.5, 0.0), c(-0.6, 0.8), c(-0.6, -0.8), c(1.2, 0.0)]);
    let a = t.matmul(&lam).matmul(&inverse(&t).unwrap());
    let r0 = m(4, 4).scale_real(strength);
    let r = Arc::new(move |x: f64| {
        if x.abs() >= h {
            ComplexMatrix::zeros(4, 4)
        } else {
            let s = 1.0 - (x / h).powi(2);
            r0.scale_real(s * s * (1.0 + 0.5 * (2.0 * x).sin()))
        }
    });
    ProblemDefinition::new(
        "random4",
        Coefficient::Autonomous(a),
        Perturbation::new(r, SupportDescriptor::Compact { halfwidth: h }),
    )
    .unwrap()
}
