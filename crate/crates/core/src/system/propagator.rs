use std::sync::Arc;

use super::problem::{Coefficient, ProblemDefinition};
use crate::error::{Error, Result};
use crate::numerics::{column_basis, integrate_linear_ode, matrix_exp, projection_rank, ComplexMatrix, DenseSolution};

/// The fundamental matrix `Phi` of `y' = A(x) y`, `Phi(0) = I`, on a fixed
/// interval `[-X, X]`. Autonomous problems use the matrix exponential; other
/// problems cache `Phi` and `Phi^{-1}` as dense ODE solutions.
#[derive(Clone, Debug)]
pub struct Propagator {
    interval: (f64, f64),
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    Autonomous(ComplexMatrix),
    Sampled { phi: Arc<DenseSolution>, psi_t: Arc<DenseSolution> },
}

impl Propagator {
    /// Builds the propagator on `[-x_max, x_max]` with ODE tolerance `tol`.
    pub fn finalized(problem: &ProblemDefinition, x_max: f64, tol: f64) -> Result<Self> {
        if !(x_max > 0.0) || !x_max.is_finite() {
            return Err(Error::InvalidInput(format!("propagator interval half-width must be positive, got {x_max}")));
        }
        let interval = (-x_max, x_max);
        let kind = match &problem.coefficient {
            Coefficient::Autonomous(a) => Kind::Autonomous(a.clone()),
            Coefficient::Sampled { function, domain } => {
                if domain.0 > -x_max || domain.1 < x_max {
                    return Err(Error::OutOfInterval { x: x_max, a: domain.0, b: domain.1 });
                }
                let d = problem.dimension;
                let id = ComplexMatrix::identity(d);
                let f = function.clone();
                let coeff = move |x: f64| f(x);
                let phi = integrate_linear_ode(&coeff, 0.0, -x_max, &id, tol)?
                    .concat(integrate_linear_ode(&coeff, 0.0, x_max, &id, tol)?)?;
                let g = function.clone();
                let adj = move |x: f64| g(x).transpose().scale_real(-1.0);
                let psi_t = integrate_linear_ode(&adj, 0.0, -x_max, &id, tol)?
                    .concat(integrate_linear_ode(&adj, 0.0, x_max, &id, tol)?)?;
                Kind::Sampled { phi: Arc::new(phi), psi_t: Arc::new(psi_t) }
            }
        };
        Ok(Self { interval, kind })
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn is_autonomous(&self) -> bool {
        matches!(self.kind, Kind::Autonomous(_))
    }

    fn check(&self, x: f64) -> Result<()> {
        let (a, b) = self.interval;
        let slack = 1e-12 * (1.0 + b.abs());
        if x < a - slack || x > b + slack || !x.is_finite() {
            return Err(Error::OutOfInterval { x, a, b });
        }
        Ok(())
    }

    /// `Phi(x)`.
    pub fn phi(&self, x: f64) -> Result<ComplexMatrix> {
        self.check(x)?;
        match &self.kind {
            Kind::Autonomous(a) => matrix_exp(a, x),
            Kind::Sampled { phi, .. } => phi.evaluate(x),
        }
    }

    /// `Phi(x)^{-1}`.
    pub fn phi_inv(&self, x: f64) -> Result<ComplexMatrix> {
        self.check(x)?;
        match &self.kind {
            Kind::Autonomous(a) => matrix_exp(a, -x),
            Kind::Sampled { psi_t, .. } => Ok(psi_t.evaluate(x)?.transpose()),
        }
    }

    /// Breakpoints of the cached solution, or the interval ends when the
    /// propagator is autonomous.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Autonomous(_) => vec![self.interval.0, 0.0, self.interval.1],
            Kind::Sampled { phi, .. } => phi.breakpoints(),
        }
    }

    /// Splits `Phi(x) Q_g Phi(x')^{-1}` into `left(x) * right(x')` for a
    /// projection `q` that commutes with the unperturbed flow.
    pub fn mode_factor(&self, q: &ComplexMatrix) -> Result<ModeFactor> {
        let rank = projection_rank(q);
        let d = q.rows();
        if rank == 0 {
            return Ok(ModeFactor {
                prop: self.clone(),
                v: ComplexMatrix::zeros(d, 0),
                w: ComplexMatrix::zeros(0, d),
                reduced: ComplexMatrix::zeros(0, 0),
            });
        }
        let v = column_basis(q, rank, 1e-8)?;
        let w = v.adjoint().matmul(q);
        let reduced = match &self.kind {
            Kind::Autonomous(a) => w.matmul(a).matmul(&v),
            Kind::Sampled { .. } => ComplexMatrix::zeros(rank, rank),
        };
        Ok(ModeFactor { prop: self.clone(), v, w, reduced })
    }
}

/// `Phi(x) Q Phi(x')^{-1} = left(x) right(x')` with inner dimension `rank Q`.
#[derive(Clone, Debug)]
pub struct ModeFactor {
    prop: Propagator,
    v: ComplexMatrix,
    w: ComplexMatrix,
    reduced: ComplexMatrix,
}

impl ModeFactor {
    pub fn rank(&self) -> usize {
        self.v.cols()
    }

    pub fn left(&self, x: f64) -> Result<ComplexMatrix> {
        if self.rank() == 0 {
            return Ok(self.v.clone());
        }
        match &self.prop.kind {
            Kind::Autonomous(_) => {
                self.prop.check(x)?;
                Ok(self.v.matmul(&matrix_exp(&self.reduced, x)?))
            }
            Kind::Sampled { .. } => Ok(self.prop.phi(x)?.matmul(&self.v)),
        }
    }

    pub fn right(&self, x: f64) -> Result<ComplexMatrix> {
        if self.rank() == 0 {
            return Ok(self.w.clone());
        }
        match &self.prop.kind {
            Kind::Autonomous(_) => {
                self.prop.check(x)?;
                Ok(matrix_exp(&self.reduced, -x)?.matmul(&self.w))
            }
            Kind::Sampled { .. } => Ok(self.w.matmul(&self.prop.phi_inv(x)?)),
        }
    }
}

/// `Phi(x) Phi(xp)^{-1}`.
pub fn propagate(prop: &Propagator, x: f64, xp: f64) -> Result<ComplexMatrix> {
    prop.check(x)?;
    prop.check(xp)?;
    match &prop.kind {
        Kind::Autonomous(a) => matrix_exp(a, x - xp),
        Kind::Sampled { .. } => Ok(prop.phi(x)?.matmul(&prop.phi_inv(xp)?)),
    }
}

/// Windowed estimates of the upper and lower exponents of a projection.
/// These are finite-window quotients, not the limits themselves.
#[derive(Clone, Debug, PartialEq)]
pub struct BohlEstimate {
    pub upper: f64,
    pub lower: f64,
    pub windows: Vec<(f64, f64)>,
    /// Largest sampled `|Phi(x) Q Phi(x)^{-1}|`, a check that `Q` is
    /// uniformly conjugated on the windows.
    pub conjugation_bound: f64,
}

/// For each window `(a, b)` with `a < b` forms
/// `log |Phi(b) Q Phi(a)^{-1}| / (b - a)` (upper) and
/// `-log |Phi(a) Q Phi(b)^{-1}| / (b - a)` (lower), then takes the extreme
/// values over the windows.
pub fn estimate_bohl_exponents(prop: &Propagator, q: &ComplexMatrix, windows: &[(f64, f64)]) -> Result<BohlEstimate> {
    if windows.is_empty() || windows.iter().any(|w| !(w.0 < w.1)) {
        return Err(Error::InvalidInput("Bohl windows must be non-empty intervals".into()));
    }
    let mut upper = f64::NEG_INFINITY;
    let mut lower = f64::INFINITY;
    let mut conj: f64 = 0.0;
    for &(a, b) in windows {
        let fwd = prop.phi(b)?.matmul(q).matmul(&prop.phi_inv(a)?);
        let bwd = prop.phi(a)?.matmul(q).matmul(&prop.phi_inv(b)?);
        upper = upper.max(fwd.spectral_norm().ln() / (b - a));
        lower = lower.min(-bwd.spectral_norm().ln() / (b - a));
        for x in [a, 0.5 * (a + b), b] {
            conj = conj.max(prop.phi(x)?.matmul(q).matmul(&prop.phi_inv(x)?).spectral_norm());
        }
    }
    Ok(BohlEstimate { upper, lower, windows: windows.to_vec(), conjugation_bound: conj })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::C64;
    use crate::system::problem::Perturbation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag_problem() -> ProblemDefinition {
        ProblemDefinition::free("diag", ComplexMatrix::diag_real(&[-2.0, -1.0, 1.0])).unwrap()
    }

    #[test]
    fn autonomous_propagation() {
        let p = Propagator::finalized(&diag_problem(), 5.0, 1e-10).unwrap();
        let e = propagate(&p, 1.0, 0.0).unwrap();
        let expect = ComplexMatrix::diag_real(&[(-2f64).exp(), (-1f64).exp(), 1f64.exp()]);
        assert!(e.approx_eq(&expect, 0.0, 1e-14));
        assert!(propagate(&p, 0.7, 0.7).unwrap().approx_eq(&ComplexMatrix::identity(3), 0.0, 0.0));
        assert!(matches!(propagate(&p, 6.0, 0.0), Err(Error::OutOfInterval { .. })));
    }

    fn sampled_constant(a: ComplexMatrix) -> ProblemDefinition {
        let d = a.rows();
        let f = a.clone();
        ProblemDefinition::new(
            "const",
            Coefficient::Sampled { function: Arc::new(move |_| f.clone()), domain: (-10.0, 10.0) },
            Perturbation::zero(d),
        )
        .unwrap()
    }

    #[test]
    fn sampled_constant_matches_exponential() {
        let a = ComplexMatrix::from_real_rows(&[&[-0.5, 1.0], &[0.3, 0.4]]);
        let p = Propagator::finalized(&sampled_constant(a.clone()), 3.0, 1e-11).unwrap();
        for &(x, xp) in &[(1.0, 0.0), (-2.0, 1.5), (2.9, -2.9)] {
            let got = propagate(&p, x, xp).unwrap();
            let exact = matrix_exp(&a, x - xp).unwrap();
            assert!((&got - &exact).max_abs() < 1e-8 * exact.max_abs().max(1.0), "({x}, {xp})");
        }
    }

    #[test]
    fn sampled_inverse_and_cocycle() {
        let a = ComplexMatrix::from_real_rows(&[&[-0.5, 1.0], &[0.3, 0.4]]);
        let f = a.clone();
        let prob = ProblemDefinition::new(
            "varying",
            Coefficient::Sampled {
                function: Arc::new(move |x: f64| {
                    let mut m = f.clone();
                    m[(0, 1)] += C64::new(0.5 * x.sin(), 0.0);
                    m
                }),
                domain: (-5.0, 5.0),
            },
            Perturbation::zero(2),
        )
        .unwrap();
        let p = Propagator::finalized(&prob, 2.0, 1e-11).unwrap();
        for x in p.breakpoints() {
            let id = p.phi(x).unwrap().matmul(&p.phi_inv(x).unwrap());
            assert!(id.approx_eq(&ComplexMatrix::identity(2), 1e-9, 0.0), "x = {x}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let (x, y, z): (f64, f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let lhs = propagate(&p, x, y).unwrap().matmul(&propagate(&p, y, z).unwrap());
            let rhs = propagate(&p, x, z).unwrap();
            assert!(lhs.approx_eq(&rhs, 1e-8, 1e-8));
        }
    }

    #[test]
    fn mode_factor_reproduces_projected_propagator() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[4.0, 0.0]]);
        let prob = ProblemDefinition::free("s", a.clone()).unwrap();
        let s = crate::system::spectral_splitting(&a, 1e-8).unwrap();
        let prop = Propagator::finalized(&prob, 5.0, 1e-10).unwrap();
        let m = prop.mode_factor(s.projection(1)).unwrap();
        let (x, xp) = (2.0, -1.5);
        let lhs = m.left(x).unwrap().matmul(&m.right(xp).unwrap());
        let rhs = matrix_exp(&a, x).unwrap().matmul(s.projection(1)).matmul(&matrix_exp(&a, -xp).unwrap());
        assert!(lhs.approx_eq(&rhs, 1e-12, 1e-10));
    }

    #[test]
    fn bohl_examples() {
        let p = Propagator::finalized(&diag_problem(), 20.0, 1e-10).unwrap();
        let est = estimate_bohl_exponents(&p, &ComplexMatrix::diag_real(&[1.0, 0.0, 0.0]), &[(0.0, 5.0), (5.0, 20.0)]).unwrap();
        assert!((est.upper + 2.0).abs() < 1e-6 && (est.lower + 2.0).abs() < 1e-6);

        let minus = ProblemDefinition::free("m", ComplexMatrix::diag_real(&[-1.0, -1.0])).unwrap();
        let p = Propagator::finalized(&minus, 20.0, 1e-10).unwrap();
        let est = estimate_bohl_exponents(&p, &ComplexMatrix::identity(2), &[(1.0, 10.0)]).unwrap();
        assert!((est.upper + 1.0).abs() < 1e-6 && (est.lower + 1.0).abs() < 1e-6);

        let shifted = ProblemDefinition::free("r", ComplexMatrix::diag_real(&[-2.5, -1.5, 0.5])).unwrap();
        let p = Propagator::finalized(&shifted, 20.0, 1e-10).unwrap();
        let est = estimate_bohl_exponents(&p, &ComplexMatrix::diag_real(&[1.0, 0.0, 0.0]), &[(0.0, 5.0)]).unwrap();
        assert!((est.upper + 2.5).abs() < 1e-6);
    }
}
