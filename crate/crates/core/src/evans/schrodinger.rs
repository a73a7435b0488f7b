use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jost::{JostContext, SolverSettings};
use crate::numerics::{integrate_linear_ode_with, ComplexMatrix, OdeOptions, C64};
use crate::system::{
    factorize_perturbation, schrodinger_factors, Coefficient, Factorization, FactorizationKind, MatrixFn, Perturbation,
    Potential, ProblemDefinition, SpectralSplitting,
};

/// Imaginary part used for spectral parameters on the real axis.
pub const BOUNDARY_SHIFT: f64 = 1e-6;

/// The Schrödinger equation `-u'' + V u = k^2 u` as the first-order system
/// `y' = (A(k) + R) y` with `A(k) = [[0, 1], [-k^2, 0]]`, `R = [[0, 0], [V, 0]]`.
#[derive(Clone, Debug)]
pub struct SchrodingerCase {
    pub potential: Potential,
    pub k: C64,
    /// Set when `k` was moved off the real axis by [`BOUNDARY_SHIFT`].
    pub on_boundary: bool,
    pub problem: ProblemDefinition,
    /// `Q(k) = 1/2 [[1, 1/(ik)], [ik, 1]]`, the projection onto the decaying
    /// solution `e^{ikx}` of the free equation.
    pub q: ComplexMatrix,
}

/// Builds the system for `V` and `k`. `Im k` must be positive unless
/// `continuity` is set, in which case a real nonzero `k` is shifted to
/// `k + i BOUNDARY_SHIFT` and flagged.
pub fn schrodinger_problem(potential: &Potential, k: C64, continuity: bool) -> Result<SchrodingerCase> {
    if !k.is_finite() {
        return Err(Error::InvalidInput(format!("spectral parameter k = {k} must be finite")));
    }
    let (k, on_boundary) = if k.im > 0.0 {
        (k, false)
    } else if continuity && k.im == 0.0 && k.re != 0.0 {
        (C64::new(k.re, BOUNDARY_SHIFT), true)
    } else {
        return Err(Error::InvalidInput(format!("Schrödinger spectral parameter needs Im k > 0, got k = {k}")));
    };
    let mut a = ComplexMatrix::zeros(2, 2);
    a[(0, 1)] = C64::new(1.0, 0.0);
    a[(1, 0)] = -k * k;
    let v = potential.v.clone();
    let r: MatrixFn = Arc::new(move |x| {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(1, 0)] = v(x);
        m
    });
    let mut pert = Perturbation::new(r, potential.support).with_breakpoints(potential.breakpoints.clone());
    pert.vanishes = potential.vanishes;
    let problem = ProblemDefinition::new(potential.name.clone(), Coefficient::Autonomous(a), pert)?;
    let ik = C64::new(0.0, 1.0) * k;
    let q = ComplexMatrix::from_rows(&[vec![C64::new(0.5, 0.0), 0.5 / ik], vec![0.5 * ik, C64::new(0.5, 0.0)]]);
    Ok(SchrodingerCase { potential: potential.clone(), k, on_boundary, problem, q })
}

impl SchrodingerCase {
    /// The splitting `{Q(k), I - Q(k)}` with exponents `-Im k` and `Im k`.
    pub fn splitting(&self) -> Result<SpectralSplitting> {
        let kappa = self.k.im;
        let iq = &ComplexMatrix::identity(2) - &self.q;
        SpectralSplitting::from_parts(vec![self.q.clone(), iq], vec![(-kappa, -kappa), (kappa, kappa)], vec![1, 1])
    }

    pub fn context(&self, settings: SolverSettings) -> Result<JostContext> {
        JostContext::new(self.problem.clone(), self.splitting()?, settings)
    }

    /// `Rl = [[0, 0], [|V|^{1/2}, 0]]`, `Rr = diag(|V|^{1/2} e^{i arg V}, 0)`.
    pub fn factorization(&self) -> Result<Factorization> {
        let (left, right) = schrodinger_factors(self.potential.v.clone());
        factorize_perturbation(&self.problem, FactorizationKind::UserSupplied { left, right })
    }
}

/// The Jost function `J(k) = W(u-, u+) / (2ik)` from the solutions
/// `u+ ~ e^{ikx}` at `+X` and `u- ~ e^{-ikx}` at `-X`, integrated to 0.
pub fn jost_function_reference(case: &SchrodingerCase, x_max: f64) -> Result<C64> {
    let k = case.k;
    let ik = C64::new(0.0, 1.0) * k;
    let v = case.potential.v.clone();
    let coeff = move |x: f64| {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        m[(1, 0)] = v(x) - k * k;
        m
    };
    let mut opts = OdeOptions::new(1e-13);
    opts.stops = case.potential.breakpoints.clone();
    // both solutions start from unit data; the plane-wave factors e^{ikX}
    // are restored in the Wronskian
    let shoot = |x0: f64, s: C64| -> Result<(C64, C64)> {
        let y0 = ComplexMatrix::from_vec(2, 1, vec![C64::new(1.0, 0.0), s]);
        let y = integrate_linear_ode_with(&coeff, x0, 0.0, &y0, &opts)?.evaluate(0.0)?;
        if !y.is_finite() {
            return Err(Error::Overflow { norm: y.max_abs(), cap: f64::MAX });
        }
        Ok((y[(0, 0)], y[(1, 0)]))
    };
    let (up, dup) = shoot(x_max, ik)?;
    let (um, dum) = shoot(-x_max, -ik)?;
    Ok((um * dup - dum * up) * (2.0 * ik * x_max).exp() / (2.0 * ik))
}

/// `L(k, x, x') = (i / 2k) Vr(x) e^{ik|x - x'|} Vl(x')` as a 1x1 kernel.
pub fn scalar_schrodinger_kernel(case: &SchrodingerCase) -> impl Fn(f64, f64) -> Result<ComplexMatrix> + Send + Sync {
    let k = case.k;
    let v = case.potential.v.clone();
    let pref = C64::new(0.0, 0.5) / k;
    move |x: f64, xp: f64| {
        let vx = v(x);
        let vr = if vx.norm() == 0.0 { C64::new(0.0, 0.0) } else { C64::from_polar(vx.norm().sqrt(), vx.arg()) };
        let vl = v(xp).norm().sqrt();
        let val = pref * vr * (C64::new(0.0, 1.0) * k * (x - xp).abs()).exp() * vl;
        Ok(ComplexMatrix::from_vec(1, 1, vec![val]))
    }
}
