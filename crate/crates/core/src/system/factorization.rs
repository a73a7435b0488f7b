use std::fmt;
use std::sync::Arc;

use super::problem::{MatrixFn, ProblemDefinition, SupportDescriptor};
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eigen, ComplexMatrix, C64};

/// How `R = Rl * Rr` is obtained.
#[derive(Clone)]
pub enum FactorizationKind {
    /// `Rr = |R|^{1/2}`, `Rl = R pinv(|R|^{1/2})`.
    Polar,
    UserSupplied {
        left: MatrixFn,
        right: MatrixFn,
    },
}

impl fmt::Debug for FactorizationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorizationKind::Polar => f.write_str("Polar"),
            FactorizationKind::UserSupplied { .. } => f.write_str("UserSupplied"),
        }
    }
}

/// A factorization `R(x) = Rl(x) Rr(x)`.
#[derive(Clone)]
pub struct Factorization {
    left: MatrixFn,
    right: MatrixFn,
    polar: bool,
}

impl fmt::Debug for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Factorization").field("polar", &self.polar).finish_non_exhaustive()
    }
}

impl Factorization {
    pub fn left(&self, x: f64) -> ComplexMatrix {
        (self.left)(x)
    }

    pub fn right(&self, x: f64) -> ComplexMatrix {
        (self.right)(x)
    }

    pub fn is_polar(&self) -> bool {
        self.polar
    }
}

/// Polar factors of a single matrix: `(Rl, Rr)`.
pub fn polar_factors(r: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let d = r.rows();
    if r.is_zero() {
        return (ComplexMatrix::zeros(d, d), ComplexMatrix::zeros(d, d));
    }
    let (mu, u) = hermitian_eigen(&r.adjoint().matmul(r));
    let top = mu.iter().copied().fold(0.0, f64::max);
    let thr = 1e-12 * top.powf(0.25);
    let quarter: Vec<f64> = mu.iter().map(|&m| m.max(0.0).powf(0.25)).collect();
    let spectral = |f: &dyn Fn(f64) -> f64| {
        let mut out = ComplexMatrix::zeros(d, d);
        for (k, &q) in quarter.iter().enumerate() {
            let v = f(q);
            if v == 0.0 {
                continue;
            }
            for i in 0..d {
                let ui = u[(i, k)] * v;
                for j in 0..d {
                    out[(i, j)] += ui * u[(j, k)].conj();
                }
            }
        }
        out
    };
    let rr = spectral(&|q| q);
    let pinv = spectral(&|q| if q > thr { 1.0 / q } else { 0.0 });
    (r.matmul(&pinv), rr)
}

fn sample_points(problem: &ProblemDefinition) -> Vec<f64> {
    let reach = match problem.support() {
        SupportDescriptor::Compact { halfwidth } => halfwidth.max(1.0),
        _ => 10.0,
    };
    let mut xs: Vec<f64> = (0..=200).map(|i| -reach + 2.0 * reach * i as f64 / 200.0).collect();
    for &b in problem.breakpoints() {
        xs.extend([b - 1e-9, b, b + 1e-9]);
    }
    xs
}

/// Factors the perturbation of `problem` as `R = Rl Rr`.
pub fn factorize_perturbation(problem: &ProblemDefinition, kind: FactorizationKind) -> Result<Factorization> {
    match kind {
        FactorizationKind::Polar => {
            let r = problem.perturbation.function.clone();
            let r2 = r.clone();
            Ok(Factorization {
                left: Arc::new(move |x| polar_factors(&r(x)).0),
                right: Arc::new(move |x| polar_factors(&r2(x)).1),
                polar: true,
            })
        }
        FactorizationKind::UserSupplied { left, right } => {
            for x in sample_points(problem) {
                let r = problem.r(x);
                let prod = left(x).matmul(&right(x));
                let defect = (&prod - &r).max_abs();
                if !(defect <= 1e-8 * (1.0 + r.max_abs())) {
                    return Err(Error::FactorizationMismatch { x, defect });
                }
            }
            Ok(Factorization { left, right, polar: false })
        }
    }
}

/// `Rl = [[0,0],[|V|^{1/2},0]]`, `Rr = diag(|V|^{1/2} e^{i arg V}, 0)` for
/// `R = [[0,0],[V,0]]`.
pub fn schrodinger_factors(v: Arc<dyn Fn(f64) -> C64 + Send + Sync>) -> (MatrixFn, MatrixFn) {
    let vl = v.clone();
    let left: MatrixFn = Arc::new(move |x| {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(1, 0)] = C64::new(vl(x).norm().sqrt(), 0.0);
        m
    });
    let right: MatrixFn = Arc::new(move |x| {
        let mut m = ComplexMatrix::zeros(2, 2);
        let val = v(x);
        m[(0, 0)] = if val.norm() == 0.0 { C64::new(0.0, 0.0) } else { C64::from_polar(val.norm().sqrt(), val.arg()) };
        m
    });
    (left, right)
}
