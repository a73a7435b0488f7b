//! Built-in problems.

use std::sync::Arc;

use super::problem::{Coefficient, Perturbation, ProblemDefinition, SupportDescriptor};
use crate::error::Result;
use crate::numerics::{ComplexMatrix, C64};

/// `A = diag(-2, -1, 1)` with the single entry `R_{12}(x) = e^{-x} cos x`
/// for `x >= 0`. The decay rate 1 equals the width of the stable spectrum,
/// so the plain Volterra equation for the stable subspace is not available
/// while the split equations for each exponent are.
pub fn gap_counterexample() -> Result<ProblemDefinition> {
    let a = ComplexMatrix::diag_real(&[-2.0, -1.0, 1.0]);
    let r = Arc::new(|x: f64| {
        let mut m = ComplexMatrix::zeros(3, 3);
        if x >= 0.0 {
            m[(0, 1)] = C64::new((-x).exp() * x.cos(), 0.0);
        }
        m
    });
    let pert = Perturbation::new(r, SupportDescriptor::Exponential { beta: 1.0 }).with_breakpoints(vec![0.0]);
    ProblemDefinition::new("gap_counterexample", Coefficient::Autonomous(a), pert)
}

/// [`gap_counterexample`] with the perturbation cut off beyond `x = n`.
pub fn gap_counterexample_truncated(n: f64) -> Result<ProblemDefinition> {
    let p = gap_counterexample()?;
    p.with_perturbation(p.perturbation.truncated(n)?)
}
