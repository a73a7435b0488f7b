use super::solver::JostSolution;
use crate::error::{Error, Result};
use crate::numerics::{column_basis, inverse, projection_rank, ComplexMatrix};
use crate::system::ProblemDefinition;

/// Projection onto the span of the plus-side solutions at 0 along `ker Q`:
/// `P = V (W V)^{-1} W` with `V` a basis of the span and `W = V_Q^* Q`.
pub fn perturbed_range_projection(q: &ComplexMatrix, plus: &[JostSolution]) -> Result<ComplexMatrix> {
    let rank = projection_rank(q);
    let d = q.rows();
    if rank == 0 {
        return Ok(ComplexMatrix::zeros(d, d));
    }
    if plus.is_empty() {
        return Err(Error::RankDeficient { found: 0, expected: rank });
    }
    let blocks: Vec<&ComplexMatrix> = plus.iter().map(|s| &s.initial).collect();
    let span = ComplexMatrix::hstack(&blocks);
    let v = column_basis(&span, rank, 1e-8)?;
    let vq = column_basis(q, rank, 1e-8)?;
    let w = vq.adjoint().matmul(q);
    let inner = inverse(&w.matmul(&v)).map_err(|_| Error::RankDeficient { found: rank - 1, expected: rank })?;
    Ok(v.matmul(&inner).matmul(&w))
}

/// The problem with its perturbation cut off outside `[-n, n]`.
pub fn truncate_perturbation(problem: &ProblemDefinition, n: f64) -> Result<ProblemDefinition> {
    problem.with_perturbation(problem.perturbation.truncated(n)?)
}
