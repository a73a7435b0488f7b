//! Matrix-valued Jost solutions from Volterra, weighted and mixed
//! Volterra-Fredholm integral equations.

pub mod picard;
mod range;
mod settings;
mod solver;

pub use range::{perturbed_range_projection, truncate_perturbation};
pub use settings::{Route, Side, SolverSettings};
pub use solver::{
    check_mixed_hypothesis, check_volterra_hypothesis, check_weighted_hypothesis, solution_exponent, solve_jost_mixed,
    solve_jost_volterra, solve_jost_weighted, JostContext, JostSolution, DEFECT_FLOOR,
};
