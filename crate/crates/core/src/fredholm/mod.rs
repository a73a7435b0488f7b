//! The semi-separable kernel `K`, the prefactor `Theta` and two evaluations
//! of `det2(I + K)`: the finite-dimensional reduction through the hat
//! equations and a Nyström discretization.

mod determinant;
mod kernel;
mod nystrom;
mod report;

pub use determinant::{b_matrix, det2_semiseparable, hat_solution, u_matrix, HatSolution};
pub use kernel::{build_semiseparable, compute_theta, Factors, SemiSeparableKernel};
pub use nystrom::{det2_matrix, det2_nystrom, det2_nystrom_kernel, kernel_trace_square, NystromDet2, NystromRule};
pub use report::{relative_residual, Det2Report};
