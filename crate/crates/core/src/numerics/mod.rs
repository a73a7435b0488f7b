//! Dense complex linear algebra, quadrature and linear ODE integration.

pub mod basis;
pub mod eigen;
pub mod expm;
pub mod lu;
pub mod matrix;
pub mod ode;
pub mod quadrature;

pub use basis::{column_basis, projection_rank};
pub use eigen::{eigenvalues, hermitian_eigen, hermitian_sqrt_psd, matrix_sign};
pub use expm::matrix_exp;
pub use lu::{inverse, lu_det, solve, LuDecomposition};
pub use matrix::{ComplexMatrix, C64, ONE, ZERO};
pub use ode::{integrate_linear_ode, integrate_linear_ode_with, DenseSolution, OdeOptions};
pub use quadrature::{gauss_legendre, quadrature_grid, QuadratureGrid};
