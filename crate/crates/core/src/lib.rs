//! Matrix-valued Jost solutions, Evans determinants and 2-modified Fredholm
//! determinants for perturbed first-order linear systems `y' = (A + R(x)) y`.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`] dense complex linear algebra, quadrature and an adaptive
//!   linear ODE integrator;
//! * [`system`] problem definitions, spectral splittings, propagators and
//!   factorizations `R = Rl * Rr`;
//! * [`jost`] Volterra and mixed Volterra-Fredholm solvers for Jost solutions;
//! * [`fredholm`] the semi-separable determinant engine and a Nystrom oracle;
//! * [`evans`] Evans determinants, the Schrodinger specialization and
//!   spectral-parameter scans.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evans;
pub mod fredholm;
pub mod jost;
pub mod numerics;
pub mod system;

pub use error::{Error, Result, StageExt};
pub use numerics::{ComplexMatrix, C64};
