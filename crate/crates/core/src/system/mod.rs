//! Problem definitions, spectral splittings, propagators and factorizations
//! of the perturbation.

pub mod catalog;
pub mod config;
pub mod factorization;
pub mod potential;
pub mod problem;
pub mod propagator;
pub mod splitting;

pub use config::{load_config, parse_config, LoadedProblem, ProblemConfig};
pub use factorization::{factorize_perturbation, polar_factors, schrodinger_factors, Factorization, FactorizationKind};
pub use potential::{Potential, ScalarFn};
pub use problem::{Coefficient, MatrixFn, Perturbation, ProblemDefinition, SupportDescriptor};
pub use propagator::{estimate_bohl_exponents, propagate, BohlEstimate, ModeFactor, Propagator};
pub use splitting::{dichotomy_projection, spectral_splitting, DichotomyProjection, SpectralSplitting, DEFAULT_GROUPING_TOL};
