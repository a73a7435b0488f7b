//! The Evans determinant, reference frames, the Schrödinger specialization
//! and scans over the spectral parameter.

mod determinant;
mod pipeline;
mod scan;
mod schrodinger;

pub use determinant::{evans_determinant, evans_from_columns, evans_matrix, evans_ratio, ReferenceFrame};
pub use pipeline::{
    default_route, evans_of, nystrom_grid, solve_jost_set, verify_identity, weighted_exponent, JostSet, PipelineOptions,
};
pub use scan::{
    circle_points, count_zeros, evans_at, evans_scan, winding_count, winding_number, ContourCount, ProblemFamily, ScanResult,
    CONTOUR_FLOOR,
};
pub use schrodinger::{jost_function_reference, scalar_schrodinger_kernel, schrodinger_problem, SchrodingerCase, BOUNDARY_SHIFT};
