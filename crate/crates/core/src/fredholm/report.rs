use serde_json::{json, Value};

use crate::numerics::C64;

/// Both sides of `det2(I + K) = e^Theta D` with diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct Det2Report {
    pub theta: C64,
    pub evans_det: C64,
    pub det2_semiseparable: C64,
    /// Absent when the Nyström path was not run.
    pub det2_nystrom: Option<C64>,
    /// Largest of `|det2 - e^Theta D| / |det2|` over the two paths.
    pub identity_residual: f64,
    /// Picard iterations of the two hat equations.
    pub hat_iterations: (usize, usize),
    /// Nyström matrix size before and after dropping zero rows.
    pub nystrom_size: (usize, usize),
    /// Smallest-to-largest pivot ratio of the matrix whose determinant is `D`.
    pub evans_pivot_ratio: f64,
    /// Largest Jost defect decay ratio over the solutions used.
    pub jost_defects: Vec<f64>,
    /// Picard iterations of the Jost solves.
    pub jost_iterations: Vec<usize>,
}

/// `|a - b| / |a|`, or `|a - b|` when `a` vanishes.
pub fn relative_residual(a: C64, b: C64) -> f64 {
    let diff = (a - b).norm();
    if a.norm() > 0.0 {
        diff / a.norm()
    } else {
        diff
    }
}

fn pair(z: C64) -> Value {
    json!([z.re, z.im])
}

impl Det2Report {
    pub fn new(theta: C64, evans_det: C64, det2_semiseparable: C64, det2_nystrom: Option<C64>) -> Self {
        let rhs = theta.exp() * evans_det;
        let identity_residual =
            relative_residual(det2_semiseparable, rhs).max(det2_nystrom.map_or(0.0, |n| relative_residual(n, rhs)));
        Self {
            theta,
            evans_det,
            det2_semiseparable,
            det2_nystrom,
            identity_residual,
            hat_iterations: (0, 0),
            nystrom_size: (0, 0),
            evans_pivot_ratio: 1.0,
            jost_defects: Vec::new(),
            jost_iterations: Vec::new(),
        }
    }

    /// Relative gap between the two determinant paths.
    pub fn cross_path_residual(&self) -> Option<f64> {
        self.det2_nystrom.map(|n| relative_residual(n, self.det2_semiseparable))
    }

    /// JSON object with complex numbers written as `[re, im]`.
    pub fn to_json(&self) -> Value {
        json!({
            "theta": pair(self.theta),
            "evans_det": pair(self.evans_det),
            "det2_semiseparable": pair(self.det2_semiseparable),
            "det2_nystrom": self.det2_nystrom.map(pair),
            "identity_residual": self.identity_residual,
            "cross_path_residual": self.cross_path_residual(),
            "jost_defects": self.jost_defects,
            "iterations": {
                "jost": self.jost_iterations,
                "hat": [self.hat_iterations.0, self.hat_iterations.1],
            },
            "nystrom_size": [self.nystrom_size.0, self.nystrom_size.1],
            "evans_pivot_ratio": self.evans_pivot_ratio,
        })
    }
}
