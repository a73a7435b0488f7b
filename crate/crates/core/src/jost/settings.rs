use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{ProblemDefinition, SupportDescriptor};

/// Half-line of a Jost solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Plus,
    Minus,
}

/// Which integral equation produced a solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Volterra,
    Weighted,
    Mixed,
}

impl std::str::FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "volterra" => Ok(Route::Volterra),
            "weighted" => Ok(Route::Weighted),
            "mixed" => Ok(Route::Mixed),
            _ => Err(Error::InvalidInput(format!("unknown route {s:?}, expected volterra, weighted or mixed"))),
        }
    }
}

/// Numerical settings shared by the Jost solvers.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverSettings {
    /// Truncation `X`: solutions live on `[0, X]` or `[-X, 0]`.
    pub x_max: f64,
    /// Starting point of the Fredholm branch in the mixed equations.
    pub tau: f64,
    pub picard_tol: f64,
    pub max_iterations: usize,
    /// Offset `epsilon` in `mu_j = kappa_j + epsilon`; `None` means
    /// 0.01 times the minimal gap between exponent segments.
    pub epsilon: Option<f64>,
    /// Per-projection overrides of `epsilon`, indexed from 0.
    pub mu_offsets: Vec<f64>,
    /// Largest quadrature panel width.
    pub panel_width: f64,
    pub points_per_panel: usize,
    pub ode_tol: f64,
    pub grouping_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            x_max: 20.0,
            tau: 0.0,
            picard_tol: 1e-12,
            max_iterations: 500,
            epsilon: None,
            mu_offsets: Vec::new(),
            panel_width: 0.25,
            points_per_panel: 8,
            ode_tol: 1e-10,
            grouping_tol: crate::system::DEFAULT_GROUPING_TOL,
        }
    }
}

impl SolverSettings {
    /// Defaults with `X` chosen from the decay metadata: two units past a
    /// compact support, `30 / beta` (clamped to `[10, 40]`) for exponential
    /// decay and 60 for polynomial decay.
    pub fn for_problem(problem: &ProblemDefinition) -> Self {
        let x_max = match problem.support() {
            SupportDescriptor::Compact { halfwidth } => (halfwidth + 2.0).max(4.0),
            SupportDescriptor::Exponential { beta } if beta > 0.0 => (30.0 / beta).clamp(10.0, 40.0),
            SupportDescriptor::Exponential { .. } => 40.0,
            SupportDescriptor::Polynomial { .. } => 60.0,
        };
        Self { x_max, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_max > 0.0 && self.x_max.is_finite()) {
            return Err(Error::InvalidInput(format!("X must be positive, got {}", self.x_max)));
        }
        if !(self.picard_tol > 0.0) || self.max_iterations == 0 {
            return Err(Error::InvalidInput("picard_tol must be positive and max_iterations at least 1".into()));
        }
        if !(0.0..=self.x_max).contains(&self.tau) {
            return Err(Error::InvalidInput(format!("tau = {} must lie in [0, X]", self.tau)));
        }
        if !(self.panel_width > 0.0) || !(1..=16).contains(&self.points_per_panel) {
            return Err(Error::InvalidInput("panel width must be positive and points per panel in 1..=16".into()));
        }
        if !(self.ode_tol > 0.0) || !(self.grouping_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if self.epsilon.is_some_and(|e| !(e > 0.0)) || self.mu_offsets.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::InvalidInput("epsilon offsets must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ComplexMatrix;

    #[test]
    fn validation() {
        assert!(SolverSettings::default().validate().is_ok());
        let bad = SolverSettings { tau: 30.0, ..SolverSettings::default() };
        assert!(bad.validate().is_err());
        let bad = SolverSettings { picard_tol: 0.0, ..SolverSettings::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn truncation_from_metadata() {
        let a = ComplexMatrix::diag_real(&[-1.0, 1.0]);
        let p =
            ProblemDefinition::autonomous("c", a, |_| ComplexMatrix::zeros(2, 2), SupportDescriptor::Compact { halfwidth: 3.0 })
                .unwrap();
        assert_eq!(SolverSettings::for_problem(&p).x_max, 5.0);
        assert_eq!("mixed".parse::<Route>().unwrap(), Route::Mixed);
    }
}
