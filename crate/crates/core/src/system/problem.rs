use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

/// Shared matrix-valued function of a real variable.
pub type MatrixFn = Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync>;

/// Declared decay of the perturbation at infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SupportDescriptor {
    /// `R(x) = 0` for `|x| > halfwidth`.
    Compact { halfwidth: f64 },
    /// `|R| e^{beta |x|}` integrable.
    Exponential { beta: f64 },
    /// `|R| (1 + |x|)^degree` integrable.
    Polynomial { degree: f64 },
}

impl SupportDescriptor {
    /// The weight `w(x)` against which `|R|` is declared integrable.
    pub fn weight(&self, x: f64) -> f64 {
        match *self {
            SupportDescriptor::Compact { .. } => 1.0,
            SupportDescriptor::Exponential { beta } => (beta * x.abs()).exp(),
            SupportDescriptor::Polynomial { degree } => (1.0 + x.abs()).powf(degree),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SupportDescriptor::Compact { halfwidth } => halfwidth.is_finite() && halfwidth >= 0.0,
            SupportDescriptor::Exponential { beta } => beta.is_finite() && beta >= 0.0,
            SupportDescriptor::Polynomial { degree } => degree.is_finite() && degree >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid support descriptor {self:?}")))
        }
    }
}

/// The unperturbed coefficient `A`.
#[derive(Clone)]
pub enum Coefficient {
    Autonomous(ComplexMatrix),
    /// `A(x)` given as a profile, trusted on `domain`.
    Sampled {
        function: MatrixFn,
        domain: (f64, f64),
    },
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Autonomous(a) => f.debug_tuple("Autonomous").field(a).finish(),
            Coefficient::Sampled { domain, .. } => f.debug_struct("Sampled").field("domain", domain).finish_non_exhaustive(),
        }
    }
}

/// The perturbation `R(x)` with its decay metadata.
#[derive(Clone)]
pub struct Perturbation {
    pub function: MatrixFn,
    pub support: SupportDescriptor,
    /// Points where `R` may jump; grids place panel edges there.
    pub breakpoints: Vec<f64>,
    /// Set when `R` is known to vanish identically.
    pub vanishes: bool,
}

impl Perturbation {
    pub fn new(function: MatrixFn, support: SupportDescriptor) -> Self {
        Self { function, support, breakpoints: Vec::new(), vanishes: false }
    }

    pub fn zero(dimension: usize) -> Self {
        Self {
            function: Arc::new(move |_| ComplexMatrix::zeros(dimension, dimension)),
            support: SupportDescriptor::Compact { halfwidth: 0.0 },
            breakpoints: Vec::new(),
            vanishes: true,
        }
    }

    pub fn with_breakpoints(mut self, breakpoints: Vec<f64>) -> Self {
        self.breakpoints = breakpoints;
        self
    }

    /// `R(x)` multiplied by the indicator of `[-n, n]`. A compact support
    /// already inside `[-n, n]` is kept as it is.
    pub fn truncated(&self, n: f64) -> Result<Self> {
        if !(n > 0.0) {
            return Err(Error::InvalidInput(format!("truncation radius must be positive, got {n}")));
        }
        if let SupportDescriptor::Compact { halfwidth } = self.support {
            if halfwidth <= n {
                return Ok(self.clone());
            }
        }
        let f = self.function.clone();
        let mut breakpoints: Vec<f64> = self.breakpoints.iter().copied().filter(|b| b.abs() < n).collect();
        breakpoints.extend([-n, n]);
        Ok(Self {
            function: Arc::new(move |x: f64| {
                let m = f(x);
                if x.abs() <= n {
                    m
                } else {
                    ComplexMatrix::zeros(m.rows(), m.cols())
                }
            }),
            support: SupportDescriptor::Compact { halfwidth: n },
            breakpoints,
            vanishes: self.vanishes,
        })
    }
}

impl fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Perturbation")
            .field("support", &self.support)
            .field("breakpoints", &self.breakpoints)
            .field("vanishes", &self.vanishes)
            .finish_non_exhaustive()
    }
}

/// A perturbed system `y' = (A(x) + R(x)) y`.
#[derive(Clone, Debug)]
pub struct ProblemDefinition {
    pub name: String,
    pub dimension: usize,
    pub coefficient: Coefficient,
    pub perturbation: Perturbation,
}

impl ProblemDefinition {
    pub fn new(name: impl Into<String>, coefficient: Coefficient, perturbation: Perturbation) -> Result<Self> {
        let dimension = match &coefficient {
            Coefficient::Autonomous(a) => {
                if !a.is_square() || a.rows() == 0 || !a.is_finite() {
                    return Err(Error::InvalidInput("coefficient must be a finite non-empty square matrix".into()));
                }
                a.rows()
            }
            Coefficient::Sampled { function, domain } => {
                if !(domain.0 < 0.0 && 0.0 < domain.1) {
                    return Err(Error::InvalidInput("sampled coefficient domain must contain 0 in its interior".into()));
                }
                function(0.0).rows()
            }
        };
        perturbation.support.validate()?;
        let problem = Self { name: name.into(), dimension, coefficient, perturbation };
        let r0 = problem.r(0.0);
        if r0.shape() != (dimension, dimension) || problem.a(0.0).shape() != (dimension, dimension) {
            return Err(Error::InvalidInput(format!("coefficient and perturbation must both be {dimension}x{dimension}")));
        }
        Ok(problem)
    }

    /// Autonomous problem with the given perturbation profile.
    pub fn autonomous(
        name: impl Into<String>,
        a: ComplexMatrix,
        r: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static,
        support: SupportDescriptor,
    ) -> Result<Self> {
        Self::new(name, Coefficient::Autonomous(a), Perturbation::new(Arc::new(r), support))
    }

    /// Unperturbed autonomous problem.
    pub fn free(name: impl Into<String>, a: ComplexMatrix) -> Result<Self> {
        let d = a.rows();
        Self::new(name, Coefficient::Autonomous(a), Perturbation::zero(d))
    }

    pub fn is_autonomous(&self) -> bool {
        matches!(self.coefficient, Coefficient::Autonomous(_))
    }

    pub fn autonomous_matrix(&self) -> Option<&ComplexMatrix> {
        match &self.coefficient {
            Coefficient::Autonomous(a) => Some(a),
            Coefficient::Sampled { .. } => None,
        }
    }

    pub fn a(&self, x: f64) -> ComplexMatrix {
        match &self.coefficient {
            Coefficient::Autonomous(a) => a.clone(),
            Coefficient::Sampled { function, .. } => function(x),
        }
    }

    pub fn r(&self, x: f64) -> ComplexMatrix {
        (self.perturbation.function)(x)
    }

    pub fn support(&self) -> SupportDescriptor {
        self.perturbation.support
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.perturbation.breakpoints
    }

    /// Same problem with a replaced perturbation.
    pub fn with_perturbation(&self, perturbation: Perturbation) -> Result<Self> {
        Self::new(self.name.clone(), self.coefficient.clone(), perturbation)
    }

    /// `R` known to vanish, either declared or with zero compact support.
    pub fn perturbation_vanishes(&self) -> bool {
        self.perturbation.vanishes
            || matches!(self.perturbation.support, SupportDescriptor::Compact { halfwidth } if halfwidth == 0.0)
    }

    /// Samples `|R|` against the declared support or weight on `[-x_max, x_max]`.
    ///
    /// Compact support must give exact zeros outside the halfwidth. Declared
    /// decay requires `|R(x)| w(x)` finite and, on the outer half of the
    /// interval, no larger than ten times its maximum on the inner half.
    pub fn validate_decay(&self, x_max: f64) -> Result<()> {
        let samples = 401;
        match self.perturbation.support {
            SupportDescriptor::Compact { halfwidth } => {
                let reach = x_max.max(2.0 * halfwidth + 1.0);
                for i in 0..samples {
                    let t = i as f64 / (samples - 1) as f64;
                    let x = halfwidth + (reach - halfwidth) * t + 1e-9 * (1.0 + halfwidth);
                    for &s in &[x, -x] {
                        if !self.r(s).is_zero() {
                            return Err(Error::HypothesisViolated {
                                condition: format!("perturbation declared compactly supported in [-{halfwidth}, {halfwidth}] is nonzero at x = {s}"),
                            });
                        }
                    }
                }
                Ok(())
            }
            support => {
                let mut inner: f64 = 0.0;
                let mut outer: f64 = 0.0;
                for i in 0..samples {
                    let x = -x_max + 2.0 * x_max * i as f64 / (samples - 1) as f64;
                    let v = self.r(x).frobenius_norm() * support.weight(x);
                    if !v.is_finite() {
                        return Err(Error::HypothesisViolated {
                            condition: format!("weighted perturbation norm is not finite at x = {x}"),
                        });
                    }
                    if x.abs() <= 0.5 * x_max {
                        inner = inner.max(v);
                    } else {
                        outer = outer.max(v);
                    }
                }
                if outer > 10.0 * inner.max(f64::MIN_POSITIVE) && outer > 1e-300 {
                    return Err(Error::HypothesisViolated {
                        condition: format!(
                            "perturbation does not decay at the declared rate {support:?}: weighted norm grows from {inner:.3e} to {outer:.3e}"
                        ),
                    });
                }
                Ok(())
            }
        }
    }
}
