use thiserror::Error;

/// Errors reported by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive semi-definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix exponential overflow: norm {norm:.3e} exceeds cap {cap:.3e}")]
    Overflow { norm: f64, cap: f64 },

    #[error("step size underflow at x = {x}")]
    StepUnderflow { x: f64 },

    #[error("step budget of {max_steps} exhausted at x = {x}")]
    StepBudget { x: f64, max_steps: usize },

    #[error("no exponential dichotomy: eigenvalue {eigenvalue} has real part within {tol:.1e} of zero")]
    NoDichotomy { eigenvalue: String, tol: f64 },

    #[error("query x = {x} lies outside [{a}, {b}]")]
    OutOfInterval { x: f64, a: f64, b: f64 },

    #[error("factorization mismatch at x = {x}: |Rl Rr - R| = {defect:.3e}")]
    FactorizationMismatch { x: f64, defect: f64 },

    #[error("iteration did not converge after {iterations} steps (last contraction ratio {ratio:.3e})")]
    NonConvergence { iterations: usize, ratio: f64 },

    #[error("hypothesis violated: {condition}")]
    HypothesisViolated { condition: String },

    #[error("no contraction for tau up to {tau} (estimated norm {norm:.3e})")]
    ContractionUnachievable { tau: f64, norm: f64 },

    #[error("rank deficiency: span has dimension {found}, expected {expected}")]
    RankDeficient { found: usize, expected: usize },

    #[error("coverage gap: {0}")]
    CoverageGap(String),

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("contour too close to a zero: |D| = {modulus:.3e} at z = {z}")]
    NearZeroContour { modulus: f64, z: String },

    #[error("contour undersampled: phase jump {jump:.3} rad with {points} points")]
    Undersampled { jump: f64, points: usize },

    #[error("eigenvalue iteration failed to converge")]
    EigenFailure,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{stage}: {source}")]
    Stage { stage: &'static str, source: Box<Error> },
}

impl Error {
    /// The underlying error with any stage labels removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

/// Labels an error with the pipeline stage that produced it.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage { stage, source: Box::new(e) })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
