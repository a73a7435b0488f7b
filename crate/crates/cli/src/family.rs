//! Spectral-parameter families built from a problem configuration.

use evanskit::evans::{schrodinger_problem, SchrodingerCase};
use evanskit::jost::{JostContext, SolverSettings};
use evanskit::system::{
    factorize_perturbation, Coefficient, Factorization, FactorizationKind, LoadedProblem, ProblemConfig, ProblemDefinition,
};
use evanskit::{Error, Result, C64};

/// A configured problem together with the numerical settings to use.
pub struct Family {
    pub name: String,
    problem: LoadedProblem,
    x_max: Option<f64>,
    continuity: bool,
}

/// One member of the family.
pub struct Member {
    pub ctx: JostContext,
    pub factorization: Factorization,
    /// The Schrödinger case, with the parameter as actually used.
    pub case: Option<SchrodingerCase>,
}

impl Family {
    pub fn new(config: ProblemConfig, x_max: Option<f64>, continuity: bool) -> Self {
        Self { name: config.name, problem: config.problem, x_max, continuity }
    }

    /// Parameter stored in the configuration, if any.
    pub fn default_parameter(&self) -> Option<C64> {
        match &self.problem {
            LoadedProblem::Schrodinger { k, .. } => *k,
            LoadedProblem::System { .. } => Some(C64::new(0.0, 0.0)),
        }
    }

    pub fn is_schrodinger(&self) -> bool {
        matches!(self.problem, LoadedProblem::Schrodinger { .. })
    }

    fn settings(&self, problem: &ProblemDefinition) -> SolverSettings {
        let mut s = SolverSettings::for_problem(problem);
        if let Some(x) = self.x_max {
            s.x_max = x;
        }
        s
    }

    /// The problem at `z`: `k = z` for Schrödinger problems, `A + z B` for
    /// autonomous systems.
    pub fn at(&self, z: C64) -> Result<Member> {
        match &self.problem {
            LoadedProblem::Schrodinger { potential, .. } => {
                let case = schrodinger_problem(potential, z, self.continuity)?;
                let ctx = case.context(self.settings(&case.problem))?;
                let factorization = case.factorization()?;
                Ok(Member { ctx, factorization, case: Some(case) })
            }
            LoadedProblem::System { problem: p, spectral } => {
                let problem = match (&p.coefficient, z == C64::new(0.0, 0.0)) {
                    (_, true) => p.clone(),
                    (Coefficient::Autonomous(a), false) => {
                        let shifted = a + &spectral.scale(z);
                        ProblemDefinition::new(p.name.clone(), Coefficient::Autonomous(shifted), p.perturbation.clone())?
                    }
                    (Coefficient::Sampled { .. }, false) => {
                        return Err(Error::InvalidInput("spectral shifts need an autonomous coefficient".into()))
                    }
                };
                let ctx = JostContext::autonomous(problem.clone(), self.settings(&problem))?;
                let factorization = factorize_perturbation(&ctx.problem, FactorizationKind::Polar)?;
                Ok(Member { ctx, factorization, case: None })
            }
        }
    }
}
