//! JSON problem configuration.
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "coefficient": {"type": "schrodinger", "potential": {"name": "poschl_teller"}, "k": [0, 2]}
//! }
//! ```
//!
//! Autonomous systems give `"coefficient": {"type": "autonomous", "matrix": [[[re, im], ...], ...]}`,
//! optionally with `"spectral"`, the matrix `B` of the family `A + z B`
//! (default `-I`), and a perturbation with a support or decay descriptor and a profile:
//!
//! ```json
//! "perturbation": {"decay": "exponential", "beta": 1, "profile": {"kind": "gap_counterexample"}}
//! ```

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use super::potential::Potential;
use super::problem::{Coefficient, Perturbation, ProblemDefinition, SupportDescriptor};
use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, C64};

type Entries = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    name: Option<String>,
    dimension: usize,
    coefficient: RawCoefficient,
    #[serde(default)]
    perturbation: Option<RawPerturbation>,
    #[serde(default)]
    truncation: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum RawCoefficient {
    Autonomous {
        matrix: Entries,
        #[serde(default)]
        spectral: Option<Entries>,
    },
    Schrodinger {
        potential: RawPotential,
        #[serde(default)]
        k: Option<[f64; 2]>,
    },
}

fn default_depth() -> f64 {
    2.0
}

#[derive(Debug, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
enum RawPotential {
    Zero,
    PoschlTeller {
        #[serde(default = "default_depth")]
        depth: f64,
    },
    SquareWell {
        v0: f64,
        a: f64,
    },
    Gaussian {
        amplitude: f64,
        width: f64,
    },
    Samples {
        points: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPerturbation {
    #[serde(default)]
    support: Option<String>,
    #[serde(default)]
    halfwidth: Option<f64>,
    #[serde(default)]
    decay: Option<String>,
    #[serde(default)]
    beta: Option<f64>,
    #[serde(default)]
    degree: Option<f64>,
    #[serde(default)]
    profile: Option<RawProfile>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawProfile {
    Zero,
    GapCounterexample,
    Constant { matrix: Entries },
    Bump { matrix: Entries, width: f64 },
    Exponential { matrix: Entries, rate: f64 },
}

/// A parsed problem: either a general system or a Schrodinger equation
/// whose spectral parameter may be fixed later.
#[derive(Clone, Debug)]
pub enum LoadedProblem {
    /// `A(z) = A + z B`; `spectral` holds `B` (default `-I`).
    System {
        problem: ProblemDefinition,
        spectral: ComplexMatrix,
    },
    Schrodinger {
        potential: Potential,
        k: Option<C64>,
    },
}

#[derive(Clone, Debug)]
pub struct ProblemConfig {
    pub name: String,
    pub problem: LoadedProblem,
    pub truncation: Option<f64>,
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::InvalidInput(format!("config: {}", msg.into()))
}

fn matrix_from(entries: &Entries, d: usize, what: &str) -> Result<ComplexMatrix> {
    if entries.len() != d || entries.iter().any(|r| r.len() != d) {
        return Err(config_error(format!("{what} must be {d}x{d}")));
    }
    let m = ComplexMatrix::from_fn(d, d, |i, j| C64::new(entries[i][j][0], entries[i][j][1]));
    if !m.is_finite() {
        return Err(config_error(format!("{what} has non-finite entries")));
    }
    Ok(m)
}

fn descriptor(p: &RawPerturbation) -> Result<SupportDescriptor> {
    let desc = match (p.support.as_deref(), p.decay.as_deref()) {
        (Some("compact"), None) => SupportDescriptor::Compact {
            halfwidth: p.halfwidth.ok_or_else(|| config_error("compact support needs \"halfwidth\""))?,
        },
        (None, Some("exponential")) => {
            SupportDescriptor::Exponential { beta: p.beta.ok_or_else(|| config_error("exponential decay needs \"beta\""))? }
        }
        (None, Some("polynomial")) => {
            SupportDescriptor::Polynomial { degree: p.degree.ok_or_else(|| config_error("polynomial decay needs \"degree\""))? }
        }
        _ => return Err(config_error("perturbation needs exactly one of support=compact or decay=exponential|polynomial")),
    };
    desc.validate().map_err(|_| config_error(format!("invalid descriptor {desc:?}")))?;
    Ok(desc)
}

fn perturbation_from(p: &RawPerturbation, d: usize) -> Result<Perturbation> {
    let support = descriptor(p)?;
    let profile = p.profile.as_ref().ok_or_else(|| config_error("perturbation needs a \"profile\""))?;
    let compact_cut = match support {
        SupportDescriptor::Compact { halfwidth } => Some(halfwidth),
        _ => None,
    };
    let cut = move |x: f64, m: ComplexMatrix| match compact_cut {
        Some(a) if x.abs() > a => ComplexMatrix::zeros(m.rows(), m.cols()),
        _ => m,
    };
    let mut breakpoints: Vec<f64> = compact_cut.map(|a| vec![-a, a]).unwrap_or_default();
    let function: Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync> = match profile {
        RawProfile::Zero => return Ok(Perturbation::zero(d)),
        RawProfile::GapCounterexample => {
            if d != 3 {
                return Err(config_error("gap_counterexample profile needs dimension 3"));
            }
            breakpoints.push(0.0);
            Arc::new(move |x: f64| {
                let mut m = ComplexMatrix::zeros(3, 3);
                if x >= 0.0 {
                    m[(0, 1)] = C64::new((-x).exp() * x.cos(), 0.0);
                }
                cut(x, m)
            })
        }
        RawProfile::Constant { matrix } => {
            if compact_cut.is_none() {
                return Err(config_error("constant profile needs compact support"));
            }
            let m = matrix_from(matrix, d, "profile matrix")?;
            Arc::new(move |x: f64| cut(x, m.clone()))
        }
        RawProfile::Bump { matrix, width } => {
            let m = matrix_from(matrix, d, "profile matrix")?;
            let w = *width;
            if !(w > 0.0) {
                return Err(config_error("bump width must be positive"));
            }
            Arc::new(move |x: f64| cut(x, m.scale_real((-(x / w).powi(2)).exp())))
        }
        RawProfile::Exponential { matrix, rate } => {
            let m = matrix_from(matrix, d, "profile matrix")?;
            let r = *rate;
            Arc::new(move |x: f64| cut(x, m.scale_real((-r * x.abs()).exp())))
        }
    };
    Ok(Perturbation::new(function, support).with_breakpoints(breakpoints))
}

fn potential_from(p: &RawPotential) -> Result<Potential> {
    match p {
        RawPotential::Zero => Ok(Potential::zero()),
        RawPotential::PoschlTeller { depth } => Ok(Potential::poschl_teller(*depth)),
        RawPotential::SquareWell { v0, a } => Potential::square_well(*v0, *a).map_err(|e| config_error(e.to_string())),
        RawPotential::Gaussian { amplitude, width } => {
            Potential::gaussian(*amplitude, *width).map_err(|e| config_error(e.to_string()))
        }
        RawPotential::Samples { points } => {
            let pts = points
                .iter()
                .map(|p| match p.as_slice() {
                    [x, v] => Ok((*x, C64::new(*v, 0.0))),
                    [x, re, im] => Ok((*x, C64::new(*re, *im))),
                    _ => Err(config_error("potential samples are [x, V] or [x, re V, im V]")),
                })
                .collect::<Result<Vec<_>>>()?;
            Potential::samples(pts).map_err(|e| config_error(e.to_string()))
        }
    }
}

/// Parses a configuration document.
pub fn parse_config(text: &str) -> Result<ProblemConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| config_error(e.to_string()))?;
    if raw.dimension == 0 {
        return Err(config_error("dimension must be positive"));
    }
    if let Some(n) = raw.truncation {
        if !(n > 0.0) {
            return Err(config_error("truncation must be positive"));
        }
    }
    let name = raw.name.clone();
    let problem = match &raw.coefficient {
        RawCoefficient::Autonomous { matrix, spectral } => {
            let a = matrix_from(matrix, raw.dimension, "coefficient matrix")?;
            let spectral = match spectral {
                Some(b) => matrix_from(b, raw.dimension, "spectral matrix")?,
                None => ComplexMatrix::identity(raw.dimension).scale_real(-1.0),
            };
            let pert = match &raw.perturbation {
                Some(p) => perturbation_from(p, raw.dimension)?,
                None => Perturbation::zero(raw.dimension),
            };
            let pert = match raw.truncation {
                Some(n) => pert.truncated(n)?,
                None => pert,
            };
            let label = name.clone().unwrap_or_else(|| "autonomous".into());
            let problem =
                ProblemDefinition::new(label, Coefficient::Autonomous(a), pert).map_err(|e| config_error(e.to_string()))?;
            LoadedProblem::System { problem, spectral }
        }
        RawCoefficient::Schrodinger { potential, k } => {
            if raw.dimension != 2 {
                return Err(config_error("schrodinger problems have dimension 2"));
            }
            if raw.perturbation.is_some() {
                return Err(config_error("schrodinger problems derive the perturbation from the potential"));
            }
            let v = potential_from(potential)?;
            let v = match raw.truncation {
                Some(n) => v.truncated(n),
                None => v,
            };
            let k = k.map(|k| C64::new(k[0], k[1]));
            if k.is_some_and(|k| !k.is_finite()) {
                return Err(config_error("k must be finite"));
            }
            LoadedProblem::Schrodinger { potential: v, k }
        }
    };
    let name = name.unwrap_or_else(|| match &problem {
        LoadedProblem::System { problem, .. } => problem.name.clone(),
        LoadedProblem::Schrodinger { potential, .. } => potential.name.clone(),
    });
    Ok(ProblemConfig { name, problem, truncation: raw.truncation })
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<ProblemConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}
