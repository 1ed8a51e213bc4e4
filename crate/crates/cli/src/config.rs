//! JSON description of a finite spectral triple with named states.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use spectral_transport::{
    ComplexMatrix, FiniteAlgebra, FiniteSpectralTriple, HermitianOperator, Method, SolverOptions,
    State, C64,
};
use thiserror::Error;

/// A complex number as `[re, im]`.
pub type ComplexPair = [f64; 2];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: field `{field}`: {message}")]
    Parse {
        path: String,
        field: String,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgebraConfig {
    /// `ℂⁿ` acting diagonally. `slots[i]` lists the 0-based Hilbert-space indices carrying
    /// coordinate `i`; omitted means one index per coordinate.
    Commutative {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        slots: Option<Vec<Vec<usize>>>,
    },
    /// `Mₙ(ℂ)` acting on `ℂⁿ`.
    FullMatrix { n: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateConfig {
    Weights(Vec<f64>),
    Density(Vec<Vec<ComplexPair>>),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleConfig {
    pub algebra: AlgebraConfig,
    pub dirac: Vec<Vec<ComplexPair>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub states: BTreeMap<String, StateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
}

/// A validated configuration.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub triple: FiniteSpectralTriple,
    pub states: BTreeMap<String, State>,
    pub solver: SolverOptions,
}

fn complex_matrix(rows: &[Vec<ComplexPair>]) -> Result<ComplexMatrix, String> {
    let rows: Vec<Vec<C64>> = rows
        .iter()
        .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(&rows).map_err(|e| e.to_string())
}

fn pairs(m: &ComplexMatrix) -> Vec<Vec<ComplexPair>> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

impl TripleConfig {
    pub fn parse(text: &str, path: &str) -> Result<Self, ConfigError> {
        let mut de = serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(&mut de).map_err(|e| ConfigError::Parse {
            path: path.to_string(),
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let display = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: display.clone(),
            source,
        })?;
        Self::parse(&text, &display)
    }

    /// Builds the triple, states and solver options, re-checking every invariant.
    pub fn validate(&self, path: &str) -> Result<Loaded, ConfigError> {
        let invalid = |message: String| ConfigError::Invalid {
            path: path.to_string(),
            message,
        };
        let dirac = complex_matrix(&self.dirac)
            .and_then(|m| HermitianOperator::new(m).map_err(|e| e.to_string()))
            .map_err(|e| invalid(format!("dirac: {e}")))?;
        let algebra = match &self.algebra {
            AlgebraConfig::Commutative { n, slots } => FiniteAlgebra::Commutative {
                slots: match slots {
                    Some(s) => {
                        if s.len() != *n {
                            return Err(invalid(format!(
                                "algebra.slots has {} entries but n = {n}",
                                s.len()
                            )));
                        }
                        s.clone()
                    }
                    None => (0..*n).map(|i| vec![i]).collect(),
                },
            },
            AlgebraConfig::FullMatrix { n } => FiniteAlgebra::FullMatrix { n: *n },
        };
        let triple =
            FiniteSpectralTriple::new(algebra, dirac).map_err(|e| invalid(e.to_string()))?;

        let mut states = BTreeMap::new();
        for (name, s) in &self.states {
            let state = match s {
                StateConfig::Weights(w) => State::probability(w.clone()),
                StateConfig::Density(rows) => complex_matrix(rows)
                    .and_then(|m| HermitianOperator::new(m).map_err(|e| e.to_string()))
                    .map_err(spectral_transport::Error::InvalidState)
                    .and_then(State::density),
            }
            .and_then(|st| triple.check_state(&st).map(|_| st))
            .map_err(|e| invalid(format!("states.{name}: {e}")))?;
            states.insert(name.clone(), state);
        }

        let mut solver = SolverOptions::default();
        if let Some(c) = &self.solver {
            if let Some(tol) = c.tol {
                if !(tol > 0.0 && tol.is_finite()) {
                    return Err(invalid(format!("solver.tol must be positive, got {tol}")));
                }
                solver.tol = tol;
            }
            if let Some(it) = c.max_iter {
                solver.max_iter = it;
            }
            if let Some(m) = c.method {
                solver.method = m;
            }
        }
        Ok(Loaded {
            triple,
            states,
            solver,
        })
    }

    /// Configuration describing `triple` with no states and default solver settings.
    pub fn from_triple(triple: &FiniteSpectralTriple) -> Self {
        let algebra = match triple.algebra() {
            FiniteAlgebra::Commutative { slots } => AlgebraConfig::Commutative {
                n: slots.len(),
                slots: Some(slots.clone()),
            },
            FiniteAlgebra::FullMatrix { n } => AlgebraConfig::FullMatrix { n: *n },
        };
        Self {
            algebra,
            dirac: pairs(triple.dirac().matrix()),
            states: BTreeMap::new(),
            solver: None,
        }
    }

    /// Adds a named state.
    pub fn with_state(mut self, name: &str, state: &State) -> Self {
        let cfg = match (state.weights(), state.density_matrix()) {
            (Some(w), _) => StateConfig::Weights(w.to_vec()),
            (_, Some(rho)) => StateConfig::Density(pairs(rho.matrix())),
            _ => unreachable!("a state is either weights or a density"),
        };
        self.states.insert(name.to_string(), cfg);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
