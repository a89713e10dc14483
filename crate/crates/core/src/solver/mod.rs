//! Solving placement models: an exhaustive oracle for tiny instances and a
//! bridge to external MILP solvers through MPS files.

mod external;
pub mod mps;
mod oracle;

use serde::{Deserialize, Serialize};

pub use external::{
    default_solver_command, parse_solution, solve_external, ExternalStatus, ParsedSolution,
    SOLVER_ENV,
};
pub use oracle::{decision_units, solve_oracle, DecisionUnits};

use crate::engine::Placement;
use crate::error::SolveError;
use crate::milp::Evaluation;

/// Default wall-clock limit in seconds.
pub const DEFAULT_TIME_LIMIT: f64 = 1800.0;
/// Default cap on decision units for the oracle.
pub const DEFAULT_MAX_UNITS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Oracle,
    External,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub backend: Backend,
    /// Seconds.
    pub time_limit: f64,
    /// Relative optimality gap accepted from the solver.
    pub gap: f64,
    /// Command template with `{model}`, `{solution}`, `{timelimit}` and
    /// `{gap}` placeholders; falls back to [`SOLVER_ENV`] and then to a CBC
    /// binary found on the system.
    pub solver_command: Option<String>,
    pub max_units: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            backend: Backend::Oracle,
            time_limit: DEFAULT_TIME_LIMIT,
            gap: 1e-9,
            solver_command: None,
            max_units: DEFAULT_MAX_UNITS,
        }
    }
}

impl SolveConfig {
    pub fn external() -> Self {
        Self {
            backend: Backend::External,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.time_limit.is_finite() && self.time_limit > 0.0) {
            return Err(SolveError::Config(format!(
                "time limit must be positive, got {}",
                self.time_limit
            )));
        }
        if !(self.gap.is_finite() && self.gap >= 0.0) {
            return Err(SolveError::Config(format!(
                "gap must be nonnegative, got {}",
                self.gap
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    FeasibleTimeout,
    Infeasible,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub backend: Backend,
    pub placement: Option<Placement>,
    /// Objective re-evaluated from the placement.
    pub objective: Option<f64>,
    /// Best known lower bound, when the backend proves one.
    pub bound: Option<f64>,
    /// Seconds.
    pub wall_time: f64,
    #[serde(skip)]
    pub evaluation: Option<Evaluation>,
    /// Raw column values reported by an external solver, in model order.
    #[serde(skip)]
    pub raw_point: Option<Vec<f64>>,
    #[serde(default)]
    pub note: Option<String>,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}
