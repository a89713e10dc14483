use std::path::PathBuf;

use thiserror::Error;

use crate::grid::Cell;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid must be non-empty, got {width}x{height}")]
    EmptyGrid { width: usize, height: usize },
    #[error("resolution must be positive and finite, got {0}")]
    BadResolution(f64),
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel dimensions must be odd and positive, got {rows}x{cols}")]
    EvenSize { rows: usize, cols: usize },
    #[error("kernel entry at ({i}, {j}) is negative or not finite")]
    BadEntry { i: usize, j: usize },
    #[error("kernel center {center} is smaller than edge {edge}")]
    InvertedRange { center: f64, edge: f64 },
    #[error("kernel peak must sit at the center")]
    OffCenterPeak,
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Invariant violations found while validating an instance.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("grid: {0}")]
    Grid(#[from] GridError),
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("unknown {kind} id `{id}` in {field}")]
    UnknownId {
        kind: &'static str,
        id: String,
        field: &'static str,
    },
    #[error("nbs `{nbs}` has non-positive unit cost {cost}")]
    BadCost { nbs: String, cost: f64 },
    #[error("{field}: matrix is {found:?}, grid is {expected:?}")]
    FieldShape {
        field: String,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("{field}: non-finite value at {cell}")]
    NonFinite { field: String, cell: Cell },
    #[error("{field}: {value} is not allowed ({reason})")]
    BadValue {
        field: String,
        value: f64,
        reason: &'static str,
    },
    #[error("missing kernel for measure `{measure}` and nbs `{nbs}`")]
    MissingKernel { measure: String, nbs: String },
    #[error("missing fairness kernel for nbs `{nbs}`")]
    MissingFairnessKernel { nbs: String },
    #[error("kernel {which}: {source}")]
    Kernel { which: String, source: KernelError },
    #[error("{field}: cell {cell} is outside the grid")]
    OutOfGrid { field: String, cell: Cell },
    #[error("cell {cell} is both forbidden and pre-existing for nbs `{nbs}`")]
    ForbiddenAndPreExisting { nbs: String, cell: Cell },
    #[error("cell pre-exists for two types: {cell} in `{first}` and `{second}`")]
    PreExistsForTwoTypes {
        cell: Cell,
        first: String,
        second: String,
    },
    #[error("population must have positive total mass")]
    EmptyPopulation,
    #[error("objective weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("cluster {cluster} of nbs `{nbs}` contains {cell}: {reason}")]
    BadClusterCell {
        nbs: String,
        cluster: usize,
        cell: Cell,
        reason: &'static str,
    },
    #[error("cluster {cluster} of nbs `{nbs}` is empty")]
    EmptyCluster { nbs: String, cluster: usize },
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("invalid instance: {0}")]
    Validation(#[from] ValidationError),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("generator: {0}")]
    Generator(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MilpError {
    #[error("missing kernel for measure `{measure}` and nbs `{nbs}`")]
    MissingKernel { measure: String, nbs: String },
    #[error("cluster {cluster} of nbs `{nbs}` contains forbidden cell {cell}")]
    ClusterCellForbidden {
        nbs: String,
        cluster: usize,
        cell: Cell,
    },
    #[error("placement shape does not match the instance")]
    PlacementShape,
    #[error("point has {found} values, model has {expected} variables")]
    PointLength { expected: usize, found: usize },
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("{units} decision units exceed the enumeration cap of {cap}")]
    CapExceeded { units: usize, cap: usize },
    #[error("invalid solve configuration: {0}")]
    Config(String),
    #[error("external solver not available: {0}")]
    SolverMissing(String),
    #[error("external solver failed: {0}")]
    SolverFailed(String),
    #[error("could not parse solution file: {0}")]
    Parse(String),
    #[error("solution re-check failed: {0}")]
    Verification(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] MilpError),
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("gini input contains a negative or non-finite value at position {0}")]
    NegativeInput(usize),
    #[error("gini input is empty")]
    EmptyInput,
    #[error("result placement is infeasible: {0}")]
    Infeasible(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("image encoding failed: {0}")]
    Image(String),
    #[error(transparent)]
    Model(#[from] MilpError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl InstanceError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Self::Parse { .. } => "instance.parse",
            Self::Validation(_) => "instance.validation",
            Self::Io { .. } => "instance.io",
            Self::Generator(_) => "instance.generator",
        }
    }
}

impl SolveError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Self::CapExceeded { .. } => "solver.cap_exceeded",
            Self::Config(_) => "solver.config",
            Self::SolverMissing(_) => "solver.missing",
            Self::SolverFailed(_) => "solver.failed",
            Self::Parse(_) => "solver.parse",
            Self::Verification(_) => "solver.verification",
            Self::Io { .. } => "solver.io",
            Self::Model(_) => "milp.build",
        }
    }
}

impl ReportError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Self::NegativeInput(_) | Self::EmptyInput => "report.gini",
            Self::Infeasible(_) => "report.infeasible",
            Self::Io { .. } => "report.io",
            Self::Image(_) => "report.image",
            Self::Model(_) => "milp.build",
            Self::Engine(_) => "engine.shape",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("{kernels} kernels supplied for a placement with {layers} nbs layers")]
    LayerCount { kernels: usize, layers: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
}
