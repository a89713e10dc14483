//! Optimal placement of nature-based solutions (NBS) on urban grids.
//!
//! The crate builds the mixed-integer linear program that chooses where to
//! install green walls, green roofs, street trees and urban parks so that
//! peaks and averages of urban-challenge measures (temperature, particulate
//! matter) drop, cost stays within budget and access to green space is fair.
//!
//! Field arithmetic ([`grid`], [`kernel`], [`engine`], [`analysis::gini`]) is
//! generic over [`Scalar`]; the instance and model layers use [`Real`].

pub mod analysis;
pub mod catalog;
pub mod cluster;
pub mod engine;
pub mod error;
pub mod grid;
pub mod instance;
pub mod kernel;
pub mod milp;
mod scalar;
pub mod solver;

pub use scalar::Scalar;

/// Scalar used by instances, models and reports.
pub type Real = f64;
/// Observed or derived field over the grid.
pub type Field = grid::Matrix<Real>;
pub type Field32 = grid::Matrix<f32>;
pub type RealKernel = kernel::Kernel<Real>;
pub type Kernel32 = kernel::Kernel<f32>;

pub use cluster::{build_partition, label_components};
pub use engine::Placement;
pub use grid::{Cell, GridDims, Matrix};
pub use instance::{generate_synthetic, load_instance, save_instance, Instance, SyntheticConfig};
pub use kernel::{
    build_kernel, compute_big_m, default_kernel_set, derive_delta, ImpactSpec, Kernel,
};
pub use milp::{build_model, evaluate_solution, objective_normalizers, MilpModel};
pub use solver::{solve_external, solve_oracle, SolveConfig, SolveResult, SolveStatus};
