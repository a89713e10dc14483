//! Post-solve reporting: reductions, budget breakdown, inequality and
//! exported heatmaps.

mod export;
pub mod gini;
mod report;
mod stats;

pub use export::{export_heatmaps, read_csv_matrix, write_csv_matrix, Category, Scale};
pub use gini::gini;
pub use report::{build_report, MeasureReport, NbsReport, Report, SolveSummary};
pub use stats::{batch_stats, GroupStats};
