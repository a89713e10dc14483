use serde::{Deserialize, Serialize};

use super::export::Category;
use super::gini::gini;
use crate::engine::{instance_fairness, measure_fields, Placement};
use crate::error::ReportError;
use crate::grid::Matrix;
use crate::instance::Instance;
use crate::milp::{check_placement, evaluate_with, objective_normalizers, ObjectiveTerms};
use crate::solver::{Backend, SolveResult, SolveStatus};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub id: String,
    pub unit: String,
    pub initial_peak: f64,
    pub final_peak: f64,
    pub initial_average: f64,
    pub final_average: f64,
    /// `100 * (initial - final) / initial`, 0 when the initial value is 0.
    pub peak_reduction_pct: f64,
    pub average_reduction_pct: f64,
    /// Initial minus final field, i.e. the capped reduction.
    pub delta: Matrix<f64>,
    /// Cells whose reduced value is negative.
    pub negative_cells: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NbsReport {
    pub id: String,
    pub new_cells: usize,
    pub pre_existing_cells: usize,
    /// Spend on new cells.
    pub spend: f64,
    /// Spend as a percentage of the budget.
    pub budget_pct: f64,
    /// Per-cell [`Category`] codes.
    pub categories: Matrix<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub status: SolveStatus,
    pub backend: Backend,
    pub wall_time: f64,
    pub bound: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub width: usize,
    pub height: usize,
    pub measures: Vec<MeasureReport>,
    pub nbs: Vec<NbsReport>,
    pub budget: f64,
    pub spend: f64,
    pub budget_pct: f64,
    pub fairness_initial: f64,
    pub fairness_final: f64,
    pub gini_initial: f64,
    pub gini_final: f64,
    pub terms: ObjectiveTerms,
    pub objective: f64,
    pub solve: SolveSummary,
}

fn reduction_pct(initial: f64, fin: f64) -> f64 {
    if initial == 0.0 {
        0.0
    } else {
        100.0 * (initial - fin) / initial
    }
}

fn categories(inst: &Instance, placement: &Placement, t: usize) -> Matrix<u8> {
    Matrix::from_fn(inst.dims.width, inst.dims.height, |i, j| {
        let c = crate::grid::Cell { i, j };
        let category = if inst.is_pre_existing(t, c) {
            Category::PreExisting
        } else if placement.get(t, c) {
            Category::New
        } else if inst.is_forbidden(t, c) {
            Category::Forbidden
        } else {
            Category::Unused
        };
        category as u8
    })
}

/// Compares the solved placement with the pre-existing-only state.
pub fn build_report(inst: &Instance, result: &SolveResult) -> Result<Report, ReportError> {
    let placement = result.placement.as_ref().ok_or_else(|| {
        ReportError::Infeasible(format!(
            "solve status {:?} carries no placement",
            result.status
        ))
    })?;
    let violations = check_placement(inst, placement);
    if let Some(v) = violations.first() {
        return Err(ReportError::Infeasible(format!(
            "{} violation(s), first: {v}",
            violations.len()
        )));
    }
    let norm = objective_normalizers(inst);
    let evaluation = evaluate_with(inst, placement, &norm);
    let base = Placement::do_nothing(inst);

    let mut measures = Vec::with_capacity(inst.measures.len());
    for (u, m) in inst.measures.iter().enumerate() {
        let fields = measure_fields(inst, placement, u)?;
        let initial_peak = m.peak();
        let initial_average = m.field.mean().unwrap_or(0.0);
        let final_peak = fields.reduced.max().unwrap_or(0.0);
        let final_average = fields.reduced.mean().unwrap_or(0.0);
        measures.push(MeasureReport {
            id: m.id.clone(),
            unit: m.unit.clone(),
            initial_peak,
            final_peak,
            initial_average,
            final_average,
            peak_reduction_pct: reduction_pct(initial_peak, final_peak),
            average_reduction_pct: reduction_pct(initial_average, final_average),
            delta: fields.zbar.clone(),
            negative_cells: fields.reduced.iter().filter(|&&v| v < 0.0).count(),
        });
    }

    let cell_budget_pct = |spend: f64| {
        if inst.budget > 0.0 {
            100.0 * spend / inst.budget
        } else {
            0.0
        }
    };
    let nbs: Vec<NbsReport> = inst
        .nbs
        .iter()
        .enumerate()
        .map(|(t, n)| {
            let new_cells = placement.new_cells(inst, t).count();
            let spend = new_cells as f64 * n.unit_cost;
            NbsReport {
                id: n.id.clone(),
                new_cells,
                pre_existing_cells: inst.masks.pre_existing[t].iter().filter(|&&e| e).count(),
                spend,
                budget_pct: cell_budget_pct(spend),
                categories: categories(inst, placement, t),
            }
        })
        .collect();

    let fairness_initial = instance_fairness(inst, &base)?;
    let fairness_final = instance_fairness(inst, placement)?;
    Ok(Report {
        width: inst.dims.width,
        height: inst.dims.height,
        measures,
        nbs,
        budget: inst.budget,
        spend: evaluation.spend,
        budget_pct: cell_budget_pct(evaluation.spend),
        fairness_initial: fairness_initial.sum(),
        fairness_final: fairness_final.sum(),
        gini_initial: gini(fairness_initial.as_slice())?,
        gini_final: gini(fairness_final.as_slice())?,
        terms: evaluation.terms,
        objective: evaluation.objective,
        solve: SolveSummary {
            status: result.status,
            backend: result.backend,
            wall_time: result.wall_time,
            bound: result.bound,
            note: result.note.clone(),
        },
    })
}
