use serde::{Deserialize, Serialize};

use super::check::{check_placement, new_spend, Violation};
use super::{MilpModel, VarKind};
use crate::engine::{instance_fairness, measure_fields, Placement};
use crate::error::MilpError;
use crate::instance::Instance;

/// Scale factors that bring each objective term into `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalizers {
    /// Multiplier of `zmax` per measure: `1 / max a`.
    pub peak: Vec<f64>,
    /// Multiplier of `zavg` per measure: `1 / max a`.
    pub average: Vec<f64>,
    /// Multiplier of spend: `1 / budget`.
    pub cost: f64,
    /// Total fairness with only pre-existing installations.
    pub fairness_min: f64,
    /// Total fairness with the best single type on every placeable cell.
    pub fairness_max: f64,
    /// `1 / (fairness_max - fairness_min)`.
    pub fairness: f64,
}

fn inverse_or_one(v: f64) -> f64 {
    if v > 0.0 && v.is_finite() {
        1.0 / v
    } else {
        1.0
    }
}

pub fn objective_normalizers(inst: &Instance) -> Normalizers {
    let peak: Vec<f64> = inst
        .measures
        .iter()
        .map(|m| inverse_or_one(m.peak()))
        .collect();
    let base = Placement::do_nothing(inst);
    let total = |p: &Placement| {
        instance_fairness(inst, p)
            .expect("instance layers match")
            .sum()
    };
    let fairness_min = total(&base);
    let fairness_max = (0..inst.nbs.len())
        .map(|t| {
            let mut p = base.clone();
            for c in inst.dims.cells() {
                if inst.is_eligible(t, c) {
                    p.set(t, c, true);
                }
            }
            total(&p)
        })
        .fold(fairness_min, f64::max);
    let range = fairness_max - fairness_min;
    let fairness = if range > 1e-12 * fairness_max.abs().max(1.0) {
        1.0 / range
    } else {
        1.0
    };
    Normalizers {
        average: peak.clone(),
        peak,
        cost: inverse_or_one(inst.budget),
        fairness_min,
        fairness_max,
        fairness,
    }
}

/// Objective coefficients shared by the model and direct evaluation.
pub(crate) struct Coefficients {
    pub peak: Vec<f64>,
    pub average: Vec<f64>,
    /// Per unit of spend.
    pub cost: f64,
    /// Per unit of fairness (negative: fairness is maximized).
    pub fairness: f64,
    pub constant: f64,
}

impl Normalizers {
    pub(crate) fn coefficients(&self, inst: &Instance) -> Coefficients {
        let w = &inst.weights;
        let fairness = -w.fairness * self.fairness;
        Coefficients {
            peak: w.peak.iter().zip(&self.peak).map(|(a, b)| a * b).collect(),
            average: w
                .average
                .iter()
                .zip(&self.average)
                .map(|(a, b)| a * b)
                .collect(),
            cost: w.cost * self.cost,
            fairness,
            constant: -fairness * self.fairness_min,
        }
    }
}

/// Weighted, normalized objective contributions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveTerms {
    pub peak: Vec<f64>,
    pub average: Vec<f64>,
    pub cost: f64,
    /// Nonpositive when fairness improves on the pre-existing state.
    pub fairness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// `max (a - zbar)` per measure.
    pub peaks: Vec<f64>,
    /// `mean (a - zbar)` per measure.
    pub averages: Vec<f64>,
    /// Spend on new installations.
    pub spend: f64,
    pub fairness_total: f64,
    pub terms: ObjectiveTerms,
    pub objective: f64,
}

/// Objective of a placement computed directly from the kernel engine.
pub fn evaluate_solution(
    inst: &Instance,
    placement: &Placement,
) -> Result<Evaluation, Vec<Violation>> {
    let violations = check_placement(inst, placement);
    if !violations.is_empty() {
        return Err(violations);
    }
    let norm = objective_normalizers(inst);
    Ok(evaluate_with(inst, placement, &norm))
}

pub(crate) fn evaluate_with(
    inst: &Instance,
    placement: &Placement,
    norm: &Normalizers,
) -> Evaluation {
    let coef = norm.coefficients(inst);
    let inv_cells = 1.0 / inst.dims.cell_count() as f64;
    let mut peaks = Vec::with_capacity(inst.measures.len());
    let mut averages = Vec::with_capacity(inst.measures.len());
    for (u, m) in inst.measures.iter().enumerate() {
        let fields = measure_fields(inst, placement, u).expect("instance layers match");
        peaks.push(fields.reduced.max().unwrap_or(0.0));
        let mean_a = m.field.iter().sum::<f64>() * inv_cells;
        averages.push(mean_a - fields.zbar.iter().sum::<f64>() * inv_cells);
    }
    let spend = new_spend(inst, placement);
    let fairness_total = instance_fairness(inst, placement)
        .expect("instance layers match")
        .sum();
    let terms = ObjectiveTerms {
        peak: coef.peak.iter().zip(&peaks).map(|(c, v)| c * v).collect(),
        average: coef
            .average
            .iter()
            .zip(&averages)
            .map(|(c, v)| c * v)
            .collect(),
        cost: coef.cost * spend,
        fairness: coef.fairness * fairness_total + coef.constant,
    };
    let objective = terms.peak.iter().sum::<f64>()
        + terms.average.iter().sum::<f64>()
        + terms.cost
        + terms.fairness;
    Evaluation {
        peaks,
        averages,
        spend,
        fairness_total,
        terms,
        objective,
    }
}

/// Full model point induced by a placement: `y` is 1 exactly where
/// `z <= delta`, `zmax`/`zavg` are the tight peak and mean.
pub fn complete_point(
    inst: &Instance,
    model: &MilpModel,
    placement: &Placement,
) -> Result<Vec<f64>, MilpError> {
    let shape = (inst.dims.width, inst.dims.height);
    if placement.nbs_count() != inst.nbs.len()
        || placement.layers().iter().any(|l| l.shape() != shape)
    {
        return Err(MilpError::PlacementShape);
    }
    let mut point = vec![0.0; model.num_variables()];
    let mut set = |kind: VarKind, v: f64| {
        let idx = model.index_of(kind).expect("variable declared");
        point[idx] = v;
    };
    for t in 0..inst.nbs.len() {
        for c in inst.dims.cells() {
            set(
                VarKind::X { t, i: c.i, j: c.j },
                if placement.get(t, c) { 1.0 } else { 0.0 },
            );
        }
        if let Some(p) = inst.cluster_partition(t) {
            for (q, cluster) in p.clusters.iter().enumerate() {
                let on = cluster.iter().all(|&c| placement.get(t, c));
                set(VarKind::Lambda { t, q }, if on { 1.0 } else { 0.0 });
            }
        }
    }
    let inv_cells = 1.0 / inst.dims.cell_count() as f64;
    for (u, m) in inst.measures.iter().enumerate() {
        let fields = measure_fields(inst, placement, u).expect("shape checked");
        let delta = inst.delta(u);
        for c in inst.dims.cells() {
            let (i, j) = (c.i, c.j);
            let z = *fields.z.at(c);
            set(VarKind::Z { u, i, j }, z);
            set(VarKind::Zbar { u, i, j }, *fields.zbar.at(c));
            set(VarKind::Y { u, i, j }, if z <= delta { 1.0 } else { 0.0 });
        }
        set(VarKind::Zmax { u }, fields.reduced.max().unwrap_or(0.0));
        let mean_a = m.field.iter().sum::<f64>() * inv_cells;
        set(
            VarKind::Zavg { u },
            mean_a - fields.zbar.iter().sum::<f64>() * inv_cells,
        );
    }
    let f = instance_fairness(inst, placement).expect("shape checked");
    for c in inst.dims.cells() {
        set(VarKind::F { i: c.i, j: c.j }, *f.at(c));
    }
    Ok(point)
}
