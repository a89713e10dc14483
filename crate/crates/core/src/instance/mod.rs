//! Problem instances: grid, NBS catalog, observed fields, masks, population,
//! budget and objective weights.

mod io;
mod synth;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use io::{instance_from_json, instance_to_json, load_instance, save_instance};
pub use synth::{generate_synthetic, thin_to_units, SyntheticConfig};

use crate::error::ValidationError;
use crate::grid::{Cell, GridDims, Matrix};
use crate::kernel::{compute_big_m, derive_delta, Kernel};

/// Weights must sum to one within this tolerance.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NbsType {
    pub id: String,
    pub name: String,
    /// Cost of one cell per year.
    pub unit_cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UcMeasure {
    pub id: String,
    pub unit: String,
    pub field: Matrix<f64>,
    /// Explicit reduction cap; derived from the field when absent.
    pub delta: Option<f64>,
}

impl UcMeasure {
    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or_else(|| derive_delta(&self.field))
    }

    pub fn peak(&self) -> f64 {
        self.field.max().unwrap_or(0.0)
    }
}

/// Forbidden and pre-existing cells, one boolean layer per NBS type.
#[derive(Clone, Debug, PartialEq)]
pub struct Masks {
    pub forbidden: Vec<Matrix<bool>>,
    pub pre_existing: Vec<Matrix<bool>>,
}

impl Masks {
    pub fn empty(dims: GridDims, nbs_count: usize) -> Self {
        let layer = Matrix::filled(dims.width, dims.height, false);
        Self {
            forbidden: vec![layer.clone(); nbs_count],
            pre_existing: vec![layer; nbs_count],
        }
    }
}

/// Share of residents per cell; entries sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct Population(Matrix<f64>);

impl Population {
    /// Normalize raw counts or fractions to fractions summing to one.
    pub fn normalized(raw: Matrix<f64>) -> Result<Self, ValidationError> {
        for (k, &v) in raw.iter().enumerate() {
            let cell = Cell::new(k / raw.cols().max(1), k % raw.cols().max(1));
            if !v.is_finite() {
                return Err(ValidationError::NonFinite {
                    field: "population".into(),
                    cell,
                });
            }
            if v < 0.0 {
                return Err(ValidationError::BadValue {
                    field: "population".into(),
                    value: v,
                    reason: "negative",
                });
            }
        }
        let total = raw.sum();
        if total <= 0.0 {
            return Err(ValidationError::EmptyPopulation);
        }
        // Re-dividing an already normalized field would perturb the last bits
        // and break load/save fixed points.
        if (total - 1.0).abs() <= 1e-12 {
            return Ok(Self(raw));
        }
        Ok(Self(raw.map(|&v| v / total)))
    }

    pub fn uniform(dims: GridDims) -> Self {
        Self(Matrix::filled(
            dims.width,
            dims.height,
            1.0 / dims.cell_count() as f64,
        ))
    }

    pub fn field(&self) -> &Matrix<f64> {
        &self.0
    }
}

/// Objective weights; per-measure vectors follow the instance's measure order.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveWeights {
    pub peak: Vec<f64>,
    pub average: Vec<f64>,
    pub cost: f64,
    pub fairness: f64,
}

impl ObjectiveWeights {
    /// Same weight on every term: `1 / (2 |U| + 2)`.
    pub fn equal(measures: usize) -> Self {
        let w = 1.0 / (2 * measures + 2) as f64;
        Self {
            peak: vec![w; measures],
            average: vec![w; measures],
            cost: w,
            fairness: w,
        }
    }

    /// Only the fairness term counts.
    pub fn fairness_only(measures: usize) -> Self {
        Self {
            peak: vec![0.0; measures],
            average: vec![0.0; measures],
            cost: 0.0,
            fairness: 1.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.peak.iter().chain(&self.average).sum::<f64>() + self.cost + self.fairness
    }

    fn all(&self) -> impl Iterator<Item = (String, f64)> + '_ {
        let peak = self
            .peak
            .iter()
            .enumerate()
            .map(|(u, &w)| (format!("weights.peak[{u}]"), w));
        let avg = self
            .average
            .iter()
            .enumerate()
            .map(|(u, &w)| (format!("weights.average[{u}]"), w));
        peak.chain(avg).chain([
            ("weights.cost".to_string(), self.cost),
            ("weights.fairness".to_string(), self.fairness),
        ])
    }
}

/// All-or-nothing placement units for one NBS type.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterPartition {
    pub clusters: Vec<Vec<Cell>>,
    /// Eligible cells left individually placeable.
    pub residual: Vec<Cell>,
}

impl ClusterPartition {
    pub fn clustered_cells(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub dims: GridDims,
    pub nbs: Vec<NbsType>,
    pub measures: Vec<UcMeasure>,
    /// Indexed `[measure][nbs]`.
    pub kernels: Vec<Vec<Kernel<f64>>>,
    /// Indexed by NBS.
    pub fairness_kernels: Vec<Kernel<f64>>,
    pub masks: Masks,
    pub population: Population,
    pub budget: f64,
    pub weights: ObjectiveWeights,
    /// Per NBS; `None` leaves every eligible cell individually placeable.
    pub clusters: Vec<Option<ClusterPartition>>,
}

impl Instance {
    pub fn nbs_index(&self, id: &str) -> Option<usize> {
        self.nbs.iter().position(|n| n.id == id)
    }

    pub fn measure_index(&self, id: &str) -> Option<usize> {
        self.measures.iter().position(|m| m.id == id)
    }

    pub fn is_forbidden(&self, t: usize, c: Cell) -> bool {
        *self.masks.forbidden[t].at(c)
    }

    pub fn is_pre_existing(&self, t: usize, c: Cell) -> bool {
        *self.masks.pre_existing[t].at(c)
    }

    /// Type already installed at `c`, if any.
    pub fn pre_existing_type(&self, c: Cell) -> Option<usize> {
        (0..self.nbs.len()).find(|&t| self.is_pre_existing(t, c))
    }

    /// Whether a new NBS of type `t` may be installed at `c`.
    pub fn is_eligible(&self, t: usize, c: Cell) -> bool {
        !self.is_forbidden(t, c) && self.pre_existing_type(c).is_none()
    }

    /// Binary suitability layer for type `t`.
    pub fn eligibility_mask(&self, t: usize) -> Matrix<bool> {
        Matrix::from_fn(self.dims.width, self.dims.height, |i, j| {
            self.is_eligible(t, Cell::new(i, j))
        })
    }

    pub fn delta(&self, u: usize) -> f64 {
        self.measures[u].delta()
    }

    pub fn big_m(&self, u: usize) -> f64 {
        compute_big_m(&self.kernels[u])
    }

    pub fn cluster_partition(&self, t: usize) -> Option<&ClusterPartition> {
        self.clusters.get(t).and_then(Option::as_ref)
    }

    /// Cluster index per cell for type `t`.
    pub fn cluster_lookup(&self, t: usize) -> Matrix<Option<usize>> {
        let mut out = Matrix::filled(self.dims.width, self.dims.height, None);
        if let Some(p) = self.cluster_partition(t) {
            for (q, cluster) in p.clusters.iter().enumerate() {
                for &c in cluster {
                    *out.at_mut(c) = Some(q);
                }
            }
        }
        out
    }

    pub fn cluster_count(&self) -> usize {
        (0..self.nbs.len())
            .filter_map(|t| self.cluster_partition(t))
            .map(|p| p.clusters.len())
            .sum()
    }

    /// Check every structural invariant.
    pub fn validate(&self) -> Result<(), ValidationError> {
        self.dims.validate()?;
        let shape = (self.dims.width, self.dims.height);
        let (nt, nu) = (self.nbs.len(), self.measures.len());

        let mut seen = HashSet::new();
        for n in &self.nbs {
            if !seen.insert(n.id.as_str()) {
                return Err(ValidationError::DuplicateId {
                    kind: "nbs",
                    id: n.id.clone(),
                });
            }
            if !(n.unit_cost.is_finite() && n.unit_cost > 0.0) {
                return Err(ValidationError::BadCost {
                    nbs: n.id.clone(),
                    cost: n.unit_cost,
                });
            }
        }
        let mut seen = HashSet::new();
        for m in &self.measures {
            if !seen.insert(m.id.as_str()) {
                return Err(ValidationError::DuplicateId {
                    kind: "measure",
                    id: m.id.clone(),
                });
            }
            let field = format!("measures.{}.field", m.id);
            check_shape(&field, shape, m.field.shape())?;
            if let Some(k) = m.field.iter().position(|v| !v.is_finite()) {
                return Err(ValidationError::NonFinite {
                    field,
                    cell: self.dims.cell(k),
                });
            }
            if let Some(d) = m.delta {
                if !(d.is_finite() && d >= 0.0) {
                    return Err(ValidationError::BadValue {
                        field: format!("measures.{}.delta", m.id),
                        value: d,
                        reason: "must be finite and nonnegative",
                    });
                }
            }
        }

        if self.kernels.len() != nu || self.kernels.iter().any(|row| row.len() != nt) {
            let (u, t) = (0..nu)
                .flat_map(|u| (0..nt).map(move |t| (u, t)))
                .find(|&(u, t)| self.kernels.get(u).and_then(|r| r.get(t)).is_none())
                .unwrap_or((0, 0));
            return Err(ValidationError::MissingKernel {
                measure: self
                    .measures
                    .get(u)
                    .map_or_else(String::new, |m| m.id.clone()),
                nbs: self.nbs.get(t).map_or_else(String::new, |n| n.id.clone()),
            });
        }
        if self.fairness_kernels.len() != nt {
            let t = self.fairness_kernels.len().min(nt.saturating_sub(1));
            return Err(ValidationError::MissingFairnessKernel {
                nbs: self.nbs.get(t).map_or_else(String::new, |n| n.id.clone()),
            });
        }

        if self.masks.forbidden.len() != nt || self.masks.pre_existing.len() != nt {
            return Err(ValidationError::BadValue {
                field: "masks".into(),
                value: self.masks.forbidden.len() as f64,
                reason: "one forbidden and one pre-existing layer per nbs required",
            });
        }
        for t in 0..nt {
            check_shape(
                &format!("forbidden.{}", self.nbs[t].id),
                shape,
                self.masks.forbidden[t].shape(),
            )?;
            check_shape(
                &format!("pre_existing.{}", self.nbs[t].id),
                shape,
                self.masks.pre_existing[t].shape(),
            )?;
        }
        for c in self.dims.cells() {
            let mut owner: Option<usize> = None;
            for t in 0..nt {
                let pre = self.is_pre_existing(t, c);
                if pre && self.is_forbidden(t, c) {
                    return Err(ValidationError::ForbiddenAndPreExisting {
                        nbs: self.nbs[t].id.clone(),
                        cell: c,
                    });
                }
                if pre {
                    if let Some(first) = owner {
                        return Err(ValidationError::PreExistsForTwoTypes {
                            cell: c,
                            first: self.nbs[first].id.clone(),
                            second: self.nbs[t].id.clone(),
                        });
                    }
                    owner = Some(t);
                }
            }
        }

        check_shape("population", shape, self.population.field().shape())?;
        if (self.population.field().sum() - 1.0).abs() > 1e-9 {
            return Err(ValidationError::BadValue {
                field: "population".into(),
                value: self.population.field().sum(),
                reason: "fractions must sum to 1",
            });
        }
        if !(self.budget.is_finite() && self.budget >= 0.0) {
            return Err(ValidationError::BadValue {
                field: "budget".into(),
                value: self.budget,
                reason: "must be finite and nonnegative",
            });
        }

        if self.weights.peak.len() != nu || self.weights.average.len() != nu {
            return Err(ValidationError::BadValue {
                field: "weights".into(),
                value: self.weights.peak.len() as f64,
                reason: "one peak and one average weight per measure required",
            });
        }
        for (name, w) in self.weights.all() {
            if !(w.is_finite() && w >= 0.0) {
                return Err(ValidationError::BadValue {
                    field: name,
                    value: w,
                    reason: "must be nonnegative",
                });
            }
        }
        let total = self.weights.total();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(ValidationError::WeightSum(total));
        }

        if self.clusters.len() != nt {
            return Err(ValidationError::BadValue {
                field: "clusters".into(),
                value: self.clusters.len() as f64,
                reason: "one optional partition per nbs required",
            });
        }
        for t in 0..nt {
            let Some(p) = self.cluster_partition(t) else {
                continue;
            };
            let nbs = &self.nbs[t].id;
            let mut used = HashSet::new();
            for (q, cluster) in p.clusters.iter().enumerate() {
                if cluster.is_empty() {
                    return Err(ValidationError::EmptyCluster {
                        nbs: nbs.clone(),
                        cluster: q,
                    });
                }
                for &c in cluster {
                    let bad = |reason| ValidationError::BadClusterCell {
                        nbs: nbs.clone(),
                        cluster: q,
                        cell: c,
                        reason,
                    };
                    if !self.dims.contains(c) {
                        return Err(bad("outside the grid"));
                    }
                    if self.is_forbidden(t, c) {
                        return Err(bad("forbidden"));
                    }
                    if self.pre_existing_type(c).is_some() {
                        return Err(bad("pre-existing"));
                    }
                    if !used.insert(c) {
                        return Err(bad("shared by two clusters"));
                    }
                }
            }
            for &c in &p.residual {
                if !self.dims.contains(c) {
                    return Err(ValidationError::OutOfGrid {
                        field: format!("clusters.{nbs}.residual"),
                        cell: c,
                    });
                }
            }
        }
        Ok(())
    }
}

fn check_shape(
    field: &str,
    expected: (usize, usize),
    found: (usize, usize),
) -> Result<(), ValidationError> {
    if expected != found {
        return Err(ValidationError::FieldShape {
            field: field.to_string(),
            expected,
            found,
        });
    }
    Ok(())
}
