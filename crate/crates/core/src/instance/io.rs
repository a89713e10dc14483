//! JSON instance files.
//!
//! Top-level keys: `dims`, `nbs`, `measures`, `kernels`, `fairness_kernels`,
//! `forbidden`, `pre_existing`, `population`, `budget`, `weights`, `clusters`.
//! Matrices are arrays of rows; cells are `[i, j]` pairs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ClusterPartition, Instance, Masks, NbsType, ObjectiveWeights, Population, UcMeasure};
use crate::error::{InstanceError, ValidationError};
use crate::grid::{Cell, GridDims, Matrix};
use crate::kernel::Kernel;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    dims: GridDims,
    nbs: Vec<NbsType>,
    measures: Vec<MeasureFile>,
    kernels: Vec<KernelFile>,
    fairness_kernels: Vec<FairnessKernelFile>,
    forbidden: BTreeMap<String, Vec<Cell>>,
    pre_existing: BTreeMap<String, Vec<Cell>>,
    population: Matrix<f64>,
    budget: f64,
    weights: WeightsFile,
    #[serde(default)]
    clusters: BTreeMap<String, ClusterPartition>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureFile {
    id: String,
    unit: String,
    field: Matrix<f64>,
    #[serde(default)]
    delta: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelFile {
    measure: String,
    nbs: String,
    size: [usize; 2],
    rows: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FairnessKernelFile {
    nbs: String,
    size: [usize; 2],
    rows: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsFile {
    peak: BTreeMap<String, f64>,
    average: BTreeMap<String, f64>,
    cost: f64,
    fairness: f64,
}

fn kernel_from_parts(
    which: String,
    size: [usize; 2],
    rows: Vec<Vec<f64>>,
) -> Result<Kernel<f64>, ValidationError> {
    let m = Matrix::from_rows(rows).map_err(|e| ValidationError::Kernel {
        which: which.clone(),
        source: e.into(),
    })?;
    if [m.rows(), m.cols()] != size {
        return Err(ValidationError::FieldShape {
            field: which,
            expected: (size[0], size[1]),
            found: m.shape(),
        });
    }
    Kernel::new(m).map_err(|source| ValidationError::Kernel { which, source })
}

fn mask_layers(
    field: &'static str,
    lists: BTreeMap<String, Vec<Cell>>,
    nbs: &[NbsType],
    dims: GridDims,
) -> Result<Vec<Matrix<bool>>, ValidationError> {
    let mut layers = vec![Matrix::filled(dims.width, dims.height, false); nbs.len()];
    for (id, cells) in lists {
        let t = nbs
            .iter()
            .position(|n| n.id == id)
            .ok_or(ValidationError::UnknownId {
                kind: "nbs",
                id: id.clone(),
                field,
            })?;
        for c in cells {
            if !dims.contains(c) {
                return Err(ValidationError::OutOfGrid {
                    field: format!("{field}.{id}"),
                    cell: c,
                });
            }
            *layers[t].at_mut(c) = true;
        }
    }
    Ok(layers)
}

fn per_measure(
    field: &'static str,
    map: BTreeMap<String, f64>,
    measures: &[UcMeasure],
) -> Result<Vec<f64>, ValidationError> {
    let mut out = vec![0.0; measures.len()];
    for (id, w) in map {
        let u = measures
            .iter()
            .position(|m| m.id == id)
            .ok_or(ValidationError::UnknownId {
                kind: "measure",
                id,
                field,
            })?;
        out[u] = w;
    }
    Ok(out)
}

impl InstanceFile {
    fn into_instance(self) -> Result<Instance, ValidationError> {
        self.dims.validate()?;
        let dims = self.dims;
        let nbs = self.nbs;
        let measures: Vec<UcMeasure> = self
            .measures
            .into_iter()
            .map(|m| UcMeasure {
                id: m.id,
                unit: m.unit,
                field: m.field,
                delta: m.delta,
            })
            .collect();
        let (nt, nu) = (nbs.len(), measures.len());
        let find_nbs = |id: &str, field| {
            nbs.iter()
                .position(|n| n.id == id)
                .ok_or_else(|| ValidationError::UnknownId {
                    kind: "nbs",
                    id: id.to_string(),
                    field,
                })
        };

        let mut kernels: Vec<Vec<Option<Kernel<f64>>>> = vec![vec![None; nt]; nu];
        for k in self.kernels {
            let u = measures
                .iter()
                .position(|m| m.id == k.measure)
                .ok_or_else(|| ValidationError::UnknownId {
                    kind: "measure",
                    id: k.measure.clone(),
                    field: "kernels",
                })?;
            let t = find_nbs(&k.nbs, "kernels")?;
            let which = format!("{}/{}", k.measure, k.nbs);
            if kernels[u][t].is_some() {
                return Err(ValidationError::DuplicateId {
                    kind: "kernel",
                    id: which,
                });
            }
            kernels[u][t] = Some(kernel_from_parts(which, k.size, k.rows)?);
        }
        let kernels = kernels
            .into_iter()
            .enumerate()
            .map(|(u, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(t, k)| {
                        k.ok_or_else(|| ValidationError::MissingKernel {
                            measure: measures[u].id.clone(),
                            nbs: nbs[t].id.clone(),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;

        let mut fairness: Vec<Option<Kernel<f64>>> = vec![None; nt];
        for k in self.fairness_kernels {
            let t = find_nbs(&k.nbs, "fairness_kernels")?;
            let which = format!("fairness/{}", k.nbs);
            if fairness[t].is_some() {
                return Err(ValidationError::DuplicateId {
                    kind: "fairness kernel",
                    id: which,
                });
            }
            fairness[t] = Some(kernel_from_parts(which, k.size, k.rows)?);
        }
        let fairness_kernels = fairness
            .into_iter()
            .enumerate()
            .map(|(t, k)| {
                k.ok_or_else(|| ValidationError::MissingFairnessKernel {
                    nbs: nbs[t].id.clone(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let masks = Masks {
            forbidden: mask_layers("forbidden", self.forbidden, &nbs, dims)?,
            pre_existing: mask_layers("pre_existing", self.pre_existing, &nbs, dims)?,
        };
        let weights = ObjectiveWeights {
            peak: per_measure("weights.peak", self.weights.peak, &measures)?,
            average: per_measure("weights.average", self.weights.average, &measures)?,
            cost: self.weights.cost,
            fairness: self.weights.fairness,
        };
        let mut clusters = vec![None; nt];
        for (id, p) in self.clusters {
            clusters[find_nbs(&id, "clusters")?] = Some(p);
        }
        if self.population.shape() != (dims.width, dims.height) {
            return Err(ValidationError::FieldShape {
                field: "population".into(),
                expected: (dims.width, dims.height),
                found: self.population.shape(),
            });
        }
        let population = Population::normalized(self.population)?;

        let inst = Instance {
            dims,
            nbs,
            measures,
            kernels,
            fairness_kernels,
            masks,
            population,
            budget: self.budget,
            weights,
            clusters,
        };
        inst.validate()?;
        Ok(inst)
    }

    fn from_instance(inst: &Instance) -> Self {
        let cells_of = |layer: &Matrix<bool>| -> Vec<Cell> {
            inst.dims.cells().filter(|&c| *layer.at(c)).collect()
        };
        let mut kernels = Vec::new();
        for (u, m) in inst.measures.iter().enumerate() {
            for (t, n) in inst.nbs.iter().enumerate() {
                let k = &inst.kernels[u][t];
                kernels.push(KernelFile {
                    measure: m.id.clone(),
                    nbs: n.id.clone(),
                    size: [k.rows(), k.cols()],
                    rows: k.entries().to_rows(),
                });
            }
        }
        let fairness_kernels = inst
            .nbs
            .iter()
            .zip(&inst.fairness_kernels)
            .map(|(n, k)| FairnessKernelFile {
                nbs: n.id.clone(),
                size: [k.rows(), k.cols()],
                rows: k.entries().to_rows(),
            })
            .collect();
        let per_measure = |w: &[f64]| {
            inst.measures
                .iter()
                .zip(w)
                .map(|(m, &w)| (m.id.clone(), w))
                .collect()
        };
        InstanceFile {
            dims: inst.dims,
            nbs: inst.nbs.clone(),
            measures: inst
                .measures
                .iter()
                .map(|m| MeasureFile {
                    id: m.id.clone(),
                    unit: m.unit.clone(),
                    field: m.field.clone(),
                    delta: m.delta,
                })
                .collect(),
            kernels,
            fairness_kernels,
            forbidden: inst
                .nbs
                .iter()
                .zip(&inst.masks.forbidden)
                .map(|(n, l)| (n.id.clone(), cells_of(l)))
                .collect(),
            pre_existing: inst
                .nbs
                .iter()
                .zip(&inst.masks.pre_existing)
                .map(|(n, l)| (n.id.clone(), cells_of(l)))
                .collect(),
            population: inst.population.field().clone(),
            budget: inst.budget,
            weights: WeightsFile {
                peak: per_measure(&inst.weights.peak),
                average: per_measure(&inst.weights.average),
                cost: inst.weights.cost,
                fairness: inst.weights.fairness,
            },
            clusters: inst
                .nbs
                .iter()
                .zip(&inst.clusters)
                .filter_map(|(n, p)| p.clone().map(|p| (n.id.clone(), p)))
                .collect(),
        }
    }
}

/// Parse and validate an instance from JSON text.
pub fn instance_from_json(text: &str) -> Result<Instance, InstanceError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: InstanceFile =
        serde_path_to_error::deserialize(de).map_err(|e| InstanceError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    Ok(file.into_instance()?)
}

pub fn instance_to_json(inst: &Instance) -> String {
    let mut s =
        serde_json::to_string(&InstanceFile::from_instance(inst)).expect("instance serializes");
    s.push('\n');
    s
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| InstanceError::io(path, e))?;
    instance_from_json(&text)
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    fs::write(path, instance_to_json(inst)).map_err(|e| InstanceError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "dims": {"width": 1, "height": 1, "resolution": 10.0},
        "nbs": [{"id": "GW", "name": "Green Wall", "unit_cost": 7890.0}],
        "measures": [{"id": "temp_max", "unit": "degC", "field": [[30.0]]}],
        "kernels": [{"measure": "temp_max", "nbs": "GW", "size": [1, 1], "rows": [[2.7]]}],
        "fairness_kernels": [{"nbs": "GW", "size": [1, 1], "rows": [[6.0]]}],
        "forbidden": {"GW": []},
        "pre_existing": {"GW": []},
        "population": [[7.0]],
        "budget": 10000.0,
        "weights": {"peak": {"temp_max": 0.25}, "average": {"temp_max": 0.25}, "cost": 0.25, "fairness": 0.25},
        "clusters": {}
    }"#;

    #[test]
    fn minimal_instance_loads() {
        let inst = instance_from_json(MINIMAL).unwrap();
        assert_eq!((inst.dims.width, inst.dims.height), (1, 1));
        assert_eq!(inst.population.field()[(0, 0)], 1.0);
        assert!((inst.delta(0) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn missing_field_is_named() {
        let text = MINIMAL.replace("\"budget\": 10000.0,", "");
        let err = instance_from_json(&text).unwrap_err();
        assert_eq!(err.code(), "instance.parse");
        assert!(err.to_string().contains("budget"), "{err}");
    }

    #[test]
    fn wrong_type_names_path() {
        let text = MINIMAL.replace("\"unit_cost\": 7890.0", "\"unit_cost\": \"cheap\"");
        let err = instance_from_json(&text).unwrap_err();
        assert!(err.to_string().contains("nbs[0].unit_cost"), "{err}");
    }

    #[test]
    fn empty_masks_are_explicit_lists() {
        let inst = instance_from_json(MINIMAL).unwrap();
        let json = instance_to_json(&inst);
        assert!(json.contains("\"forbidden\":{\"GW\":[]}"), "{json}");
        assert!(json.contains("\"pre_existing\":{\"GW\":[]}"), "{json}");
    }

    #[test]
    fn weights_must_sum_to_one() {
        let text = MINIMAL.replace("\"cost\": 0.25", "\"cost\": 0.5");
        let err = instance_from_json(&text).unwrap_err();
        assert!(
            matches!(
                err,
                InstanceError::Validation(ValidationError::WeightSum(_))
            ),
            "{err}"
        );
    }

    #[test]
    fn out_of_grid_cell_rejected() {
        let text = MINIMAL.replace(
            "\"forbidden\": {\"GW\": []}",
            "\"forbidden\": {\"GW\": [[0, 3]]}",
        );
        let err = instance_from_json(&text).unwrap_err();
        assert!(
            matches!(
                err,
                InstanceError::Validation(ValidationError::OutOfGrid { .. })
            ),
            "{err}"
        );
    }
}
