//! Windowed kernel sums over placement grids.
//!
//! An installed cell `(I, J)` of type `t` adds `K[i'][j']` to every cell
//! `(i, j)` with `I = i - floor(rows/2) + i'` and `J = j - floor(cols/2) + j'`.
//! Windows falling outside the grid contribute nothing and kernels are not
//! flipped.

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, GridError};
use crate::grid::{Cell, GridDims, Matrix};
use crate::instance::Instance;
use crate::kernel::Kernel;
use crate::scalar::Scalar;

/// Binary installation layers, one per NBS type.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Placement {
    layers: Vec<Matrix<bool>>,
}

impl Placement {
    pub fn empty(dims: GridDims, nbs_count: usize) -> Self {
        Self {
            layers: vec![Matrix::filled(dims.width, dims.height, false); nbs_count],
        }
    }

    pub fn from_layers(layers: Vec<Matrix<bool>>) -> Self {
        Self { layers }
    }

    /// Only the pre-existing installations.
    pub fn do_nothing(inst: &Instance) -> Self {
        Self {
            layers: inst.masks.pre_existing.clone(),
        }
    }

    pub fn nbs_count(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Matrix<bool>] {
        &self.layers
    }

    pub fn layer(&self, t: usize) -> &Matrix<bool> {
        &self.layers[t]
    }

    pub fn get(&self, t: usize, c: Cell) -> bool {
        *self.layers[t].at(c)
    }

    pub fn set(&mut self, t: usize, c: Cell, on: bool) {
        *self.layers[t].at_mut(c) = on;
    }

    pub fn installed_types(&self, c: Cell) -> impl Iterator<Item = usize> + '_ {
        (0..self.layers.len()).filter(move |&t| self.get(t, c))
    }

    /// Cells of type `t` that are installed but not pre-existing.
    pub fn new_cells<'a>(
        &'a self,
        inst: &'a Instance,
        t: usize,
    ) -> impl Iterator<Item = Cell> + 'a {
        inst.dims
            .cells()
            .filter(move |&c| self.get(t, c) && !inst.is_pre_existing(t, c))
    }

    pub fn installed_count(&self, t: usize) -> usize {
        self.layers[t].iter().filter(|&&b| b).count()
    }

    /// Flat `t`-major bit string used for deterministic ordering.
    pub fn encode(&self) -> Vec<bool> {
        self.layers.iter().flat_map(|l| l.iter().copied()).collect()
    }
}

fn check_layers<T>(placement: &Placement, kernels: &[Kernel<T>]) -> Result<(), EngineError> {
    if placement.nbs_count() != kernels.len() {
        return Err(EngineError::LayerCount {
            kernels: kernels.len(),
            layers: placement.nbs_count(),
        });
    }
    Ok(())
}

fn scatter<T: Scalar>(
    out: &mut Matrix<T>,
    source: Cell,
    kernel: &Kernel<T>,
    weight: impl Fn(Cell) -> T,
) {
    let (rows, cols) = out.shape();
    let (ri, rj) = kernel.radius();
    for ki in 0..kernel.rows() {
        let Some(i) = (source.i + ri).checked_sub(ki).filter(|&i| i < rows) else {
            continue;
        };
        for kj in 0..kernel.cols() {
            let Some(j) = (source.j + rj).checked_sub(kj).filter(|&j| j < cols) else {
                continue;
            };
            let target = Cell::new(i, j);
            out[(i, j)] += kernel.get(ki, kj) * weight(target);
        }
    }
}

/// Raw impact `z` of newly installed cells for one measure. `kernels` and
/// `pre_existing` are indexed by NBS type; pre-existing cells contribute
/// nothing because their effect is already part of the observed field.
pub fn impact_field<T: Scalar>(
    placement: &Placement,
    kernels: &[Kernel<T>],
    pre_existing: &[Matrix<bool>],
) -> Result<Matrix<T>, EngineError> {
    check_layers(placement, kernels)?;
    if pre_existing.len() != kernels.len() {
        return Err(EngineError::LayerCount {
            kernels: kernels.len(),
            layers: pre_existing.len(),
        });
    }
    let (rows, cols) = placement.layers.first().map_or((0, 0), Matrix::shape);
    let mut z = Matrix::zeros(rows, cols);
    for (t, (layer, kernel)) in placement.layers.iter().zip(kernels).enumerate() {
        layer.check_same_shape(&pre_existing[t])?;
        for i in 0..rows {
            for j in 0..cols {
                if layer[(i, j)] && !pre_existing[t][(i, j)] {
                    scatter(&mut z, Cell::new(i, j), kernel, |_| T::one());
                }
            }
        }
    }
    Ok(z)
}

/// Reduction actually achieved: `min(z, delta)` per cell.
pub fn clamp_reduction<T: Scalar>(z: &Matrix<T>, delta: T) -> Matrix<T> {
    z.map(|&v| v.min_of(delta))
}

/// Population-weighted fairness benefit `f`. Every installed cell counts,
/// pre-existing ones included.
pub fn fairness_field<T: Scalar>(
    placement: &Placement,
    kernels: &[Kernel<T>],
    population: &Matrix<T>,
) -> Result<Matrix<T>, EngineError> {
    check_layers(placement, kernels)?;
    let (rows, cols) = population.shape();
    let mut f = Matrix::zeros(rows, cols);
    for (layer, kernel) in placement.layers.iter().zip(kernels) {
        layer.check_same_shape(population)?;
        for i in 0..rows {
            for j in 0..cols {
                if layer[(i, j)] {
                    scatter(&mut f, Cell::new(i, j), kernel, |c| *population.at(c));
                }
            }
        }
    }
    Ok(f)
}

/// Observed field after the reduction: `a - zbar`. Cells may go negative when
/// the cap exceeds the local value; callers report those rather than clamp.
pub fn reduced_measure<T: Scalar>(
    observed: &Matrix<T>,
    reduction: &Matrix<T>,
) -> Result<Matrix<T>, GridError> {
    observed.zip_map(reduction, |&a, &r| a - r)
}

/// Per-measure fields for one placement.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureFields {
    pub z: Matrix<f64>,
    pub zbar: Matrix<f64>,
    pub reduced: Matrix<f64>,
}

pub fn measure_fields(
    inst: &Instance,
    placement: &Placement,
    u: usize,
) -> Result<MeasureFields, EngineError> {
    let z = impact_field(placement, &inst.kernels[u], &inst.masks.pre_existing)?;
    let zbar = clamp_reduction(&z, inst.delta(u));
    let reduced = reduced_measure(&inst.measures[u].field, &zbar)?;
    Ok(MeasureFields { z, zbar, reduced })
}

pub fn instance_fairness(
    inst: &Instance,
    placement: &Placement,
) -> Result<Matrix<f64>, EngineError> {
    fairness_field(placement, &inst.fairness_kernels, inst.population.field())
}
