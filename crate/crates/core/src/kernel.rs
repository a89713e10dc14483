//! Impact kernels and the constants derived from them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::catalog::{self, KernelEntry};
use crate::error::KernelError;
use crate::grid::Matrix;
use crate::scalar::Scalar;

/// Odd-sized, nonnegative impact matrix centered on the installed cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel<T> {
    entries: Matrix<T>,
}

impl<T: Scalar> Kernel<T> {
    pub fn new(entries: Matrix<T>) -> Result<Self, KernelError> {
        let (rows, cols) = entries.shape();
        if rows % 2 == 0 || cols % 2 == 0 {
            return Err(KernelError::EvenSize { rows, cols });
        }
        for i in 0..rows {
            for j in 0..cols {
                let v = entries[(i, j)];
                // `v == v` rejects NaN for float scalars.
                #[allow(clippy::eq_op)]
                if v < T::zero() || v != v {
                    return Err(KernelError::BadEntry { i, j });
                }
            }
        }
        let center = entries[(rows / 2, cols / 2)];
        if entries.iter().any(|&v| v > center) {
            return Err(KernelError::OffCenterPeak);
        }
        Ok(Self { entries })
    }

    pub fn single(value: T) -> Self {
        Self {
            entries: Matrix::filled(1, 1, value),
        }
    }

    pub fn rows(&self) -> usize {
        self.entries.rows()
    }

    pub fn cols(&self) -> usize {
        self.entries.cols()
    }

    /// Half extents `(floor(rows/2), floor(cols/2))`.
    pub fn radius(&self) -> (usize, usize) {
        (self.rows() / 2, self.cols() / 2)
    }

    pub fn center(&self) -> T {
        let (ri, rj) = self.radius();
        self.entries[(ri, rj)]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[(i, j)]
    }

    pub fn entries(&self) -> &Matrix<T> {
        &self.entries
    }

    pub fn sum(&self) -> T {
        self.entries.sum()
    }

    /// Entries on the outermost Chebyshev ring (the boundary of the matrix).
    pub fn edge_values(&self) -> Vec<T> {
        let (r, c) = (self.rows(), self.cols());
        let mut out = Vec::new();
        for i in 0..r {
            for j in 0..c {
                if i == 0 || j == 0 || i + 1 == r || j + 1 == c {
                    out.push(self.entries[(i, j)]);
                }
            }
        }
        out
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            entries: self.entries.map(|&v| v * factor),
        }
    }

    pub fn map<U: Scalar>(&self, f: impl FnMut(&T) -> U) -> Kernel<U> {
        Kernel {
            entries: self.entries.map(f),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct KernelRepr<T> {
    size: [usize; 2],
    rows: Vec<Vec<T>>,
}

impl<T: Scalar + Serialize> Serialize for Kernel<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        KernelRepr {
            size: [self.rows(), self.cols()],
            rows: self.entries.to_rows(),
        }
        .serialize(s)
    }
}

impl<'de, T: Scalar + Deserialize<'de>> Deserialize<'de> for Kernel<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = KernelRepr::<T>::deserialize(d)?;
        let m = Matrix::from_rows(repr.rows).map_err(D::Error::custom)?;
        if [m.rows(), m.cols()] != repr.size {
            return Err(D::Error::custom(format!(
                "kernel size {:?} does not match its {}x{} rows",
                repr.size,
                m.rows(),
                m.cols()
            )));
        }
        Kernel::new(m).map_err(D::Error::custom)
    }
}

/// Peak impact, outer-ring impact and side length of a square kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpactSpec<T> {
    pub center: T,
    pub edge: T,
    pub size: usize,
}

impl From<KernelEntry> for ImpactSpec<f64> {
    fn from(e: KernelEntry) -> Self {
        Self {
            center: e.center,
            edge: e.edge,
            size: e.size,
        }
    }
}

/// Square kernel whose entries decay linearly over Chebyshev rings, from
/// `center` at ring 0 to `edge` at the outermost ring.
pub fn build_kernel<T: Scalar>(spec: ImpactSpec<T>) -> Result<Kernel<T>, KernelError> {
    if spec.size.is_multiple_of(2) {
        return Err(KernelError::EvenSize {
            rows: spec.size,
            cols: spec.size,
        });
    }
    if spec.edge < T::zero() || spec.center < spec.edge || spec.center <= T::zero() {
        return Err(KernelError::InvertedRange {
            center: spec.center.to_f64_lossy(),
            edge: spec.edge.to_f64_lossy(),
        });
    }
    let radius = spec.size / 2;
    let ring_value = |d: usize| -> T {
        if radius == 0 {
            return spec.center;
        }
        let w = T::from_count(d) / T::from_count(radius);
        spec.center * (T::one() - w) + spec.edge * w
    };
    let rings: Vec<T> = (0..=radius).map(ring_value).collect();
    let entries = Matrix::from_fn(spec.size, spec.size, |i, j| {
        let d = i.abs_diff(radius).max(j.abs_diff(radius));
        rings[d]
    });
    Kernel::new(entries)
}

/// Reduction cap for a measure: a fixed share of its largest observed value,
/// floored at zero.
pub fn derive_delta<T: Scalar>(field: &Matrix<T>) -> T {
    let share = T::one() / T::from_u8(5).expect("5 representable");
    match field.max() {
        Some(max) if max > T::zero() => share * max,
        _ => T::zero(),
    }
}

/// Big-M constant for one measure: the largest total kernel mass over all NBS
/// types. No cell can receive more than this from any feasible placement.
pub fn compute_big_m<'a, T: Scalar>(kernels: impl IntoIterator<Item = &'a Kernel<T>>) -> T {
    kernels
        .into_iter()
        .map(Kernel::sum)
        .fold(T::zero(), T::max_of)
}

/// Kernels for every catalog (measure, NBS) pair plus one fairness kernel per
/// NBS.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelSet {
    pub measure: BTreeMap<(String, String), Kernel<f64>>,
    pub fairness: BTreeMap<String, Kernel<f64>>,
}

impl KernelSet {
    pub fn measure_kernel(&self, measure: &str, nbs: &str) -> Option<&Kernel<f64>> {
        self.measure.get(&(measure.to_string(), nbs.to_string()))
    }

    pub fn fairness_kernel(&self, nbs: &str) -> Option<&Kernel<f64>> {
        self.fairness.get(nbs)
    }
}

pub fn default_kernel_set() -> KernelSet {
    let mut measure = BTreeMap::new();
    let mut fairness = BTreeMap::new();
    for (t, nbs) in catalog::NBS_IDS.iter().enumerate() {
        for (u, m) in catalog::MEASURE_IDS.iter().enumerate() {
            let kernel = build_kernel(catalog::MEASURE_KERNELS[t][u].into())
                .expect("catalog kernel is valid");
            measure.insert((m.to_string(), nbs.to_string()), kernel);
        }
        let kernel =
            build_kernel(catalog::FAIRNESS_KERNELS[t].into()).expect("catalog kernel is valid");
        fairness.insert(nbs.to_string(), kernel);
    }
    KernelSet { measure, fairness }
}
