//! Dense row-major matrices over grid cells.
//!
//! Cell `(i, j)` addresses row `i` (`0..W`) and column `j` (`0..H`), following
//! the `W x H` layout of observed fields.

use serde::{Deserialize, Serialize};

use crate::error::GridError;
use crate::scalar::Scalar;

/// Default ground resolution in meters per cell side.
pub const DEFAULT_RESOLUTION: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Cell {
    pub i: usize,
    pub j: usize,
}

impl Cell {
    pub const fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }
}

impl From<[usize; 2]> for Cell {
    fn from([i, j]: [usize; 2]) -> Self {
        Self { i, j }
    }
}

impl From<Cell> for [usize; 2] {
    fn from(c: Cell) -> Self {
        [c.i, c.j]
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

/// Grid extent and cell resolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDims {
    pub width: usize,
    pub height: usize,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
}

fn default_resolution() -> f64 {
    DEFAULT_RESOLUTION
}

impl GridDims {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            resolution: DEFAULT_RESOLUTION,
        }
    }

    pub fn with_resolution(mut self, resolution: f64) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    /// Ground area of one cell in square meters.
    pub fn cell_area(&self) -> f64 {
        self.resolution * self.resolution
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.i < self.width && c.j < self.height
    }

    pub fn index(&self, c: Cell) -> usize {
        c.i * self.height + c.j
    }

    pub fn cell(&self, index: usize) -> Cell {
        Cell::new(index / self.height, index % self.height)
    }

    /// Cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.width).flat_map(move |i| (0..self.height).map(move |j| Cell::new(i, j)))
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.width == 0 || self.height == 0 {
            return Err(GridError::EmptyGrid {
                width: self.width,
                height: self.height,
            });
        }
        if !(self.resolution.is_finite() && self.resolution > 0.0) {
            return Err(GridError::BadResolution(self.resolution));
        }
        Ok(())
    }
}

/// A `rows x cols` matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, GridError> {
        if data.len() != rows * cols {
            return Err(GridError::ShapeMismatch {
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from nested rows; every row must have the same length.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, GridError> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * m);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(GridError::RaggedRow {
                    row: r,
                    expected: m,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Self {
            rows: n,
            cols: m,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.data
            .chunks(self.cols.max(1))
            .take(self.rows)
            .map(<[T]>::to_vec)
            .collect()
    }

    /// Copy of the `rows x cols` window whose top-left corner is `(i0, j0)`.
    pub fn window(&self, i0: usize, j0: usize, rows: usize, cols: usize) -> Matrix<T> {
        Matrix::from_fn(rows, cols, |i, j| self[(i0 + i, j0 + j)].clone())
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn zip_map<U: Clone, V>(
        &self,
        other: &Matrix<U>,
        mut f: impl FnMut(&T, &U) -> V,
    ) -> Result<Matrix<V>, GridError> {
        self.check_same_shape(other)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn check_same_shape<U>(&self, other: &Matrix<U>) -> Result<(), GridError> {
        if self.shape() != other.shape() {
            return Err(GridError::ShapeMismatch {
                expected: self.shape(),
                found: other.shape(),
            });
        }
        Ok(())
    }
}

impl<T> Matrix<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.data.iter()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&T> {
        (i < self.rows && j < self.cols).then(|| &self.data[i * self.cols + j])
    }

    pub fn at(&self, c: Cell) -> &T {
        &self[(c.i, c.j)]
    }

    pub fn at_mut(&mut self, c: Cell) -> &mut T {
        &mut self[(c.i, c.j)]
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, T::zero())
    }

    pub fn sum(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &v| acc + v)
    }

    /// Largest entry, `None` for an empty matrix.
    pub fn max(&self) -> Option<T> {
        let mut it = self.data.iter().copied();
        let first = it.next()?;
        Some(it.fold(first, T::max_of))
    }

    pub fn min(&self) -> Option<T> {
        let mut it = self.data.iter().copied();
        let first = it.next()?;
        Some(it.fold(first, T::min_of))
    }

    pub fn mean(&self) -> Option<T> {
        (!self.data.is_empty()).then(|| self.sum() / T::from_count(self.data.len()))
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of {}x{}",
            self.rows,
            self.cols
        );
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of {}x{}",
            self.rows,
            self.cols
        );
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Serialize + Clone> Serialize for Matrix<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.rows))?;
        for r in 0..self.rows {
            seq.serialize_element(&self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        seq.end()
    }
}

impl<'de, T: Deserialize<'de> + Clone> Deserialize<'de> for Matrix<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<T>>::deserialize(d)?;
        Matrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// Cut a field into non-overlapping `tile x tile` sub-maps in row-major tile
/// order. Trailing partial tiles along either axis are dropped.
pub fn split_grid<T: Clone>(field: &Matrix<T>, tile: usize) -> Vec<Matrix<T>> {
    if tile == 0 {
        return Vec::new();
    }
    let (nr, nc) = (field.rows() / tile, field.cols() / tile);
    let mut out = Vec::with_capacity(nr * nc);
    for ti in 0..nr {
        for tj in 0..nc {
            out.push(field.window(ti * tile, tj * tile, tile, tile));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(rows: usize, cols: usize) -> Matrix<f64> {
        Matrix::from_fn(rows, cols, |i, j| (i * cols + j) as f64)
    }

    #[test]
    fn split_exact_division() {
        let tiles = split_grid(&ramp(100, 100), 50);
        assert_eq!(tiles.len(), 4);
        assert!(tiles.iter().all(|t| t.shape() == (50, 50)));
    }

    #[test]
    fn split_drops_partial_strip() {
        let f = ramp(120, 100);
        let tiles = split_grid(&f, 50);
        assert_eq!(tiles.len(), 4);
        assert_eq!(tiles[3][(0, 0)], f[(50, 50)]);
    }

    #[test]
    fn split_identity() {
        let f = ramp(50, 50);
        assert_eq!(split_grid(&f, 50), vec![f]);
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = Matrix::from_rows(vec![vec![1.0], vec![1.0, 2.0]]).unwrap_err();
        assert!(matches!(err, GridError::RaggedRow { row: 1, .. }));
    }

    #[test]
    fn dims_index_roundtrip() {
        let d = GridDims::new(3, 5);
        for (k, c) in d.cells().enumerate() {
            assert_eq!(d.index(c), k);
            assert_eq!(d.cell(k), c);
        }
    }

    proptest::proptest! {
        #[test]
        fn split_tiles_match_windows(rows in 1usize..40, cols in 1usize..40, tile in 1usize..15) {
            let f = ramp(rows, cols);
            let tiles = split_grid(&f, tile);
            let per_row = cols / tile;
            proptest::prop_assert_eq!(tiles.len(), (rows / tile) * per_row);
            let mut seen = std::collections::HashSet::new();
            for (k, t) in tiles.iter().enumerate() {
                let (ti, tj) = (k / per_row, k % per_row);
                for i in 0..tile {
                    for j in 0..tile {
                        let v = t[(i, j)];
                        proptest::prop_assert_eq!(v, f[(ti * tile + i, tj * tile + j)]);
                        proptest::prop_assert!(seen.insert(v as u64));
                    }
                }
            }
        }
    }
}
