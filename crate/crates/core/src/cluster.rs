//! Contiguous candidate regions for all-or-nothing NBS placement.

use std::collections::VecDeque;

use crate::grid::{Cell, Matrix};
use crate::instance::{ClusterPartition, Instance};

pub const DEFAULT_MIN_CLUSTER: usize = 5;
pub const DEFAULT_MAX_CLUSTER: usize = 50;

/// Maximal 4-connected regions of `true` cells.
///
/// Components are listed in row-major order of their first cell and each
/// component's cells are sorted row-major.
pub fn label_components(mask: &Matrix<bool>) -> Vec<Vec<Cell>> {
    let (rows, cols) = mask.shape();
    let mut seen = Matrix::filled(rows, cols, false);
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for i in 0..rows {
        for j in 0..cols {
            if !mask[(i, j)] || seen[(i, j)] {
                continue;
            }
            seen[(i, j)] = true;
            queue.push_back(Cell::new(i, j));
            let mut component = Vec::new();
            while let Some(c) = queue.pop_front() {
                component.push(c);
                let neighbors = [
                    (c.i.wrapping_sub(1), c.j),
                    (c.i + 1, c.j),
                    (c.i, c.j.wrapping_sub(1)),
                    (c.i, c.j + 1),
                ];
                for (ni, nj) in neighbors {
                    if ni < rows && nj < cols && mask[(ni, nj)] && !seen[(ni, nj)] {
                        seen[(ni, nj)] = true;
                        queue.push_back(Cell::new(ni, nj));
                    }
                }
            }
            component.sort_unstable();
            out.push(component);
        }
    }
    out
}

/// Partition the cells eligible for NBS `t` into clusters of `min_size..=max_size`
/// cells. Smaller and larger components stay individually placeable.
pub fn build_partition(
    inst: &Instance,
    t: usize,
    min_size: usize,
    max_size: usize,
) -> ClusterPartition {
    assert!(
        min_size <= max_size,
        "min cluster size {min_size} exceeds max {max_size}"
    );
    let mut partition = ClusterPartition::default();
    for component in label_components(&inst.eligibility_mask(t)) {
        if (min_size..=max_size).contains(&component.len()) {
            partition.clusters.push(component);
        } else {
            partition.residual.extend(component);
        }
    }
    partition.residual.sort_unstable();
    partition
}

/// Attach partitions for the listed NBS types, replacing any existing ones.
pub fn apply_clustering(inst: &mut Instance, nbs: &[usize], min_size: usize, max_size: usize) {
    for &t in nbs {
        let p = build_partition(inst, t, min_size, max_size);
        inst.clusters[t] = Some(p);
    }
}
