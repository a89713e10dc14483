use super::objective::objective_normalizers;
use super::{Layout, LinearConstraint, MilpModel, RowTag, Sense, VarKind};
use crate::error::MilpError;
use crate::grid::Cell;
use crate::instance::Instance;
use crate::kernel::Kernel;

/// Big-M used in the linearization rows of measure `u`.
///
/// Besides bounding `z`, the rows `z >= delta - M y` and
/// `zbar >= delta - M y` must be slack when `y = 1`, so `M >= delta` too.
pub fn effective_big_m(inst: &Instance, u: usize) -> f64 {
    inst.big_m(u).max(inst.delta(u))
}

fn window_terms<'a>(
    inst: &'a Instance,
    layout: &Layout,
    cell: Cell,
    kernel_of: impl Fn(usize) -> &'a Kernel<f64>,
    skip_pre_existing: bool,
    scale: f64,
    out: &mut Vec<(usize, f64)>,
) {
    let (w, h) = (inst.dims.width as isize, inst.dims.height as isize);
    for t in 0..inst.nbs.len() {
        let k = kernel_of(t);
        let (ri, rj) = k.radius();
        for ki in 0..k.rows() {
            let bi = cell.i as isize - ri as isize + ki as isize;
            if bi < 0 || bi >= w {
                continue;
            }
            for kj in 0..k.cols() {
                let bj = cell.j as isize - rj as isize + kj as isize;
                if bj < 0 || bj >= h {
                    continue;
                }
                let source = Cell::new(bi as usize, bj as usize);
                let value = k.get(ki, kj) * scale;
                if value == 0.0 || (skip_pre_existing && inst.is_pre_existing(t, source)) {
                    continue;
                }
                out.push((
                    layout.index(VarKind::X {
                        t,
                        i: source.i,
                        j: source.j,
                    }),
                    -value,
                ));
            }
        }
    }
}

/// Assemble the full placement MILP for a validated instance.
pub fn build_model(inst: &Instance) -> Result<MilpModel, MilpError> {
    let (nt, nu) = (inst.nbs.len(), inst.measures.len());
    for (u, m) in inst.measures.iter().enumerate() {
        if inst.kernels.get(u).is_none_or(|row| row.len() != nt) {
            let t = inst
                .kernels
                .get(u)
                .map_or(0, Vec::len)
                .min(nt.saturating_sub(1));
            return Err(MilpError::MissingKernel {
                measure: m.id.clone(),
                nbs: inst.nbs.get(t).map_or_else(String::new, |n| n.id.clone()),
            });
        }
    }
    if inst.fairness_kernels.len() != nt {
        return Err(MilpError::MissingKernel {
            measure: "fairness".into(),
            nbs: inst
                .nbs
                .get(inst.fairness_kernels.len())
                .map_or_else(String::new, |n| n.id.clone()),
        });
    }
    for t in 0..nt {
        if let Some(p) = inst.cluster_partition(t) {
            for (q, cluster) in p.clusters.iter().enumerate() {
                if let Some(&cell) = cluster.iter().find(|&&c| inst.is_forbidden(t, c)) {
                    return Err(MilpError::ClusterCellForbidden {
                        nbs: inst.nbs[t].id.clone(),
                        cluster: q,
                        cell,
                    });
                }
            }
        }
    }

    let dims = inst.dims;
    let clusters: Vec<usize> = (0..nt)
        .map(|t| inst.cluster_partition(t).map_or(0, |p| p.clusters.len()))
        .collect();
    let layout = Layout::new(dims.width, dims.height, nt, nu, &clusters);

    let mut variables = vec![VarKind::Zmax { u: 0 }; layout.total];
    for c in dims.cells() {
        let (i, j) = (c.i, c.j);
        for t in 0..nt {
            let k = VarKind::X { t, i, j };
            variables[layout.index(k)] = k;
        }
        for u in 0..nu {
            for k in [
                VarKind::Y { u, i, j },
                VarKind::Z { u, i, j },
                VarKind::Zbar { u, i, j },
            ] {
                variables[layout.index(k)] = k;
            }
        }
        let k = VarKind::F { i, j };
        variables[layout.index(k)] = k;
    }
    for u in 0..nu {
        for k in [VarKind::Zmax { u }, VarKind::Zavg { u }] {
            variables[layout.index(k)] = k;
        }
    }
    for (t, &q_count) in clusters.iter().enumerate() {
        for q in 0..q_count {
            let k = VarKind::Lambda { t, q };
            variables[layout.index(k)] = k;
        }
    }

    let x = |t: usize, c: Cell| layout.index(VarKind::X { t, i: c.i, j: c.j });
    let mut rows = Vec::new();
    let mut push = |coefficients: Vec<(usize, f64)>, sense, rhs, tag| {
        rows.push(LinearConstraint {
            coefficients,
            sense,
            rhs,
            tag,
        });
    };

    for c in dims.cells() {
        push(
            (0..nt).map(|t| (x(t, c), 1.0)).collect(),
            Sense::Le,
            1.0,
            RowTag::OneType { i: c.i, j: c.j },
        );
    }

    let budget_terms = (0..nt)
        .flat_map(|t| {
            dims.cells()
                .filter(move |&c| !inst.is_pre_existing(t, c))
                .map(move |c| (t, c))
        })
        .map(|(t, c)| (x(t, c), inst.nbs[t].unit_cost))
        .collect();
    push(budget_terms, Sense::Le, inst.budget, RowTag::Budget);

    for t in 0..nt {
        for c in dims.cells() {
            if inst.is_forbidden(t, c) {
                push(
                    vec![(x(t, c), 1.0)],
                    Sense::Eq,
                    0.0,
                    RowTag::Forbidden { t, i: c.i, j: c.j },
                );
            }
        }
    }
    for t in 0..nt {
        for c in dims.cells() {
            if inst.is_pre_existing(t, c) {
                push(
                    vec![(x(t, c), 1.0)],
                    Sense::Eq,
                    1.0,
                    RowTag::PreExisting { t, i: c.i, j: c.j },
                );
            }
        }
    }

    for t in 0..nt {
        let Some(p) = inst.cluster_partition(t) else {
            continue;
        };
        for (q, cluster) in p.clusters.iter().enumerate() {
            let lambda = layout.index(VarKind::Lambda { t, q });
            for &c in cluster {
                push(
                    vec![(x(t, c), 1.0), (lambda, -1.0)],
                    Sense::Eq,
                    0.0,
                    RowTag::Cluster {
                        t,
                        q,
                        i: c.i,
                        j: c.j,
                    },
                );
            }
        }
    }

    for u in 0..nu {
        for c in dims.cells() {
            let mut coefficients = vec![(layout.index(VarKind::Z { u, i: c.i, j: c.j }), 1.0)];
            window_terms(
                inst,
                &layout,
                c,
                |t| &inst.kernels[u][t],
                true,
                1.0,
                &mut coefficients,
            );
            push(
                coefficients,
                Sense::Eq,
                0.0,
                RowTag::Convolution { u, i: c.i, j: c.j },
            );
        }
    }

    for u in 0..nu {
        let delta = inst.delta(u);
        let m = effective_big_m(inst, u);
        for c in dims.cells() {
            let (i, j) = (c.i, c.j);
            let z = layout.index(VarKind::Z { u, i, j });
            let zb = layout.index(VarKind::Zbar { u, i, j });
            let y = layout.index(VarKind::Y { u, i, j });
            let tag = |k| RowTag::BigM { k, u, i, j };
            // z <= delta + M (1 - y)
            push(vec![(z, 1.0), (y, m)], Sense::Le, delta + m, tag(1));
            // z >= delta - M y
            push(vec![(z, 1.0), (y, m)], Sense::Ge, delta, tag(2));
            // zbar <= z
            push(vec![(zb, 1.0), (z, -1.0)], Sense::Le, 0.0, tag(3));
            // zbar <= delta
            push(vec![(zb, 1.0)], Sense::Le, delta, tag(4));
            // zbar >= z - M (1 - y)
            push(vec![(zb, 1.0), (z, -1.0), (y, -m)], Sense::Ge, -m, tag(5));
            // zbar >= delta - M y
            push(vec![(zb, 1.0), (y, m)], Sense::Ge, delta, tag(6));
        }
    }

    for u in 0..nu {
        let zmax = layout.index(VarKind::Zmax { u });
        let field = &inst.measures[u].field;
        for c in dims.cells() {
            let zb = layout.index(VarKind::Zbar { u, i: c.i, j: c.j });
            push(
                vec![(zmax, 1.0), (zb, 1.0)],
                Sense::Ge,
                *field.at(c),
                RowTag::Peak { u, i: c.i, j: c.j },
            );
        }
    }

    let inv_cells = 1.0 / dims.cell_count() as f64;
    for u in 0..nu {
        let mut coefficients = vec![(layout.index(VarKind::Zavg { u }), 1.0)];
        coefficients.extend(
            dims.cells()
                .map(|c| (layout.index(VarKind::Zbar { u, i: c.i, j: c.j }), inv_cells)),
        );
        let mean = inst.measures[u].field.iter().sum::<f64>() * inv_cells;
        push(coefficients, Sense::Eq, mean, RowTag::Average { u });
    }

    let population = inst.population.field();
    for c in dims.cells() {
        let mut coefficients = vec![(layout.index(VarKind::F { i: c.i, j: c.j }), 1.0)];
        let pi = *population.at(c);
        if pi != 0.0 {
            window_terms(
                inst,
                &layout,
                c,
                |t| &inst.fairness_kernels[t],
                false,
                pi,
                &mut coefficients,
            );
        }
        push(
            coefficients,
            Sense::Eq,
            0.0,
            RowTag::Fairness { i: c.i, j: c.j },
        );
    }

    let norm = objective_normalizers(inst);
    let coef = norm.coefficients(inst);
    let mut objective = Vec::new();
    for u in 0..nu {
        objective.push((layout.index(VarKind::Zmax { u }), coef.peak[u]));
        objective.push((layout.index(VarKind::Zavg { u }), coef.average[u]));
    }
    for t in 0..nt {
        for c in dims.cells() {
            if !inst.is_pre_existing(t, c) {
                objective.push((x(t, c), coef.cost * inst.nbs[t].unit_cost));
            }
        }
    }
    for c in dims.cells() {
        objective.push((layout.index(VarKind::F { i: c.i, j: c.j }), coef.fairness));
    }
    objective.retain(|&(_, a)| a != 0.0);

    Ok(MilpModel {
        name: "nbs_placement".into(),
        variables,
        constraints: rows,
        objective,
        objective_constant: coef.constant,
        layout,
    })
}
