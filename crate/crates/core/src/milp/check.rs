use std::fmt;

use serde::Serialize;

use crate::engine::Placement;
use crate::grid::Cell;
use crate::instance::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    Shape,
    OneType,
    Budget,
    Forbidden,
    PreExisting,
    Cluster,
}

impl ViolationKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Shape => "shape",
            Self::OneType => "one-type",
            Self::Budget => "budget",
            Self::Forbidden => "forbidden",
            Self::PreExisting => "pre-existing",
            Self::Cluster => "cluster",
        }
    }
}

/// One broken placement constraint.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub nbs: Option<String>,
    pub cell: Option<Cell>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.label())?;
        if let Some(n) = &self.nbs {
            write!(f, " [{n}]")?;
        }
        if let Some(c) = self.cell {
            write!(f, " at {c}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

/// Cost of the installations that are not pre-existing.
pub(crate) fn new_spend(inst: &Instance, placement: &Placement) -> f64 {
    (0..inst.nbs.len())
        .map(|t| placement.new_cells(inst, t).count() as f64 * inst.nbs[t].unit_cost)
        .sum()
}

/// Check a placement against the one-type, budget, forbidden, pre-existing
/// and cluster constraints. An empty result means feasible.
pub fn check_placement(inst: &Instance, placement: &Placement) -> Vec<Violation> {
    let nt = inst.nbs.len();
    let shape = (inst.dims.width, inst.dims.height);
    if placement.nbs_count() != nt || placement.layers().iter().any(|l| l.shape() != shape) {
        return vec![Violation {
            kind: ViolationKind::Shape,
            nbs: None,
            cell: None,
            detail: format!(
                "placement does not have {nt} layers of {}x{}",
                shape.0, shape.1
            ),
        }];
    }
    let mut out = Vec::new();
    let v = |kind, t: Option<usize>, cell, detail: String| Violation {
        kind,
        nbs: t.map(|t| inst.nbs[t].id.clone()),
        cell,
        detail,
    };
    for c in inst.dims.cells() {
        let n = placement.installed_types(c).count();
        if n > 1 {
            out.push(v(
                ViolationKind::OneType,
                None,
                Some(c),
                format!("{n} types installed"),
            ));
        }
        for t in 0..nt {
            let on = placement.get(t, c);
            if on && inst.is_forbidden(t, c) {
                out.push(v(
                    ViolationKind::Forbidden,
                    Some(t),
                    Some(c),
                    "installed on a forbidden cell".into(),
                ));
            }
            if !on && inst.is_pre_existing(t, c) {
                out.push(v(
                    ViolationKind::PreExisting,
                    Some(t),
                    Some(c),
                    "pre-existing installation removed".into(),
                ));
            }
        }
    }
    let spend = new_spend(inst, placement);
    if spend > inst.budget * (1.0 + 1e-12) + 1e-9 {
        out.push(v(
            ViolationKind::Budget,
            None,
            None,
            format!("spend {spend} exceeds budget {}", inst.budget),
        ));
    }
    for t in 0..nt {
        let Some(p) = inst.cluster_partition(t) else {
            continue;
        };
        for (q, cluster) in p.clusters.iter().enumerate() {
            let on = cluster
                .iter()
                .filter(|&&c: &&Cell| placement.get(t, c))
                .count();
            if on != 0 && on != cluster.len() {
                out.push(v(
                    ViolationKind::Cluster,
                    Some(t),
                    cluster.first().copied(),
                    format!("cluster {q}: {on} of {} cells installed", cluster.len()),
                ));
            }
        }
    }
    out
}
