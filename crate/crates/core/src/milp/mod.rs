//! Solver-agnostic MILP representation and the NBS placement model.

mod build;
mod check;
mod objective;

use serde::Serialize;

pub use build::{build_model, effective_big_m};
pub use check::{check_placement, Violation, ViolationKind};
pub(crate) use objective::evaluate_with;
pub use objective::{
    complete_point, evaluate_solution, objective_normalizers, Evaluation, Normalizers,
    ObjectiveTerms,
};

use crate::error::MilpError;

/// Decision variable identity. Indices are zero-based; `t` indexes NBS types,
/// `u` measures, `q` clusters and `(i, j)` grid cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum VarKind {
    X { t: usize, i: usize, j: usize },
    Lambda { t: usize, q: usize },
    Y { u: usize, i: usize, j: usize },
    Z { u: usize, i: usize, j: usize },
    Zbar { u: usize, i: usize, j: usize },
    Zmax { u: usize },
    Zavg { u: usize },
    F { i: usize, j: usize },
}

impl VarKind {
    pub fn is_binary(&self) -> bool {
        matches!(self, Self::X { .. } | Self::Y { .. } | Self::Lambda { .. })
    }

    pub fn name(&self) -> String {
        match *self {
            Self::X { t, i, j } => format!("x_t{t}_i{i}_j{j}"),
            Self::Lambda { t, q } => format!("lambda_t{t}_q{q}"),
            Self::Y { u, i, j } => format!("y_u{u}_i{i}_j{j}"),
            Self::Z { u, i, j } => format!("z_u{u}_i{i}_j{j}"),
            Self::Zbar { u, i, j } => format!("zbar_u{u}_i{i}_j{j}"),
            Self::Zmax { u } => format!("zmax_u{u}"),
            Self::Zavg { u } => format!("zavg_u{u}"),
            Self::F { i, j } => format!("f_i{i}_j{j}"),
        }
    }

    /// Inverse of [`VarKind::name`].
    pub fn parse(name: &str) -> Option<Self> {
        let (head, rest) = name.split_once('_')?;
        let mut fields = rest.split('_');
        let mut take =
            |prefix: &str| -> Option<usize> { fields.next()?.strip_prefix(prefix)?.parse().ok() };
        let kind = match head {
            "x" => Self::X {
                t: take("t")?,
                i: take("i")?,
                j: take("j")?,
            },
            "lambda" => Self::Lambda {
                t: take("t")?,
                q: take("q")?,
            },
            "y" => Self::Y {
                u: take("u")?,
                i: take("i")?,
                j: take("j")?,
            },
            "z" => Self::Z {
                u: take("u")?,
                i: take("i")?,
                j: take("j")?,
            },
            "zbar" => Self::Zbar {
                u: take("u")?,
                i: take("i")?,
                j: take("j")?,
            },
            "zmax" => Self::Zmax { u: take("u")? },
            "zavg" => Self::Zavg { u: take("u")? },
            "f" => Self::F {
                i: take("i")?,
                j: take("j")?,
            },
            _ => return None,
        };
        fields.next().is_none().then_some(kind)
    }
}

/// A variable together with its flat column index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct VarRef {
    pub kind: VarKind,
    pub index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// Constraint family plus the indices that identify one row in it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RowTag {
    OneType {
        i: usize,
        j: usize,
    },
    Budget,
    Forbidden {
        t: usize,
        i: usize,
        j: usize,
    },
    PreExisting {
        t: usize,
        i: usize,
        j: usize,
    },
    Cluster {
        t: usize,
        q: usize,
        i: usize,
        j: usize,
    },
    Convolution {
        u: usize,
        i: usize,
        j: usize,
    },
    /// The six big-M rows, `k` in `1..=6`.
    BigM {
        k: u8,
        u: usize,
        i: usize,
        j: usize,
    },
    Peak {
        u: usize,
        i: usize,
        j: usize,
    },
    Average {
        u: usize,
    },
    Fairness {
        i: usize,
        j: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Family {
    OneType,
    Budget,
    Forbidden,
    PreExisting,
    Cluster,
    Convolution,
    BigM,
    Peak,
    Average,
    Fairness,
}

impl RowTag {
    pub fn family(&self) -> Family {
        match self {
            Self::OneType { .. } => Family::OneType,
            Self::Budget => Family::Budget,
            Self::Forbidden { .. } => Family::Forbidden,
            Self::PreExisting { .. } => Family::PreExisting,
            Self::Cluster { .. } => Family::Cluster,
            Self::Convolution { .. } => Family::Convolution,
            Self::BigM { .. } => Family::BigM,
            Self::Peak { .. } => Family::Peak,
            Self::Average { .. } => Family::Average,
            Self::Fairness { .. } => Family::Fairness,
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Self::OneType { i, j } => format!("one_i{i}_j{j}"),
            Self::Budget => "budget".into(),
            Self::Forbidden { t, i, j } => format!("forbid_t{t}_i{i}_j{j}"),
            Self::PreExisting { t, i, j } => format!("pre_t{t}_i{i}_j{j}"),
            Self::Cluster { t, q, i, j } => format!("clus_t{t}_q{q}_i{i}_j{j}"),
            Self::Convolution { u, i, j } => format!("conv_u{u}_i{i}_j{j}"),
            Self::BigM { k, u, i, j } => format!("bigm{k}_u{u}_i{i}_j{j}"),
            Self::Peak { u, i, j } => format!("peak_u{u}_i{i}_j{j}"),
            Self::Average { u } => format!("avg_u{u}"),
            Self::Fairness { i, j } => format!("fair_i{i}_j{j}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    /// `(column, coefficient)`, no repeated column.
    pub coefficients: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: RowTag,
}

impl LinearConstraint {
    pub fn activity(&self, point: &[f64]) -> f64 {
        self.coefficients.iter().map(|&(c, a)| a * point[c]).sum()
    }

    /// Amount by which `point` violates the row (0 when satisfied).
    pub fn violation(&self, point: &[f64]) -> f64 {
        let lhs = self.activity(point);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Minimization model: columns, rows and a linear objective with a constant.
#[derive(Clone, Debug, PartialEq)]
pub struct MilpModel {
    pub name: String,
    pub variables: Vec<VarKind>,
    pub constraints: Vec<LinearConstraint>,
    /// Sparse objective, at most one entry per column.
    pub objective: Vec<(usize, f64)>,
    pub objective_constant: f64,
    layout: Layout,
}

/// Column offsets of each variable block.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Layout {
    pub cells: usize,
    pub height: usize,
    pub nbs: usize,
    pub measures: usize,
    pub x: usize,
    /// Per NBS type: first lambda column.
    pub lambda: Vec<usize>,
    pub y: usize,
    pub z: usize,
    pub zbar: usize,
    pub zmax: usize,
    pub zavg: usize,
    pub f: usize,
    pub total: usize,
}

impl Layout {
    pub(crate) fn new(
        width: usize,
        height: usize,
        nbs: usize,
        measures: usize,
        clusters: &[usize],
    ) -> Self {
        let cells = width * height;
        let x = 0;
        let mut next = x + nbs * cells;
        let mut lambda = Vec::with_capacity(nbs);
        for &q in clusters {
            lambda.push(next);
            next += q;
        }
        let y = next;
        let z = y + measures * cells;
        let zbar = z + measures * cells;
        let zmax = zbar + measures * cells;
        let zavg = zmax + measures;
        let f = zavg + measures;
        let total = f + cells;
        Self {
            cells,
            height,
            nbs,
            measures,
            x,
            lambda,
            y,
            z,
            zbar,
            zmax,
            zavg,
            f,
            total,
        }
    }

    fn cell(&self, i: usize, j: usize) -> usize {
        i * self.height + j
    }

    pub(crate) fn index(&self, kind: VarKind) -> usize {
        match kind {
            VarKind::X { t, i, j } => self.x + t * self.cells + self.cell(i, j),
            VarKind::Lambda { t, q } => self.lambda[t] + q,
            VarKind::Y { u, i, j } => self.y + u * self.cells + self.cell(i, j),
            VarKind::Z { u, i, j } => self.z + u * self.cells + self.cell(i, j),
            VarKind::Zbar { u, i, j } => self.zbar + u * self.cells + self.cell(i, j),
            VarKind::Zmax { u } => self.zmax + u,
            VarKind::Zavg { u } => self.zavg + u,
            VarKind::F { i, j } => self.f + self.cell(i, j),
        }
    }
}

/// A row, bound or integrality requirement that a point violates beyond
/// tolerance. `family` is `None` for bound and integrality violations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowViolation {
    pub row: String,
    pub family: Option<Family>,
    pub amount: f64,
}

impl MilpModel {
    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.constraints.iter().map(|c| c.coefficients.len()).sum()
    }

    pub fn var(&self, kind: VarKind) -> Option<VarRef> {
        let index = self.layout.index(kind);
        (self.variables.get(index) == Some(&kind)).then_some(VarRef { kind, index })
    }

    pub fn index_of(&self, kind: VarKind) -> Option<usize> {
        self.var(kind).map(|v| v.index)
    }

    /// Column bounds `(lower, upper)`. Peak and average columns are free
    /// because a capped reduction can exceed the observed value.
    pub fn bounds(&self, column: usize) -> (f64, f64) {
        match self.variables[column] {
            VarKind::Zmax { .. } | VarKind::Zavg { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            kind if kind.is_binary() => (0.0, 1.0),
            _ => (0.0, f64::INFINITY),
        }
    }

    pub fn family_count(&self, family: Family) -> usize {
        self.constraints
            .iter()
            .filter(|c| c.tag.family() == family)
            .count()
    }

    pub fn objective_value(&self, point: &[f64]) -> Result<f64, MilpError> {
        self.check_len(point)?;
        Ok(self
            .objective
            .iter()
            .map(|&(c, a)| a * point[c])
            .sum::<f64>()
            + self.objective_constant)
    }

    fn check_len(&self, point: &[f64]) -> Result<(), MilpError> {
        if point.len() != self.variables.len() {
            return Err(MilpError::PointLength {
                expected: self.variables.len(),
                found: point.len(),
            });
        }
        Ok(())
    }

    /// Rows, bounds and integrality violated by more than `tol`.
    pub fn check_point(&self, point: &[f64], tol: f64) -> Result<Vec<RowViolation>, MilpError> {
        self.check_len(point)?;
        let mut out = Vec::new();
        for (c, kind) in self.variables.iter().enumerate() {
            let (lo, hi) = self.bounds(c);
            let v = point[c];
            let amount = (lo - v).max(v - hi).max(0.0);
            let frac = if kind.is_binary() {
                (v - v.round()).abs()
            } else {
                0.0
            };
            if amount > tol || frac > tol || !v.is_finite() {
                out.push(RowViolation {
                    row: kind.name(),
                    family: None,
                    amount: amount.max(frac),
                });
            }
        }
        for row in &self.constraints {
            let amount = row.violation(point);
            if amount > tol * (1.0 + row.rhs.abs()) {
                out.push(RowViolation {
                    row: row.tag.name(),
                    family: Some(row.tag.family()),
                    amount,
                });
            }
        }
        Ok(out)
    }
}
