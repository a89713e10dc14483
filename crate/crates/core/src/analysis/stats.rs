use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::report::Report;
use crate::solver::SolveStatus;

/// Summary of the reports sharing a group label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub group: String,
    pub count: usize,
    pub mean_wall_time: f64,
    pub pct_optimal: f64,
    /// Per measure id, averaged over the reports that include it.
    pub mean_peak_reduction_pct: BTreeMap<String, f64>,
    pub mean_average_reduction_pct: BTreeMap<String, f64>,
    /// Per NBS id, averaged over the reports that include it.
    pub mean_budget_pct: BTreeMap<String, f64>,
    pub mean_gini_initial: f64,
    pub mean_gini_final: f64,
}

#[derive(Default)]
struct Mean {
    sum: f64,
    n: usize,
}

impl Mean {
    fn add(&mut self, v: f64) {
        self.sum += v;
        self.n += 1;
    }

    fn value(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }
}

fn means(map: BTreeMap<String, Mean>) -> BTreeMap<String, f64> {
    map.into_iter().map(|(k, m)| (k, m.value())).collect()
}

/// Aggregates `(group, report)` pairs; groups come out sorted by label.
pub fn batch_stats<'a>(
    reports: impl IntoIterator<Item = (&'a str, &'a Report)>,
) -> Vec<GroupStats> {
    let mut groups: BTreeMap<&str, Vec<&Report>> = BTreeMap::new();
    for (g, r) in reports {
        groups.entry(g).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(group, rs)| {
            let (mut wall, mut optimal, mut gi, mut gf) = (
                Mean::default(),
                Mean::default(),
                Mean::default(),
                Mean::default(),
            );
            let mut peak: BTreeMap<String, Mean> = BTreeMap::new();
            let mut avg: BTreeMap<String, Mean> = BTreeMap::new();
            let mut budget: BTreeMap<String, Mean> = BTreeMap::new();
            for r in &rs {
                wall.add(r.solve.wall_time);
                optimal.add(if r.solve.status == SolveStatus::Optimal {
                    100.0
                } else {
                    0.0
                });
                gi.add(r.gini_initial);
                gf.add(r.gini_final);
                for m in &r.measures {
                    peak.entry(m.id.clone())
                        .or_default()
                        .add(m.peak_reduction_pct);
                    avg.entry(m.id.clone())
                        .or_default()
                        .add(m.average_reduction_pct);
                }
                for n in &r.nbs {
                    budget.entry(n.id.clone()).or_default().add(n.budget_pct);
                }
            }
            GroupStats {
                group: group.to_string(),
                count: rs.len(),
                mean_wall_time: wall.value(),
                pct_optimal: optimal.value(),
                mean_peak_reduction_pct: means(peak),
                mean_average_reduction_pct: means(avg),
                mean_budget_pct: means(budget),
                mean_gini_initial: gi.value(),
                mean_gini_final: gf.value(),
            }
        })
        .collect()
}
