mod common;

use common::capped_instance;
use nbsplan::analysis::{
    batch_stats, build_report, export_heatmaps, gini, read_csv_matrix, Category, Report,
};
use nbsplan::engine::{instance_fairness, Placement};
use nbsplan::grid::{Cell, GridDims};
use nbsplan::instance::instance_from_json;
use nbsplan::solver::{solve_oracle, Backend, SolveConfig, SolveResult, SolveStatus};
use nbsplan::{generate_synthetic, Instance, SyntheticConfig};

fn result_for(placement: Placement, status: SolveStatus) -> SolveResult {
    SolveResult {
        status,
        backend: Backend::Oracle,
        placement: Some(placement),
        objective: None,
        bound: None,
        wall_time: 0.5,
        evaluation: None,
        raw_point: None,
        note: None,
    }
}

/// 3x3 grid, one type with point kernels, hot spot in the middle.
fn point_kernel_grid() -> Instance {
    instance_from_json(
        r#"{
        "dims": {"width": 3, "height": 3, "resolution": 10.0},
        "nbs": [{"id": "GW", "name": "Green Wall", "unit_cost": 7890.0}],
        "measures": [{"id": "temp_max", "unit": "degC", "field": [[20, 21, 22], [23, 30, 24], [25, 26, 27]]}],
        "kernels": [{"measure": "temp_max", "nbs": "GW", "size": [1, 1], "rows": [[2.7]]}],
        "fairness_kernels": [{"nbs": "GW", "size": [1, 1], "rows": [[6.0]]}],
        "forbidden": {"GW": [[0, 0]]},
        "pre_existing": {"GW": [[2, 2]]},
        "population": [[1, 1, 1], [1, 1, 1], [1, 1, 1]],
        "budget": 20000.0,
        "weights": {"peak": {"temp_max": 0.25}, "average": {"temp_max": 0.25}, "cost": 0.25, "fairness": 0.25},
        "clusters": {}
    }"#,
    )
    .unwrap()
}

#[test]
fn doing_nothing_reports_no_change() {
    let inst = capped_instance(5, 16);
    let r = build_report(
        &inst,
        &result_for(Placement::do_nothing(&inst), SolveStatus::Optimal),
    )
    .unwrap();
    for m in &r.measures {
        assert_eq!(m.initial_peak, m.final_peak);
        assert_eq!(m.initial_average, m.final_average);
        assert!(m.delta.iter().all(|&d| d == 0.0));
    }
    assert_eq!(r.spend, 0.0);
    assert_eq!(r.gini_initial, r.gini_final);
    assert_eq!(r.fairness_initial, r.fairness_final);
}

#[test]
fn park_cell_costs_table_price_times_area() {
    let mut cfg = SyntheticConfig::new(11, GridDims::new(4, 4));
    cfg.forbidden_fraction = 0.0;
    cfg.pre_existing_fraction = 0.0;
    let mut inst = generate_synthetic(&cfg).unwrap();
    inst.budget = 1e6;
    let t = inst.nbs_index("UP").unwrap();
    let mut p = Placement::do_nothing(&inst);
    p.set(t, Cell { i: 1, j: 2 }, true);
    let r = build_report(&inst, &result_for(p, SolveStatus::Optimal)).unwrap();
    assert!((r.nbs[t].spend - 3780.0).abs() < 1e-9, "{}", r.nbs[t].spend);
    assert_eq!(r.nbs[t].new_cells, 1);
    assert!((r.nbs[t].budget_pct - 0.378).abs() < 1e-12);
}

#[test]
fn solved_report_invariants() {
    for seed in 0..8 {
        let inst = capped_instance(seed, 12);
        let res = solve_oracle(&inst, &SolveConfig::default()).unwrap();
        let r = build_report(&inst, &res).unwrap();
        let placement = res.placement.unwrap();
        for m in &r.measures {
            assert!(m.final_peak <= m.initial_peak + 1e-12);
        }
        let shares: f64 = r.nbs.iter().map(|n| n.budget_pct).sum();
        assert!((shares - r.budget_pct).abs() < 1e-9);
        assert!(r.spend <= r.budget + 1e-9);
        assert!((0.0..=1.0).contains(&r.gini_initial) && (0.0..=1.0).contains(&r.gini_final));
        let f = instance_fairness(&inst, &placement).unwrap();
        assert_eq!(r.gini_final, gini(f.as_slice()).unwrap());
        assert!((r.objective - res.objective.unwrap()).abs() < 1e-12);
        for n in &r.nbs {
            assert_eq!(n.categories.shape(), (inst.dims.width, inst.dims.height));
        }
    }
}

#[test]
fn placement_map_categories() {
    let inst = point_kernel_grid();
    let mut p = Placement::do_nothing(&inst);
    p.set(0, Cell { i: 1, j: 1 }, true);
    let r = build_report(&inst, &result_for(p, SolveStatus::Optimal)).unwrap();
    let cats = &r.nbs[0].categories;
    assert_eq!(cats[(0, 0)], Category::Forbidden as u8);
    assert_eq!(cats[(2, 2)], Category::PreExisting as u8);
    assert_eq!(cats[(1, 1)], Category::New as u8);
    assert_eq!(
        cats.iter()
            .filter(|&&c| c == Category::Unused as u8)
            .count(),
        6
    );
}

#[test]
fn single_reduced_cell_exports_one_nonzero_entry() {
    let inst = point_kernel_grid();
    let mut p = Placement::do_nothing(&inst);
    p.set(0, Cell { i: 1, j: 1 }, true);
    let r = build_report(&inst, &result_for(p, SolveStatus::Optimal)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = export_heatmaps(&r, dir.path()).unwrap();
    assert_eq!(files.len(), 5);
    let delta = read_csv_matrix(&dir.path().join("delta_temp_max.csv")).unwrap();
    assert_eq!(delta, r.measures[0].delta);
    let nonzero: Vec<_> = delta.iter().filter(|&&v| v != 0.0).collect();
    assert_eq!(nonzero, vec![&2.7]);
    assert_eq!(r.measures[0].final_peak, 27.3);
    let scale: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("delta_temp_max.scale.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(scale["max"], 2.7);
}

#[test]
fn zero_delta_gives_uniform_image() {
    let inst = point_kernel_grid();
    let r = build_report(
        &inst,
        &result_for(Placement::do_nothing(&inst), SolveStatus::Optimal),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    export_heatmaps(&r, dir.path()).unwrap();
    let bytes = std::fs::read(dir.path().join("delta_temp_max.pgm")).unwrap();
    assert!(bytes[bytes.len() - 9..].iter().all(|&b| b == 0));
    let csv = std::fs::read_to_string(dir.path().join("delta_temp_max.csv")).unwrap();
    assert_eq!(csv, "0,0,0\n0,0,0\n0,0,0\n");
}

#[test]
fn report_json_roundtrip() {
    let inst = capped_instance(9, 12);
    let res = solve_oracle(&inst, &SolveConfig::default()).unwrap();
    let r = build_report(&inst, &res).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    let back: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
}

#[test]
fn infeasible_result_is_rejected() {
    let inst = point_kernel_grid();
    let mut p = Placement::do_nothing(&inst);
    p.set(0, Cell { i: 0, j: 0 }, true);
    assert!(build_report(&inst, &result_for(p, SolveStatus::Optimal)).is_err());
}

fn reports(status: &[SolveStatus]) -> Vec<Report> {
    let inst = point_kernel_grid();
    status
        .iter()
        .map(|&s| build_report(&inst, &result_for(Placement::do_nothing(&inst), s)).unwrap())
        .collect()
}

#[test]
fn percent_optimal() {
    let one = reports(&[SolveStatus::Optimal]);
    let s = batch_stats(one.iter().map(|r| ("xs", r)));
    assert_eq!(s[0].pct_optimal, 100.0);
    let two = reports(&[SolveStatus::Optimal, SolveStatus::FeasibleTimeout]);
    let s = batch_stats(two.iter().map(|r| ("xs", r)));
    assert_eq!((s[0].count, s[0].pct_optimal), (2, 50.0));
    assert_eq!(s[0].mean_wall_time, 0.5);
}

#[test]
fn batch_means_are_reproducible() {
    let run = || {
        let reports: Vec<Report> = (0..10)
            .map(|seed| {
                let inst = capped_instance(seed, 10);
                build_report(
                    &inst,
                    &solve_oracle(&inst, &SolveConfig::default()).unwrap(),
                )
                .unwrap()
            })
            .collect();
        let mut stats = batch_stats(reports.iter().map(|r| ("small", r)));
        stats.iter_mut().for_each(|s| s.mean_wall_time = 0.0);
        stats
    };
    assert_eq!(run(), run());
}
