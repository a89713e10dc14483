mod common;

use common::{capped_instance, one_cell};
use nbsplan::engine::Placement;
use nbsplan::error::SolveError;
use nbsplan::milp::{build_model, check_placement, evaluate_solution};
use nbsplan::solver::{
    decision_units, default_solver_command, solve_external, solve_oracle, SolveConfig, SolveStatus,
};

fn external_config() -> Option<SolveConfig> {
    let cmd = default_solver_command()?;
    Some(SolveConfig {
        solver_command: Some(cmd),
        time_limit: 60.0,
        ..SolveConfig::external()
    })
}

#[test]
fn oracle_solves_one_cell_by_planting() {
    let inst = one_cell();
    let r = solve_oracle(&inst, &SolveConfig::default()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    let p = r.placement.unwrap();
    assert!(p.get(0, nbsplan::Cell { i: 0, j: 0 }));
    let expected = 0.25 * 27.3 / 30.0 * 2.0 + 0.25 * 7890.0 / 10000.0 - 0.25;
    assert!((r.objective.unwrap() - expected).abs() < 1e-12);
}

#[test]
fn oracle_respects_cap() {
    let inst = capped_instance(2, 16);
    let n = decision_units(&inst).count();
    let cfg = SolveConfig {
        max_units: n.saturating_sub(1),
        ..SolveConfig::default()
    };
    if n > 0 {
        assert!(matches!(
            solve_oracle(&inst, &cfg),
            Err(SolveError::CapExceeded { .. })
        ));
    }
}

#[test]
fn oracle_is_never_worse_than_doing_nothing() {
    for seed in 0..10 {
        let inst = capped_instance(seed, 12);
        let r = solve_oracle(&inst, &SolveConfig::default()).unwrap();
        let base = evaluate_solution(&inst, &Placement::do_nothing(&inst))
            .unwrap()
            .objective;
        assert!(r.objective.unwrap() <= base + 1e-12);
        assert!(check_placement(&inst, r.placement.as_ref().unwrap()).is_empty());
    }
}

#[test]
fn external_matches_oracle_on_small_instances() {
    let Some(cfg) = external_config() else {
        eprintln!("no external solver available; skipping");
        return;
    };
    for seed in 0..6 {
        let inst = capped_instance(seed, 12);
        let model = build_model(&inst).unwrap();
        let ext = solve_external(&inst, &model, &cfg).unwrap();
        let ora = solve_oracle(&inst, &SolveConfig::default()).unwrap();
        assert_eq!(
            ext.status,
            SolveStatus::Optimal,
            "seed {seed}: {:?}",
            ext.note
        );
        let (a, b) = (ext.objective.unwrap(), ora.objective.unwrap());
        assert!(
            (a - b).abs() <= 1e-6 * b.abs().max(1.0),
            "seed {seed}: external {a} vs oracle {b}"
        );
    }
}

#[test]
fn timeout_falls_back_to_doing_nothing() {
    let inst = one_cell();
    let model = build_model(&inst).unwrap();
    let cfg = SolveConfig {
        solver_command: Some("sleep 30".into()),
        time_limit: 0.5,
        ..SolveConfig::external()
    };
    let r = solve_external(&inst, &model, &cfg).unwrap();
    assert_eq!(r.status, SolveStatus::FeasibleTimeout);
    assert_eq!(r.placement.unwrap(), Placement::do_nothing(&inst));
    assert!(r.wall_time < 10.0);
}

#[test]
fn missing_solution_file_is_a_solver_failure() {
    let inst = one_cell();
    let model = build_model(&inst).unwrap();
    let cfg = SolveConfig {
        solver_command: Some("true".into()),
        ..SolveConfig::external()
    };
    assert!(matches!(
        solve_external(&inst, &model, &cfg),
        Err(SolveError::SolverFailed(_))
    ));
}

#[test]
fn plain_solution_listing_is_accepted() {
    let inst = one_cell();
    let model = build_model(&inst).unwrap();
    // The planted one-cell optimum: z = zbar = 2.7, f = 6.
    let listing = "status optimal\\nx_t0_i0_j0 1\\nz_u0_i0_j0 2.7\\nzbar_u0_i0_j0 2.7\\ny_u0_i0_j0 1\\nzmax_u0 27.3\\nzavg_u0 27.3\\nf_i0_j0 6\\n";
    let cmd = format!("printf '{listing}' > {{solution}}");
    let cfg = SolveConfig {
        solver_command: Some(cmd),
        ..SolveConfig::external()
    };
    let r = solve_external(&inst, &model, &cfg).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!(r.placement.unwrap().get(0, nbsplan::Cell { i: 0, j: 0 }));
}

#[test]
fn infeasible_point_is_rejected() {
    let inst = one_cell();
    let model = build_model(&inst).unwrap();
    // Claims optimality while leaving the objective columns inconsistent.
    let cmd = "printf 'status optimal\\nx_t0_i0_j0 1\\nzmax_u0 1\\n' > {solution}".to_string();
    let cfg = SolveConfig {
        solver_command: Some(cmd),
        ..SolveConfig::external()
    };
    assert!(matches!(
        solve_external(&inst, &model, &cfg),
        Err(SolveError::Verification(_))
    ));
}

#[test]
fn bad_config_is_rejected() {
    let inst = one_cell();
    let model = build_model(&inst).unwrap();
    let cfg = SolveConfig {
        time_limit: 0.0,
        solver_command: Some("true".into()),
        ..SolveConfig::external()
    };
    assert!(matches!(
        solve_external(&inst, &model, &cfg),
        Err(SolveError::Config(_))
    ));
}
