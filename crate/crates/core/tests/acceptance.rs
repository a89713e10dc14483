//! Acceptance criteria. Each criterion prints one `PASS`/`FAIL` line to
//! stderr (outside the test harness capture) and the test fails if any
//! criterion fails.

mod common;

use std::io::Write;
use std::time::Instant;

use common::capped_instance;
use nbsplan::analysis::gini;
use nbsplan::catalog::MEASURE_IDS;
use nbsplan::cluster::apply_clustering;
use nbsplan::engine::{
    clamp_reduction, impact_field, instance_fairness, reduced_measure, Placement,
};
use nbsplan::grid::{Cell, GridDims, Matrix};
use nbsplan::instance::ObjectiveWeights;
use nbsplan::kernel::{default_kernel_set, derive_delta, Kernel};
use nbsplan::milp::{build_model, check_placement, evaluate_solution, VarKind};
use nbsplan::solver::mps::write_mps;
use nbsplan::solver::{
    decision_units, default_solver_command, solve_external, solve_oracle, SolveConfig, SolveStatus,
};
use nbsplan::{generate_synthetic, Instance, SolveResult, SyntheticConfig};
use num_rational::Ratio;

const SUITE_SEEDS: u64 = 50;
const UNIT_CAP: usize = 16;
const EQUIVALENCE_TOL: f64 = 1e-6;
const LINEARIZATION_TOL: f64 = 1e-6;
const DOMINANCE_TOL: f64 = 1e-9;
const FAIRNESS_TOL: f64 = 1e-9;
const DELTA_TOL: f64 = 1e-12;
const GINI_TOL: f64 = 1e-12;
const BUILD_SECONDS: f64 = 60.0;
const BUILD_BYTES: u64 = 4 << 30;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(name: &'static str, failures: &[String], detail: String) -> Outcome {
    let detail = match failures.first() {
        None => detail,
        Some(first) => format!("{} failure(s); first: {first}", failures.len()),
    };
    Outcome {
        name,
        pass: failures.is_empty(),
        detail,
    }
}

struct Solved {
    seed: u64,
    inst: Instance,
    oracle: SolveResult,
    external: Result<SolveResult, String>,
}

fn external_config() -> Option<SolveConfig> {
    let cmd = default_solver_command()?;
    Some(SolveConfig {
        solver_command: Some(cmd),
        time_limit: 120.0,
        ..SolveConfig::external()
    })
}

fn solve_suite(cfg: Option<&SolveConfig>) -> Vec<Solved> {
    (0..SUITE_SEEDS)
        .map(|seed| {
            let inst = capped_instance(seed, UNIT_CAP);
            let oracle =
                solve_oracle(&inst, &SolveConfig::default()).expect("suite respects the unit cap");
            let external = match cfg {
                None => Err("no external solver found".to_string()),
                Some(cfg) => build_model(&inst)
                    .map_err(|e| e.to_string())
                    .and_then(|m| solve_external(&inst, &m, cfg).map_err(|e| e.to_string())),
            };
            Solved {
                seed,
                inst,
                oracle,
                external,
            }
        })
        .collect()
}

fn equivalence(suite: &[Solved]) -> Outcome {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for s in suite {
        let ext = match &s.external {
            Ok(r) if r.status == SolveStatus::Optimal => r,
            Ok(r) => {
                failures.push(format!("seed {}: external status {:?}", s.seed, r.status));
                continue;
            }
            Err(e) => {
                failures.push(format!("seed {}: {e}", s.seed));
                continue;
            }
        };
        let b = s.oracle.objective.unwrap();
        // Both the re-evaluated placement and the solver's own point value.
        let model = build_model(&s.inst).unwrap();
        let raw = model
            .objective_value(ext.raw_point.as_ref().unwrap())
            .unwrap();
        for (what, a) in [("placement", ext.objective.unwrap()), ("solver point", raw)] {
            let rel = (a - b).abs() / b.abs().max(1.0);
            worst = worst.max(rel);
            if rel > EQUIVALENCE_TOL {
                failures.push(format!(
                    "seed {}: external {what} {a} vs oracle {b}",
                    s.seed
                ));
            }
        }
    }
    let units: Vec<usize> = suite
        .iter()
        .map(|s| decision_units(&s.inst).count())
        .collect();
    let clustered = suite.iter().filter(|s| s.inst.cluster_count() > 0).count();
    outcome(
        "oracle-milp equivalence",
        &failures,
        format!(
            "{} instances, {}..={} units, {clustered} with clusters, worst relative gap {worst:.2e} (tol {EQUIVALENCE_TOL:e})",
            suite.len(),
            units.iter().min().unwrap(),
            units.iter().max().unwrap()
        ),
    )
}

fn linearization(suite: &[Solved]) -> Outcome {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for s in suite {
        let Ok(ext) = &s.external else {
            failures.push(format!("seed {}: no external solution", s.seed));
            continue;
        };
        let Some(point) = &ext.raw_point else {
            failures.push(format!("seed {}: no raw point", s.seed));
            continue;
        };
        let model = build_model(&s.inst).unwrap();
        let at = |k: VarKind| point[model.index_of(k).unwrap()];
        for (u, m) in s.inst.measures.iter().enumerate() {
            let delta = s.inst.delta(u);
            let mut peak = f64::NEG_INFINITY;
            for c in s.inst.dims.cells() {
                let (i, j) = (c.i, c.j);
                let z = at(VarKind::Z { u, i, j });
                let zbar = at(VarKind::Zbar { u, i, j });
                let err = (zbar - z.min(delta)).abs();
                worst = worst.max(err);
                if err > LINEARIZATION_TOL {
                    failures.push(format!(
                        "seed {} u{u} ({i},{j}): zbar {zbar} vs min({z}, {delta})",
                        s.seed
                    ));
                }
                peak = peak.max(m.field.at(c) - zbar);
            }
            let zmax = at(VarKind::Zmax { u });
            let err = (zmax - peak).abs();
            worst = worst.max(err);
            if err > LINEARIZATION_TOL {
                failures.push(format!(
                    "seed {} u{u}: zmax {zmax} vs max(a - zbar) {peak}",
                    s.seed
                ));
            }
            checked += 1;
        }
    }
    outcome(
        "linearization property",
        &failures,
        format!("{checked} measure fields checked, worst deviation {worst:.2e} (tol {LINEARIZATION_TOL:e})"),
    )
}

fn constraints(suite: &[Solved], fairness: &[Solved]) -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for s in suite.iter().chain(fairness) {
        let results = std::iter::once(&s.oracle).chain(s.external.as_ref().ok());
        for r in results {
            let Some(p) = &r.placement else {
                failures.push(format!(
                    "seed {}: {:?} result has no placement",
                    s.seed, r.backend
                ));
                continue;
            };
            let v = check_placement(&s.inst, p);
            if let Some(first) = v.first() {
                failures.push(format!("seed {} {:?}: {first}", s.seed, r.backend));
            }
            checked += 1;
        }
    }
    outcome(
        "constraint suite",
        &failures,
        format!("{checked} solutions passed the placement checker"),
    )
}

fn kernel_fidelity() -> Outcome {
    // (nbs, measure or "fairness", size, edge, center)
    #[rustfmt::skip]
    let table: [(&str, &str, usize, f64, f64); 20] = [
        ("GW", "temp_max", 5, 0.10, 2.70), ("GW", "temp_min", 3, 0.10, 1.90),
        ("GW", "pm25", 5, 0.10, 5.03), ("GW", "pm10", 5, 0.10, 12.90), ("GW", "fairness", 5, 2.0, 6.0),
        ("GR", "temp_max", 5, 0.10, 2.00), ("GR", "temp_min", 3, 0.10, 1.40),
        ("GR", "pm25", 5, 0.10, 2.51), ("GR", "pm10", 5, 0.10, 6.45), ("GR", "fairness", 1, 0.1, 2.0),
        ("ST", "temp_max", 5, 0.10, 1.30), ("ST", "temp_min", 3, 0.10, 0.70),
        ("ST", "pm25", 3, 0.10, 4.02), ("ST", "pm10", 3, 0.10, 10.32), ("ST", "fairness", 3, 0.1, 4.0),
        ("UP", "temp_max", 5, 0.10, 3.50), ("UP", "temp_min", 3, 0.10, 2.50),
        ("UP", "pm25", 7, 0.10, 5.03), ("UP", "pm10", 7, 0.10, 12.90), ("UP", "fairness", 11, 4.0, 10.0),
    ];
    let set = default_kernel_set();
    let mut failures = Vec::new();
    for (nbs, measure, size, edge, center) in table {
        let k: &Kernel<f64> = if measure == "fairness" {
            set.fairness_kernel(nbs).unwrap()
        } else {
            set.measure_kernel(measure, nbs).unwrap()
        };
        if (k.rows(), k.cols()) != (size, size) {
            failures.push(format!(
                "{nbs} x {measure}: size {}x{} vs {size}",
                k.rows(),
                k.cols()
            ));
        }
        if k.center() != center {
            failures.push(format!(
                "{nbs} x {measure}: center {} vs {center}",
                k.center()
            ));
        }
        // A 1x1 kernel is all center; its tabulated edge has no cell to live in.
        if size > 1 && k.edge_values().iter().any(|&e| e != edge) {
            failures.push(format!(
                "{nbs} x {measure}: edge {:?} vs {edge}",
                k.edge_values()
            ));
        }
    }
    let measure_count = set.measure.len();
    if measure_count != 4 * MEASURE_IDS.len() {
        failures.push(format!(
            "{measure_count} measure kernels in the default set"
        ));
    }
    outcome(
        "kernel fidelity",
        &failures,
        format!("{} tabulated triples matched exactly", table.len()),
    )
}

fn delta_rule() -> Outcome {
    let field =
        Matrix::from_rows(vec![vec![4.95f64, 12.0, 35.60], vec![20.0, -2.29, 30.0]]).unwrap();
    let d = derive_delta(&field);
    let exact = derive_delta(
        &Matrix::from_rows(vec![vec![Ratio::new(3560i64, 100), Ratio::from_integer(1)]]).unwrap(),
    );
    let mut failures = Vec::new();
    if (d - 7.12).abs() > DELTA_TOL {
        failures.push(format!("max 35.60 gave {d}"));
    }
    if exact != Ratio::new(712, 100) {
        failures.push(format!("exact max 35.60 gave {exact}"));
    }
    outcome(
        "delta rule",
        &failures,
        format!("delta(max 35.60) = {d} (tol {DELTA_TOL:e}), exact {exact}"),
    )
}

fn peak_reduction() -> Outcome {
    // 5x5 field with a 33 degree peak; a green cell at the peak whose 3x3
    // kernel gives 6 at its center and 2 around it.
    let r = |v: i64| Ratio::from_integer(v);
    let observed = Matrix::from_fn(5, 5, |i, j| {
        if (i, j) == (2, 2) {
            r(33)
        } else {
            r(20 + ((i * 5 + j) % 7) as i64)
        }
    });
    let kernel = Kernel::new(Matrix::from_fn(3, 3, |i, j| {
        if (i, j) == (1, 1) {
            r(6)
        } else {
            r(2)
        }
    }))
    .unwrap();
    let mut p = Placement::empty(GridDims::new(5, 5), 1);
    p.set(0, Cell::new(2, 2), true);
    let z = impact_field(&p, &[kernel], &[Matrix::filled(5, 5, false)]).unwrap();
    let delta = derive_delta(&observed);
    let zbar = clamp_reduction(&z, delta);
    let reduced = reduced_measure(&observed, &zbar).unwrap();
    let mut failures = Vec::new();
    if zbar[(2, 2)] != r(6) {
        failures.push(format!("zbar at the peak is {}", zbar[(2, 2)]));
    }
    if reduced[(2, 2)] != r(27) {
        failures.push(format!("reduced peak cell is {}", reduced[(2, 2)]));
    }
    outcome(
        "peak reduction 33 -> 27",
        &failures,
        format!("reduced value {} (delta {delta})", reduced[(2, 2)]),
    )
}

fn dominance(suite: &[Solved]) -> Outcome {
    let mut failures = Vec::new();
    let mut best_gain: f64 = 0.0;
    for s in suite {
        let base = evaluate_solution(&s.inst, &Placement::do_nothing(&s.inst))
            .unwrap()
            .objective;
        let results = std::iter::once(Ok(&s.oracle)).chain(std::iter::once(s.external.as_ref()));
        for r in results {
            match r {
                Ok(r) => {
                    let obj = r.objective.unwrap();
                    best_gain = best_gain.max(base - obj);
                    if obj > base + DOMINANCE_TOL {
                        failures.push(format!(
                            "seed {} {:?}: {obj} > do-nothing {base}",
                            s.seed, r.backend
                        ));
                    }
                }
                Err(e) => failures.push(format!("seed {}: {e}", s.seed)),
            }
        }
    }
    outcome(
        "do-nothing dominance",
        &failures,
        format!(
            "{} instances, largest improvement {best_gain:.4} (tol {DOMINANCE_TOL:e})",
            suite.len()
        ),
    )
}

fn fairness_suite(cfg: Option<&SolveConfig>) -> Vec<Solved> {
    (0..SUITE_SEEDS)
        .map(|seed| {
            let mut inst = capped_instance(seed, UNIT_CAP);
            inst.weights = ObjectiveWeights::fairness_only(inst.measures.len());
            inst.validate().unwrap();
            let oracle = solve_oracle(&inst, &SolveConfig::default()).unwrap();
            let external = match cfg {
                None => Err("no external solver found".to_string()),
                Some(cfg) => solve_external(&inst, &build_model(&inst).unwrap(), cfg)
                    .map_err(|e| e.to_string()),
            };
            Solved {
                seed,
                inst,
                oracle,
                external,
            }
        })
        .collect()
}

fn fairness_direction(suite: &[Solved]) -> Outcome {
    let mut failures = Vec::new();
    let mut improved = 0;
    for s in suite {
        assert!(s.inst.budget > 0.0);
        let initial = instance_fairness(&s.inst, &Placement::do_nothing(&s.inst))
            .unwrap()
            .sum();
        match &s.external {
            Ok(r) if r.status == SolveStatus::Optimal => {
                let solved = instance_fairness(&s.inst, r.placement.as_ref().unwrap())
                    .unwrap()
                    .sum();
                if solved < initial - FAIRNESS_TOL {
                    failures.push(format!("seed {}: {solved} < initial {initial}", s.seed));
                }
                if solved > initial + FAIRNESS_TOL {
                    improved += 1;
                }
            }
            Ok(r) => failures.push(format!("seed {}: status {:?}", s.seed, r.status)),
            Err(e) => failures.push(format!("seed {}: {e}", s.seed)),
        }
    }
    outcome(
        "fairness direction",
        &failures,
        format!(
            "{} instances, strictly improved on {improved} (tol {FAIRNESS_TOL:e})",
            suite.len()
        ),
    )
}

fn gini_cases() -> Outcome {
    let mut failures = Vec::new();
    let uniform = gini(&[4.2f64; 9]).unwrap();
    if uniform.abs() > GINI_TOL {
        failures.push(format!("uniform gave {uniform}"));
    }
    let single = gini(&[0.0f64, 0.0, 0.0, 1.0]).unwrap();
    if (single - 0.75).abs() > GINI_TOL {
        failures.push(format!("[0,0,0,1] gave {single}"));
    }
    let v = [0.3, 1.7, 0.0, 4.4, 2.5, 0.9];
    let base = gini(&v).unwrap();
    for k in [1e-3, 0.5, 3.0, 1e4] {
        let scaled: Vec<f64> = v.iter().map(|x| x * k).collect();
        let g = gini(&scaled).unwrap();
        if (g - base).abs() > GINI_TOL {
            failures.push(format!("scale {k}: {g} vs {base}"));
        }
    }
    outcome(
        "gini unit cases",
        &failures,
        format!("uniform {uniform}, [0,0,0,1] {single}, scale-invariant (tol {GINI_TOL:e})"),
    )
}

fn peak_memory_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn build_scalability() -> Outcome {
    let mut inst =
        generate_synthetic(&SyntheticConfig::new(2024, GridDims::new(100, 100))).unwrap();
    let parks: Vec<usize> = inst.nbs_index("UP").into_iter().collect();
    apply_clustering(&mut inst, &parks, 5, 50);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.mps");
    let start = Instant::now();
    let model = build_model(&inst).unwrap();
    write_mps(&model, std::fs::File::create(&path).unwrap()).unwrap();
    let seconds = start.elapsed().as_secs_f64();
    let size = std::fs::metadata(&path).unwrap().len();
    let memory = peak_memory_bytes();

    let g = inst.dims.cell_count();
    let (nt, nu) = (inst.nbs.len(), inst.measures.len());
    let expected = g * nt + 3 * g * nu + 2 * nu + g + inst.cluster_count();
    let mut failures = Vec::new();
    if (nt, nu) != (4, 4) {
        failures.push(format!("instance has {nt} NBS and {nu} measures"));
    }
    if model.num_variables() != expected {
        failures.push(format!(
            "{} columns vs closed form {expected}",
            model.num_variables()
        ));
    }
    if seconds >= BUILD_SECONDS {
        failures.push(format!("took {seconds:.1} s"));
    }
    match memory {
        Some(m) if m < BUILD_BYTES => {}
        Some(m) => failures.push(format!("peak memory {} MiB", m >> 20)),
        None => failures.push("peak memory unavailable".to_string()),
    }
    outcome(
        "build scalability",
        &failures,
        format!(
            "100x100, {} columns (= closed form, {} clusters), {} rows, {} nonzeros, {seconds:.1} s, MPS {} MiB, peak RSS {} MiB",
            model.num_variables(),
            inst.cluster_count(),
            model.num_constraints(),
            model.num_nonzeros(),
            size >> 20,
            memory.unwrap_or(0) >> 20
        ),
    )
}

#[test]
fn acceptance() {
    let start = Instant::now();
    // Measured first so the peak memory reading belongs to this step.
    let scalability = build_scalability();
    let cfg = external_config();
    let suite = solve_suite(cfg.as_ref());
    let fairness = fairness_suite(cfg.as_ref());
    let outcomes = [
        equivalence(&suite),
        linearization(&suite),
        constraints(&suite, &fairness),
        kernel_fidelity(),
        delta_rule(),
        peak_reduction(),
        dominance(&suite),
        fairness_direction(&fairness),
        gini_cases(),
        scalability,
    ];
    let mut err = std::io::stderr().lock();
    writeln!(
        err,
        "\nacceptance criteria ({:.1} s total)",
        start.elapsed().as_secs_f64()
    )
    .unwrap();
    for o in &outcomes {
        writeln!(
            err,
            "{} {}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.name,
            o.detail
        )
        .unwrap();
    }
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.pass)
        .map(|o| o.name)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
