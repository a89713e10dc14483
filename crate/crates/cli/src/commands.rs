use std::fs;
use std::path::{Path, PathBuf};

use nbsplan::analysis::{batch_stats, build_report, export_heatmaps, Report};
use nbsplan::cluster::apply_clustering;
use nbsplan::instance::{instance_to_json, thin_to_units};
use nbsplan::milp::build_model;
use nbsplan::solver::mps::write_mps;
use nbsplan::solver::{
    decision_units, solve_external, solve_oracle, Backend, SolveConfig, SolveResult, SolveStatus,
};
use nbsplan::{default_kernel_set, generate_synthetic, load_instance, Instance, SyntheticConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, EXIT_SOLVE};
use crate::{
    parse_size, BackendArg, BenchArgs, BuildArgs, ClusterArgs, Command, GenArgs, ReportArgs,
    SolveArgs, SolverArgs, SynthArgs, ValidateArgs,
};

type Result<T> = std::result::Result<T, CliError>;

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes to `path`, or prints when there is none.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(command: Command) -> Result<i32> {
    match command {
        Command::Gen(a) => gen(a),
        Command::Validate(a) => validate(a),
        Command::Kernels => kernels(),
        Command::Cluster(a) => cluster(a),
        Command::Build(a) => build(a),
        Command::Solve(a) => solve(a),
        Command::Report(a) => report(a),
        Command::Bench(a) => bench(a),
    }
}

fn synthesize(a: &SynthArgs) -> Result<Instance> {
    let cfg = SyntheticConfig {
        seed: a.seed,
        dims: a.size,
        nbs_count: a.nbs,
        measure_count: a.measures,
        forbidden_fraction: a.forbidden,
        pre_existing_fraction: a.pre_existing,
    };
    let mut inst = generate_synthetic(&cfg)?;
    if let Some(cap) = a.max_units {
        thin_to_units(&mut inst, cap, a.seed);
    }
    Ok(inst)
}

fn gen(a: GenArgs) -> Result<i32> {
    let inst = synthesize(&a.synth)?;
    emit(a.out.as_deref(), &instance_to_json(&inst))?;
    Ok(0)
}

fn summary(inst: &Instance) -> serde_json::Value {
    json!({
        "width": inst.dims.width,
        "height": inst.dims.height,
        "nbs": inst.nbs.iter().map(|n| &n.id).collect::<Vec<_>>(),
        "measures": inst.measures.iter().map(|m| &m.id).collect::<Vec<_>>(),
        "budget": inst.budget,
        "clusters": inst.cluster_count(),
        "decision_units": decision_units(inst).count(),
    })
}

fn validate(a: ValidateArgs) -> Result<i32> {
    let inst = load_instance(&a.instance)?;
    let mut out = summary(&inst);
    out["valid"] = json!(true);
    print!("{}", pretty(&out));
    Ok(0)
}

fn kernels() -> Result<i32> {
    let set = default_kernel_set();
    let entry = |nbs: &str, target: &str, k: &nbsplan::RealKernel| {
        json!({
            "nbs": nbs,
            "target": target,
            "size": [k.rows(), k.cols()],
            "center": k.center(),
            "edge": k.edge_values().first().copied().unwrap_or(k.center()),
            "rows": k.entries().to_rows(),
        })
    };
    let mut out: Vec<serde_json::Value> = set
        .measure
        .iter()
        .map(|((measure, nbs), k)| entry(nbs, measure, k))
        .collect();
    out.extend(
        set.fairness
            .iter()
            .map(|(nbs, k)| entry(nbs, "fairness", k)),
    );
    print!("{}", pretty(&out));
    Ok(0)
}

fn cluster(a: ClusterArgs) -> Result<i32> {
    if a.min == 0 || a.min > a.max {
        return Err(CliError::Usage(format!(
            "cluster bounds must satisfy 1 <= min <= max, got {}..{}",
            a.min, a.max
        )));
    }
    let mut inst = load_instance(&a.instance)?;
    let types = a
        .nbs
        .iter()
        .map(|id| {
            inst.nbs_index(id)
                .ok_or_else(|| CliError::Usage(format!("instance has no nbs `{id}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    apply_clustering(&mut inst, &types, a.min, a.max);
    inst.validate()
        .map_err(nbsplan::error::InstanceError::from)?;
    emit(a.out.as_deref(), &instance_to_json(&inst))?;
    if a.out.is_some() {
        let counts: serde_json::Map<String, serde_json::Value> = types
            .iter()
            .map(|&t| {
                let p = inst.cluster_partition(t).expect("just clustered");
                (
                    inst.nbs[t].id.clone(),
                    json!({"clusters": p.clusters.len(), "clustered_cells": p.clustered_cells()}),
                )
            })
            .collect();
        print!("{}", pretty(&counts));
    }
    Ok(0)
}

fn build(a: BuildArgs) -> Result<i32> {
    let inst = load_instance(&a.instance)?;
    let model = build_model(&inst)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let file = fs::File::create(&a.out).map_err(|e| CliError::io(&a.out, e))?;
    write_mps(&model, file).map_err(|e| CliError::io(&a.out, e))?;
    print!(
        "{}",
        pretty(&json!({
            "columns": model.num_variables(),
            "rows": model.num_constraints(),
            "nonzeros": model.num_nonzeros(),
            "objective_constant": model.objective_constant,
        }))
    );
    Ok(0)
}

fn solve_config(a: &SolverArgs) -> SolveConfig {
    SolveConfig {
        backend: match a.backend {
            BackendArg::Oracle => Backend::Oracle,
            BackendArg::External => Backend::External,
        },
        time_limit: a.timelimit,
        gap: a.gap,
        solver_command: a.solver_cmd.clone(),
        max_units: a.oracle_cap,
    }
}

fn solve_instance(inst: &Instance, cfg: &SolveConfig) -> Result<SolveResult> {
    cfg.validate()?;
    Ok(match cfg.backend {
        Backend::Oracle => solve_oracle(inst, cfg)?,
        Backend::External => solve_external(inst, &build_model(inst)?, cfg)?,
    })
}

fn status_exit(r: &SolveResult) -> i32 {
    match r.status {
        SolveStatus::Optimal | SolveStatus::FeasibleTimeout => 0,
        SolveStatus::Infeasible | SolveStatus::Error => EXIT_SOLVE,
    }
}

fn solve(a: SolveArgs) -> Result<i32> {
    let inst = load_instance(&a.instance)?;
    let result = solve_instance(&inst, &solve_config(&a.solver))?;
    emit(a.out.as_deref(), &pretty(&result))?;
    if a.out.is_some() {
        print!(
            "{}",
            pretty(&json!({
                "status": result.status,
                "objective": result.objective,
                "wall_time": result.wall_time,
            }))
        );
    }
    Ok(status_exit(&result))
}

fn read_result(path: &Path) -> Result<SolveResult> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write_report(inst: &Instance, result: &SolveResult, dir: &Path) -> Result<Report> {
    let report = build_report(inst, result)?;
    write_file(&dir.join("report.json"), &pretty(&report))?;
    export_heatmaps(&report, &dir.join("heatmaps"))?;
    Ok(report)
}

fn report(a: ReportArgs) -> Result<i32> {
    let inst = load_instance(&a.instance)?;
    let result = read_result(&a.result)?;
    let r = write_report(&inst, &result, &a.out_dir)?;
    let measures: Vec<_> = r
        .measures
        .iter()
        .map(|m| json!({"id": m.id, "peak_reduction_pct": m.peak_reduction_pct, "average_reduction_pct": m.average_reduction_pct}))
        .collect();
    print!(
        "{}",
        pretty(&json!({
            "objective": r.objective,
            "budget_pct": r.budget_pct,
            "gini_initial": r.gini_initial,
            "gini_final": r.gini_final,
            "measures": measures,
        }))
    );
    Ok(0)
}

struct BenchTask {
    group: String,
    dir: PathBuf,
    synth: SynthArgs,
}

fn bench_one(task: &BenchTask, cluster: bool, cfg: &SolveConfig) -> Result<Report> {
    let mut inst = synthesize(&task.synth)?;
    if cluster {
        if let Some(t) = inst.nbs_index(nbsplan::catalog::CLUSTERED_NBS) {
            apply_clustering(
                &mut inst,
                &[t],
                nbsplan::cluster::DEFAULT_MIN_CLUSTER,
                nbsplan::cluster::DEFAULT_MAX_CLUSTER,
            );
        }
    }
    write_file(&task.dir.join("instance.json"), &instance_to_json(&inst))?;
    let result = solve_instance(&inst, cfg)?;
    write_file(&task.dir.join("result.json"), &pretty(&result))?;
    log::info!(
        "{}: {:?} in {:.2} s",
        task.dir.display(),
        result.status,
        result.wall_time
    );
    write_report(&inst, &result, &task.dir)
}

fn bench(a: BenchArgs) -> Result<i32> {
    if a.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let cfg = solve_config(&a.solver);
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut tasks = Vec::new();
    for size in &a.sizes {
        let dims = parse_size(size).map_err(CliError::Usage)?;
        for k in 0..a.count {
            let synth = SynthArgs {
                seed: rng.gen(),
                size: dims,
                nbs: a.nbs,
                measures: a.measures,
                forbidden: a.forbidden,
                pre_existing: a.pre_existing,
                max_units: a.max_units,
            };
            tasks.push(BenchTask {
                group: size.clone(),
                dir: a.out_dir.join(size).join(format!("{k:03}")),
                synth,
            });
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("could not start {} workers: {e}", a.jobs)))?;
    let reports: Vec<Report> = pool.install(|| {
        tasks
            .par_iter()
            .map(|t| bench_one(t, a.cluster, &cfg))
            .collect::<Result<_>>()
    })?;
    let stats = batch_stats(tasks.iter().map(|t| t.group.as_str()).zip(&reports));
    let text = pretty(&stats);
    write_file(&a.out_dir.join("stats.json"), &text)?;
    print!("{text}");
    Ok(0)
}
