use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use wait_timeout::ChildExt;

use super::mps::write_mps;
use super::{Backend, SolveConfig, SolveResult, SolveStatus};
use crate::engine::Placement;
use crate::error::SolveError;
use crate::instance::Instance;
use crate::milp::{check_placement, evaluate_with, objective_normalizers, MilpModel, VarKind};

/// Environment variable holding a solver command template.
pub const SOLVER_ENV: &str = "NBS_SOLVER_CMD";

const CBC_ARGS: &str = "{model} sec {timelimit} ratio {gap} integerT 1e-9 solve solu {solution}";
/// Largest distance from 0 or 1 accepted for an integer column.
const INTEGRALITY_TOL: f64 = 1e-4;
/// Relative tolerance between the solver's objective and the re-evaluation.
const OBJECTIVE_TOL: f64 = 1e-6;

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

fn cbc_template(binary: &Path) -> String {
    format!("{} {CBC_ARGS}", quote(&binary.to_string_lossy()))
}

fn find_on_path(program: &str) -> Option<PathBuf> {
    std::env::split_paths(&std::env::var_os("PATH")?)
        .map(|dir| dir.join(program))
        .find(|p| p.is_file())
}

/// CBC bundled with the PuLP Python package, if installed.
fn find_pulp_cbc() -> Option<PathBuf> {
    let out = Command::new("python3")
        .args(["-c", "import pulp; print(pulp.apis.PULP_CBC_CMD().path)"])
        .stderr(Stdio::null())
        .output()
        .ok()?;
    let path = PathBuf::from(String::from_utf8(out.stdout).ok()?.trim());
    (out.status.success() && path.is_file()).then_some(path)
}

/// Command template from [`SOLVER_ENV`], else a CBC binary on `PATH`, else
/// the CBC binary shipped with PuLP.
pub fn default_solver_command() -> Option<String> {
    if let Ok(cmd) = std::env::var(SOLVER_ENV) {
        if !cmd.trim().is_empty() {
            return Some(cmd);
        }
    }
    find_on_path("cbc")
        .or_else(find_pulp_cbc)
        .map(|p| cbc_template(&p))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExternalStatus {
    Optimal,
    /// Stopped early on a time or iteration limit.
    Stopped,
    Infeasible,
    Unbounded,
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedSolution {
    pub status: ExternalStatus,
    pub objective: Option<f64>,
    pub values: Vec<(String, f64)>,
}

fn classify(text: &str) -> ExternalStatus {
    let lower = text.trim().to_ascii_lowercase();
    if lower.starts_with("optimal") {
        ExternalStatus::Optimal
    } else if lower.contains("infeasible") {
        ExternalStatus::Infeasible
    } else if lower.contains("unbounded") {
        ExternalStatus::Unbounded
    } else if lower.starts_with("stopped")
        || lower.contains("timeout")
        || lower.starts_with("feasible")
    {
        ExternalStatus::Stopped
    } else {
        ExternalStatus::Unknown
    }
}

/// Parses a CBC solution file (a status line followed by
/// `index name value reduced-cost` rows) or a plain `name value` listing
/// with optional `status <word>` and `objective <value>` lines. Columns not
/// listed are zero.
pub fn parse_solution(text: &str) -> Result<ParsedSolution, SolveError> {
    let mut status = ExternalStatus::Unknown;
    let mut objective = None;
    let mut values = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if k == 0 || values.is_empty() {
            if let Some((head, tail)) = trimmed.split_once(" - objective value") {
                status = classify(head);
                objective = tail.trim().parse().ok();
                continue;
            }
        }
        let fields: Vec<&str> = trimmed
            .trim_start_matches("**")
            .split_whitespace()
            .collect();
        let bad = || SolveError::Parse(format!("line {}: {line:?}", k + 1));
        match fields[..] {
            ["status", word] => status = classify(word),
            ["objective", v] => objective = Some(v.parse().map_err(|_| bad())?),
            [name, v] => values.push((name.to_string(), v.parse().map_err(|_| bad())?)),
            [index, name, v, ..] if index.parse::<usize>().is_ok() => {
                values.push((name.to_string(), v.parse().map_err(|_| bad())?))
            }
            _ => return Err(bad()),
        }
    }
    Ok(ParsedSolution {
        status,
        objective,
        values,
    })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SolveError + '_ {
    move |source| SolveError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn tail(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap_or_default();
    let lines: Vec<&str> = text.lines().collect();
    lines[lines.len().saturating_sub(5)..].join(" | ")
}

/// Column values in model order; names the model does not know are logged
/// and ignored.
fn raw_point(model: &MilpModel, values: &[(String, f64)]) -> Vec<f64> {
    let mut point = vec![0.0; model.num_variables()];
    for (name, v) in values {
        match VarKind::parse(name).and_then(|k| model.index_of(k)) {
            Some(c) => point[c] = *v,
            None => log::warn!("solution names unknown column {name}"),
        }
    }
    point
}

fn placement_from(inst: &Instance, model: &MilpModel, point: &[f64]) -> Result<Placement, String> {
    let mut p = Placement::empty(inst.dims, inst.nbs.len());
    for t in 0..inst.nbs.len() {
        for c in inst.dims.cells() {
            let idx = model
                .index_of(VarKind::X { t, i: c.i, j: c.j })
                .expect("x column");
            let v = point[idx];
            if (v - v.round()).abs() > INTEGRALITY_TOL
                || !(-INTEGRALITY_TOL..=1.0 + INTEGRALITY_TOL).contains(&v)
            {
                return Err(format!("x_t{t}_i{}_j{} = {v} is not binary", c.i, c.j));
            }
            p.set(t, c, v.round() == 1.0);
        }
    }
    let violations = check_placement(inst, &p);
    if let Some(v) = violations.first() {
        return Err(format!(
            "{} violated constraint(s), first: {v}",
            violations.len()
        ));
    }
    Ok(p)
}

/// Solves `model` (built from `inst`) with an external solver.
///
/// The model is written as MPS to a temporary directory and the command
/// template is run through `sh -c`. The returned placement is rebuilt from
/// the rounded `x` columns, checked against every placement rule and
/// re-evaluated with the kernel engine. A solver that exceeds the time
/// limit is killed and the do-nothing placement is returned with status
/// [`SolveStatus::FeasibleTimeout`].
pub fn solve_external(
    inst: &Instance,
    model: &MilpModel,
    config: &SolveConfig,
) -> Result<SolveResult, SolveError> {
    config.validate()?;
    let start = Instant::now();
    let template = config
        .solver_command
        .clone()
        .or_else(default_solver_command)
        .ok_or_else(|| {
            SolveError::SolverMissing(format!(
                "no command configured, {SOLVER_ENV} unset and no cbc found"
            ))
        })?;
    let dir = tempfile::tempdir().map_err(io_err(Path::new("<tempdir>")))?;
    let model_path = dir.path().join("model.mps");
    let solution_path = dir.path().join("model.sol");
    let log_path = dir.path().join("solver.log");
    write_mps(
        model,
        File::create(&model_path).map_err(io_err(&model_path))?,
    )
    .map_err(io_err(&model_path))?;

    let command = template
        .replace("{model}", &quote(&model_path.to_string_lossy()))
        .replace("{solution}", &quote(&solution_path.to_string_lossy()))
        .replace("{timelimit}", &format!("{}", config.time_limit))
        .replace("{gap}", &format!("{}", config.gap));
    log::info!("running solver: {command}");
    let log_file = File::create(&log_path).map_err(io_err(&log_path))?;
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .stdin(Stdio::null())
        .stdout(log_file.try_clone().map_err(io_err(&log_path))?)
        .stderr(log_file)
        .spawn()
        .map_err(|e| SolveError::SolverFailed(format!("could not start `{command}`: {e}")))?;
    let grace = (0.05 * config.time_limit).clamp(2.0, 30.0);
    let limit = Duration::from_secs_f64(config.time_limit + grace);
    let exit = child
        .wait_timeout(limit)
        .map_err(|e| SolveError::SolverFailed(e.to_string()))?;

    let norm = objective_normalizers(inst);
    let fallback = |note: String| {
        let placement = Placement::do_nothing(inst);
        let evaluation = evaluate_with(inst, &placement, &norm);
        SolveResult {
            status: SolveStatus::FeasibleTimeout,
            backend: Backend::External,
            objective: Some(evaluation.objective),
            placement: Some(placement),
            bound: None,
            wall_time: start.elapsed().as_secs_f64(),
            evaluation: Some(evaluation),
            raw_point: None,
            note: Some(note),
        }
    };

    let Some(exit) = exit else {
        let _ = child.kill();
        let _ = child.wait();
        log::warn!(
            "solver exceeded {:.1} s and was killed",
            limit.as_secs_f64()
        );
        return Ok(fallback(format!(
            "solver killed after {:.1} s; returning the do-nothing placement",
            limit.as_secs_f64()
        )));
    };
    if !solution_path.is_file() {
        return Err(SolveError::SolverFailed(format!(
            "{exit}, no solution file written; log: {}",
            tail(&log_path)
        )));
    }
    let text = fs::read_to_string(&solution_path).map_err(io_err(&solution_path))?;
    let parsed = parse_solution(&text)?;
    match parsed.status {
        ExternalStatus::Infeasible => {
            return Ok(SolveResult {
                status: SolveStatus::Infeasible,
                backend: Backend::External,
                placement: None,
                objective: None,
                bound: None,
                wall_time: start.elapsed().as_secs_f64(),
                evaluation: None,
                raw_point: None,
                note: Some("solver reported the model infeasible".to_string()),
            })
        }
        ExternalStatus::Unbounded | ExternalStatus::Unknown => {
            return Err(SolveError::SolverFailed(format!(
                "unexpected solver status {:?}; log: {}",
                parsed.status,
                tail(&log_path)
            )))
        }
        ExternalStatus::Optimal | ExternalStatus::Stopped => {}
    }

    let point = raw_point(model, &parsed.values);
    let placement = match placement_from(inst, model, &point) {
        Ok(p) => p,
        Err(why) if parsed.status == ExternalStatus::Stopped => {
            return Ok(fallback(format!(
                "solver stopped without a usable incumbent ({why})"
            )))
        }
        Err(why) => return Err(SolveError::Verification(why)),
    };
    let evaluation = evaluate_with(inst, &placement, &norm);
    let status = if parsed.status == ExternalStatus::Optimal {
        let reported = model.objective_value(&point)?;
        if (reported - evaluation.objective).abs()
            > OBJECTIVE_TOL * evaluation.objective.abs().max(1.0)
        {
            return Err(SolveError::Verification(format!(
                "solver objective {reported} differs from re-evaluated {}",
                evaluation.objective
            )));
        }
        SolveStatus::Optimal
    } else {
        SolveStatus::FeasibleTimeout
    };
    Ok(SolveResult {
        status,
        backend: Backend::External,
        objective: Some(evaluation.objective),
        bound: (status == SolveStatus::Optimal).then_some(evaluation.objective),
        placement: Some(placement),
        wall_time: start.elapsed().as_secs_f64(),
        evaluation: Some(evaluation),
        raw_point: Some(point),
        note: None,
    })
}
