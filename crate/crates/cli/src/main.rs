mod commands;
mod config;
mod error;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use nbsplan::catalog::size_class;
use nbsplan::grid::GridDims;

use error::CliError;

/// Place nature-based solutions on urban grids by mixed-integer programming.
#[derive(Debug, Parser)]
#[command(name = "nbsplan", version, args_override_self = true)]
pub struct Cli {
    /// TOML file whose `[<command>]` table supplies default flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Log more (repeat for debug output).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic instance.
    #[command(args_override_self = true)]
    Gen(GenArgs),
    /// Check an instance file and summarize it.
    #[command(args_override_self = true)]
    Validate(ValidateArgs),
    /// Print the default kernel set as JSON.
    #[command(args_override_self = true)]
    Kernels,
    /// Attach all-or-nothing cluster partitions to an instance.
    #[command(args_override_self = true)]
    Cluster(ClusterArgs),
    /// Build the MILP and write it as free MPS.
    #[command(args_override_self = true)]
    Build(BuildArgs),
    /// Solve an instance and write the result JSON.
    #[command(args_override_self = true)]
    Solve(SolveArgs),
    /// Produce the report JSON and heatmaps for a solved instance.
    #[command(args_override_self = true)]
    Report(ReportArgs),
    /// Generate, solve and report a seeded suite, then summarize it.
    #[command(args_override_self = true)]
    Bench(BenchArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Gen(_) => "gen",
            Self::Validate(_) => "validate",
            Self::Kernels => "kernels",
            Self::Cluster(_) => "cluster",
            Self::Build(_) => "build",
            Self::Solve(_) => "solve",
            Self::Report(_) => "report",
            Self::Bench(_) => "bench",
        }
    }
}

/// Grid size: a class `xs`, `s`, `m`, `l` (50, 100, 200, 300 cells a side)
/// or explicit `WxH`.
pub fn parse_size(s: &str) -> Result<GridDims, String> {
    if let Some(side) = size_class(s) {
        return Ok(GridDims::new(side, side));
    }
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected xs|s|m|l or WxH, got `{s}`"))?;
    let parse = |v: &str| {
        v.parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("bad grid side `{v}`"))
    };
    Ok(GridDims::new(parse(w)?, parse(h)?))
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "xs", value_parser = parse_size)]
    pub size: GridDims,
    /// Number of NBS types drawn from the catalog.
    #[arg(long, default_value_t = 4)]
    pub nbs: usize,
    /// Number of measures drawn from the catalog.
    #[arg(long, default_value_t = 4)]
    pub measures: usize,
    /// Share of cells forbidden for every type.
    #[arg(long, default_value_t = 0.4)]
    pub forbidden: f64,
    /// Share of cells hosting a pre-existing installation.
    #[arg(long, default_value_t = 0.05)]
    pub pre_existing: f64,
    /// Forbid extra cells until the oracle faces at most this many units.
    #[arg(long)]
    pub max_units: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub synth: SynthArgs,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub instance: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = nbsplan::cluster::DEFAULT_MIN_CLUSTER)]
    pub min: usize,
    #[arg(long, default_value_t = nbsplan::cluster::DEFAULT_MAX_CLUSTER)]
    pub max: usize,
    /// Comma-separated NBS ids to cluster.
    #[arg(long, default_value = "UP", value_delimiter = ',')]
    pub nbs: Vec<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    pub instance: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Oracle,
    External,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = BackendArg::Oracle)]
    pub backend: BackendArg,
    /// Wall-clock limit in seconds.
    #[arg(long, default_value_t = nbsplan::solver::DEFAULT_TIME_LIMIT)]
    pub timelimit: f64,
    /// Relative optimality gap passed to the external solver.
    #[arg(long, default_value_t = 1e-9)]
    pub gap: f64,
    /// Command template with {model}, {solution}, {timelimit} and {gap}.
    #[arg(long)]
    pub solver_cmd: Option<String>,
    /// Decision-unit cap of the oracle.
    #[arg(long = "oracle-cap", default_value_t = nbsplan::solver::DEFAULT_MAX_UNITS)]
    pub oracle_cap: usize,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Result file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub instance: PathBuf,
    pub result: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Master seed; every instance seed is drawn from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Instances per size.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Comma-separated sizes (xs|s|m|l|WxH).
    #[arg(long, default_value = "xs", value_delimiter = ',')]
    pub sizes: Vec<String>,
    #[arg(long, default_value_t = 4)]
    pub nbs: usize,
    #[arg(long, default_value_t = 4)]
    pub measures: usize,
    #[arg(long, default_value_t = 0.4)]
    pub forbidden: f64,
    #[arg(long, default_value_t = 0.05)]
    pub pre_existing: f64,
    #[arg(long)]
    pub max_units: Option<usize>,
    /// Cluster urban parks with the default size bounds.
    #[arg(long)]
    pub cluster: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Instances solved concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn parse(argv: Vec<OsString>) -> Result<Cli, clap::Error> {
    let cli = Cli::try_parse_from(&argv)?;
    let Some(path) = cli.config.clone() else {
        return Ok(cli);
    };
    let extra = match config::flags_for(&path, cli.command.name()) {
        Ok(extra) => extra,
        Err(e) => {
            return Err(Cli::command().error(clap::error::ErrorKind::InvalidValue, e.to_string()))
        }
    };
    let argv = config::inject(&argv, cli.command.name(), extra);
    let mut matches = Cli::command().try_get_matches_from(argv)?;
    Cli::from_arg_matches_mut(&mut matches)
}

fn main() -> ExitCode {
    let cli = match parse(std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            if e.use_stderr() {
                let err = CliError::Usage(e.kind().to_string());
                eprintln!("{}", err.to_json_line());
            }
            return ExitCode::from(code as u8);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
