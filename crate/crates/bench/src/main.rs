use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hasp_bench::scenario::load_queries;
use hasp_bench::suite::{run_suite, SuiteConfig};
use hasp_bench::{run_trial, RunStats, Scenario};
use hasp_core::geometry::Environment;
use hasp_core::planners::{PlannerBudget, PlannerSettings, PLANNER_NAMES};
use hasp_core::skeleton::AnnotatedSkeleton;
use hasp_core::Configuration;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "hasp", version, about = "Run roadmap planners on planar scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a query list with one planner and write the run statistics.
    Plan(PlanArgs),
    /// Run a benchmark suite and write results.csv and summary.json.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    env: PathBuf,
    /// Precomputed skeleton; built from the environment when absent.
    #[arg(long)]
    skeleton: Option<PathBuf>,
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PLANNER_NAMES))]
    planner: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON list of [start, goal] configuration pairs.
    #[arg(long)]
    queries: PathBuf,
    /// Sampling attempts for the initial roadmap.
    #[arg(long, default_value_t = PlannerBudget::default().max_sample_attempts)]
    budget: usize,
    /// Per-query time limit in seconds.
    #[arg(long, default_value_t = PlannerBudget::default().time_limit_secs)]
    timeout: f64,
    /// Edge-check resolution; the environment default when absent.
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct PlanOutput {
    stats: RunStats,
    /// Configurations along each solved query's path.
    paths: Vec<Option<Vec<Configuration>>>,
}

fn plan(args: &PlanArgs) -> Result<(), String> {
    let budget = PlannerBudget {
        max_sample_attempts: args.budget,
        time_limit_secs: args.timeout,
        ..PlannerBudget::default()
    };
    let (env, queries, out) = (&args.env, &args.queries, &args.out);
    let environment = Environment::load(env).map_err(|e| format!("{}: {e}", env.display()))?;
    let queries = load_queries(queries).map_err(|e| e.to_string())?;
    let name = env
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut sc = Scenario::new(&name, environment, queries, budget, args.resolution);
    if let Some(path) = &args.skeleton {
        let sk = AnnotatedSkeleton::load(path).map_err(|e| format!("{}: {e}", path.display()))?;
        sc = sc.with_skeleton(sk);
    }
    sc.validate().map_err(|e| e.to_string())?;
    let outcome = run_trial(&sc, &args.planner, args.seed, &PlannerSettings::default()).map_err(|e| e.to_string())?;
    let paths = outcome
        .paths
        .iter()
        .map(|p| {
            p.as_ref()
                .map(|p| p.nodes.iter().map(|n| outcome.roadmap.node(*n).config).collect())
        })
        .collect();
    let text = serde_json::to_string_pretty(&PlanOutput {
        stats: outcome.stats,
        paths,
    })
    .expect("run output serialises");
    std::fs::write(out, text).map_err(|e| format!("{}: {e}", out.display()))
}

fn bench(config: &Path, out: &Path) -> Result<(), String> {
    let cfg = SuiteConfig::load(config).map_err(|e| e.to_string())?;
    let base = config.parent().unwrap_or(Path::new("."));
    let result = run_suite(&cfg, base).map_err(|e| e.to_string())?;
    result.write(out).map_err(|e| e.to_string())?;
    let solved: usize = result.cells.iter().map(|c| c.solved).sum();
    let total: usize = result.cells.iter().map(|c| c.queries).sum();
    eprintln!("{} rows, {solved}/{total} queries solved", result.rows.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan(args) => plan(args),
        Command::Bench { config, out } => bench(config, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
