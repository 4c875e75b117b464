//! Scene-driven command line harness: reads a JSON scene, runs averaging,
//! morphing, distance or diagnostic experiments, and writes meshes and a
//! JSON report.

pub mod commands;
pub mod diagnose;
pub mod error;
pub mod mesh_io;
pub mod report;
pub mod scene;
pub mod selftest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use commands::{Context, Overrides, SelftestArgs};
use error::{exit, CliError};
use report::RunReport;

#[derive(Debug, Parser)]
#[command(name = "manifold-mean", version, about = "Average, morph and diagnose nearby submanifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weighted average of the scene family.
    Average(SceneArgs),
    /// Equal-weight average of a two-member scene.
    Midpoint(SceneArgs),
    /// Recursive midpoints between the two members of a scene.
    Morph(SceneArgs),
    /// C¹ distances between all ordered pairs of members.
    Distance(SceneArgs),
    /// Tube estimates for a single-member scene.
    Diagnose(SceneArgs),
    /// Seeded Grassmannian property suite.
    Selftest(SelftestCli),
}

#[derive(Debug, Args)]
pub struct SceneArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// Newton residual tolerance (overrides the scene).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Morph refinement depth.
    #[arg(long)]
    pub depth: Option<u32>,
    /// Rescale the geometry so that it is bounded by 1 before diagnosing.
    #[arg(long)]
    pub rescale: bool,
}

#[derive(Debug, Args)]
pub struct SelftestCli {
    /// Accepted for uniformity; the suite does not read a scene.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[arg(long, default_value_t = 12)]
    pub n_max: usize,
    #[arg(long, default_value_t = 4)]
    pub k_max: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

fn in_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match threads {
        Some(0) => Err(CliError::Validation { key: "--threads".into(), message: "must be at least 1".into() }),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Validation { key: "--threads".into(), message: e.to_string() })?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Run a parsed command line.
pub fn execute(cli: Cli) -> Result<RunReport, CliError> {
    let (name, a) = match cli.command {
        Command::Selftest(a) => {
            let args = SelftestArgs { n_max: a.n_max, k_max: a.k_max, trials: a.trials, seed: a.seed };
            return in_pool(a.threads, || commands::cmd_selftest(args, &a.out_dir))?;
        }
        Command::Average(a) => ("average", a),
        Command::Midpoint(a) => ("midpoint", a),
        Command::Morph(a) => ("morph", a),
        Command::Distance(a) => ("distance", a),
        Command::Diagnose(a) => ("diagnose", a),
    };
    let scene = scene::parse_scene(&a.scene)?;
    let overrides = Overrides {
        tol: a.tol,
        max_iter: a.max_iter,
        seed: a.seed,
        out_dir: a.out_dir.clone(),
        depth: a.depth,
        rescale: a.rescale,
    };
    let ctx = Context::new(scene, &overrides)?;
    in_pool(a.threads, || match name {
        "average" => commands::cmd_average(&ctx),
        "midpoint" => commands::cmd_midpoint(&ctx),
        "morph" => commands::cmd_morph(&ctx),
        "distance" => commands::cmd_distance(&ctx),
        _ => commands::cmd_diagnose(&ctx),
    })?
}

/// Full program: parse arguments, run, print the human summary to stdout
/// and any structured error to stderr. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::INPUT_ERROR } else { exit::PASS };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(report) => {
            print!("{}", report.summary_text());
            if report.passed {
                exit::PASS
            } else {
                let failed: Vec<&str> = report
                    .contracts
                    .iter()
                    .chain(report.estimates.iter().flat_map(|s| &s.rows))
                    .filter(|r| !r.pass)
                    .map(|r| r.name.as_str())
                    .collect();
                let err = serde_json::json!({
                    "error": "ContractFailure",
                    "message": format!("{} contract(s) failed", failed.len()),
                    "failed": failed,
                    "exit_code": exit::CONTRACT_FAILURE,
                });
                eprintln!("{err}");
                exit::CONTRACT_FAILURE
            }
        }
        Err(e) => {
            println!("error: {e}");
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
