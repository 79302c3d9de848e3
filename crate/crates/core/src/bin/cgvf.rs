use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use cgvf_core::demo::singularity_demo;
use cgvf_core::output::{execute, RunReport};
use cgvf_core::scenario::{load_scenario, Overrides, Scenario};
use cgvf_core::Error;

/// Multi-robot surface navigation with coordinated guiding vector fields.
#[derive(Parser)]
#[command(name = "cgvf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Broadcast,
    Consensus,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenario files and write CSVs, plots and a manifest.
    Simulate {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        /// Output directory (one subdirectory per scenario for batches).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for random initial conditions.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Scenarios of a batch run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Load and validate a scenario, printing it with all defaults filled in.
    Validate { scenario: PathBuf },
    /// Locate singular points of the original field on the unit sphere and
    /// sample the lifted field on the torus.
    DemoSingularity {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

const EXIT_INVALID: u8 = 1;
const EXIT_ABORTED: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { scenario } => match load_scenario(&scenario) {
            Ok(s) => {
                print!("{}", s.to_toml());
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::DemoSingularity { samples, seed } => {
            let report = singularity_demo(samples, seed);
            println!(
                "original field on the unit sphere, m = (0, 0, 1): {} sampled points",
                report.sphere_samples
            );
            for (p, n) in &report.singular_points {
                println!("  singular point ({}, {}, {})  |chi| = {n:e}", p[0], p[1], p[2]);
            }
            println!(
                "lifted field on torus(6, 2): {} samples, min |chi| = {} (bound {})",
                report.lifted_samples, report.lifted_min_norm, report.lifted_bound
            );
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                println!("demo check FAILED");
                ExitCode::from(EXIT_ABORTED)
            }
        }
        Command::Simulate {
            scenarios,
            out,
            seed,
            duration,
            dt,
            mode,
            jobs,
        } => {
            let overrides = Overrides {
                seed,
                duration,
                dt,
                mode: mode.map(|m| match m {
                    Mode::Broadcast => "broadcast".to_string(),
                    Mode::Consensus => "consensus".to_string(),
                }),
            };
            simulate(&scenarios, out, &overrides, jobs)
        }
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::SeparationViolation { .. } => ExitCode::from(EXIT_ABORTED),
        _ => ExitCode::from(EXIT_INVALID),
    }
}

fn simulate(paths: &[PathBuf], out: Option<PathBuf>, overrides: &Overrides, jobs: usize) -> ExitCode {
    let mut runs: Vec<(Scenario, PathBuf)> = Vec::new();
    for path in paths {
        let mut scenario = match load_scenario(path) {
            Ok(s) => s,
            Err(e) => return fail(&e),
        };
        if let Err(e) = scenario.apply_overrides(overrides) {
            return fail(&e);
        }
        let dir = match (&out, paths.len()) {
            (Some(o), 1) => o.clone(),
            (Some(o), _) => o.join(&scenario.name),
            (None, _) => scenario.output.dir.clone(),
        };
        if runs.iter().any(|(_, d)| *d == dir) {
            eprintln!("error: two scenarios would write to {}", dir.display());
            return ExitCode::from(EXIT_INVALID);
        }
        print_header(&scenario, &dir);
        runs.push((scenario, dir));
    }

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let results: Vec<_> = pool.install(|| {
        runs.par_iter()
            .map(|(scenario, dir)| execute(scenario, dir))
            .collect()
    });

    let mut code = ExitCode::SUCCESS;
    for ((scenario, _), result) in runs.iter().zip(results) {
        match result {
            Ok(report) => {
                if !summarize(scenario, &report) {
                    code = ExitCode::from(EXIT_ABORTED);
                }
            }
            Err(e) => code = fail(&e),
        }
    }
    code
}

fn print_header(s: &Scenario, dir: &std::path::Path) {
    println!("[{}] surface={} robots={} R={} r={}", s.name, s.surface, s.swarm.robots, s.swarm.sensing_radius, s.swarm.safe_radius);
    println!(
        "[{}] estimator={} duration={} dt={} record_every={} seed={} out={}",
        s.name,
        match s.estimator {
            cgvf_core::scenario::EstimatorSpec::Broadcast => "broadcast",
            cgvf_core::scenario::EstimatorSpec::Consensus { .. } => "consensus",
        },
        s.run.duration,
        s.run.dt,
        s.run.record_every,
        s.seed().map_or("none".to_string(), |v| v.to_string()),
        dir.display()
    );
}

/// Prints the final metrics; returns false if the run stopped early.
fn summarize(s: &Scenario, report: &RunReport) -> bool {
    let m = report.last();
    println!(
        "[{}] t={} phi_max={:e} eps_max={:e} mean_offset={:e} min_sep={} maneuver={:e} V={}",
        s.name,
        m.time,
        m.phi_max,
        m.eps_max,
        m.mean_offset,
        m.min_sep.map_or("-".to_string(), |v| v.to_string()),
        m.maneuver_max,
        m.lyapunov
    );
    println!("[{}] wrote {} files to {}", s.name, report.files.len(), report.out_dir.display());
    match &report.output.aborted {
        Some(e) => {
            eprintln!("[{}] run aborted: {e}", s.name);
            false
        }
        None => true,
    }
}
