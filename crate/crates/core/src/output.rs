//! Run artifacts: trajectory and metrics CSVs, the run manifest and SVG
//! plots.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::engine::{run_simulation, MetricsSnapshot, RunOutput, SimulationState};
use crate::error::{Error, Result};
use crate::plot::LineChart;
use crate::scenario::Scenario;

pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const METRICS_CSV: &str = "metrics.csv";
pub const EPS_CSV: &str = "eps.csv";
pub const MANIFEST: &str = "manifest.toml";

/// Version string recorded in manifests.
pub fn version_string() -> String {
    match option_env!("CGVF_GIT_DESCRIBE") {
        Some(git) if !git.is_empty() => format!("{} ({git})", env!("CARGO_PKG_VERSION")),
        _ => env!("CARGO_PKG_VERSION").to_string(),
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_trajectory_csv<W: Write>(out: W, trajectory: &[SimulationState]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let dim = trajectory
        .first()
        .and_then(|s| s.robots.first())
        .map_or(0, |r| r.x.len());
    let mut header = vec!["time".to_string(), "robot_id".to_string()];
    header.extend((1..=dim).map(|j| format!("x_{j}")));
    header.extend(
        ["omega_1", "omega_2", "omega_hat_1", "omega_hat_2"]
            .iter()
            .map(|s| s.to_string()),
    );
    w.write_record(&header)?;
    for state in trajectory {
        for (i, r) in state.robots.iter().enumerate() {
            let mut row = vec![state.time.to_string(), i.to_string()];
            row.extend(r.x.iter().map(f64::to_string));
            row.extend(r.omega.iter().chain(&r.omega_hat).map(f64::to_string));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_metrics_csv<W: Write>(out: W, snapshots: &[MetricsSnapshot]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "time",
        "phi_max",
        "mean_offset",
        "min_sep",
        "max_neighbor_sep",
        "lyapunov",
        "eps_max",
    ])?;
    for m in snapshots {
        w.write_record([
            m.time.to_string(),
            m.phi_max.to_string(),
            m.mean_offset.to_string(),
            opt(m.min_sep),
            opt(m.max_neighbor_sep),
            m.lyapunov.to_string(),
            m.eps_max.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-robot coordination residuals `eps_{i,1}, eps_{i,2}`.
pub fn write_eps_csv<W: Write>(out: W, snapshots: &[MetricsSnapshot]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "robot_id", "eps_1", "eps_2"])?;
    for m in snapshots {
        for (i, e) in m.eps.iter().enumerate() {
            w.write_record([
                m.time.to_string(),
                i.to_string(),
                e[0].to_string(),
                e[1].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Manifest text: a comment header followed by the resolved scenario, which
/// is itself a loadable scenario file.
pub fn manifest_text(scenario: &Scenario) -> String {
    let mut s = String::new();
    s.push_str("# cgvf run manifest\n");
    s.push_str(&format!("# version: {}\n", version_string()));
    match scenario.seed() {
        Some(seed) => s.push_str(&format!("# seed: {seed}\n")),
        None => s.push_str("# seed: none (explicit initial conditions)\n"),
    }
    s.push('\n');
    s.push_str(&scenario.to_toml());
    s
}

pub fn render_plots(snapshots: &[MetricsSnapshot], safe_radius: f64, sensing_radius: f64) -> Vec<(&'static str, String)> {
    let series = |f: &dyn Fn(&MetricsSnapshot) -> Option<f64>| -> Vec<(f64, f64)> {
        snapshots
            .iter()
            .filter_map(|m| f(m).map(|v| (m.time, v)))
            .collect()
    };

    let phi = LineChart::new("Surface-convergence error", "t", "max |phi_ij|")
        .series("phi_max", series(&|m| Some(m.phi_max)))
        .log_y();

    let robots = snapshots.first().map_or(0, |m| m.eps.len());
    let mut eps = LineChart::new("Coordination residuals eps_il", "t", "eps_il");
    for i in 0..robots {
        for l in 0..2 {
            eps = eps.series(
                &format!("eps_{i},{}", l + 1),
                series(&|m| m.eps.get(i).map(|e| e[l])),
            );
        }
    }
    eps.legend = robots <= 3;

    let sep = LineChart::new("Separation of virtual coordinates", "t", "|Omega_i - Omega_k|")
        .series("min over pairs", series(&|m| m.min_sep))
        .series("max over neighbor pairs", series(&|m| m.max_neighbor_sep))
        .guide("r", safe_radius)
        .guide("R", sensing_radius);

    let lyap = LineChart::new("Lyapunov function", "t", "V")
        .series("V", series(&|m| Some(m.lyapunov)))
        .log_y();

    vec![
        ("phi_max.svg", phi.to_svg()),
        ("eps.svg", eps.to_svg()),
        ("separation.svg", sep.to_svg()),
        ("lyapunov.svg", lyap.to_svg()),
    ]
}

/// Result of [`execute`].
#[derive(Debug)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub output: RunOutput,
    pub files: Vec<PathBuf>,
}

impl RunReport {
    pub fn last(&self) -> &MetricsSnapshot {
        self.output
            .snapshots
            .last()
            .expect("every run records the initial state")
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_csv(
    path: &Path,
    f: impl FnOnce(fs::File) -> csv::Result<()>,
) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f(file).map_err(csv_err(path))
}

/// Runs a scenario and writes every artifact into `out_dir`. A run that
/// stops early still writes what it recorded; check
/// `report.output.aborted`.
pub fn execute(scenario: &Scenario, out_dir: &Path) -> Result<RunReport> {
    let prepared = scenario.prepare()?;
    let output = run_simulation(
        &prepared.config,
        &prepared.surface,
        prepared.initial,
        &prepared.settings,
    )?;

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut resolved = scenario.clone();
    resolved.output.dir = out_dir.to_path_buf();

    let mut files = Vec::new();
    let path = out_dir.join(MANIFEST);
    write_file(&path, manifest_text(&resolved))?;
    files.push(path);

    let path = out_dir.join(TRAJECTORY_CSV);
    write_csv(&path, |f| write_trajectory_csv(f, &output.trajectory))?;
    files.push(path);

    let path = out_dir.join(METRICS_CSV);
    write_csv(&path, |f| write_metrics_csv(f, &output.snapshots))?;
    files.push(path);

    let path = out_dir.join(EPS_CSV);
    write_csv(&path, |f| write_eps_csv(f, &output.snapshots))?;
    files.push(path);

    for (name, svg) in render_plots(
        &output.snapshots,
        prepared.config.safe_radius,
        prepared.config.sensing_radius,
    ) {
        let path = out_dir.join(name);
        write_file(&path, svg)?;
        files.push(path);
    }

    Ok(RunReport {
        out_dir: out_dir.to_path_buf(),
        output,
        files,
    })
}
