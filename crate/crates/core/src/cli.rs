//! Run configuration, experiment orchestration and output files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::geometry::Pose2D;
use crate::grid::{Cell, OccupancyGrid};
use crate::mission::MissionConfig;
use crate::path::Segment;
use crate::planner::PlannerConfig;
use crate::sim::{run_scenario, MetricsConfig, MetricsReport, RunMode, ScenarioError, ScenarioSpec, SimResult, SimSettings};
use crate::vehicle::VehicleSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

/// One experiment: a scenario, a planning mode and every tunable parameter.
/// Relative paths are resolved against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario_path: PathBuf,
    pub mode: RunMode,
    pub output_dir: PathBuf,
    /// Recorded for bookkeeping; the simulation has no random component.
    pub seed: u64,
    pub planner: PlannerConfig,
    pub mission: MissionConfig,
    pub vehicle: VehicleSpec,
    pub metrics: MetricsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario_path: PathBuf::from("known_large.scenario"),
            mode: RunMode::Guided,
            output_dir: PathBuf::from("out"),
            seed: 0,
            planner: PlannerConfig::default(),
            mission: MissionConfig::default(),
            vehicle: VehicleSpec::ushift(),
            metrics: MetricsConfig::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("reading {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("writing {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("config {path}: field `{field}`: {message}")]
    Parse {
        path: PathBuf,
        field: String,
        message: String,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Usage(String),
}

impl RunConfig {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            CliError::Parse {
                path: origin.to_owned(),
                field: if field == "." { "<root>".into() } else { field },
                message: e.into_inner().to_string(),
            }
        })
    }

    /// Reads, parses and validates a config, resolving its relative paths.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_owned(),
            source,
        })?;
        let mut cfg = RunConfig::from_json(&text, path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.scenario_path = base.join(&cfg.scenario_path);
        cfg.output_dir = base.join(&cfg.output_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.planner.validate()?;
        self.mission.validate()?;
        self.vehicle.validate()?;
        self.metrics.validate()
    }

    pub fn settings(&self) -> SimSettings {
        SimSettings {
            mission: self.mission.clone(),
            planner: self.planner.clone(),
            vehicle: self.vehicle.clone(),
            metrics: self.metrics.clone(),
            mode: self.mode,
        }
    }
}

/// Formats a number with at most 9 significant digits, dropping trailing
/// zeros.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mant, exp) = sci.split_once('e').expect("exponent format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..9).contains(&exp) {
        let fixed = format!("{:.*}", (8 - exp).max(0) as usize, v);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mant))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const METRICS_COLUMNS: [&str; 13] = [
    "kappa_dot_rms",
    "kappa_dot_max_abs",
    "p_max",
    "p_avg",
    "length",
    "n_planner_calls",
    "t_max",
    "t_cum",
    "t_avg",
    "cumulative_nodes",
    "n_direction_switches",
    "n_rotations",
    "reached",
];

pub const COMPARISON_COLUMNS: [&str; 15] = [
    "mode",
    "n_planner_calls",
    "t_max",
    "t_cum",
    "t_avg",
    "cumulative_nodes",
    "kappa_dot_rms",
    "kappa_dot_max_abs",
    "p_max",
    "p_avg",
    "length",
    "n_direction_switches",
    "n_rotations",
    "reached",
    "config",
];

fn timing(v: f64, no_timing: bool) -> String {
    if no_timing {
        "0".into()
    } else {
        fmt_num(v)
    }
}

fn metrics_row(m: &MetricsReport, no_timing: bool) -> Vec<String> {
    vec![
        fmt_num(m.kappa_dot_rms),
        fmt_num(m.kappa_dot_max_abs),
        fmt_num(m.p_max),
        fmt_num(m.p_avg),
        fmt_num(m.length),
        m.n_planner_calls.to_string(),
        timing(m.t_max, no_timing),
        timing(m.t_cum, no_timing),
        timing(m.t_avg, no_timing),
        m.cumulative_nodes.to_string(),
        m.n_direction_switches.to_string(),
        m.n_rotations.to_string(),
        m.reached.to_string(),
    ]
}

fn comparison_row(mode: RunMode, m: &MetricsReport, config: &Path, no_timing: bool) -> Vec<String> {
    vec![
        mode.name().to_string(),
        m.n_planner_calls.to_string(),
        timing(m.t_max, no_timing),
        timing(m.t_cum, no_timing),
        timing(m.t_avg, no_timing),
        m.cumulative_nodes.to_string(),
        fmt_num(m.kappa_dot_rms),
        fmt_num(m.kappa_dot_max_abs),
        fmt_num(m.p_max),
        fmt_num(m.p_avg),
        fmt_num(m.length),
        m.n_direction_switches.to_string(),
        m.n_rotations.to_string(),
        m.reached.to_string(),
        config.display().to_string(),
    ]
}

fn csv_string<const N: usize>(header: [&str; N], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for row in rows {
        w.write_record(row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

pub fn metrics_csv(m: &MetricsReport, no_timing: bool) -> String {
    csv_string(METRICS_COLUMNS, &[metrics_row(m, no_timing)])
}

pub fn events_log(result: &SimResult, no_timing: bool) -> String {
    let mut s = String::from("step,cause,s_plan,nodes,seconds\n");
    for e in &result.events {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            e.step,
            e.cause,
            fmt_num(e.s_plan),
            e.nodes,
            timing(e.seconds, no_timing)
        );
    }
    s
}

/// Truth map, unknown belief cells, the driven path and its rotations.
pub fn map_svg(truth: &OccupancyGrid, belief: &OccupancyGrid, result: &SimResult, start: &Pose2D, goal: &Pose2D) -> String {
    let (w, h) = (truth.world_width(), truth.world_height());
    let (ox, oy) = truth.origin();
    let scale = 8.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="{} {} {} {}">"#,
        fmt_num(w * scale),
        fmt_num(h * scale),
        fmt_num(ox),
        fmt_num(-(oy + h)),
        fmt_num(w),
        fmt_num(h)
    );
    s.push_str("<g transform=\"scale(1,-1)\">\n");
    let _ = writeln!(
        s,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#ffffff"/>"##,
        fmt_num(ox),
        fmt_num(oy),
        fmt_num(w),
        fmt_num(h)
    );
    let _ = writeln!(s, r##"<path fill="#303030" d="{}"/>"##, cell_runs(truth, Cell::Occupied));
    let _ = writeln!(
        s,
        r##"<path fill="#8090a0" fill-opacity="0.45" d="{}"/>"##,
        cell_runs(belief, Cell::Unknown)
    );
    let points: Vec<String> = result
        .driven
        .poses()
        .iter()
        .map(|p| format!("{},{}", fmt_num(p.x), fmt_num(p.y)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline fill="none" stroke="#1f6fd0" stroke-width="0.3" points="{}"/>"##,
        points.join(" ")
    );
    for seg in &result.driven.segments {
        if let Segment::Rotation(r) = seg {
            let _ = writeln!(
                s,
                r##"<circle cx="{}" cy="{}" r="0.8" fill="none" stroke="#d03020" stroke-width="0.25"/>"##,
                fmt_num(r.x),
                fmt_num(r.y)
            );
        }
    }
    for (p, color) in [(start, "#20a040"), (goal, "#e0a000")] {
        let _ = writeln!(
            s,
            r##"<circle cx="{}" cy="{}" r="0.6" fill="{color}"/>"##,
            fmt_num(p.x),
            fmt_num(p.y)
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}

// horizontal runs of `kind` cells as one path of rectangles
fn cell_runs(grid: &OccupancyGrid, kind: Cell) -> String {
    let res = grid.resolution();
    let (ox, oy) = grid.origin();
    let mut d = String::new();
    for iy in 0..grid.height() {
        let mut ix = 0;
        while ix < grid.width() {
            if grid.get(ix, iy) != kind {
                ix += 1;
                continue;
            }
            let from = ix;
            while ix < grid.width() && grid.get(ix, iy) == kind {
                ix += 1;
            }
            let _ = write!(
                d,
                "M{} {}h{}v{}h-{}z",
                fmt_num(ox + from as f64 * res),
                fmt_num(oy + iy as f64 * res),
                fmt_num((ix - from) as f64 * res),
                fmt_num(res),
                fmt_num((ix - from) as f64 * res)
            );
        }
    }
    d
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_owned(),
        source,
    })
}

/// Writes `path.json`, `metrics.csv`, `events.log` and `map.svg` into `dir`.
pub fn write_outputs(dir: &Path, spec: &ScenarioSpec, result: &SimResult, no_timing: bool) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_owned(),
        source,
    })?;
    let mut json = serde_json::to_string_pretty(&result.driven).expect("paths serialize");
    json.push('\n');
    write_file(&dir.join("path.json"), &json)?;
    write_file(&dir.join("metrics.csv"), &metrics_csv(&result.report, no_timing))?;
    write_file(&dir.join("events.log"), &events_log(result, no_timing))?;
    let svg = map_svg(&spec.truth_map, &result.belief, result, &spec.start, &spec.goal);
    write_file(&dir.join("map.svg"), &svg)
}

/// Loads the scenario of `cfg`, checks it and runs it.
pub fn execute(cfg: &RunConfig) -> Result<(ScenarioSpec, SimResult), CliError> {
    let spec = ScenarioSpec::load(&cfg.scenario_path)?;
    spec.validate(&cfg.vehicle)?;
    let result = run_scenario(&spec, &cfg.settings());
    Ok((spec, result))
}

/// `plan run`: exit 0 when the goal was reached, 2 when not, 1 on bad input.
pub fn cmd_run(config: &Path, no_timing: bool) -> i32 {
    let outcome = RunConfig::load(config).and_then(|cfg| {
        let (spec, result) = execute(&cfg)?;
        write_outputs(&cfg.output_dir, &spec, &result, no_timing)?;
        Ok((cfg, result))
    });
    match outcome {
        Ok((cfg, result)) => {
            let m = &result.report;
            println!(
                "{}: reached={} length={} planner_calls={} nodes={} -> {}",
                cfg.mode.name(),
                m.reached,
                fmt_num(m.length),
                m.n_planner_calls,
                m.cumulative_nodes,
                cfg.output_dir.display()
            );
            if m.reached {
                EXIT_OK
            } else {
                eprintln!("goal not reached: {}", result.failure.as_deref().unwrap_or("step budget exhausted"));
                EXIT_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

/// Worker count from `PLAN_THREADS`, defaulting to the available cores.
pub fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var("PLAN_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Usage(format!("PLAN_THREADS must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// `plan compare`: runs every config (each into its own subdirectory of
/// `out_dir`) and writes `comparison.csv`. Unreached goals still count as
/// completed runs.
pub fn cmd_compare(configs: &[PathBuf], out_dir: &Path, no_timing: bool) -> i32 {
    match compare(configs, out_dir, no_timing) {
        Ok(rows) => {
            for (cfg, m) in rows {
                println!("{}: reached={} nodes={}", cfg.display(), m.reached, m.cumulative_nodes);
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn compare(configs: &[PathBuf], out_dir: &Path, no_timing: bool) -> Result<Vec<(PathBuf, MetricsReport)>, CliError> {
    if configs.len() < 2 {
        return Err(CliError::Usage("compare needs at least two configs".into()));
    }
    let threads = threads_from_env()?;
    let loaded = configs
        .iter()
        .map(|p| RunConfig::load(p))
        .collect::<Result<Vec<_>, _>>()?;
    let specs = loaded
        .iter()
        .map(|cfg| {
            let spec = ScenarioSpec::load(&cfg.scenario_path)?;
            spec.validate(&cfg.vehicle)?;
            Ok(spec)
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let results: Vec<SimResult> = pool.install(|| {
        use rayon::prelude::*;
        loaded
            .par_iter()
            .zip(specs.par_iter())
            .map(|(cfg, spec)| run_scenario(spec, &cfg.settings()))
            .collect()
    });

    let mut rows = Vec::new();
    let mut out = Vec::new();
    for (i, ((path, cfg), (spec, result))) in configs.iter().zip(&loaded).zip(specs.iter().zip(&results)).enumerate() {
        let stem = path.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
        write_outputs(&out_dir.join(format!("{i:02}_{stem}")), spec, result, no_timing)?;
        rows.push(comparison_row(cfg.mode, &result.report, path, no_timing));
        out.push((path.clone(), result.report.clone()));
    }
    write_file(&out_dir.join("comparison.csv"), &csv_string(COMPARISON_COLUMNS, &rows))?;
    Ok(out)
}

pub fn defaults_json() -> String {
    serde_json::to_string_pretty(&RunConfig::default()).expect("defaults serialize")
}
