//! Experiment configuration, built-in scenarios, artifact emission and the
//! run comparison used by the `bric` command-line tool.
//!
//! A run named `NAME` writes `NAME.csv`, `NAME.metrics.json` and `NAME.log`
//! into the output directory. The directory is taken from, in order: an
//! explicit override, the [`OUT_DIR_ENV`] environment variable, the config's
//! `[output] dir`, and finally `runs`.

pub mod config;
pub mod emit;
pub mod presets;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub use config::{load_config, ConfigError, ExperimentConfig, Loaded, Scenario};
pub use emit::{EmitError, RunReport};

use crate::sim::{compute_metrics, run_closed_loop, RunError, Trajectory};

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "BRIC_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "runs";

pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const VIOLATION: i32 = 3;
    pub const NUMERIC: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{source_name}: {error}")]
    Config {
        source_name: String,
        error: ConfigError,
    },
    #[error("{0}")]
    Run(RunError),
    #[error(transparent)]
    Emit(#[from] EmitError),
    #[error("{path}: {message}")]
    Read { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => exit::CONFIG,
            CliError::Run(RunError::Violation { .. }) => exit::VIOLATION,
            CliError::Run(RunError::NonFinite { .. }) => exit::NUMERIC,
            CliError::Run(RunError::Invalid(_)) => exit::CONFIG,
            CliError::Read { .. } => exit::CONFIG,
            CliError::Emit(_) => exit::IO,
        }
    }
}

/// Resolves a preset id or a path to a TOML config.
pub fn resolve(scenario: &str) -> Result<Loaded, CliError> {
    if let Some(config) = presets::get(scenario) {
        return Ok(Loaded {
            config,
            notes: vec![],
        });
    }
    let path = Path::new(scenario);
    let text = fs::read_to_string(path).map_err(|e| CliError::Read {
        path: path.to_path_buf(),
        message: if e.kind() == std::io::ErrorKind::NotFound {
            format!(
                "no such preset or file (presets: {})",
                presets::NAMES.join(", ")
            )
        } else {
            e.to_string()
        },
    })?;
    load_config(&text).map_err(|error| CliError::Config {
        source_name: scenario.to_string(),
        error,
    })
}

pub fn output_dir(config: &ExperimentConfig, explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    config
        .output
        .as_ref()
        .map_or_else(|| PathBuf::from(DEFAULT_OUT_DIR), |o| PathBuf::from(&o.dir))
}

/// Files written by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub csv: PathBuf,
    pub metrics: PathBuf,
    pub log: PathBuf,
}

impl Artifacts {
    pub fn in_dir(dir: &Path, name: &str) -> Self {
        Self {
            csv: dir.join(format!("{name}.csv")),
            metrics: dir.join(format!("{name}.metrics.json")),
            log: dir.join(format!("{name}.log")),
        }
    }
}

/// Result of a completed simulation, before anything is written.
pub struct Completed {
    pub trajectory: Trajectory,
    pub report: RunReport,
}

/// Builds and integrates a configuration without touching the filesystem.
pub fn simulate(config: &ExperimentConfig) -> Result<Completed, CliError> {
    let sc = config.build().map_err(|error| CliError::Config {
        source_name: config.name.clone(),
        error,
    })?;
    let trajectory = run_closed_loop(
        sc.plant.as_ref(),
        &sc.law,
        &sc.target,
        &sc.sim,
        &sc.x0,
        &sc.z0,
    )
    .map_err(CliError::Run)?;
    let metrics = compute_metrics(&trajectory, sc.envelope)
        .map_err(|e| CliError::Run(RunError::Invalid(e)))?;
    let clamps = sc.plant.clamp_events();
    let report = RunReport::new(&sc.name, &trajectory, metrics, clamps);
    Ok(Completed { trajectory, report })
}

fn log_header(loaded: &Loaded) -> String {
    let cfg = &loaded.config;
    let mut s = String::new();
    let _ = writeln!(s, "run {}", cfg.name);
    if let Some(d) = &cfg.description {
        let _ = writeln!(s, "# {d}");
    }
    for n in &loaded.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s.push_str("--- config ---\n");
    s.push_str(&cfg.to_toml());
    s.push_str("--- result ---\n");
    s
}

/// Runs a loaded configuration and writes its artifacts into `dir`.
///
/// A funnel violation or numeric failure writes only the log; a config error writes nothing.
pub fn run_loaded(loaded: &Loaded, dir: &Path) -> Result<(Artifacts, Completed), CliError> {
    loaded.config.validate().map_err(|d| CliError::Config {
        source_name: loaded.config.name.clone(),
        error: ConfigError::Invalid(d),
    })?;
    let art = Artifacts::in_dir(dir, &loaded.config.name);
    let mut log = log_header(loaded);
    match simulate(&loaded.config) {
        Ok(done) => {
            emit::write_csv(&done.trajectory, &art.csv)?;
            emit::write_json(&done.report, &art.metrics)?;
            log.push_str("status: completed\n");
            log.push_str(&emit::summary_lines(&done.report));
            emit::write_atomic(&art.log, log.as_bytes())?;
            Ok((art, done))
        }
        Err(CliError::Run(e)) => {
            let status = match &e {
                RunError::Violation { .. } => "funnel violation",
                RunError::NonFinite { .. } => "numeric failure",
                RunError::Invalid(_) => "invalid setup",
            };
            let _ = writeln!(log, "status: {status}\n{e}");
            emit::write_atomic(&art.log, log.as_bytes())?;
            Err(CliError::Run(e))
        }
        Err(other) => Err(other),
    }
}

/// `run <preset|config>`: resolve, simulate and write artifacts.
pub fn run_scenario(
    scenario: &str,
    out_dir: Option<&Path>,
) -> Result<(Artifacts, Completed), CliError> {
    let loaded = resolve(scenario)?;
    let dir = output_dir(&loaded.config, out_dir);
    run_loaded(&loaded, &dir)
}

/// Loads a metrics document from a path, or from `<dir>/<name>.metrics.json`.
pub fn load_report(run: &str, dir: &Path) -> Result<RunReport, CliError> {
    let direct = Path::new(run);
    let path = if direct.is_file() {
        direct.to_path_buf()
    } else {
        dir.join(format!("{run}.metrics.json"))
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::Read {
        path: path.clone(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Read {
        path,
        message: format!("not a metrics document: {e}"),
    })
}

/// Which run does better on each of final error, effort and minimum margin.
pub fn compare_report(a: &RunReport, b: &RunReport) -> String {
    fn line(out: &mut String, what: &str, va: f64, vb: f64, a: &str, b: &str, higher_better: bool) {
        use std::cmp::Ordering::{Equal, Greater, Less};
        let a_first = match va.partial_cmp(&vb) {
            Some(Equal) => {
                let _ = writeln!(out, "{what:<12} {a} = {b} ({va:.6e})");
                return;
            }
            Some(Less) => !higher_better,
            Some(Greater) => higher_better,
            None => {
                let _ = writeln!(out, "{what:<12} {a} ? {b} ({va} vs {vb})");
                return;
            }
        };
        let rel = if higher_better { ">" } else { "<" };
        let ((n1, v1), (n2, v2)) = if a_first {
            ((a, va), (b, vb))
        } else {
            ((b, vb), (a, va))
        };
        let _ = writeln!(out, "{what:<12} {n1} {rel} {n2} ({v1:.6e} vs {v2:.6e})");
    }
    let (ma, mb) = (&a.metrics, &b.metrics);
    let mut out = String::new();
    line(
        &mut out,
        "final_error",
        ma.final_error,
        mb.final_error,
        &a.name,
        &b.name,
        false,
    );
    line(
        &mut out, "effort", ma.effort, mb.effort, &a.name, &b.name, false,
    );
    line(
        &mut out,
        "min_margin",
        ma.min_margin,
        mb.min_margin,
        &a.name,
        &b.name,
        true,
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{ControllerKind, Metrics};

    fn report(name: &str, err: f64, effort: f64, margin: f64) -> RunReport {
        RunReport {
            name: name.into(),
            lambda: 1.0,
            kappa: None,
            metrics: Metrics {
                controller: ControllerKind::Ppc,
                t_end: 20.0,
                final_error: err,
                final_sk_norm: err,
                effort,
                max_u_norm: 1.0,
                min_margin: margin,
                d1_hat_final: 0.0,
                d1_drift: 0.0,
                envelope_ok: None,
            },
            d1_settled: None,
            clamp_events: 0,
        }
    }

    #[test]
    fn comparison_orders_each_metric() {
        let out = compare_report(&report("a", 0.1, 5.0, 0.3), &report("b", 0.2, 4.0, 0.3));
        let lines: Vec<_> = out.lines().collect();
        assert!(lines[0].starts_with("final_error  a < b"), "{out}");
        assert!(lines[1].starts_with("effort       b < a"), "{out}");
        assert!(lines[2].starts_with("min_margin   a = b"), "{out}");
    }

    #[test]
    fn report_json_is_flat_and_roundtrips() {
        let r = report("a", 0.1, 5.0, 0.3);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        let obj = v.as_object().unwrap();
        assert!(obj.values().all(|v| !v.is_object() && !v.is_array()));
        assert!(obj.contains_key("effort"));
        assert_eq!(serde_json::from_value::<RunReport>(v).unwrap(), r);
    }

    #[test]
    fn exit_codes_are_distinct() {
        let v = CliError::Run(RunError::Violation {
            t: 1.0,
            channel: 0,
            value: 1.0,
        });
        let n = CliError::Run(RunError::NonFinite { t: 1.0, what: "x" });
        let c = CliError::Config {
            source_name: "x".into(),
            error: ConfigError::Parse("bad".into()),
        };
        assert_eq!([c.exit_code(), v.exit_code(), n.exit_code()], [2, 3, 4]);
    }
}
