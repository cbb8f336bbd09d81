//! Trajectory CSV, flat metrics JSON and plain-text run logs.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::sim::{Metrics, Trajectory};

#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error("trajectory has no rows; nothing written to {0}")]
    Empty(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EmitError + '_ {
    move |source| EmitError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes through a sibling temporary file so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), EmitError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let res = fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(bytes).and_then(|_| f.sync_all()))
        .and_then(|_| fs::rename(&tmp, path));
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    res.map_err(io_err(path))
}

/// Column names: time, state, `e1`, `s_k`, `zeta`, `chi`, `u`, `d1hat`, `d2hat`, funnel.
pub fn csv_header(traj: &Trajectory) -> Vec<String> {
    let n = traj.dims.n;
    let k = traj.dims.k;
    let block = |prefix: &str| (1..=n).map(|j| format!("{prefix}_{j}")).collect::<Vec<_>>();
    let mut cols = vec!["t".to_string()];
    cols.extend(traj.state_names.iter().cloned());
    cols.extend(block("e1"));
    cols.extend(block(&format!("s{k}")));
    cols.extend(block("zeta"));
    cols.extend(block("chi"));
    cols.extend(block("u"));
    cols.push("d1hat".into());
    cols.extend(block("d2hat"));
    cols.extend(block("phi"));
    cols
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn render_csv(traj: &Trajectory) -> String {
    let mut out = csv_header(traj).join(",");
    out.push('\n');
    for r in &traj.rows {
        let fields = std::iter::once(r.t)
            .chain(r.x.iter().copied())
            .chain(r.e[0].iter().copied())
            .chain(r.s_k().iter().copied())
            .chain(r.zeta.iter().copied())
            .chain(r.chi.iter().copied())
            .chain(r.u.iter().copied())
            .chain(std::iter::once(r.d1_hat))
            .chain(r.d2_hat.iter().copied())
            .chain(r.funnel.iter().copied());
        let mut first = true;
        for v in fields {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&fmt_f64(v));
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(traj: &Trajectory, path: &Path) -> Result<(), EmitError> {
    if traj.rows.is_empty() {
        return Err(EmitError::Empty(path.to_path_buf()));
    }
    write_atomic(path, render_csv(traj).as_bytes())
}

/// Flat metrics document written next to the trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(flatten)]
    pub metrics: Metrics,
    /// Barrier law only: whether `d1_drift <= D1_SETTLED_TOL * (1 + |d1_hat(t_end)|)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d1_settled: Option<bool>,
    /// Times a coupling link length had to be clamped.
    #[serde(default)]
    pub clamp_events: u64,
}

/// Tolerance on `d1_drift` for calling `d1_hat` settled.
pub const D1_SETTLED_TOL: f64 = 1e-3;

impl RunReport {
    pub fn new(name: &str, traj: &Trajectory, metrics: Metrics, clamp_events: u64) -> Self {
        let d1_settled = traj
            .kappa
            .map(|_| metrics.d1_drift <= D1_SETTLED_TOL * (1.0 + metrics.d1_hat_final.abs()));
        Self {
            name: name.to_string(),
            lambda: traj.lambda,
            kappa: traj.kappa,
            metrics,
            d1_settled,
            clamp_events,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn write_json(report: &RunReport, path: &Path) -> Result<(), EmitError> {
    write_atomic(path, report.to_json().as_bytes())
}

/// Human-readable summary lines for the run log.
pub fn summary_lines(report: &RunReport) -> String {
    let m = &report.metrics;
    let mut s = String::new();
    let _ = writeln!(s, "t_end          {}", fmt_f64(m.t_end));
    let _ = writeln!(s, "final_error    {}", fmt_f64(m.final_error));
    let _ = writeln!(s, "final_sk_norm  {}", fmt_f64(m.final_sk_norm));
    let _ = writeln!(s, "effort         {}", fmt_f64(m.effort));
    let _ = writeln!(s, "max_u_norm     {}", fmt_f64(m.max_u_norm));
    let _ = writeln!(s, "min_margin     {}", fmt_f64(m.min_margin));
    let _ = writeln!(s, "d1_hat_final   {}", fmt_f64(m.d1_hat_final));
    let _ = writeln!(s, "d1_drift       {}", fmt_f64(m.d1_drift));
    match report.d1_settled {
        Some(true) => s.push_str("d1_hat settled over the last quarter\n"),
        Some(false) => s.push_str("d1_hat still increasing over the last quarter\n"),
        None => {}
    }
    if let Some(ok) = m.envelope_ok {
        let _ = writeln!(s, "envelope_ok    {ok}");
    }
    if report.clamp_events > 0 {
        let _ = writeln!(s, "clamp_events   {}", report.clamp_events);
    }
    s
}
