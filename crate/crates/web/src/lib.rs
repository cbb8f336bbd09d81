//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every exported function takes and returns JSON strings. The plain-Rust
//! versions (`*_json`) hold the logic so they can be tested natively.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use bric::cli_io::config::{ControllerConfig, PlantConfig};
use bric::cli_io::{presets, simulate, CliError, RunReport};
use bric::funnel::{FunnelChannel, FunnelSpec};
use bric::sim::RunError;
use bric::transforms::{barrier, squash, SquashParams};

/// Knobs the page may change on top of a preset. Absent fields keep the preset value.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub lambda: Option<f64>,
    pub kappa: Option<f64>,
    pub mu_g: Option<f64>,
    pub mu_d1: Option<f64>,
    pub mu_d2: Option<f64>,
    pub k_ppc: Option<f64>,
    pub rate: Option<f64>,
    pub floor: Option<f64>,
    pub t_end: Option<f64>,
    pub h: Option<f64>,
    pub disturbance: Option<bool>,
    pub motor_failure: Option<bool>,
}

#[derive(Debug, Serialize)]
struct Violation {
    t: f64,
    channel: usize,
    value: f64,
}

/// Channel-major series: `e1[j][row]`.
#[derive(Debug, Default, Serialize)]
struct RunSeries {
    t: Vec<f64>,
    e1: Vec<Vec<f64>>,
    s_k: Vec<Vec<f64>>,
    zeta: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
    /// `phi(t)` for the barrier law, `rho(t)` for the baseline; `null` where unbounded.
    funnel: Vec<Vec<Option<f64>>>,
    d1_hat: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct RunResponse {
    name: String,
    controller: &'static str,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    violation: Option<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<RunReport>,
    series: RunSeries,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn channels<F: Fn(&bric::sim::Sample) -> &[f64]>(
    rows: &[bric::sim::Sample],
    n: usize,
    f: F,
) -> Vec<Vec<f64>> {
    (0..n)
        .map(|j| rows.iter().map(|r| f(r)[j]).collect())
        .collect()
}

pub fn simulate_json(preset: &str, overrides: &str) -> Result<String, String> {
    let mut cfg = presets::get(preset).ok_or_else(|| format!("unknown preset '{preset}'"))?;
    let ov: Overrides = if overrides.trim().is_empty() {
        Overrides::default()
    } else {
        serde_json::from_str(overrides).map_err(|e| format!("overrides: {e}"))?
    };

    if let Some(v) = ov.t_end {
        cfg.sim.t_end = v;
    }
    if let Some(v) = ov.h {
        cfg.sim.h = v;
    }
    if let PlantConfig::Pendulum { flags, .. } = &mut cfg.plant {
        if let Some(d) = ov.disturbance {
            flags.disturbance = d;
        }
        if let Some(m) = ov.motor_failure {
            flags.motor_failure = m.then(Default::default);
        }
    }
    let controller = match &mut cfg.controller {
        ControllerConfig::Bric {
            lambda,
            kappa,
            mu_g,
            mu_d1,
            mu_d2,
            funnel,
            ..
        } => {
            *lambda = ov.lambda.or(*lambda);
            *kappa = ov.kappa.unwrap_or(*kappa);
            *mu_g = ov.mu_g.unwrap_or(*mu_g);
            *mu_d1 = ov.mu_d1.unwrap_or(*mu_d1);
            *mu_d2 = ov.mu_d2.unwrap_or(*mu_d2);
            for ch in funnel.iter_mut() {
                *ch = FunnelChannel {
                    rate: ov.rate.unwrap_or(ch.rate),
                    floor: ov.floor.unwrap_or(ch.floor),
                };
            }
            "bric"
        }
        ControllerConfig::Ppc {
            lambda,
            k_ppc,
            rho_rate,
            rho_floor,
            ..
        } => {
            *lambda = ov.lambda.or(*lambda);
            *k_ppc = ov.k_ppc.unwrap_or(*k_ppc);
            *rho_rate = ov.rate.unwrap_or(*rho_rate);
            *rho_floor = ov.floor.unwrap_or(*rho_floor);
            "ppc"
        }
    };

    let response = match simulate(&cfg) {
        Ok(done) => {
            let rows = &done.trajectory.rows;
            let n = done.trajectory.dims.n;
            RunResponse {
                name: cfg.name.clone(),
                controller,
                status: "completed",
                violation: None,
                series: RunSeries {
                    t: rows.iter().map(|r| r.t).collect(),
                    e1: channels(rows, n, |r| &r.e[0]),
                    s_k: channels(rows, n, |r| r.s_k()),
                    zeta: channels(rows, n, |r| &r.zeta),
                    u: channels(rows, n, |r| &r.u),
                    funnel: (0..n)
                        .map(|j| rows.iter().map(|r| finite(r.funnel[j])).collect())
                        .collect(),
                    d1_hat: rows.iter().map(|r| r.d1_hat).collect(),
                },
                report: Some(done.report),
            }
        }
        Err(CliError::Run(RunError::Violation { t, channel, value })) => RunResponse {
            name: cfg.name.clone(),
            controller,
            status: "violation",
            violation: Some(Violation { t, channel, value }),
            report: None,
            series: RunSeries::default(),
        },
        Err(e) => return Err(e.to_string()),
    };
    serde_json::to_string(&response).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
struct TransformCurves {
    s: Vec<f64>,
    eta: Vec<f64>,
    eta_deriv: Vec<f64>,
    zeta: Vec<f64>,
    chi: Vec<f64>,
    chi_deriv: Vec<f64>,
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

/// Squashing map over `|s| <= 5 sqrt(kappa)` and barrier map over `|zeta| <= zeta_max`.
pub fn transform_curves_json(kappa: f64, zeta_max: f64, points: usize) -> Result<String, String> {
    let p = SquashParams::new(kappa).map_err(|e| e.to_string())?;
    if !(zeta_max > 0.0 && zeta_max < 1.0) {
        return Err("zeta_max must lie in (0, 1)".into());
    }
    let points = points.clamp(2, 10_000);
    let r = 5.0 * kappa.sqrt();
    let mut c = TransformCurves {
        s: Vec::new(),
        eta: Vec::new(),
        eta_deriv: Vec::new(),
        zeta: Vec::new(),
        chi: Vec::new(),
        chi_deriv: Vec::new(),
    };
    for s in linspace(-r, r, points) {
        let q = squash(s, p).map_err(|e| e.to_string())?;
        c.s.push(s);
        c.eta.push(q.eta);
        c.eta_deriv.push(q.deriv);
    }
    for z in linspace(-zeta_max, zeta_max, points) {
        let b = barrier(z).map_err(|e| e.to_string())?;
        c.zeta.push(z);
        c.chi.push(b.chi);
        c.chi_deriv.push(b.deriv);
    }
    serde_json::to_string(&c).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
struct FunnelCurve {
    t: Vec<f64>,
    phi: Vec<Option<f64>>,
    psi: Vec<f64>,
    beta: Vec<f64>,
}

pub fn funnel_curve_json(
    rate: f64,
    floor: f64,
    t_end: f64,
    points: usize,
) -> Result<String, String> {
    let spec = FunnelSpec::uniform(1, rate, floor);
    spec.validate().map_err(|d| {
        d.iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ")
    })?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err("t_end must be positive".into());
    }
    let points = points.clamp(2, 10_000);
    let mut c = FunnelCurve {
        t: Vec::new(),
        phi: Vec::new(),
        psi: Vec::new(),
        beta: Vec::new(),
    };
    for t in linspace(0.0, t_end, points) {
        c.t.push(t);
        c.phi
            .push(finite(spec.phi(0, t).map_err(|e| e.to_string())?));
        c.psi
            .push(spec.phi_reciprocal(0, t).map_err(|e| e.to_string())?);
        c.beta.push(spec.beta(t).map_err(|e| e.to_string())?[0]);
    }
    serde_json::to_string(&c).map_err(|e| e.to_string())
}

/// Runs a preset with JSON overrides and returns the recorded series plus metrics.
#[wasm_bindgen]
pub fn simulate_preset(preset: &str, overrides: &str) -> Result<String, JsValue> {
    simulate_json(preset, overrides).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn transform_curves(kappa: f64, zeta_max: f64, points: usize) -> Result<String, JsValue> {
    transform_curves_json(kappa, zeta_max, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn funnel_curve(rate: f64, floor: f64, t_end: f64, points: usize) -> Result<String, JsValue> {
    funnel_curve_json(rate, floor, t_end, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn preset_names() -> String {
    presets::NAMES.join(",")
}
