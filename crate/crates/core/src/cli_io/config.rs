//! Experiment configuration documents (TOML).

use serde::{Deserialize, Serialize};

use crate::controllers::{BricGains, BricState, PpcConfig};
use crate::error::Diagnostic;
use crate::error_pipeline::RegulationTarget;
use crate::funnel::{FunnelChannel, FunnelSpec, DEFAULT_RATIO_CAP};
use crate::plants::{
    CoupledPendulums, IntegratorChain, PendulumParams, Plant, PlantDims, ScenarioFlags,
};
use crate::sim::{ControlLaw, Envelope, SimConfig};

/// Filter constant used when a configuration leaves it out.
pub const DEFAULT_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub plant: PlantConfig,
    pub controller: ControllerConfig,
    pub target: TargetConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<Envelope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlantConfig {
    Pendulum {
        #[serde(default)]
        params: PendulumParams,
        #[serde(default)]
        flags: ScenarioFlags,
    },
    IntegratorChain {
        order: usize,
        drift: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControllerConfig {
    Bric {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
        kappa: f64,
        mu_g: f64,
        mu_d1: f64,
        mu_d2: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d1_hat0: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d2_hat0: Option<Vec<f64>>,
        funnel: Vec<FunnelChannel>,
        /// Cap on `|phi_dot / phi^3|` checked at load time.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        funnel_ratio_cap: Option<f64>,
    },
    Ppc {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
        k_ppc: f64,
        /// Omitted: taken as `|s_k(0)|`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rho0: Option<f64>,
        rho_rate: f64,
        rho_floor: f64,
    },
}

impl ControllerConfig {
    pub fn lambda(&self) -> Option<f64> {
        match self {
            ControllerConfig::Bric { lambda, .. } | ControllerConfig::Ppc { lambda, .. } => *lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub x1_d: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

/// Why a configuration document was rejected.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration:\n{}", format_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
}

fn format_diagnostics(d: &[Diagnostic]) -> String {
    d.iter()
        .map(|d| format!("  {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// A validated configuration plus notes about defaulted values.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub config: ExperimentConfig,
    pub notes: Vec<Diagnostic>,
}

/// Everything needed to run one closed loop.
pub struct Scenario {
    pub name: String,
    pub plant: Box<dyn Plant + Send + Sync>,
    pub law: ControlLaw,
    pub target: RegulationTarget,
    pub sim: SimConfig,
    pub x0: Vec<f64>,
    pub z0: Vec<f64>,
    pub envelope: Option<Envelope>,
}

pub fn load_config(text: &str) -> Result<Loaded, ConfigError> {
    let config: ExperimentConfig =
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let notes = config.validate().map_err(ConfigError::Invalid)?;
    Ok(Loaded { config, notes })
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    fn dims(&self) -> PlantDims {
        match &self.plant {
            PlantConfig::Pendulum { .. } => PlantDims { k: 2, n: 2, n_z: 2 },
            PlantConfig::IntegratorChain { order, drift } => PlantDims {
                k: *order,
                n: drift.len(),
                n_z: 0,
            },
        }
    }

    /// Every problem found, or the notes about defaulted values.
    pub fn validate(&self) -> Result<Vec<Diagnostic>, Vec<Diagnostic>> {
        let mut errs = Vec::new();
        let mut notes = Vec::new();
        if self.name.trim().is_empty() {
            errs.push(Diagnostic::new("name", "must not be empty"));
        }

        match &self.plant {
            PlantConfig::Pendulum { params, flags } => {
                for (name, v) in params.named() {
                    if !(v > 0.0 && v.is_finite()) {
                        errs.push(Diagnostic::new(
                            format!("plant.params.{name}"),
                            format!("must be positive (got {v})"),
                        ));
                    }
                }
                if let Some(m) = flags.motor_failure {
                    if !(m.start < m.end) {
                        errs.push(Diagnostic::new(
                            "plant.flags.motor_failure",
                            "window start must precede end",
                        ));
                    }
                    if !(m.factor.is_finite()) {
                        errs.push(Diagnostic::new(
                            "plant.flags.motor_failure.factor",
                            "must be finite",
                        ));
                    }
                }
            }
            PlantConfig::IntegratorChain { order, drift } => {
                if *order < 2 {
                    errs.push(Diagnostic::new(
                        "plant.order",
                        format!("must be at least 2 (got {order})"),
                    ));
                }
                if drift.is_empty() {
                    errs.push(Diagnostic::new("plant.drift", "needs at least one channel"));
                }
                if drift.iter().any(|v| !v.is_finite()) {
                    errs.push(Diagnostic::new("plant.drift", "entries must be finite"));
                }
            }
        }
        let dims = self.dims();

        if self.controller.lambda().is_none() {
            notes.push(Diagnostic::new(
                "controller.lambda",
                format!("defaulted to {DEFAULT_LAMBDA}"),
            ));
        }
        match &self.controller {
            ControllerConfig::Bric {
                d2_hat0,
                funnel,
                d1_hat0,
                funnel_ratio_cap,
                ..
            } => {
                let gains = self.bric_gains().expect("barrier controller");
                errs.extend(gains.validate("controller."));
                if let Some(d1) = d1_hat0 {
                    if !d1.is_finite() {
                        errs.push(Diagnostic::new("controller.d1_hat0", "must be finite"));
                    }
                }
                if let Some(d2) = d2_hat0 {
                    if d2.len() != dims.n {
                        errs.push(Diagnostic::new(
                            "controller.d2_hat0",
                            format!("expected {} entries, got {}", dims.n, d2.len()),
                        ));
                    }
                }
                if funnel.len() != dims.n {
                    errs.push(Diagnostic::new(
                        "controller.funnel",
                        format!("expected {} channels, got {}", dims.n, funnel.len()),
                    ));
                }
                let cap = funnel_ratio_cap.unwrap_or(DEFAULT_RATIO_CAP);
                if !(cap > 0.0) {
                    errs.push(Diagnostic::new(
                        "controller.funnel_ratio_cap",
                        "must be positive",
                    ));
                } else if let Err(d) = FunnelSpec::new(funnel.clone()).validate_with_cap(cap) {
                    errs.extend(
                        d.into_iter()
                            .map(|d| Diagnostic::new(format!("controller.{}", d.path), d.message)),
                    );
                }
            }
            ControllerConfig::Ppc { .. } => {
                errs.extend(
                    self.ppc_config()
                        .expect("baseline controller")
                        .validate("controller."),
                );
            }
        }

        if self.target.x1_d.len() != dims.n {
            errs.push(Diagnostic::new(
                "target.x1_d",
                format!(
                    "expected {} entries, got {}",
                    dims.n,
                    self.target.x1_d.len()
                ),
            ));
        }
        if self.target.x1_d.iter().any(|v| !v.is_finite()) {
            errs.push(Diagnostic::new("target.x1_d", "entries must be finite"));
        }
        if self.initial.x.len() != dims.state_len() {
            errs.push(Diagnostic::new(
                "initial.x",
                format!(
                    "expected {} entries, got {}",
                    dims.state_len(),
                    self.initial.x.len()
                ),
            ));
        }
        if self.initial.x.iter().any(|v| !v.is_finite()) {
            errs.push(Diagnostic::new("initial.x", "entries must be finite"));
        }
        match &self.initial.z {
            Some(z) if z.len() != dims.n_z => errs.push(Diagnostic::new(
                "initial.z",
                format!("expected {} entries, got {}", dims.n_z, z.len()),
            )),
            None if dims.n_z > 0 => notes.push(Diagnostic::new("initial.z", "defaulted to zeros")),
            _ => {}
        }
        errs.extend(self.sim.validate("sim."));
        if let Some(env) = &self.envelope {
            for (name, v) in [("a", env.a), ("l", env.l), ("b", env.b)] {
                if !(v > 0.0 && v.is_finite()) {
                    errs.push(Diagnostic::new(
                        format!("envelope.{name}"),
                        "must be positive",
                    ));
                }
            }
        }

        if errs.is_empty() {
            Ok(notes)
        } else {
            Err(errs)
        }
    }

    fn bric_gains(&self) -> Option<BricGains> {
        match &self.controller {
            ControllerConfig::Bric {
                lambda,
                kappa,
                mu_g,
                mu_d1,
                mu_d2,
                ..
            } => Some(BricGains {
                lambda: lambda.unwrap_or(DEFAULT_LAMBDA),
                kappa: *kappa,
                mu_g: *mu_g,
                mu_d1: *mu_d1,
                mu_d2: *mu_d2,
            }),
            ControllerConfig::Ppc { .. } => None,
        }
    }

    fn ppc_config(&self) -> Option<PpcConfig> {
        match &self.controller {
            ControllerConfig::Ppc {
                lambda,
                k_ppc,
                rho0,
                rho_rate,
                rho_floor,
            } => Some(PpcConfig {
                lambda: lambda.unwrap_or(DEFAULT_LAMBDA),
                k_ppc: *k_ppc,
                rho0: *rho0,
                rho_rate: *rho_rate,
                rho_floor: *rho_floor,
            }),
            ControllerConfig::Bric { .. } => None,
        }
    }

    /// Validates and assembles a runnable scenario.
    pub fn build(&self) -> Result<Scenario, ConfigError> {
        self.validate().map_err(ConfigError::Invalid)?;
        let dims = self.dims();
        let plant: Box<dyn Plant + Send + Sync> = match &self.plant {
            PlantConfig::Pendulum { params, flags } => {
                Box::new(CoupledPendulums::new(*params, *flags))
            }
            PlantConfig::IntegratorChain { order, drift } => Box::new(IntegratorChain {
                order: *order,
                drift: drift.clone(),
            }),
        };
        let law = match &self.controller {
            ControllerConfig::Bric {
                d1_hat0,
                d2_hat0,
                funnel,
                ..
            } => ControlLaw::Bric {
                gains: self.bric_gains().expect("barrier controller"),
                funnel: FunnelSpec::new(funnel.clone()),
                initial: BricState {
                    d1_hat: d1_hat0.unwrap_or(0.0),
                    d2_hat: d2_hat0.clone().unwrap_or_else(|| vec![0.0; dims.n]),
                },
            },
            ControllerConfig::Ppc { .. } => {
                ControlLaw::Ppc(self.ppc_config().expect("baseline controller"))
            }
        };
        let target = RegulationTarget::new(self.target.x1_d.clone()).map_err(|e| {
            ConfigError::Invalid(vec![Diagnostic::new("target.x1_d", e.to_string())])
        })?;
        Ok(Scenario {
            name: self.name.clone(),
            plant,
            law,
            target,
            sim: self.sim,
            x0: self.initial.x.clone(),
            z0: self
                .initial
                .z
                .clone()
                .unwrap_or_else(|| vec![0.0; dims.n_z]),
            envelope: self.envelope,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli_io::presets;

    #[test]
    fn presets_roundtrip_and_validate() {
        for p in presets::all() {
            let text = p.to_toml();
            let loaded = load_config(&text).unwrap_or_else(|e| panic!("{}: {e}", p.name));
            assert_eq!(loaded.config, p);
            assert!(loaded.notes.is_empty(), "{}: {:?}", p.name, loaded.notes);
            assert!(p.build().is_ok());
        }
    }

    #[test]
    fn negative_kappa_is_named() {
        let text = presets::get("fig1_bric")
            .unwrap()
            .to_toml()
            .replace("kappa = 20.0", "kappa = -1.0");
        match load_config(&text) {
            Err(ConfigError::Invalid(d)) => {
                assert_eq!(d.len(), 1);
                assert_eq!(d[0].path, "controller.kappa");
                assert!(d[0].message.contains("positive"));
            }
            other => panic!("expected invalid, got {other:?}"),
        }
    }

    #[test]
    fn missing_lambda_defaults_with_note() {
        let text = presets::get("fig1_bric")
            .unwrap()
            .to_toml()
            .replace("lambda = 2.0\n", "");
        let loaded = load_config(&text).unwrap();
        assert_eq!(loaded.config.controller.lambda(), None);
        assert_eq!(loaded.notes.len(), 1);
        assert_eq!(loaded.notes[0].path, "controller.lambda");
        assert!(loaded.notes[0].message.contains("defaulted"));
        match loaded.config.build().unwrap().law {
            ControlLaw::Bric { gains, .. } => assert_eq!(gains.lambda, 1.0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn every_failure_is_listed() {
        let text = presets::get("fig1_bric")
            .unwrap()
            .to_toml()
            .replace("kappa = 20.0", "kappa = 0.0")
            .replace("mu_g = 0.1", "mu_g = -3.0")
            .replace("t_end = 20.0", "t_end = -1.0");
        let Err(ConfigError::Invalid(d)) = load_config(&text) else {
            panic!("expected invalid");
        };
        let paths: Vec<_> = d.iter().map(|d| d.path.as_str()).collect();
        assert!(paths.contains(&"controller.kappa"));
        assert!(paths.contains(&"controller.mu_g"));
        assert!(paths.contains(&"sim.t_end"));
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let text = presets::get("fig1_bric")
            .unwrap()
            .to_toml()
            .replace("mu_g = 0.1", "mu_g = 0.1\nmu_x = 3.0");
        match load_config(&text) {
            Err(ConfigError::Parse(msg)) => {
                assert!(msg.contains("mu_x"), "{msg}");
                assert!(msg.contains("line"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let text = presets::get("oracle").unwrap().to_toml() + "\n[extra]\nfoo = 1\n";
        assert!(matches!(load_config(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn dimension_mismatches_are_reported() {
        let mut cfg = presets::get("oracle").unwrap();
        cfg.initial.x.pop();
        cfg.target.x1_d.push(0.0);
        let d = cfg.validate().unwrap_err();
        let paths: Vec<_> = d.iter().map(|d| d.path.as_str()).collect();
        assert_eq!(paths, vec!["target.x1_d", "initial.x"]);
    }

    #[test]
    fn funnel_diagnostics_carry_controller_prefix() {
        let mut cfg = presets::get("fig1_bric").unwrap();
        if let ControllerConfig::Bric { funnel, .. } = &mut cfg.controller {
            funnel[1].floor = 0.0;
        }
        let d = cfg.validate().unwrap_err();
        assert_eq!(d[0].path, "controller.funnel[1].floor");
    }
}
