//! Built-in scenarios: the coupled-pendulum benchmark and an oracle plant.

use std::f64::consts::FRAC_PI_4;

use super::config::{ControllerConfig, ExperimentConfig, InitialConfig, PlantConfig, TargetConfig};
use crate::funnel::FunnelChannel;
use crate::plants::{PendulumParams, ScenarioFlags};
use crate::sim::SimConfig;

/// Filter constant used by the pendulum presets.
pub const PENDULUM_LAMBDA: f64 = 2.0;

pub const NAMES: [&str; 5] = [
    "fig1_bric",
    "fig1_ppc",
    "fig2",
    "fig3_disturbance",
    "oracle",
];

fn bric(lambda: f64, n: usize) -> ControllerConfig {
    ControllerConfig::Bric {
        lambda: Some(lambda),
        kappa: 20.0,
        mu_g: 0.1,
        mu_d1: 10.0,
        mu_d2: 10.0,
        d1_hat0: None,
        d2_hat0: None,
        funnel: vec![
            FunnelChannel {
                rate: 0.5,
                floor: 0.5
            };
            n
        ],
        funnel_ratio_cap: None,
    }
}

fn pendulum(
    name: &str,
    description: &str,
    controller: ControllerConfig,
    disturbance: bool,
) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        description: Some(description.into()),
        plant: PlantConfig::Pendulum {
            params: PendulumParams::default(),
            flags: ScenarioFlags {
                disturbance,
                ..ScenarioFlags::default()
            },
        },
        controller,
        target: TargetConfig {
            x1_d: vec![-FRAC_PI_4, FRAC_PI_4],
        },
        initial: InitialConfig {
            x: vec![-1.6, 0.96, 0.0, 0.0],
            z: Some(vec![0.0, 0.0]),
        },
        sim: SimConfig::default(),
        envelope: None,
        output: None,
    }
}

pub fn get(name: &str) -> Option<ExperimentConfig> {
    let cfg = match name {
        "fig1_bric" => pendulum(
            name,
            "coupled pendulums, barrier integral control, motor 2 at half torque on [2, 10) s",
            bric(PENDULUM_LAMBDA, 2),
            false,
        ),
        "fig1_ppc" => pendulum(
            name,
            "coupled pendulums, logarithmic prescribed-performance baseline",
            ControllerConfig::Ppc {
                lambda: Some(PENDULUM_LAMBDA),
                k_ppc: 0.1,
                rho0: None,
                rho_rate: 0.5,
                rho_floor: 0.5,
            },
            false,
        ),
        "fig2" => pendulum(
            name,
            "coupled pendulums, barrier integral control; adaptation signals",
            bric(PENDULUM_LAMBDA, 2),
            false,
        ),
        "fig3_disturbance" => pendulum(
            name,
            "coupled pendulums, barrier integral control with additive sinusoidal disturbance",
            bric(PENDULUM_LAMBDA, 2),
            true,
        ),
        "oracle" => ExperimentConfig {
            name: name.into(),
            description: Some(
                "double integrator with constant drift [1, -2] and identity input gain".into(),
            ),
            plant: PlantConfig::IntegratorChain {
                order: 2,
                drift: vec![1.0, -2.0],
            },
            controller: bric(1.0, 2),
            target: TargetConfig {
                x1_d: vec![0.0, 0.0],
            },
            initial: InitialConfig {
                x: vec![5.0, -5.0, 0.0, 0.0],
                z: None,
            },
            sim: SimConfig::default(),
            envelope: None,
            output: None,
        },
        _ => return None,
    };
    Some(cfg)
}

pub fn all() -> Vec<ExperimentConfig> {
    NAMES.iter().filter_map(|n| get(n)).collect()
}
