//! Plant models of the form
//!
//! ```text
//! x_i' = x_{i+1}             (i < k)
//! x_k' = F(x, z, t) + G(x, z, t) u
//! z'   = F_z(x, z, t)
//! ```
//!
//! Models only provide the top-level dynamics `(F, G, F_z)`; the chain rows
//! are filled in by [`Plant::rhs`], so the integrator-chain structure holds
//! for every model by construction.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlantDims {
    /// Chain order, at least 2.
    pub k: usize,
    /// Channels (inputs).
    pub n: usize,
    /// Internal (unmeasured) states.
    pub n_z: usize,
}

impl PlantDims {
    pub fn state_len(&self) -> usize {
        self.k * self.n
    }
}

/// Top-level dynamics at one point: `x_k' = drift + gain u`, `z' = z_dot`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineDynamics {
    pub drift: Vec<f64>,
    pub gain: DMatrix<f64>,
    pub z_dot: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub x_dot: Vec<f64>,
    pub z_dot: Vec<f64>,
}

pub trait Plant {
    fn dims(&self) -> PlantDims;

    fn affine(&self, x: &[f64], z: &[f64], t: f64) -> Result<AffineDynamics>;

    /// Times at which the right-hand side is discontinuous in `t`.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Count of numerical safeguards triggered so far (zero for most plants).
    fn clamp_events(&self) -> u64 {
        0
    }

    /// Column names for the `k * n` chain states.
    fn state_names(&self) -> Vec<String> {
        let d = self.dims();
        (1..=d.k)
            .flat_map(|i| (1..=d.n).map(move |j| format!("x{i}_{j}")))
            .collect()
    }

    fn rhs(&self, x: &[f64], z: &[f64], u: &[f64], t: f64) -> Result<Derivatives> {
        let d = self.dims();
        check_dim("state", d.state_len(), x.len())?;
        check_dim("internal state", d.n_z, z.len())?;
        check_dim("input", d.n, u.len())?;
        if x.iter().chain(z).chain(u).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "plant input",
                t,
            });
        }
        let dyn_ = self.affine(x, z, t)?;
        let mut x_dot = Vec::with_capacity(x.len());
        x_dot.extend_from_slice(&x[d.n..]);
        for (i, f) in dyn_.drift.iter().enumerate() {
            let gu: f64 = (0..d.n).map(|c| dyn_.gain[(i, c)] * u[c]).sum();
            x_dot.push(f + gu);
        }
        Ok(Derivatives {
            x_dot,
            z_dot: dyn_.z_dot,
        })
    }
}

/// `k`-th order integrator chain with constant drift and identity input gain.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorChain {
    pub order: usize,
    pub drift: Vec<f64>,
}

impl IntegratorChain {
    pub fn double(drift: Vec<f64>) -> Self {
        Self { order: 2, drift }
    }
}

impl Plant for IntegratorChain {
    fn dims(&self) -> PlantDims {
        PlantDims {
            k: self.order,
            n: self.drift.len(),
            n_z: 0,
        }
    }

    fn affine(&self, _x: &[f64], _z: &[f64], _t: f64) -> Result<AffineDynamics> {
        let n = self.drift.len();
        Ok(AffineDynamics {
            drift: self.drift.clone(),
            gain: DMatrix::identity(n, n),
            z_dot: Vec::new(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PendulumParams {
    pub j1: f64,
    pub j2: f64,
    pub m1: f64,
    pub m2: f64,
    pub r_c: f64,
    pub d_c: f64,
    pub l_c: f64,
    pub k_c: f64,
    pub b_c: f64,
    pub g: f64,
    pub sigma0: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub theta_dot_s: f64,
    pub t_s: f64,
    pub t_c: f64,
}

impl Default for PendulumParams {
    fn default() -> Self {
        Self {
            j1: 0.5,
            j2: 0.625,
            m1: 2.0,
            m2: 2.5,
            r_c: 0.5,
            d_c: 0.5,
            l_c: 0.5,
            k_c: 150.0,
            b_c: 1.0,
            g: 9.81,
            sigma0: 1.0,
            sigma1: 1.0,
            sigma2: 1.0,
            theta_dot_s: 0.1,
            t_s: 2.0,
            t_c: 1.0,
        }
    }
}

impl PendulumParams {
    pub fn named(&self) -> [(&'static str, f64); 16] {
        [
            ("j1", self.j1),
            ("j2", self.j2),
            ("m1", self.m1),
            ("m2", self.m2),
            ("r_c", self.r_c),
            ("d_c", self.d_c),
            ("l_c", self.l_c),
            ("k_c", self.k_c),
            ("b_c", self.b_c),
            ("g", self.g),
            ("sigma0", self.sigma0),
            ("sigma1", self.sigma1),
            ("sigma2", self.sigma2),
            ("theta_dot_s", self.theta_dot_s),
            ("t_s", self.t_s),
            ("t_c", self.t_c),
        ]
    }
}

/// Which bristle-state equation the friction model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LugreForm {
    /// `tau' = v - sigma0 |v| / g(v)`
    #[default]
    Printed,
    /// `tau' = v - sigma0 |v| tau / g(v)`
    Textbook,
}

/// Where the additive disturbance enters the pendulum equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisturbanceEntry {
    /// Added to the torque balance, then divided by the inertia.
    #[default]
    Torque,
    /// Added directly to the angular acceleration.
    Acceleration,
}

/// Temporary loss of actuation on the second motor's diagonal term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotorFailure {
    pub start: f64,
    pub end: f64,
    pub factor: f64,
}

impl Default for MotorFailure {
    fn default() -> Self {
        Self {
            start: 2.0,
            end: 10.0,
            factor: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFlags {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motor_failure: Option<MotorFailure>,
    #[serde(default)]
    pub disturbance: bool,
    #[serde(default)]
    pub disturbance_entry: DisturbanceEntry,
    #[serde(default)]
    pub lugre: LugreForm,
}

impl Default for ScenarioFlags {
    fn default() -> Self {
        Self {
            motor_failure: Some(MotorFailure::default()),
            disturbance: false,
            disturbance_entry: DisturbanceEntry::Torque,
            lugre: LugreForm::Printed,
        }
    }
}

impl ScenarioFlags {
    /// Actuation factor `sigma_t(t)`.
    pub fn actuation_factor(&self, t: f64) -> f64 {
        match self.motor_failure {
            Some(m) if t >= m.start && t < m.end => m.factor,
            _ => 1.0,
        }
    }
}

/// `5 [sin(2t - pi/4), cos(t - pi/6)]`.
pub fn disturbance_torque(t: f64) -> [f64; 2] {
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};
    [
        5.0 * (2.0 * t - FRAC_PI_4).sin(),
        5.0 * (t - FRAC_PI_6).cos(),
    ]
}

/// Spring-damper link between the two pendulum tips.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    /// Link length.
    pub x_c: f64,
    pub x_c_dot: f64,
    /// Link angle.
    pub theta_c: f64,
    /// Spring plus damper force.
    pub force: f64,
    /// True when the length radicand went negative and was clamped to zero.
    pub clamped: bool,
}

pub fn coupling_geometry(theta: [f64; 2], theta_dot: [f64; 2], p: &PendulumParams) -> Coupling {
    let (s1, c1) = theta[0].sin_cos();
    let (s2, c2) = theta[1].sin_cos();
    let (r, d) = (p.r_c, p.d_c);
    let rel = theta[1] - theta[0];
    let radicand = d * d + d * r * (s1 - s2) + 0.5 * r * r * (1.0 - rel.cos());
    let (x_c, clamped) = link_length(radicand);
    let radicand_dot = d * r * (c1 * theta_dot[0] - c2 * theta_dot[1])
        + 0.5 * r * r * rel.sin() * (theta_dot[1] - theta_dot[0]);
    let x_c_dot = if x_c > 0.0 {
        radicand_dot / (2.0 * x_c)
    } else {
        0.0
    };
    let theta_c = (r * (c2 - c1) / (2.0 * d + r * (s1 - s2))).atan();
    Coupling {
        x_c,
        x_c_dot,
        theta_c,
        force: p.k_c * (x_c - p.l_c) + p.b_c * x_c_dot,
        clamped,
    }
}

/// The radicand is a sum of squares; it can only dip below zero by rounding.
fn link_length(radicand: f64) -> (f64, bool) {
    if radicand < 0.0 {
        (0.0, true)
    } else {
        (radicand.sqrt(), false)
    }
}

/// Bristle-state rate and friction torque of one joint.
pub fn lugre_friction(theta_dot: f64, tau: f64, p: &PendulumParams, form: LugreForm) -> (f64, f64) {
    let stribeck = p.t_c + (p.t_s - p.t_c) * (-(theta_dot / p.theta_dot_s).powi(2)).exp();
    let decay = match form {
        LugreForm::Printed => p.sigma0 * theta_dot.abs() / stribeck,
        LugreForm::Textbook => p.sigma0 * theta_dot.abs() * tau / stribeck,
    };
    let tau_dot = theta_dot - decay;
    let torque = p.sigma0 * tau + p.sigma1 * tau_dot + p.sigma2 * theta_dot;
    (tau_dot, torque)
}

/// Two inverted pendulums joined by a spring and damper, each driven by a
/// base torque. State `x = [theta1, theta2, omega1, omega2]`, internal state
/// `z = [tau1, tau2]` (friction bristles).
#[derive(Debug, Default)]
pub struct CoupledPendulums {
    pub params: PendulumParams,
    pub flags: ScenarioFlags,
    clamp_count: AtomicU64,
}

impl Clone for CoupledPendulums {
    fn clone(&self) -> Self {
        Self {
            params: self.params,
            flags: self.flags,
            clamp_count: AtomicU64::new(self.clamp_count()),
        }
    }
}

impl CoupledPendulums {
    pub fn new(params: PendulumParams, flags: ScenarioFlags) -> Self {
        Self {
            params,
            flags,
            clamp_count: AtomicU64::new(0),
        }
    }

    /// Number of evaluations where the link-length radicand was clamped.
    pub fn clamp_count(&self) -> u64 {
        self.clamp_count.load(Ordering::Relaxed)
    }

    /// Input matrix rows `B_c1`, `B_c2` (before division by inertia).
    pub fn input_rows(&self, theta: [f64; 2], t: f64) -> [[f64; 2]; 2] {
        let (s1, c1) = theta[0].sin_cos();
        let (s2, c2) = theta[1].sin_cos();
        let cross = -c2 * s1;
        let sigma = self.flags.actuation_factor(t);
        [[c1 + 1.5, cross], [cross, sigma * s2 * c2 + 2.0]]
    }
}

impl Plant for CoupledPendulums {
    fn dims(&self) -> PlantDims {
        PlantDims { k: 2, n: 2, n_z: 2 }
    }

    fn clamp_events(&self) -> u64 {
        self.clamp_count()
    }

    fn affine(&self, x: &[f64], z: &[f64], t: f64) -> Result<AffineDynamics> {
        check_dim("pendulum state", 4, x.len())?;
        check_dim("pendulum internal state", 2, z.len())?;
        let p = &self.params;
        let theta = [x[0], x[1]];
        let omega = [x[2], x[3]];
        let link = coupling_geometry(theta, omega, p);
        if link.clamped {
            self.clamp_count.fetch_add(1, Ordering::Relaxed);
        }
        let inertia = [p.j1, p.j2];
        let mass = [p.m1, p.m2];
        let rows = self.input_rows(theta, t);
        let w = if self.flags.disturbance {
            disturbance_torque(t)
        } else {
            [0.0; 2]
        };
        let mut drift = Vec::with_capacity(2);
        let mut z_dot = Vec::with_capacity(2);
        let mut gain = DMatrix::zeros(2, 2);
        for i in 0..2 {
            // (-1)^i with 1-based joint numbering
            let sign = if i == 0 { -1.0 } else { 1.0 };
            let (tau_dot, friction) = lugre_friction(omega[i], z[i], p, self.flags.lugre);
            let torque = p.r_c
                * (p.g * mass[i] * theta[i].sin()
                    + sign * 0.5 * link.force * (theta[i] - link.theta_c).cos())
                - friction;
            let accel = match self.flags.disturbance_entry {
                DisturbanceEntry::Torque => (torque + w[i]) / inertia[i],
                DisturbanceEntry::Acceleration => torque / inertia[i] + w[i],
            };
            drift.push(accel);
            z_dot.push(tau_dot);
            for c in 0..2 {
                gain[(i, c)] = rows[i][c] / inertia[i];
            }
        }
        Ok(AffineDynamics { drift, gain, z_dot })
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.flags
            .motor_failure
            .map(|m| vec![m.start, m.end])
            .unwrap_or_default()
    }

    fn state_names(&self) -> Vec<String> {
        ["theta1", "theta2", "omega1", "omega2"]
            .map(String::from)
            .to_vec()
    }
}

/// Sample point for [`assumption_probe`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbePoint {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    /// Smallest eigenvalue of `G + G^T` seen on the grid.
    pub min_eigenvalue: f64,
    pub at: ProbePoint,
    pub samples: usize,
}

impl ProbeReport {
    pub fn positive_definite(&self) -> bool {
        self.min_eigenvalue > 0.0
    }
}

pub fn min_symmetric_eigenvalue(g: &DMatrix<f64>) -> f64 {
    let sym = g + g.transpose();
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Minimum eigenvalue of `G + G^T` over `points`.
pub fn assumption_probe<P: Plant + ?Sized>(
    plant: &P,
    points: &[ProbePoint],
) -> Result<ProbeReport> {
    let mut best: Option<(f64, &ProbePoint)> = None;
    for pt in points {
        let g = plant.affine(&pt.x, &pt.z, pt.t)?.gain;
        let m = min_symmetric_eigenvalue(&g);
        if best.is_none_or(|(b, _)| m < b) {
            best = Some((m, pt));
        }
    }
    let (min_eigenvalue, at) = best.ok_or(Error::InvalidParameter {
        name: "points",
        reason: "probe grid is empty".into(),
    })?;
    Ok(ProbeReport {
        min_eigenvalue,
        at: at.clone(),
        samples: points.len(),
    })
}

/// `steps x steps` grid over `theta in [-pi, pi]^2` at rest, for each time in `times`.
pub fn pendulum_probe_grid(steps: usize, times: &[f64]) -> Vec<ProbePoint> {
    use std::f64::consts::PI;
    let at = |i: usize| -PI + 2.0 * PI * i as f64 / (steps - 1).max(1) as f64;
    let mut out = Vec::with_capacity(steps * steps * times.len());
    for &t in times {
        for a in 0..steps {
            for b in 0..steps {
                out.push(ProbePoint {
                    x: vec![at(a), at(b), 0.0, 0.0],
                    z: vec![0.0, 0.0],
                    t,
                });
            }
        }
    }
    out
}
