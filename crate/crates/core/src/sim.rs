//! Closed-loop integration, trajectory recording and run metrics.
//!
//! The plant state, internal state and controller integrators are advanced
//! together as one augmented vector by fixed-step classical Runge-Kutta.
//! Every stage recomputes the error stack and the control input from the
//! stage state. Steps are aligned with the plant's time breakpoints and a
//! stage landing at a breakpoint sees the left limit of the right-hand side.

use serde::{Deserialize, Serialize};

use crate::controllers::{bric_control, ppc_control_guarded, BricGains, BricState, PpcConfig};
use crate::error::{check_dim, Error, Result};
use crate::error_pipeline::{transform_guarded, ErrorStack, RegulationTarget};
use crate::funnel::FunnelSpec;
use crate::plants::{Plant, PlantDims};
use crate::transforms::SquashParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub t_end: f64,
    pub h: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_guard_margin")]
    pub guard_margin: f64,
    #[serde(default = "default_halvings")]
    pub max_substep_halvings: u32,
}

fn default_record_every() -> usize {
    10
}

fn default_guard_margin() -> f64 {
    crate::error_pipeline::DEFAULT_GUARD_MARGIN
}

fn default_halvings() -> u32 {
    6
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            t_end: 20.0,
            h: 1e-3,
            record_every: default_record_every(),
            guard_margin: default_guard_margin(),
            max_substep_halvings: default_halvings(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self, prefix: &str) -> Vec<crate::error::Diagnostic> {
        use crate::error::Diagnostic;
        let mut out = Vec::new();
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            out.push(Diagnostic::new(
                format!("{prefix}t_end"),
                "must be positive",
            ));
        }
        if !(self.h > 0.0 && self.h <= self.t_end) {
            out.push(Diagnostic::new(
                format!("{prefix}h"),
                "must satisfy 0 < h <= t_end",
            ));
        }
        if self.record_every == 0 {
            out.push(Diagnostic::new(
                format!("{prefix}record_every"),
                "must be at least 1",
            ));
        }
        if !(self.guard_margin > 0.0 && self.guard_margin < 1e-3) {
            out.push(Diagnostic::new(
                format!("{prefix}guard_margin"),
                "must lie in (0, 1e-3)",
            ));
        }
        out
    }
}

/// Feedback law driving the closed loop.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlLaw {
    Bric {
        gains: BricGains,
        funnel: FunnelSpec,
        initial: BricState,
    },
    Ppc(PpcConfig),
}

impl ControlLaw {
    pub fn lambda(&self) -> f64 {
        match self {
            ControlLaw::Bric { gains, .. } => gains.lambda,
            ControlLaw::Ppc(cfg) => cfg.lambda,
        }
    }

    pub fn kind(&self) -> ControllerKind {
        match self {
            ControlLaw::Bric { .. } => ControllerKind::Bric,
            ControlLaw::Ppc(_) => ControllerKind::Ppc,
        }
    }

    fn integrator_len(&self, n: usize) -> usize {
        match self {
            ControlLaw::Bric { .. } => 1 + n,
            ControlLaw::Ppc(_) => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    Bric,
    Ppc,
}

/// One recorded instant of a closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    /// `k` error blocks.
    pub e: Vec<Vec<f64>>,
    /// `k` filtered-error blocks.
    pub s: Vec<Vec<f64>>,
    /// Squashed error (barrier law only).
    pub eta: Vec<f64>,
    /// Normalized error; must stay inside (-1, 1). For the baseline this is `s_k / rho`.
    pub zeta: Vec<f64>,
    /// Barrier-transformed error. For the baseline, the logarithmic transform.
    pub chi: Vec<f64>,
    pub r_xi: Vec<f64>,
    pub r_t: Vec<f64>,
    pub u: Vec<f64>,
    pub d1_hat: f64,
    pub d2_hat: Vec<f64>,
    pub beta: Vec<f64>,
    /// Funnel `phi(t)` for the barrier law, `rho(t)` for the baseline.
    pub funnel: Vec<f64>,
}

impl Sample {
    pub fn s_k(&self) -> &[f64] {
        self.s.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn max_abs_zeta(&self) -> f64 {
        self.zeta.iter().fold(0.0, |m, z| m.max(z.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dims: PlantDims,
    pub controller: ControllerKind,
    pub lambda: f64,
    /// Squashing coefficient for the barrier law.
    pub kappa: Option<f64>,
    pub state_names: Vec<String>,
    pub rows: Vec<Sample>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&Sample> {
        self.rows.last()
    }

    pub fn t_end(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.t)
    }
}

/// Where and why a run stopped early.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error("funnel violation at t = {t}: channel {channel} reached {value}")]
    Violation { t: f64, channel: usize, value: f64 },
    #[error("non-finite state at t = {t} ({what})")]
    NonFinite { t: f64, what: &'static str },
    #[error(transparent)]
    Invalid(#[from] Error),
}

/// Classical fourth-order Runge-Kutta step for `y' = f(y, t)`.
pub fn rk4_step<F>(mut f: F, y: &[f64], t: f64, h: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64], f64) -> Result<Vec<f64>>,
{
    let mut stage = |y: &[f64], t: f64| -> Result<Vec<f64>> {
        let d = f(y, t)?;
        check_dim("stage derivative", y.len(), d.len())?;
        if d.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "stage derivative",
                t,
            });
        }
        Ok(d)
    };
    let shifted =
        |k: &[f64], a: f64| -> Vec<f64> { y.iter().zip(k).map(|(y, k)| y + a * k).collect() };
    let k1 = stage(y, t)?;
    let k2 = stage(&shifted(&k1, 0.5 * h), t + 0.5 * h)?;
    let k3 = stage(&shifted(&k2, 0.5 * h), t + 0.5 * h)?;
    let k4 = stage(&shifted(&k3, h), t + h)?;
    Ok((0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Closed loop of a plant and a control law.
pub struct ClosedLoop<'a, P: Plant + ?Sized> {
    plant: &'a P,
    law: &'a ControlLaw,
    target: &'a RegulationTarget,
    dims: PlantDims,
    squash: Option<SquashParams>,
    guard_margin: f64,
    /// Baseline funnel with its initial excess resolved.
    ppc: Option<PpcConfig>,
}

struct Evaluation {
    deriv: Vec<f64>,
    sample: Sample,
}

impl<'a, P: Plant + ?Sized> ClosedLoop<'a, P> {
    pub fn new(
        plant: &'a P,
        law: &'a ControlLaw,
        target: &'a RegulationTarget,
        guard_margin: f64,
    ) -> Result<Self> {
        let dims = plant.dims();
        check_dim("target", dims.n, target.n())?;
        let squash = match law {
            ControlLaw::Bric {
                gains,
                funnel,
                initial,
            } => {
                check_dim("funnel channels", dims.n, funnel.len())?;
                check_dim("d2_hat", dims.n, initial.d2_hat.len())?;
                Some(SquashParams::new(gains.kappa)?)
            }
            ControlLaw::Ppc(_) => None,
        };
        Ok(Self {
            plant,
            law,
            target,
            dims,
            squash,
            guard_margin,
            ppc: None,
        })
    }

    fn split<'s>(&self, y: &'s [f64]) -> (&'s [f64], &'s [f64], &'s [f64]) {
        let nx = self.dims.state_len();
        let (x, rest) = y.split_at(nx);
        let (z, c) = rest.split_at(self.dims.n_z);
        (x, z, c)
    }

    fn initial_state(&mut self, x0: &[f64], z0: &[f64]) -> Result<Vec<f64>> {
        check_dim("initial state", self.dims.state_len(), x0.len())?;
        check_dim("initial internal state", self.dims.n_z, z0.len())?;
        let mut y = Vec::with_capacity(x0.len() + z0.len() + self.law.integrator_len(self.dims.n));
        y.extend_from_slice(x0);
        y.extend_from_slice(z0);
        match self.law {
            ControlLaw::Bric { initial, .. } => {
                y.push(initial.d1_hat);
                y.extend_from_slice(&initial.d2_hat);
            }
            ControlLaw::Ppc(cfg) => {
                let mut cfg = *cfg;
                if cfg.rho0.is_none() {
                    let stack = ErrorStack::compute(x0, self.dims.k, self.target, cfg.lambda)?;
                    let norm = stack.top().iter().map(|v| v * v).sum::<f64>().sqrt();
                    cfg.rho0 = Some(norm);
                }
                self.ppc = Some(cfg);
            }
        }
        Ok(y)
    }

    fn evaluate(&self, y: &[f64], t: f64) -> Result<Evaluation> {
        let (x, z, c) = self.split(y);
        let n = self.dims.n;
        let stack = ErrorStack::compute(x, self.dims.k, self.target, self.law.lambda())?;
        let mut sample = Sample {
            t,
            x: x.to_vec(),
            z: z.to_vec(),
            e: Vec::new(),
            s: Vec::new(),
            eta: Vec::new(),
            zeta: Vec::new(),
            chi: Vec::new(),
            r_xi: Vec::new(),
            r_t: Vec::new(),
            u: Vec::new(),
            d1_hat: 0.0,
            d2_hat: vec![0.0; n],
            beta: Vec::new(),
            funnel: Vec::new(),
        };
        let mut ctrl_rates = Vec::new();
        match self.law {
            ControlLaw::Bric { gains, funnel, .. } => {
                let beta = funnel.beta(t)?;
                let squash = self.squash.expect("barrier law has squash parameters");
                let ts = transform_guarded(stack.top(), &beta, squash, self.guard_margin)?;
                let st = BricState {
                    d1_hat: c[0],
                    d2_hat: c[1..].to_vec(),
                };
                let out = bric_control(&ts, &beta, &st, gains)?;
                ctrl_rates.push(out.d1_dot);
                ctrl_rates.extend_from_slice(&out.d2_dot);
                sample.funnel = funnel.phi_all(t)?;
                sample.eta = ts.eta;
                sample.zeta = ts.zeta;
                sample.chi = ts.chi;
                sample.r_xi = ts.r_xi;
                sample.r_t = ts.r_t;
                sample.u = out.u;
                sample.d1_hat = st.d1_hat;
                sample.d2_hat = st.d2_hat;
                sample.beta = beta;
            }
            ControlLaw::Ppc(_) => {
                let cfg = self
                    .ppc
                    .as_ref()
                    .expect("initial_state resolves the baseline funnel");
                let rho = crate::controllers::ppc_rho(cfg, n, t)?;
                let out = ppc_control_guarded(stack.top(), &rho, cfg, self.guard_margin)?;
                sample.zeta = out.xi;
                sample.chi = out.epsilon;
                sample.u = out.u;
                sample.funnel = rho;
            }
        }
        let d = self.plant.rhs(x, z, &sample.u, t)?;
        let mut deriv = d.x_dot;
        deriv.extend(d.z_dot);
        deriv.extend(ctrl_rates);
        sample.e = stack.e;
        sample.s = stack.s;
        Ok(Evaluation { deriv, sample })
    }

    fn sample(&self, y: &[f64], t: f64) -> std::result::Result<Sample, RunError> {
        self.evaluate(y, t)
            .map(|e| e.sample)
            .map_err(|e| classify(e, t))
    }

    /// One step of size `h`; on failure, retried as two half steps up to
    /// `halvings` times.
    fn advance(
        &self,
        y: &[f64],
        t: f64,
        h: f64,
        t_left_limit: f64,
        halvings: u32,
    ) -> std::result::Result<Vec<f64>, RunError> {
        let attempt = rk4_step(
            |y, tau| Ok(self.evaluate(y, tau.min(t_left_limit))?.deriv),
            y,
            t,
            h,
        )
        .and_then(|next| {
            // the end state must itself lie inside the funnel
            self.evaluate(&next, (t + h).min(t_left_limit))?;
            Ok(next)
        });
        match attempt {
            Ok(next) => Ok(next),
            Err(_) if halvings > 0 => {
                let half = 0.5 * h;
                let mid = self.advance(y, t, half, t_left_limit, halvings - 1)?;
                self.advance(&mid, t + half, half, t_left_limit, halvings - 1)
            }
            Err(e) => Err(classify(e, t)),
        }
    }
}

fn classify(e: Error, t: f64) -> RunError {
    match e {
        Error::FunnelViolation { channel, value } => RunError::Violation { t, channel, value },
        Error::NonFinite { what, .. } => RunError::NonFinite { t, what },
        other => RunError::Invalid(other),
    }
}

/// Integrates the closed loop from `(x0, z0)` over `[0, sim.t_end]`.
pub fn run_closed_loop<P: Plant + ?Sized>(
    plant: &P,
    law: &ControlLaw,
    target: &RegulationTarget,
    sim: &SimConfig,
    x0: &[f64],
    z0: &[f64],
) -> std::result::Result<Trajectory, RunError> {
    if let Some(d) = sim.validate("sim.").into_iter().next() {
        return Err(RunError::Invalid(Error::InvalidParameter {
            name: "sim",
            reason: d.to_string(),
        }));
    }
    let mut cl = ClosedLoop::new(plant, law, target, sim.guard_margin)?;
    let mut y = cl.initial_state(x0, z0)?;

    let mut bounds: Vec<f64> = plant
        .breakpoints()
        .into_iter()
        .filter(|b| *b > 0.0 && *b < sim.t_end)
        .collect();
    bounds.sort_by(f64::total_cmp);
    bounds.dedup();
    bounds.insert(0, 0.0);
    bounds.push(sim.t_end);

    let mut rows = vec![cl.sample(&y, 0.0)?];
    let mut step: usize = 0;
    let mut t = 0.0;
    for seg in bounds.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let count = ((b - a) / sim.h - 1e-9).ceil().max(1.0) as usize;
        let left_limit = if b < sim.t_end { b.next_down() } else { b };
        for i in 0..count {
            let t0 = a + (b - a) * i as f64 / count as f64;
            let t1 = if i + 1 == count {
                b
            } else {
                a + (b - a) * (i + 1) as f64 / count as f64
            };
            y = cl.advance(&y, t0, t1 - t0, left_limit, sim.max_substep_halvings)?;
            t = t1;
            step += 1;
            if step.is_multiple_of(sim.record_every) {
                rows.push(cl.sample(&y, t)?);
            }
        }
    }
    if rows.last().is_none_or(|r| r.t < t) {
        rows.push(cl.sample(&y, t)?);
    }

    Ok(Trajectory {
        dims: cl.dims,
        controller: law.kind(),
        lambda: law.lambda(),
        kappa: cl.squash.map(|s| s.kappa()),
        state_names: plant.state_names(),
        rows,
    })
}

/// Transient envelope `A exp(-L t) + B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    pub a: f64,
    pub l: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub controller: ControllerKind,
    pub t_end: f64,
    /// `|e_1(t_end)|`.
    pub final_error: f64,
    /// `|s_k(t_end)|`.
    pub final_sk_norm: f64,
    /// Trapezoidal integral of `|u|^2`.
    pub effort: f64,
    /// Largest `|u|` over the recorded rows.
    pub max_u_norm: f64,
    /// Smallest `1 - max_j |zeta_j|` over the recorded rows.
    pub min_margin: f64,
    pub d1_hat_final: f64,
    /// `|d1_hat(t_end) - d1_hat(0.75 t_end)|`.
    pub d1_drift: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope_ok: Option<bool>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn compute_metrics(traj: &Trajectory, envelope: Option<Envelope>) -> Result<Metrics> {
    let last = traj.rows.last().ok_or(Error::InvalidParameter {
        name: "trajectory",
        reason: "no samples recorded".into(),
    })?;
    let effort = traj
        .rows
        .windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * (norm(&w[0].u).powi(2) + norm(&w[1].u).powi(2)))
        .sum();
    let quarter = 0.75 * last.t;
    let d1_ref = traj
        .rows
        .iter()
        .find(|r| r.t >= quarter)
        .map_or(last.d1_hat, |r| r.d1_hat);
    let envelope_ok = envelope.map(|env| {
        traj.rows.iter().all(|r| {
            let e: Vec<f64> = r.e.iter().flatten().copied().collect();
            norm(&e) <= env.a * (-env.l * r.t).exp() + env.b
        })
    });
    Ok(Metrics {
        controller: traj.controller,
        t_end: last.t,
        final_error: last.e.first().map_or(0.0, |e1| norm(e1)),
        final_sk_norm: norm(last.s_k()),
        effort,
        max_u_norm: traj.rows.iter().map(|r| norm(&r.u)).fold(0.0, f64::max),
        min_margin: traj
            .rows
            .iter()
            .map(|r| 1.0 - r.max_abs_zeta())
            .fold(f64::INFINITY, f64::min),
        d1_hat_final: last.d1_hat,
        d1_drift: (last.d1_hat - d1_ref).abs(),
        envelope_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plants::IntegratorChain;
    use approx::assert_relative_eq;

    #[test]
    fn rk4_zero_rhs_is_identity() {
        let y = [1.0, -2.0, 3.5];
        let next = rk4_step(|y, _| Ok(vec![0.0; y.len()]), &y, 0.3, 0.1).unwrap();
        assert_eq!(next, y.to_vec());
    }

    #[test]
    fn rk4_exponential() {
        let next = rk4_step(|y, _| Ok(y.to_vec()), &[1.0], 0.0, 0.1).unwrap();
        assert!((next[0] - 0.1f64.exp()).abs() < 1e-7);
        assert_relative_eq!(next[0], 1.105_170_833_333_333_3, max_relative = 1e-15);
    }

    #[test]
    fn rk4_reports_non_finite_stage() {
        let r = rk4_step(|_, _| Ok(vec![f64::NAN]), &[1.0], 0.0, 0.1);
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    /// Brute-force power series: sum_{m=0}^{4} (hA)^m / m! y.
    fn taylor4(a: &[[f64; 3]; 3], y: [f64; 3], h: f64) -> [f64; 3] {
        let mut term = y;
        let mut acc = y;
        for m in 1..=4 {
            let mut next = [0.0; 3];
            for i in 0..3 {
                for j in 0..3 {
                    next[i] += h * a[i][j] * term[j];
                }
                next[i] /= m as f64;
            }
            term = next;
            for i in 0..3 {
                acc[i] += term[i];
            }
        }
        acc
    }

    #[test]
    fn rk4_matches_taylor_polynomial_on_linear_systems() {
        use proptest::prelude::*;
        use proptest::test_runner::TestRunner;
        let mut runner = TestRunner::default();
        runner
            .run(
                &(
                    proptest::collection::vec(-2f64..2.0, 9),
                    proptest::collection::vec(-1f64..1.0, 3),
                ),
                |(m, y)| {
                    let a = [[m[0], m[1], m[2]], [m[3], m[4], m[5]], [m[6], m[7], m[8]]];
                    let y = [y[0], y[1], y[2]];
                    let h = 0.1;
                    let f = |v: &[f64], _| {
                        Ok((0..3)
                            .map(|i| (0..3).map(|j| a[i][j] * v[j]).sum())
                            .collect())
                    };
                    let got = rk4_step(f, &y, 0.0, h).unwrap();
                    let want = taylor4(&a, y, h);
                    for i in 0..3 {
                        prop_assert!((got[i] - want[i]).abs() <= 1e-13);
                    }
                    Ok(())
                },
            )
            .unwrap();
    }

    fn row(t: f64, u: Vec<f64>, d1: f64) -> Sample {
        Sample {
            t,
            x: vec![0.0],
            z: vec![],
            e: vec![vec![0.0], vec![0.0]],
            s: vec![vec![0.0], vec![0.0]],
            eta: vec![0.0],
            zeta: vec![0.0],
            chi: vec![0.0],
            r_xi: vec![],
            r_t: vec![],
            u,
            d1_hat: d1,
            d2_hat: vec![0.0],
            beta: vec![1.0],
            funnel: vec![1.0],
        }
    }

    fn traj(rows: Vec<Sample>) -> Trajectory {
        Trajectory {
            dims: PlantDims { k: 2, n: 1, n_z: 0 },
            controller: ControllerKind::Bric,
            lambda: 1.0,
            kappa: Some(1.0),
            state_names: vec![],
            rows,
        }
    }

    #[test]
    fn metrics_examples() {
        let zero = traj((0..5).map(|i| row(i as f64, vec![0.0], 0.0)).collect());
        let m = compute_metrics(
            &zero,
            Some(Envelope {
                a: 1.0,
                l: 1.0,
                b: 0.1,
            }),
        )
        .unwrap();
        assert_eq!(m.final_error, 0.0);
        assert_eq!(m.effort, 0.0);
        assert_eq!(m.envelope_ok, Some(true));
        assert_eq!(m.min_margin, 1.0);

        let two = traj(vec![
            row(0.0, vec![1.0, 0.0], 0.0),
            row(1.0, vec![1.0, 0.0], 0.0),
        ]);
        assert_eq!(compute_metrics(&two, None).unwrap().effort, 1.0);

        let flat_tail = traj(
            (0..=8)
                .map(|i| row(i as f64, vec![0.0], if i < 5 { i as f64 } else { 5.0 }))
                .collect(),
        );
        assert_eq!(compute_metrics(&flat_tail, None).unwrap().d1_drift, 0.0);

        assert!(compute_metrics(&traj(vec![]), None).is_err());
    }

    #[test]
    fn breakpoints_are_step_boundaries() {
        let plant = crate::plants::CoupledPendulums::default();
        let law = ControlLaw::Bric {
            gains: BricGains::default(),
            funnel: FunnelSpec::uniform(2, 0.5, 0.5),
            initial: BricState::zeros(2),
        };
        let target = RegulationTarget::new(vec![-0.785, 0.785]).unwrap();
        let sim = SimConfig {
            t_end: 3.0,
            h: 0.03,
            record_every: 1,
            ..SimConfig::default()
        };
        let tr = run_closed_loop(
            &plant,
            &law,
            &target,
            &sim,
            &[-1.6, 0.96, 0.0, 0.0],
            &[0.0, 0.0],
        )
        .unwrap();
        assert!(tr.rows.iter().any(|r| r.t == 2.0));
        assert_eq!(tr.t_end(), 3.0);
        assert!(tr.rows.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn third_order_chain_regulates() {
        let plant = IntegratorChain {
            order: 3,
            drift: vec![0.5],
        };
        let law = ControlLaw::Bric {
            gains: BricGains::default(),
            funnel: FunnelSpec::uniform(1, 0.5, 0.5),
            initial: BricState::zeros(1),
        };
        let target = RegulationTarget::new(vec![1.0]).unwrap();
        let sim = SimConfig {
            t_end: 40.0,
            h: 2e-3,
            ..SimConfig::default()
        };
        let tr = run_closed_loop(&plant, &law, &target, &sim, &[0.0, 0.0, 0.0], &[]).unwrap();
        let m = compute_metrics(&tr, None).unwrap();
        assert!(m.min_margin > 0.0);
        assert!(m.final_error < 0.05, "final error {}", m.final_error);
    }

    #[test]
    fn dimension_errors_surface_as_invalid() {
        let plant = IntegratorChain::double(vec![1.0, 2.0]);
        let law = ControlLaw::Ppc(PpcConfig::default());
        let target = RegulationTarget::new(vec![0.0]).unwrap();
        let r = run_closed_loop(&plant, &law, &target, &SimConfig::default(), &[0.0; 4], &[]);
        assert!(matches!(r, Err(RunError::Invalid(Error::Dimension { .. }))));
    }
}
