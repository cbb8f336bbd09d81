//! Barrier integral control law with its two adaptation integrators, and a
//! logarithmic prescribed-performance baseline.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Diagnostic, Error, Result};
use crate::error_pipeline::TransformedState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BricGains {
    pub lambda: f64,
    pub kappa: f64,
    pub mu_g: f64,
    pub mu_d1: f64,
    pub mu_d2: f64,
}

impl Default for BricGains {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            kappa: 20.0,
            mu_g: 0.1,
            mu_d1: 10.0,
            mu_d2: 10.0,
        }
    }
}

impl BricGains {
    pub fn validate(&self, prefix: &str) -> Vec<Diagnostic> {
        [
            ("lambda", self.lambda),
            ("kappa", self.kappa),
            ("mu_g", self.mu_g),
            ("mu_d1", self.mu_d1),
            ("mu_d2", self.mu_d2),
        ]
        .into_iter()
        .filter(|(_, v)| !(*v > 0.0 && v.is_finite()))
        .map(|(name, v)| {
            Diagnostic::new(
                format!("{prefix}{name}"),
                format!("must be positive (got {v})"),
            )
        })
        .collect()
    }
}

/// Adaptation integrators `d1_hat` (scalar) and `d2_hat` (one per channel).
#[derive(Debug, Clone, PartialEq)]
pub struct BricState {
    pub d1_hat: f64,
    pub d2_hat: Vec<f64>,
}

impl BricState {
    pub fn zeros(n: usize) -> Self {
        Self {
            d1_hat: 0.0,
            d2_hat: vec![0.0; n],
        }
    }
}

/// Control input and integrator rates produced by one evaluation of the law.
#[derive(Debug, Clone, PartialEq)]
pub struct BricOutput {
    pub u: Vec<f64>,
    pub d1_dot: f64,
    pub d2_dot: Vec<f64>,
}

/// `u = -(mu_g + d1) beta R_Xi R_T chi - d2`,
/// `d1' = mu_d1 |R_T chi|^2`, `d2' = mu_d2 beta R_Xi R_T chi`.
pub fn bric_control(
    ts: &TransformedState,
    beta: &[f64],
    st: &BricState,
    g: &BricGains,
) -> Result<BricOutput> {
    let n = ts.chi.len();
    check_dim("beta", n, beta.len())?;
    check_dim("d2_hat", n, st.d2_hat.len())?;
    let gain = g.mu_g + st.d1_hat;
    let mut u = Vec::with_capacity(n);
    let mut d2_dot = Vec::with_capacity(n);
    let mut d1_dot = 0.0;
    for (j, b) in beta.iter().enumerate() {
        let pressure = ts.r_t[j] * ts.chi[j];
        let shaped = b * ts.r_xi[j] * pressure;
        u.push(-gain * shaped - st.d2_hat[j]);
        d2_dot.push(g.mu_d2 * shaped);
        d1_dot += pressure * pressure;
    }
    Ok(BricOutput {
        u,
        d1_dot: g.mu_d1 * d1_dot,
        d2_dot,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PpcConfig {
    pub lambda: f64,
    pub k_ppc: f64,
    /// Initial funnel excess; `None` uses `|s_k(0)|` at the start of a run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<f64>,
    pub rho_rate: f64,
    pub rho_floor: f64,
}

impl Default for PpcConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            k_ppc: 0.1,
            rho0: None,
            rho_rate: 0.5,
            rho_floor: 0.5,
        }
    }
}

impl PpcConfig {
    pub fn validate(&self, prefix: &str) -> Vec<Diagnostic> {
        let mut out: Vec<Diagnostic> = [
            ("lambda", self.lambda),
            ("k_ppc", self.k_ppc),
            ("rho_rate", self.rho_rate),
            ("rho_floor", self.rho_floor),
        ]
        .into_iter()
        .filter(|(_, v)| !(*v > 0.0 && v.is_finite()))
        .map(|(name, v)| {
            Diagnostic::new(
                format!("{prefix}{name}"),
                format!("must be positive (got {v})"),
            )
        })
        .collect();
        if let Some(r0) = self.rho0 {
            if !(r0 > self.rho_floor && r0.is_finite()) {
                out.push(Diagnostic::new(
                    format!("{prefix}rho0"),
                    format!("must exceed rho_floor {} (got {r0})", self.rho_floor),
                ));
            }
        }
        out
    }

    /// Funnel value at `t` for an initial excess `rho0`.
    pub fn rho_at(&self, rho0: f64, t: f64) -> f64 {
        rho0 * (-self.rho_rate * t).exp() + self.rho_floor
    }
}

/// `rho_j(t) = rho0 exp(-rate t) + floor` on each of `n` channels.
///
/// `cfg.rho0` must be resolved; see [`PpcConfig::rho0`].
pub fn ppc_rho(cfg: &PpcConfig, n: usize, t: f64) -> Result<Vec<f64>> {
    let rho0 = cfg.rho0.ok_or(Error::InvalidParameter {
        name: "rho0",
        reason: "unresolved; set it or let the run derive it from s_k(0)".into(),
    })?;
    Ok(vec![cfg.rho_at(rho0, t); n])
}

/// Per-channel normalized and transformed errors of the baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct PpcOutput {
    pub u: Vec<f64>,
    /// `s_k / rho`.
    pub xi: Vec<f64>,
    /// `ln((1 + xi) / (1 - xi))`.
    pub epsilon: Vec<f64>,
}

pub fn ppc_control(s_k: &[f64], rho: &[f64], cfg: &PpcConfig) -> Result<PpcOutput> {
    ppc_control_guarded(s_k, rho, cfg, 0.0)
}

pub fn ppc_control_guarded(
    s_k: &[f64],
    rho: &[f64],
    cfg: &PpcConfig,
    guard_margin: f64,
) -> Result<PpcOutput> {
    check_dim("rho", s_k.len(), rho.len())?;
    let n = s_k.len();
    let mut out = PpcOutput {
        u: Vec::with_capacity(n),
        xi: Vec::with_capacity(n),
        epsilon: Vec::with_capacity(n),
    };
    for (j, (&s, &r)) in s_k.iter().zip(rho).enumerate() {
        let xi = s / r;
        if !(xi.abs() < 1.0 - guard_margin) {
            return Err(Error::FunnelViolation {
                channel: j,
                value: xi,
            });
        }
        // ln((1+xi)/(1-xi)) = 2 atanh(xi)
        let eps = 2.0 * xi.atanh();
        let jac = 2.0 / (r * (1.0 - xi * xi));
        out.u.push(-cfg.k_ppc * jac * eps);
        out.xi.push(xi);
        out.epsilon.push(eps);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error_pipeline::transform;
    use crate::transforms::SquashParams;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn gains(mu_d1: f64, mu_d2: f64) -> BricGains {
        BricGains {
            lambda: 1.0,
            kappa: 12.0,
            mu_g: 0.1,
            mu_d1,
            mu_d2,
        }
    }

    #[test]
    fn zero_error_returns_integral_action() {
        let p = SquashParams::new(20.0).unwrap();
        let ts = transform(&[0.0, 0.0], &[1.3, 2.0], p).unwrap();
        let st = BricState {
            d1_hat: 4.0,
            d2_hat: vec![0.7, -1.25],
        };
        let out = bric_control(&ts, &[1.3, 2.0], &st, &BricGains::default()).unwrap();
        assert_eq!(out.u, vec![-0.7, 1.25]);
        assert_eq!(out.d1_dot, 0.0);
        assert!(out.d2_dot.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn scalar_example() {
        let p = SquashParams::new(12.0).unwrap();
        let ts = transform(&[2.0], &[1.0], p).unwrap();
        let out = bric_control(&ts, &[1.0], &BricState::zeros(1), &gains(1.0, 1.0)).unwrap();
        // 0.1 * 0.1875 * (2.5 / 1.125) * (2 / 3) = 1 / 36
        assert_relative_eq!(out.u[0], -1.0 / 36.0, max_relative = 1e-13);
        // (2.5/1.125 * 2/3)^2 = (40/27)^2
        assert_relative_eq!(out.d1_dot, (40.0f64 / 27.0).powi(2), max_relative = 1e-13);
        assert_relative_eq!(out.d1_dot, 2.1948, epsilon = 1e-4);
        assert_relative_eq!(out.d2_dot[0], 0.2778, epsilon = 1e-4);

        let scaled = bric_control(&ts, &[1.0], &BricState::zeros(1), &gains(10.0, 10.0)).unwrap();
        assert_relative_eq!(scaled.d1_dot, 10.0 * out.d1_dot, max_relative = 1e-14);
        assert_relative_eq!(scaled.d2_dot[0], 10.0 * out.d2_dot[0], max_relative = 1e-14);
    }

    #[test]
    fn homogeneity_in_chi() {
        let ts = TransformedState {
            s_k: vec![1.0, -2.0],
            eta: vec![0.1, -0.2],
            zeta: vec![0.2, -0.3],
            chi: vec![0.4, -0.7],
            r_xi: vec![0.2, 0.15],
            r_t: vec![1.3, 1.6],
        };
        let mut doubled = ts.clone();
        doubled.chi.iter_mut().for_each(|c| *c *= 2.0);
        let g = BricGains::default();
        let st = BricState::zeros(2);
        let a = bric_control(&ts, &[1.0, 1.5], &st, &g).unwrap();
        let b = bric_control(&doubled, &[1.0, 1.5], &st, &g).unwrap();
        assert_eq!(b.d1_dot, 4.0 * a.d1_dot);
        for j in 0..2 {
            assert_eq!(b.d2_dot[j], 2.0 * a.d2_dot[j]);
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = SquashParams::new(20.0).unwrap();
        let ts = transform(&[0.0, 0.0], &[1.0, 1.0], p).unwrap();
        let r = bric_control(
            &ts,
            &[1.0, 1.0],
            &BricState::zeros(3),
            &BricGains::default(),
        );
        assert!(matches!(r, Err(Error::Dimension { .. })));
    }

    #[test]
    fn ppc_examples() {
        let cfg = PpcConfig {
            k_ppc: 1.0,
            rho0: Some(1.0),
            ..PpcConfig::default()
        };
        assert_eq!(ppc_control(&[0.0], &[1.0], &cfg).unwrap().u, vec![0.0]);
        let u = ppc_control(&[0.5], &[1.0], &cfg).unwrap().u[0];
        assert_relative_eq!(u, -(2.0 / 0.75) * 3f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(u, -2.9297, epsilon = 1e-4);
        assert!(matches!(
            ppc_control(&[1.0], &[1.0], &cfg),
            Err(Error::FunnelViolation { channel: 0, .. })
        ));
    }

    #[test]
    fn ppc_rho_examples() {
        let cfg = PpcConfig {
            rho0: Some(1.0),
            ..PpcConfig::default()
        };
        assert_eq!(ppc_rho(&cfg, 2, 0.0).unwrap(), vec![1.5, 1.5]);
        assert_relative_eq!(ppc_rho(&cfg, 1, 2.0).unwrap()[0], 0.867_88, epsilon = 1e-5);
        assert_relative_eq!(ppc_rho(&cfg, 1, 1e3).unwrap()[0], 0.5, epsilon = 1e-15);
        assert!(ppc_rho(&PpcConfig::default(), 1, 0.0).is_err());
    }

    #[test]
    fn config_validation() {
        let bad = BricGains {
            kappa: -1.0,
            mu_g: 0.0,
            ..BricGains::default()
        };
        let d = bad.validate("controller.");
        assert_eq!(d.len(), 2);
        assert_eq!(d[0].path, "controller.kappa");
        assert_eq!(d[1].path, "controller.mu_g");

        let ppc = PpcConfig {
            rho0: Some(0.2),
            ..PpcConfig::default()
        };
        assert_eq!(ppc.validate("").len(), 1);
        assert!(PpcConfig::default().validate("").is_empty());
    }

    proptest! {
        #[test]
        fn ppc_is_odd(s in -0.99f64..0.99, rho in 0.5f64..3.0) {
            let cfg = PpcConfig { rho0: Some(1.0), ..PpcConfig::default() };
            let a = ppc_control(&[s * rho], &[rho], &cfg).unwrap().u[0];
            let b = ppc_control(&[-s * rho], &[rho], &cfg).unwrap().u[0];
            prop_assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn d1_rate_nonnegative(
            s in proptest::collection::vec(-50f64..50.0, 3),
            beta in proptest::collection::vec(1f64..2.0, 3),
        ) {
            let p = SquashParams::new(20.0).unwrap();
            if let Ok(ts) = transform(&s, &beta, p) {
                let out = bric_control(&ts, &beta, &BricState::zeros(3), &BricGains::default()).unwrap();
                prop_assert!(out.d1_dot >= 0.0);
            }
        }
    }
}
