//! Funnel functions `phi_j(t) = exp(-c_j t) / t + floor_j`.
//!
//! `phi_j(0)` is unbounded, so the controller only ever consumes the
//! reciprocal `psi_j(t) = t / (exp(-c_j t) + floor_j t)`, which is finite,
//! starts at zero and rises monotonically to `1 / floor_j`.

use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, Error, Result};
use crate::transforms::funnel_gain;

/// Default cap on `|phi_dot / phi^3|` used by [`FunnelSpec::validate`].
pub const DEFAULT_RATIO_CAP: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunnelChannel {
    /// Exponential decay rate [1/s].
    pub rate: f64,
    /// Final funnel value.
    pub floor: f64,
}

/// Per-channel funnel parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FunnelSpec {
    pub channels: Vec<FunnelChannel>,
}

impl FunnelSpec {
    pub fn new(channels: Vec<FunnelChannel>) -> Self {
        Self { channels }
    }

    /// Same rate and floor on every one of `n` channels.
    pub fn uniform(n: usize, rate: f64, floor: f64) -> Self {
        Self::new(vec![FunnelChannel { rate, floor }; n])
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    fn channel(&self, j: usize) -> Result<FunnelChannel> {
        self.channels.get(j).copied().ok_or(Error::Dimension {
            what: "funnel channel index",
            expected: self.channels.len(),
            got: j,
        })
    }

    /// `1 / phi_j(t)`; exactly zero at `t = 0`.
    pub fn phi_reciprocal(&self, j: usize, t: f64) -> Result<f64> {
        check_time(t)?;
        let ch = self.channel(j)?;
        Ok(t / ((-ch.rate * t).exp() + ch.floor * t))
    }

    /// `phi_j(t)` itself; `+inf` at `t = 0`.
    pub fn phi(&self, j: usize, t: f64) -> Result<f64> {
        check_time(t)?;
        let ch = self.channel(j)?;
        if t == 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok((-ch.rate * t).exp() / t + ch.floor)
    }

    /// Funnel gains `beta_j(t)`, all exactly 1 at `t = 0`.
    pub fn beta(&self, t: f64) -> Result<Vec<f64>> {
        (0..self.len())
            .map(|j| funnel_gain(self.phi_reciprocal(j, t)?))
            .collect()
    }

    pub fn phi_all(&self, t: f64) -> Result<Vec<f64>> {
        (0..self.len()).map(|j| self.phi(j, t)).collect()
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<Diagnostic>> {
        self.validate_with_cap(DEFAULT_RATIO_CAP)
    }

    /// Checks parameter signs and that `|phi_dot / phi^3|` stays below `cap`
    /// on a log-spaced grid over `[1e-6, 100]`. `phi_dot` is a central
    /// difference.
    pub fn validate_with_cap(&self, cap: f64) -> std::result::Result<(), Vec<Diagnostic>> {
        let mut diags = Vec::new();
        if self.channels.is_empty() {
            diags.push(Diagnostic::new(
                "funnel",
                "at least one channel is required",
            ));
        }
        for (j, ch) in self.channels.iter().enumerate() {
            let mut ok = true;
            if !(ch.rate > 0.0 && ch.rate.is_finite()) {
                diags.push(Diagnostic::new(
                    format!("funnel[{j}].rate"),
                    format!("rate must be positive (got {})", ch.rate),
                ));
                ok = false;
            }
            if !(ch.floor > 0.0 && ch.floor.is_finite()) {
                diags.push(Diagnostic::new(
                    format!("funnel[{j}].floor"),
                    format!("floor must be positive (got {})", ch.floor),
                ));
                ok = false;
            }
            if ok {
                let worst = max_ratio(*ch);
                if !(worst.is_finite() && worst <= cap) {
                    diags.push(Diagnostic::new(
                        format!("funnel[{j}]"),
                        format!("|phi_dot/phi^3| reaches {worst:e}, above cap {cap:e}"),
                    ));
                }
            }
        }
        if diags.is_empty() {
            Ok(())
        } else {
            Err(diags)
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "funnel time",
            value: t,
            domain: "finite t >= 0",
        })
    }
}

fn max_ratio(ch: FunnelChannel) -> f64 {
    const POINTS: usize = 2000;
    let phi = |t: f64| (-ch.rate * t).exp() / t + ch.floor;
    let (lo, hi) = (1e-6f64.ln(), 100f64.ln());
    (0..POINTS)
        .map(|i| {
            let t = (lo + (hi - lo) * i as f64 / (POINTS - 1) as f64).exp();
            let dt = t * 1e-6;
            let dphi = (phi(t + dt) - phi(t - dt)) / (2.0 * dt);
            (dphi / phi(t).powi(3)).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn benchmark_funnel() -> FunnelSpec {
        FunnelSpec::uniform(2, 0.5, 0.5)
    }

    #[test]
    fn reciprocal_examples() {
        let f = benchmark_funnel();
        assert_eq!(f.phi_reciprocal(0, 0.0).unwrap(), 0.0);
        let expected = 1.0 / ((-0.5f64).exp() + 0.5);
        assert_relative_eq!(
            f.phi_reciprocal(0, 1.0).unwrap(),
            expected,
            max_relative = 1e-15
        );
        assert_relative_eq!(f.phi_reciprocal(1, 1.0).unwrap(), 0.903_72, epsilon = 1e-5);
        assert!((f.phi_reciprocal(0, 100.0).unwrap() - 2.0).abs() < 1e-6);
        assert!(f.phi_reciprocal(0, -1.0).is_err());
        assert!(f.phi_reciprocal(2, 1.0).is_err());
    }

    #[test]
    fn beta_examples() {
        let f = benchmark_funnel();
        assert_eq!(f.beta(0.0).unwrap(), vec![1.0, 1.0]);
        let b1 = f.beta(1.0).unwrap();
        assert_relative_eq!(b1[0], 1.347_86, epsilon = 1e-5);
        let b100 = f.beta(100.0).unwrap();
        assert_relative_eq!(b100[1], 5f64.sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn reciprocal_matches_direct_phi() {
        let f = FunnelSpec::new(vec![
            FunnelChannel {
                rate: 0.5,
                floor: 0.5,
            },
            FunnelChannel {
                rate: 3.0,
                floor: 0.01,
            },
        ]);
        for j in 0..2 {
            for i in 0..=400 {
                let t = 10f64.powf(-6.0 + 8.0 * i as f64 / 400.0);
                let psi = f.phi_reciprocal(j, t).unwrap();
                let phi = f.phi(j, t).unwrap();
                assert!((psi * phi - 1.0).abs() <= 1e-12, "t={t} j={j}");
                let beta = f.beta(t).unwrap()[j];
                let direct = (1.0 / (phi * phi) + 1.0).sqrt();
                assert!((beta - direct).abs() <= 1e-12 * direct);
            }
        }
    }

    #[test]
    fn reciprocal_increasing() {
        let f = benchmark_funnel();
        let mut prev = -1.0;
        for i in 0..2000 {
            let psi = f.phi_reciprocal(0, i as f64 * 0.01).unwrap();
            assert!(psi > prev);
            prev = psi;
        }
    }

    #[test]
    fn validate_accepts_benchmark_funnel() {
        assert!(benchmark_funnel().validate().is_ok());
    }

    #[test]
    fn validate_reports_bad_parameters() {
        let d = FunnelSpec::uniform(1, 0.5, 0.0).validate().unwrap_err();
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("floor must be positive"));
        assert_eq!(d[0].path, "funnel[0].floor");

        let d = FunnelSpec::new(vec![
            FunnelChannel {
                rate: 0.5,
                floor: 0.5,
            },
            FunnelChannel {
                rate: -1.0,
                floor: 0.5,
            },
        ])
        .validate()
        .unwrap_err();
        assert!(d[0].message.contains("rate must be positive"));
        assert_eq!(d[0].path, "funnel[1].rate");

        assert!(FunnelSpec::new(vec![]).validate().is_err());
    }

    #[test]
    fn validate_cap_is_configurable() {
        assert!(benchmark_funnel().validate_with_cap(1e-12).is_err());
    }
}
