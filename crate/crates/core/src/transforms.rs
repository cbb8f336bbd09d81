//! Scalar maps used by the barrier controller.
//!
//! * `squash`: s / sqrt(s^2 + kappa), an odd bijection of the reals onto (-1, 1)
//!   that makes the initial normalized error independent of the initial state.
//! * `funnel_gain`: sqrt(psi^2 + 1), where psi = 1 / phi is the reciprocal of
//!   the funnel function. Working with the reciprocal keeps the gain finite at
//!   t = 0 where phi is unbounded.
//! * `barrier`: zeta / (1 - zeta^2), a reciprocal barrier on (-1, 1).
//!
//! Every map is a pure function; kappa is passed explicitly.

use crate::error::{Error, Result};

/// Normalizing coefficient of the squashing map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquashParams {
    kappa: f64,
}

impl SquashParams {
    pub fn new(kappa: f64) -> Result<Self> {
        if kappa > 0.0 && kappa.is_finite() {
            Ok(Self { kappa })
        } else {
            Err(Error::InvalidParameter {
                name: "kappa",
                reason: format!("must be positive and finite, got {kappa}"),
            })
        }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// Lower and upper extents of an asymmetric barrier domain (-lower, upper).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymBounds {
    lower: f64,
    upper: f64,
}

impl AsymBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        for (name, v) in [("lower_M", lower), ("upper_M", upper)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }
}

/// Value of the squashing map and its derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Squashed {
    pub eta: f64,
    pub deriv: f64,
}

/// Value of the barrier map and its derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barrier {
    pub chi: f64,
    pub deriv: f64,
}

pub fn squash(s: f64, p: SquashParams) -> Result<Squashed> {
    if !s.is_finite() {
        return Err(Error::Domain {
            what: "squash",
            value: s,
            domain: "finite reals",
        });
    }
    let q = s * s + p.kappa;
    let root = q.sqrt();
    Ok(Squashed {
        eta: s / root,
        deriv: p.kappa / (q * root),
    })
}

pub fn squash_inverse(eta: f64, p: SquashParams) -> Result<f64> {
    if !(eta.abs() < 1.0) {
        return Err(Error::Domain {
            what: "squash_inverse",
            value: eta,
            domain: "|eta| < 1",
        });
    }
    Ok(eta * p.kappa.sqrt() / (1.0 - eta * eta).sqrt())
}

/// Funnel gain as a function of the reciprocal funnel value `psi = 1/phi`.
pub fn funnel_gain(psi: f64) -> Result<f64> {
    if !(psi >= 0.0 && psi.is_finite()) {
        return Err(Error::Domain {
            what: "funnel_gain",
            value: psi,
            domain: "finite psi >= 0",
        });
    }
    Ok((psi * psi + 1.0).sqrt())
}

pub fn barrier(zeta: f64) -> Result<Barrier> {
    if !(zeta.abs() < 1.0) {
        return Err(Error::Domain {
            what: "barrier",
            value: zeta,
            domain: "|zeta| < 1",
        });
    }
    let z2 = zeta * zeta;
    let gap = 1.0 - z2;
    Ok(Barrier {
        chi: zeta / gap,
        deriv: (1.0 + z2) / (gap * gap),
    })
}

pub fn barrier_inverse(chi: f64) -> Result<f64> {
    if !chi.is_finite() {
        return Err(Error::Domain {
            what: "barrier_inverse",
            value: chi,
            domain: "finite reals",
        });
    }
    if chi == 0.0 {
        return Ok(0.0);
    }
    // Rationalized root of chi*zeta^2 + zeta - chi = 0; avoids cancellation
    // in (sqrt(1 + 4 chi^2) - 1) / (2 chi) for small |chi|.
    Ok(2.0 * chi / (1.0 + (1.0 + 4.0 * chi * chi).sqrt()))
}

/// Asymmetric barrier on (-lower, upper).
pub fn barrier_asym(zeta: f64, b: AsymBounds) -> Result<f64> {
    if !(zeta > -b.lower && zeta < b.upper) {
        return Err(Error::Domain {
            what: "barrier_asym",
            value: zeta,
            domain: "-lower_M < zeta < upper_M",
        });
    }
    Ok(zeta / ((1.0 - zeta / b.upper) * (1.0 + zeta / b.lower)))
}

/// Inverse of [`barrier_asym`]: the root of
/// `(chi / (lo*up)) zeta^2 + (1 - chi (1/lo - 1/up)) zeta - chi = 0` inside `(-lo, up)`.
pub fn barrier_asym_inverse(chi: f64, b: AsymBounds) -> Result<f64> {
    if !chi.is_finite() {
        return Err(Error::Domain {
            what: "barrier_asym_inverse",
            value: chi,
            domain: "finite reals",
        });
    }
    if chi == 0.0 {
        return Ok(0.0);
    }
    let p = b.lower * b.upper;
    let bq = 1.0 - chi * (1.0 / b.lower - 1.0 / b.upper);
    let disc = bq.hypot(2.0 * chi / p.sqrt());
    let zeta = if bq >= 0.0 {
        2.0 * chi / (bq + disc)
    } else {
        p * (disc - bq) / (2.0 * chi)
    };
    Ok(zeta.clamp(-b.lower, b.upper))
}
