//! Regulation error, filtered-error stack and the transformed quantities fed
//! to the barrier controller.
//!
//! States are stacked as `x = [x_1, ..., x_k]` with each block of length `n`.

use crate::error::{check_dim, Error, Result};
use crate::transforms::{barrier, squash, SquashParams};

/// Distance from the funnel boundary at which a normalized error is treated
/// as a violation.
pub const DEFAULT_GUARD_MARGIN: f64 = 1e-9;

/// Set point `x_d = [x1_d, 0, ..., 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegulationTarget {
    pub x1_d: Vec<f64>,
}

impl RegulationTarget {
    pub fn new(x1_d: Vec<f64>) -> Result<Self> {
        if x1_d.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "x1_d",
                reason: "entries must be finite".into(),
            });
        }
        Ok(Self { x1_d })
    }

    pub fn n(&self) -> usize {
        self.x1_d.len()
    }
}

/// Errors `e_i` and filtered errors `s_i`, each a list of `k` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorStack {
    pub e: Vec<Vec<f64>>,
    pub s: Vec<Vec<f64>>,
}

impl ErrorStack {
    pub fn compute(x: &[f64], k: usize, target: &RegulationTarget, lambda: f64) -> Result<Self> {
        let e = compute_errors(x, k, target)?;
        let s = filtered_errors(&e, lambda)?;
        Ok(Self { e, s })
    }

    /// The highest-order filtered error `s_k`.
    pub fn top(&self) -> &[f64] {
        self.s.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// `e_1 = x_1 - x1_d`, `e_i = x_i` for `i >= 2`.
pub fn compute_errors(x: &[f64], k: usize, target: &RegulationTarget) -> Result<Vec<Vec<f64>>> {
    let n = target.n();
    check_dim("state", k * n, x.len())?;
    Ok(x.chunks(n)
        .enumerate()
        .map(|(i, block)| {
            if i == 0 {
                block.iter().zip(&target.x1_d).map(|(a, d)| a - d).collect()
            } else {
                block.to_vec()
            }
        })
        .collect())
}

/// `s_i = sum_{l=0}^{i-1} C(i-1, l) lambda^l e_{i-l}` (1-based `i`).
pub fn filtered_errors(e: &[Vec<f64>], lambda: f64) -> Result<Vec<Vec<f64>>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("must be positive, got {lambda}"),
        });
    }
    let n = e.first().map_or(0, Vec::len);
    for block in e {
        check_dim("error block", n, block.len())?;
    }
    let mut out = Vec::with_capacity(e.len());
    // coeffs[l] = C(i, l) * lambda^l for the current 0-based i
    let mut coeffs: Vec<f64> = Vec::with_capacity(e.len());
    for i in 0..e.len() {
        coeffs.push(0.0);
        for l in (1..=i).rev() {
            coeffs[l] += lambda * coeffs[l - 1];
        }
        coeffs[0] = 1.0;
        let mut s = vec![0.0; n];
        for (l, c) in coeffs.iter().enumerate() {
            for (acc, v) in s.iter_mut().zip(&e[i - l]) {
                *acc += c * v;
            }
        }
        out.push(s);
    }
    Ok(out)
}

/// Squashed, normalized and barrier-transformed top filtered error.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedState {
    pub s_k: Vec<f64>,
    pub eta: Vec<f64>,
    pub zeta: Vec<f64>,
    pub chi: Vec<f64>,
    /// Diagonal of `R_Xi`.
    pub r_xi: Vec<f64>,
    /// Diagonal of `R_T`.
    pub r_t: Vec<f64>,
}

impl TransformedState {
    /// `R_T chi`, entrywise.
    pub fn barrier_pressure(&self) -> impl Iterator<Item = f64> + '_ {
        self.r_t.iter().zip(&self.chi).map(|(r, c)| r * c)
    }

    /// Largest `|zeta_j|`.
    pub fn max_abs_zeta(&self) -> f64 {
        self.zeta.iter().fold(0.0, |m, z| m.max(z.abs()))
    }
}

pub fn transform(s_k: &[f64], beta: &[f64], p: SquashParams) -> Result<TransformedState> {
    transform_guarded(s_k, beta, p, DEFAULT_GUARD_MARGIN)
}

/// As [`transform`], with an explicit distance from the funnel boundary at
/// which a violation is reported.
pub fn transform_guarded(
    s_k: &[f64],
    beta: &[f64],
    p: SquashParams,
    guard_margin: f64,
) -> Result<TransformedState> {
    check_dim("beta", s_k.len(), beta.len())?;
    let n = s_k.len();
    let mut ts = TransformedState {
        s_k: s_k.to_vec(),
        eta: Vec::with_capacity(n),
        zeta: Vec::with_capacity(n),
        chi: Vec::with_capacity(n),
        r_xi: Vec::with_capacity(n),
        r_t: Vec::with_capacity(n),
    };
    for (j, (&s, &b)) in s_k.iter().zip(beta).enumerate() {
        if !(b >= 1.0 && b.is_finite()) {
            return Err(Error::Domain {
                what: "funnel gain",
                value: b,
                domain: "finite beta >= 1",
            });
        }
        let sq = squash(s, p)?;
        let zeta = b * sq.eta;
        if zeta.abs() >= 1.0 - guard_margin {
            return Err(Error::FunnelViolation {
                channel: j,
                value: zeta,
            });
        }
        let bar = barrier(zeta)?;
        ts.eta.push(sq.eta);
        ts.zeta.push(zeta);
        ts.chi.push(bar.chi);
        ts.r_xi.push(sq.deriv);
        ts.r_t.push(bar.deriv);
    }
    Ok(ts)
}
