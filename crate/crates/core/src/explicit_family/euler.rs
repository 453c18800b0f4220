use serde::{Deserialize, Serialize};

use crate::spaces::Parameters;
use crate::{Error, Result};

/// Roots of the indicial equation `β(β − 1) = τ μ(μ − 1)` of the Euler
/// equation `−ψ'' + τ μ(μ−1) ψ / s² = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerExponents {
    pub tau: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
}

impl EulerExponents {
    /// `β(β−1) − τμ(μ−1)` for either root; zero up to rounding.
    pub fn indicial_defect(&self, params: &Parameters) -> (f64, f64) {
        let c = self.tau * params.potential();
        (
            self.beta_plus * (self.beta_plus - 1.0) - c,
            self.beta_minus * (self.beta_minus - 1.0) - c,
        )
    }
}

pub fn euler_exponents(tau: f64, params: &Parameters) -> Result<EulerExponents> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::TauOutOfRange(tau));
    }
    let mu = params.mu;
    let root = (1.0 + 4.0 * tau * mu * mu - 4.0 * tau * mu).sqrt();
    Ok(EulerExponents {
        tau,
        beta_plus: 0.5 + 0.5 * root,
        beta_minus: 0.5 - 0.5 * root,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderingRow {
    pub tau: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    /// `α − 1 − μ + β+(τ)`
    pub growth_margin: f64,
    /// `β+(τ) − (μ + 1 − α)`
    pub upper_margin: f64,
    /// `(μ + 1 − α) − β−(τ)`
    pub lower_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub cap_exponent: f64,
    pub rows: Vec<OrderingRow>,
    pub min_growth_margin: f64,
    /// Minimum over `τ > 0` only; `+∞` when the grid has no positive τ.
    pub min_upper_margin: f64,
    pub min_lower_margin: f64,
}

/// Checks on the τ grid that `β+` increases strictly, `α − 1 − μ + β+ > 0`,
/// and `β− < μ + 1 − α < β+` for `τ > 0`. The first violation is returned
/// as an error.
pub fn exponent_ordering_report(params: &Parameters, taus: &[f64]) -> Result<OrderingReport> {
    let kappa = params.cap_exponent();
    let mut sorted = taus.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut rows = Vec::with_capacity(sorted.len());
    let mut prev: Option<EulerExponents> = None;
    for &tau in &sorted {
        let e = euler_exponents(tau, params)?;
        if let Some(pe) = prev {
            if tau > pe.tau && e.beta_plus <= pe.beta_plus {
                return Err(Error::OrderingViolated {
                    inequality: "β+ strictly increasing".into(),
                    tau,
                });
            }
        }
        let row = OrderingRow {
            tau,
            beta_plus: e.beta_plus,
            beta_minus: e.beta_minus,
            growth_margin: params.alpha - 1.0 - params.mu + e.beta_plus,
            upper_margin: e.beta_plus - kappa,
            lower_margin: kappa - e.beta_minus,
        };
        if row.growth_margin <= 0.0 {
            return Err(Error::OrderingViolated {
                inequality: "α − 1 − μ + β+(τ) > 0".into(),
                tau,
            });
        }
        if tau > 0.0 && row.upper_margin <= 0.0 {
            return Err(Error::OrderingViolated {
                inequality: "β+(τ) > μ + 1 − α".into(),
                tau,
            });
        }
        if tau > 0.0 && row.lower_margin <= 0.0 {
            return Err(Error::OrderingViolated {
                inequality: "β−(τ) < μ + 1 − α".into(),
                tau,
            });
        }
        rows.push(row);
        prev = Some(e);
    }
    let positive = || rows.iter().filter(|r| r.tau > 0.0);
    Ok(OrderingReport {
        cap_exponent: kappa,
        min_growth_margin: rows.iter().map(|r| r.growth_margin).fold(f64::INFINITY, f64::min),
        min_upper_margin: positive().map(|r| r.upper_margin).fold(f64::INFINITY, f64::min),
        min_lower_margin: positive().map(|r| r.lower_margin).fold(f64::INFINITY, f64::min),
        rows,
    })
}
