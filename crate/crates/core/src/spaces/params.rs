use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Weight exponent used near the boundary when none is configured.
pub const DEFAULT_SIGMA: f64 = 0.01;

/// The derived constant pack attached to an exponent `p`.
///
/// `alpha = 1/(p-1)`, `gamma = p/(p-1)`, `mu = gamma/2`. The window
/// `4/3 < p < 2` is exactly the range where `mu + 1 - alpha ∈ (0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub p: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub mu: f64,
    pub sigma: f64,
    pub t: f64,
    pub lambda: f64,
}

impl Parameters {
    pub fn derive(p: f64, sigma: f64, t: f64, lambda: f64) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::InvalidParameter(format!("p = {p} must exceed 1")));
        }
        let alpha = 1.0 / (p - 1.0);
        let gamma = p / (p - 1.0);
        let mu = gamma / 2.0;
        let params = Parameters {
            p,
            alpha,
            gamma,
            mu,
            sigma,
            t,
            lambda,
        };
        let kappa = params.cap_exponent();
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "mu + 1 - alpha = {kappa} is not in (0, 1); p = {p} must lie strictly inside (4/3, 2)"
            )));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma = {sigma} must be positive")));
        }
        let slack = params.contraction_exponent();
        if slack < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma = {sigma} violates sigma + 1 - sigma(p-1) - sigma ≥ 0 (value {slack})"
            )));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("t = {t} must be positive")));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda = {lambda} must be positive"
            )));
        }
        Ok(params)
    }

    /// Derives the pack with the default `sigma`, `t = 1` and `lambda = 1`.
    pub fn with_p(p: f64) -> Result<Self> {
        Self::derive(p, DEFAULT_SIGMA, 1.0, 1.0)
    }

    /// `mu + 1 - alpha`, the growth exponent allowed at infinity in `X_ψ`.
    pub fn cap_exponent(&self) -> f64 {
        self.mu + 1.0 - self.alpha
    }

    /// `sigma + 1 - sigma (p - 1) - sigma`, which the contraction estimate needs
    /// to be nonnegative.
    pub fn contraction_exponent(&self) -> f64 {
        self.sigma + 1.0 - self.sigma * (self.p - 1.0) - self.sigma
    }

    /// `mu (mu - 1)`, the coefficient of the inverse-square potential.
    pub fn potential(&self) -> f64 {
        self.mu * (self.mu - 1.0)
    }

    /// Same pack with a different shift `t`.
    pub fn with_shift(&self, t: f64) -> Result<Self> {
        Self::derive(self.p, self.sigma, t, self.lambda)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::derive(self.p, self.sigma, self.t, lambda)
    }

    /// The shift `t/(p-1)` under which the linearised operator around `u_t`
    /// becomes `-L_{t/(p-1)}`.
    pub fn rescaled_shift(&self) -> f64 {
        self.t / (self.p - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_three_halves() {
        let pr = Parameters::derive(1.5, 0.01, 1.0, 1.0).unwrap();
        assert_eq!(pr.alpha, 2.0);
        assert_eq!(pr.gamma, 3.0);
        assert_eq!(pr.mu, 1.5);
        assert_eq!(pr.cap_exponent(), 0.5);
    }

    #[test]
    fn endpoints_rejected() {
        let err = Parameters::derive(4.0 / 3.0, 0.01, 1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("mu + 1 - alpha"));
        assert!(Parameters::derive(2.0, 0.01, 1.0, 1.0).is_err());
        assert!(Parameters::derive(1.2, 0.01, 1.0, 1.0).is_err());
    }

    #[test]
    fn sigma_inequality() {
        // sigma (p - 1) ≤ 1 is the whole content of the inequality
        assert!(Parameters::derive(1.5, 2.0, 1.0, 1.0).is_ok());
        assert!(Parameters::derive(1.5, 2.01, 1.0, 1.0).is_err());
        assert!(Parameters::derive(1.5, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn shift_and_dilation_positive() {
        assert!(Parameters::derive(1.5, 0.01, 0.0, 1.0).is_err());
        assert!(Parameters::derive(1.5, 0.01, 1.0, -1.0).is_err());
        let pr = Parameters::with_p(1.5).unwrap();
        assert_eq!(pr.rescaled_shift(), 2.0);
    }
}
