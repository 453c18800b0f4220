use serde::{Deserialize, Serialize};

use super::perturbation::Perturbation;
use crate::spaces::Parameters;
use crate::{Error, Result};

/// Advisory evaluation of the ball-invariance and contraction conditions with
/// an empirical constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallnessReport {
    pub radius: f64,
    pub delta: f64,
    pub lambda: f64,
    pub constant: f64,
    /// `A(λδ)`
    pub tail: f64,
    /// `C (R^p + δ^{σ+1} + A)`, compared against `R`
    pub into_lhs: f64,
    pub into_margin: f64,
    pub into_ok: bool,
    /// `C (R^{p−1} + δ + A + R^{p−1}(δ^{1−σ(p−1)} + A))`, compared against 3/4
    pub contraction_lhs: f64,
    pub contraction_margin: f64,
    pub contraction_ok: bool,
}

impl SmallnessReport {
    pub fn passes(&self) -> bool {
        self.into_ok && self.contraction_ok
    }
}

pub fn smallness_conditions(
    radius: f64,
    delta: f64,
    g: &Perturbation,
    params: &Parameters,
    constant: f64,
) -> Result<SmallnessReport> {
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(Error::InvalidParameter(format!("ball radius R = {radius} must lie in (0, 1]")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("split parameter δ = {delta} must lie in (0, 1)")));
    }
    if !(constant >= 0.0 && constant.is_finite()) {
        return Err(Error::InvalidParameter(format!("constant C = {constant} must be finite and ≥ 0")));
    }
    let (p, s) = (params.p, params.sigma);
    let tail = g.tail(params.lambda * delta);
    let into_lhs = constant * (radius.powf(p) + delta.powf(s + 1.0) + tail);
    let rp = radius.powf(p - 1.0);
    let contraction_lhs = constant
        * (rp + delta + tail + rp * (delta.powf(params.contraction_exponent()) + tail));
    Ok(SmallnessReport {
        radius,
        delta,
        lambda: params.lambda,
        constant,
        tail,
        into_lhs,
        into_margin: radius - into_lhs,
        into_ok: into_lhs <= radius,
        contraction_lhs,
        contraction_margin: 0.75 - contraction_lhs,
        contraction_ok: contraction_lhs <= 0.75,
    })
}

/// Smallest λ in `[lambda_min, lambda_max]` for which both conditions hold,
/// by bisection in `log λ` (the tail term is nonincreasing in λ). `None` if
/// they fail at `lambda_max`.
pub fn minimal_lambda(
    radius: f64,
    delta: f64,
    g: &Perturbation,
    params: &Parameters,
    constant: f64,
    lambda_min: f64,
    lambda_max: f64,
) -> Result<Option<f64>> {
    let passes = |lambda: f64| -> Result<bool> {
        let pr = params.with_lambda(lambda)?;
        Ok(smallness_conditions(radius, delta, g, &pr, constant)?.passes())
    };
    if !passes(lambda_max)? {
        return Ok(None);
    }
    if passes(lambda_min)? {
        return Ok(Some(lambda_min));
    }
    let (mut lo, mut hi) = (lambda_min.ln(), lambda_max.ln());
    while hi - lo > 1e-12 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if passes(mid.exp())? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi.exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_perturbation_reduces_to_power_terms() {
        let pr = Parameters::with_p(1.5).unwrap();
        let r = smallness_conditions(0.01, 1e-9, &Perturbation::Zero, &pr, 1.0).unwrap();
        assert_eq!(r.tail, 0.0);
        assert!(r.passes());
        assert!((r.into_lhs - (0.01f64.powf(1.5) + 1e-9f64.powf(1.01))).abs() < 1e-15);
    }

    #[test]
    fn compact_support_kills_the_tail() {
        let g = Perturbation::CompactBump { amplitude: 5.0, radius: 1.0 };
        let pr = Parameters::with_p(1.5).unwrap().with_lambda(20.0).unwrap();
        let r = smallness_conditions(0.1, 0.05, &g, &pr, 0.5).unwrap();
        assert_eq!(r.tail, 0.0);
        let lam = minimal_lambda(0.1, 0.05, &g, &pr, 0.5, 1e-3, 1e6).unwrap().unwrap();
        assert!(lam <= 20.0 + 1e-9);
    }
}
