use serde::{Deserialize, Serialize};

use crate::spaces::Point;
use crate::{Error, Result};

/// Bounded perturbations `g` of the nonlinearity, each with a closed-form
/// tail functional `A(T) = sup_{|x| > T} |g(x)|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Perturbation {
    Zero,
    /// `amplitude (1 − |x|²/radius²)³` inside the ball, 0 outside.
    CompactBump { amplitude: f64, radius: f64 },
    /// `amplitude exp(−|x|²/width²)`
    Gaussian { amplitude: f64, width: f64 },
    /// `amplitude (1 + |x|²)^{−decay/2}`
    Algebraic { amplitude: f64, decay: f64 },
}

impl Perturbation {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(Error::InvalidParameter(format!("perturbation {what} = {v} must be positive and finite")))
        };
        match *self {
            Perturbation::Zero => Ok(()),
            Perturbation::CompactBump { amplitude, radius } => {
                if !amplitude.is_finite() {
                    bad("amplitude", amplitude)
                } else if !(radius > 0.0 && radius.is_finite()) {
                    bad("radius", radius)
                } else {
                    Ok(())
                }
            }
            Perturbation::Gaussian { amplitude, width } => {
                if !amplitude.is_finite() {
                    bad("amplitude", amplitude)
                } else if !(width > 0.0 && width.is_finite()) {
                    bad("width", width)
                } else {
                    Ok(())
                }
            }
            Perturbation::Algebraic { amplitude, decay } => {
                if !amplitude.is_finite() {
                    bad("amplitude", amplitude)
                } else if !(decay > 0.0 && decay.is_finite()) {
                    bad("decay", decay)
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn radial(&self, r: f64) -> f64 {
        match *self {
            Perturbation::Zero => 0.0,
            Perturbation::CompactBump { amplitude, radius } => {
                if r >= radius {
                    0.0
                } else {
                    amplitude * (1.0 - (r / radius).powi(2)).powi(3)
                }
            }
            Perturbation::Gaussian { amplitude, width } => amplitude * (-(r / width).powi(2)).exp(),
            Perturbation::Algebraic { amplitude, decay } => amplitude * (1.0 + r * r).powf(-0.5 * decay),
        }
    }

    /// `g(λ x)` at a node.
    pub fn eval_dilated(&self, point: &Point, lambda: f64) -> f64 {
        let r = point.iter().map(|c| c * c).sum::<f64>().sqrt();
        self.radial(lambda * r)
    }

    /// `‖g‖_∞`
    pub fn sup_norm(&self) -> f64 {
        self.radial(0.0).abs()
    }

    /// `A(T) = sup_{|x| > T} |g(x)|`; every profile is radially nonincreasing.
    pub fn tail(&self, t: f64) -> f64 {
        self.radial(t.max(0.0)).abs()
    }

    pub fn is_zero(&self) -> bool {
        self.sup_norm() == 0.0
    }
}
