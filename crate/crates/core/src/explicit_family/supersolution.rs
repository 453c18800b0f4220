use serde::{Deserialize, Serialize};

use super::quadrature::gauss_legendre;
use crate::spaces::{Axis, Parameters};
use crate::{Error, Result};

/// Reference source `h̃₀ = χ_(0,2) x^{-σ-1} + χ_(1,∞) x^{-(α+1-μ)}`, which
/// dominates `|h|` for every `h` with unit `Y_ψ` norm.
pub fn reference_source(params: &Parameters, x: f64) -> f64 {
    let mut h = 0.0;
    if x > 0.0 && x < 2.0 {
        h += x.powf(-params.sigma - 1.0);
    }
    if x > 1.0 {
        h += x.powf(-(params.alpha + 1.0 - params.mu));
    }
    h
}

fn reference_tail(params: &Parameters, x: f64) -> f64 {
    let s = params.sigma;
    let k = params.alpha + 1.0 - params.mu;
    let mut tail = 0.0;
    if x < 2.0 {
        tail += (x.powf(-s) - 2f64.powf(-s)) / s;
    }
    tail += x.max(1.0).powf(1.0 - k) / (k - 1.0);
    tail
}

/// `H̃₀(x) = ∫_0^x τ h̃₀(τ) dτ + x ∫_x^∞ h̃₀(τ) dτ` in closed form.
pub fn reference_barrier(params: &Parameters, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let s = params.sigma;
    let k = params.alpha + 1.0 - params.mu;
    let m = x.min(2.0);
    let mut head = m.powf(1.0 - s) / (1.0 - s);
    if x > 1.0 {
        head += (x.powf(2.0 - k) - 1.0) / (2.0 - k);
    }
    head + x * reference_tail(params, x)
}

/// `H̃₀'(x) = ∫_x^∞ h̃₀`
pub fn reference_barrier_slope(params: &Parameters, x: f64) -> f64 {
    reference_tail(params, x)
}

/// Decay bound `|h(x)| ≤ amplitude · x^{-decay}` valid for `x ≥ from`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEnvelope {
    pub amplitude: f64,
    pub decay: f64,
    pub from: f64,
}

impl TailEnvelope {
    /// `∫_X^∞ amplitude τ^{-decay} dτ`
    fn integral_from(&self, x: f64) -> Result<f64> {
        if self.decay <= 1.0 {
            return Err(Error::DivergentTail(format!(
                "envelope decay {} ≤ 1 is not integrable",
                self.decay
            )));
        }
        Ok(self.amplitude * x.powf(1.0 - self.decay) / (self.decay - 1.0))
    }
}

pub enum BarrierSource<'a> {
    /// The built-in `h̃₀`, integrated analytically.
    Reference,
    /// A user source vanishing beyond `support_end`.
    Compact {
        source: &'a dyn Fn(f64) -> f64,
        support_end: f64,
    },
    /// A user source integrated up to `truncate_at`, with the remainder
    /// bounded through its decay envelope.
    Decaying {
        source: &'a dyn Fn(f64) -> f64,
        envelope: TailEnvelope,
        truncate_at: f64,
    },
}

/// Solution of `−H'' = h̃` on `(0, ∞)` with `H(0) = 0`, sampled on an axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupersolutionProfile {
    pub heights: Vec<f64>,
    pub values: Vec<f64>,
    /// `H'(x) = ∫_x^∞ h̃`
    pub slopes: Vec<f64>,
    pub sources: Vec<f64>,
    /// Bound on the neglected part of `∫_x^∞ h̃` (0 for the analytic paths).
    pub tail_bound: f64,
    /// `‖H‖_{X_ψ¹} / ‖h̃‖_{Y_ψ¹}` over the sampled nodes.
    pub norm_ratio: f64,
}

pub fn one_dim_supersolution(
    source: &BarrierSource<'_>,
    axis: &Axis,
    params: &Parameters,
) -> Result<SupersolutionProfile> {
    let xs = axis.nodes();
    if xs[0] < 0.0 {
        return Err(Error::InvalidGrid("barrier axis must lie in x ≥ 0".into()));
    }
    let (values, slopes, sources, tail_bound): (Vec<f64>, Vec<f64>, Vec<f64>, f64) = match source {
        BarrierSource::Reference => (
            xs.iter().map(|&x| reference_barrier(params, x)).collect(),
            xs.iter().map(|&x| reference_barrier_slope(params, x)).collect(),
            xs.iter().map(|&x| reference_source(params, x)).collect(),
            0.0,
        ),
        BarrierSource::Compact { source, support_end } => {
            let (v, s) = integrate(*source, xs, support_end.max(xs[xs.len() - 1]))?;
            (v, s, xs.iter().map(|&x| source(x)).collect(), 0.0)
        }
        BarrierSource::Decaying {
            source,
            envelope,
            truncate_at,
        } => {
            let end = truncate_at.max(envelope.from).max(xs[xs.len() - 1]);
            let bound = envelope.integral_from(end)?;
            let (v, s) = integrate(*source, xs, end)?;
            (v, s, xs.iter().map(|&x| source(x)).collect(), bound)
        }
    };
    let norm_ratio = one_dim_ratio(params, xs, &values, &sources);
    Ok(SupersolutionProfile {
        heights: xs.to_vec(),
        values,
        slopes,
        sources,
        tail_bound,
        norm_ratio,
    })
}

/// Cumulative `∫_0^x τ h` and `∫_x^end h` at every node by Gauss–Legendre on
/// each cell, with geometric cells past the last node.
fn integrate(h: &dyn Fn(f64) -> f64, xs: &[f64], end: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = xs.len();
    let weighted = |t: f64| t * h(t);
    let head = if xs[0] > 0.0 {
        let x0 = xs[0];
        gauss_legendre(&|u: f64| weighted(x0 * u * u) * 2.0 * x0 * u, 0.0, 1.0)
    } else {
        0.0
    };
    let mut first = Vec::with_capacity(n);
    first.push(head);
    for w in xs.windows(2) {
        let last = *first.last().expect("nonempty");
        first.push(last + gauss_legendre(&weighted, w[0], w[1]));
    }

    let mut beyond = 0.0;
    let mut a = xs[n - 1];
    while a < end {
        let b = (a * 1.1).max(a + 1e-3).min(end);
        beyond += gauss_legendre(h, a, b);
        a = b;
    }
    if !beyond.is_finite() {
        return Err(Error::DivergentTail("source integral is not finite".into()));
    }
    let mut tails = vec![0.0; n];
    tails[n - 1] = beyond;
    for j in (0..n - 1).rev() {
        tails[j] = tails[j + 1] + gauss_legendre(h, xs[j], xs[j + 1]);
    }
    let values = xs
        .iter()
        .zip(first.iter().zip(&tails))
        .map(|(&x, (i1, t))| i1 + x * t)
        .collect();
    Ok((values, tails))
}

fn one_dim_ratio(params: &Parameters, xs: &[f64], values: &[f64], sources: &[f64]) -> f64 {
    let (s, a, m) = (params.sigma, params.alpha, params.mu);
    let mut x_norm = 0.0f64;
    let mut y_norm = 0.0f64;
    for ((&x, &v), &h) in xs.iter().zip(values).zip(sources) {
        if x <= 0.0 {
            continue;
        }
        if x <= 1.0 {
            x_norm = x_norm.max(x.powf(s - 1.0) * v.abs());
            y_norm = y_norm.max(x.powf(s + 1.0) * h.abs());
        }
        if x >= 1.0 {
            x_norm = x_norm.max(x.powf(a - 1.0 - m) * v.abs());
            y_norm = y_norm.max(x.powf(a + 1.0 - m) * h.abs());
        }
    }
    if y_norm > 0.0 {
        x_norm / y_norm
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_source_gives_zero_barrier() {
        let pr = Parameters::with_p(1.5).unwrap();
        let axis = Axis::geometric(0.01, 10.0, 50).unwrap();
        let zero = |_: f64| 0.0;
        let prof = one_dim_supersolution(
            &BarrierSource::Compact {
                source: &zero,
                support_end: 10.0,
            },
            &axis,
            &pr,
        )
        .unwrap();
        assert!(prof.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn reference_barrier_starts_at_zero_and_is_positive() {
        let pr = Parameters::with_p(1.5).unwrap();
        assert_eq!(reference_barrier(&pr, 0.0), 0.0);
        for x in [1e-6, 0.5, 1.0, 1.5, 2.0, 10.0, 1e4] {
            assert!(reference_barrier(&pr, x) > 0.0);
        }
    }

    #[test]
    fn divergent_envelope_rejected() {
        let pr = Parameters::with_p(1.5).unwrap();
        let axis = Axis::geometric(0.01, 10.0, 50).unwrap();
        let h = |x: f64| 1.0 / x;
        let src = BarrierSource::Decaying {
            source: &h,
            envelope: TailEnvelope {
                amplitude: 1.0,
                decay: 1.0,
                from: 1.0,
            },
            truncate_at: 100.0,
        };
        assert!(matches!(
            one_dim_supersolution(&src, &axis, &pr),
            Err(Error::DivergentTail(_))
        ));
    }
}
