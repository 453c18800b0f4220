use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::explicit_family::euler_exponents;
use crate::linear_solver::{assemble, solve, solve_from, OperatorKind, SolverConfig};
use crate::spaces::{Axis, Field, Grid, Parameters};
use crate::{Error, Result};

/// Marker carried by every Liouville report.
pub const EVIDENCE_MARKER: &str = "numerical evidence only";

/// Largest `‖ψ‖_∞` accepted from the homogeneous kernel solve.
pub const KERNEL_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub expected: f64,
    pub fitted: f64,
    /// RMS of the log-log regression residuals.
    pub rms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripReport {
    pub marker: String,
    pub tau: f64,
    pub t: f64,
    pub kernel_norm: f64,
    pub kernel_iterations: usize,
    pub decay: ExponentFit,
    pub growth: ExponentFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EulerFitConfig {
    /// The 1D problem lives on `x_N + t ∈ [t, t + span]`.
    pub span: f64,
    /// Geometric node ratio in `x_N + t`.
    pub ratio: f64,
}

impl Default for EulerFitConfig {
    fn default() -> Self {
        EulerFitConfig {
            span: 1000.0,
            ratio: 1.01,
        }
    }
}

fn regression(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - icpt - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, rms)
}

/// Solves `−ψ'' + τμ(μ−1)ψ/(x_N+t)² = 0` on a geometric grid with data
/// `(x_N+t)^β` at both ends and fits the exponent of the interior profile.
pub fn euler_profile_fit(
    tau: f64,
    t: f64,
    beta: f64,
    params: &Parameters,
    fit: &EulerFitConfig,
    solver: &SolverConfig,
) -> Result<ExponentFit> {
    let shifted = params.with_shift(t)?;
    let n = ((1.0 + fit.span / t).ln() / fit.ratio.ln()).ceil() as usize + 1;
    let s_nodes = Axis::geometric(t, t + fit.span, n.max(3))?;
    let axis = Axis::from_nodes(s_nodes.nodes().iter().map(|s| s - t).collect())?;
    let xs = axis.nodes().to_vec();
    let grid = Arc::new(Grid::vertical_only(axis)?);
    let (a, b) = (xs[0], xs[xs.len() - 1]);
    let (va, vb) = ((a + t).powf(beta), (b + t).powf(beta));
    let lift = |x: f64| va + (vb - va) * (x - a) / (b - a);
    let c = tau * shifted.potential();
    // ψ = lift + w with w = 0 at both ends
    let rhs = Field::from_fn(&grid, |p| -c * lift(p[0]) / (p[0] + t).powi(2))?;
    let sys = assemble(OperatorKind::Continuation { tau }, &shifted, &grid, &rhs)?;
    let w = solve(&sys, solver)?.solution;
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(w.values())
        .map(|(&x, &wv)| ((x + t).ln(), (lift(x) + wv).ln()))
        .unzip();
    if ly.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { node: ly.iter().position(|v| !v.is_finite()).unwrap_or(0) });
    }
    let (fitted, rms) = regression(&lx, &ly);
    Ok(ExponentFit {
        expected: beta,
        fitted,
        rms,
    })
}

pub fn liouville_strip_evidence(
    tau: f64,
    t: f64,
    params: &Parameters,
    grid: &Arc<Grid>,
    fit: &EulerFitConfig,
    solver: &SolverConfig,
    seed: u64,
) -> Result<StripReport> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("shift t = {t} must be positive")));
    }
    let exps = euler_exponents(tau, params)?;
    let shifted = params.with_shift(t)?;
    let zero = Field::zeros(grid);
    let sys = assemble(OperatorKind::Continuation { tau }, &shifted, grid, &zero)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Field::from_values(
        grid,
        (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        true,
    )?;
    // the start has unit size, so the relative tolerance must sit well below the threshold
    let tight = SolverConfig {
        tol: solver.tol.min(1e-13),
        ..solver.clone()
    };
    let kernel = solve_from(&sys, &tight, &start)?;
    let kernel_norm = kernel.solution.max_abs();
    if kernel_norm > KERNEL_THRESHOLD {
        return Err(Error::NontrivialKernel(kernel_norm));
    }
    Ok(StripReport {
        marker: EVIDENCE_MARKER.into(),
        tau,
        t,
        kernel_norm,
        kernel_iterations: kernel.iterations,
        decay: euler_profile_fit(tau, t, exps.beta_minus, params, fit, solver)?,
        growth: euler_profile_fit(tau, t, exps.beta_plus, params, fit, solver)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CappedFit {
    pub window: f64,
    /// Worst `|C₁|`, `|C₂|` over the sign patterns of the cap data.
    pub c_plus: f64,
    pub c_minus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceReport {
    pub marker: String,
    pub tau: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub cap_exponent: f64,
    pub upper_margin: f64,
    pub lower_margin: f64,
    pub fits: Vec<CappedFit>,
    /// Coefficient shrink factors between consecutive windows.
    pub shrink_plus: Vec<f64>,
    pub shrink_minus: Vec<f64>,
}

/// Coefficients `(C₁, C₂)` of `C₁x^{β+} + C₂x^{β−}` matching `±x^κ` at the
/// heights `1/W` and `W`, maximised over the sign patterns.
pub fn capped_fit(beta_plus: f64, beta_minus: f64, kappa: f64, window: f64) -> CappedFit {
    let (a, b) = (1.0 / window, window);
    let det = a.powf(beta_plus) * b.powf(beta_minus) - b.powf(beta_plus) * a.powf(beta_minus);
    let mut c_plus = 0.0f64;
    let mut c_minus = 0.0f64;
    for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        let (ra, rb) = (sa * a.powf(kappa), sb * b.powf(kappa));
        let c1 = (ra * b.powf(beta_minus) - rb * a.powf(beta_minus)) / det;
        let c2 = (a.powf(beta_plus) * rb - b.powf(beta_plus) * ra) / det;
        c_plus = c_plus.max(c1.abs());
        c_minus = c_minus.max(c2.abs());
    }
    CappedFit {
        window,
        c_plus,
        c_minus,
    }
}

pub fn liouville_halfspace_evidence(tau: f64, params: &Parameters, windows: &[f64]) -> Result<HalfspaceReport> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::TauOutOfRange(tau));
    }
    let e = euler_exponents(tau, params)?;
    let kappa = params.cap_exponent();
    if !(e.beta_plus > kappa) {
        return Err(Error::OrderingViolated { inequality: "β+(τ) > μ + 1 − α".into(), tau });
    }
    if !(e.beta_minus < kappa) {
        return Err(Error::OrderingViolated { inequality: "β−(τ) < μ + 1 − α".into(), tau });
    }
    let fits: Vec<CappedFit> = windows
        .iter()
        .map(|&w| capped_fit(e.beta_plus, e.beta_minus, kappa, w))
        .collect();
    let shrink = |f: fn(&CappedFit) -> f64| -> Vec<f64> {
        fits.windows(2).map(|p| f(&p[0]) / f(&p[1])).collect()
    };
    Ok(HalfspaceReport {
        marker: EVIDENCE_MARKER.into(),
        tau,
        beta_plus: e.beta_plus,
        beta_minus: e.beta_minus,
        cap_exponent: kappa,
        upper_margin: e.beta_plus - kappa,
        lower_margin: kappa - e.beta_minus,
        shrink_plus: shrink(|c| c.c_plus),
        shrink_minus: shrink(|c| c.c_minus),
        fits,
    })
}
