use std::sync::Arc;

use crate::spaces::{Field, Grid, Parameters};
use crate::{Error, Result};

/// `u_t(x) = ∫_0^{x_N} ((p-1) y + t)^{-1/(p-1)} dy`, a classical solution of
/// `-Δu = |∇u|^p` vanishing on `x_N = 0`.
#[derive(Clone, Copy, Debug)]
pub struct ExplicitSolution {
    params: Parameters,
}

impl ExplicitSolution {
    pub fn new(params: &Parameters) -> Result<Self> {
        if !(params.t > 0.0) {
            return Err(Error::InvalidParameter(format!("t = {} must be positive", params.t)));
        }
        Ok(ExplicitSolution { params: *params })
    }

    fn base(&self, x: f64) -> f64 {
        (self.params.p - 1.0) * x + self.params.t
    }

    /// Closed-form antiderivative
    /// `[((p-1)x+t)^{(p-2)/(p-1)} - t^{(p-2)/(p-1)}] / (p-2)`.
    pub fn value(&self, x: f64) -> f64 {
        let p = self.params.p;
        let t = self.params.t;
        if (p - 2.0).abs() < 1e-12 {
            return (self.base(x) / t).ln();
        }
        let e = (p - 2.0) / (p - 1.0);
        (self.base(x).powf(e) - t.powf(e)) / (p - 2.0)
    }

    /// `u_t'(x) = ((p-1)x + t)^{-α}`
    pub fn slope(&self, x: f64) -> f64 {
        self.base(x).powf(-self.params.alpha)
    }

    /// `u_t''(x) = -((p-1)x + t)^{-α-1}`, using `α (p-1) = 1`.
    pub fn curvature(&self, x: f64) -> f64 {
        -self.base(x).powf(-self.params.alpha - 1.0)
    }

    /// `sup_{x_N > 0} u_t = t^{(p-2)/(p-1)} / (2 - p)` for `p < 2`.
    pub fn supremum(&self) -> f64 {
        let p = self.params.p;
        if p >= 2.0 {
            return f64::INFINITY;
        }
        self.params.t.powf((p - 2.0) / (p - 1.0)) / (2.0 - p)
    }

    /// `u_t` sampled at every node (no Dirichlet flag: `u_t(ε) ≠ 0`).
    pub fn field(&self, grid: &Arc<Grid>) -> Result<Field> {
        let dim = grid.dim();
        Field::from_fn(grid, |p| self.value(p[dim - 1]))
    }
}

pub fn u_t_eval(x: f64, params: &Parameters) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!("height x_N = {x} must be ≥ 0")));
    }
    Ok(ExplicitSolution::new(params)?.value(x))
}

/// `max |−Δ_h u_t − |∇_h u_t|^p|` over interior nodes.
pub fn u_t_residual(grid: &Arc<Grid>, params: &Parameters) -> Result<f64> {
    let sol = ExplicitSolution::new(params)?;
    let u = sol.field(grid)?;
    let grad = crate::spaces::stencil_gradient(grid, u.values());
    let lap = crate::spaces::stencil_laplacian(grid, u.values());
    let mut worst = 0.0f64;
    for i in 0..grid.len() {
        if let Some(l) = lap[i] {
            let g = crate::spaces::magnitude(&grad[i]);
            worst = worst.max((-l - g.powf(params.p)).abs());
        }
    }
    Ok(worst)
}

/// Same residual with the closed-form derivatives in place of the stencils.
pub fn u_t_residual_analytic(grid: &Arc<Grid>, params: &Parameters) -> Result<f64> {
    let sol = ExplicitSolution::new(params)?;
    let mut worst = 0.0f64;
    for &x in grid.vertical().nodes() {
        worst = worst.max((-sol.curvature(x) - sol.slope(x).abs().powf(params.p)).abs());
    }
    Ok(worst)
}
