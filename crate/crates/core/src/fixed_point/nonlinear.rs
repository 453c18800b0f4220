use std::sync::Arc;

use super::perturbation::Perturbation;
use crate::explicit_family::ExplicitSolution;
use crate::linear_solver::{assemble, boundary_cap, bump_at, solve, solve_direct, OperatorKind, SolveReport, SolverConfig};
use crate::spaces::{stencil_gradient, Field, Grid, NormKind, Parameters, Point};
use crate::{Error, Result};

/// `|x+y|^p − |x|^p − p|x|^{p−2} x·y`, evaluated without cancellation for
/// `|y| ≪ |x|` and clamped at 0 (the exact value is nonnegative by
/// convexity). At `x = 0` the linear term is taken as 0.
pub fn taylor_remainder(x: &[f64], y: &[f64], p: f64) -> f64 {
    let nx2: f64 = x.iter().map(|v| v * v).sum();
    let ny2: f64 = y.iter().map(|v| v * v).sum();
    if nx2 == 0.0 {
        return ny2.powf(0.5 * p);
    }
    let w = x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / nx2;
    let s = ny2 / nx2;
    let z = 2.0 * w + s;
    let q = 0.5 * p;
    // (1+z)^q − 1 − q z
    let bracket = if z.abs() < 1e-3 {
        let c2 = 0.5 * q * (q - 1.0);
        c2 * z * z
            * (1.0 + (q - 2.0) / 3.0 * z * (1.0 + (q - 3.0) / 4.0 * z * (1.0 + (q - 4.0) / 5.0 * z)))
    } else {
        (q * z.ln_1p()).exp_m1() - q * z
    };
    (nx2.powf(q) * (bracket + q * s)).max(0.0)
}

/// Analytic gradient of `u_t` at a node: `u_t'(x_N) e_N`.
pub(crate) fn base_gradient(sol: &ExplicitSolution, point: &Point, dim: usize) -> Point {
    let mut a = [0.0; 3];
    a[dim - 1] = sol.slope(point[dim - 1]);
    a
}

/// `g(λx)|∇u_t + ∇φ|^p + [|∇u_t + ∇φ|^p − |∇u_t|^p − p|∇u_t|^{p−2}∇u_t·∇φ]`
/// with the analytic `∇u_t` and the stencil `∇φ`; zero on the boundary.
pub fn nonlinear_rhs(phi: &Field, g: &Perturbation, params: &Parameters) -> Result<Field> {
    phi.check_finite()?;
    let grid = phi.grid();
    let dim = grid.dim();
    let sol = ExplicitSolution::new(params)?;
    let grad = stencil_gradient(grid, phi.values());
    let mut values = vec![0.0; grid.len()];
    for (i, v) in values.iter_mut().enumerate() {
        if grid.is_boundary(i) {
            continue;
        }
        let b = grad[i];
        if b.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { node: i });
        }
        let point = grid.point(i);
        let a = base_gradient(&sol, &point, dim);
        let sum: Point = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
        let mag = sum.iter().map(|c| c * c).sum::<f64>().sqrt();
        let forcing = if g.is_zero() {
            0.0
        } else {
            g.eval_dilated(&point, params.lambda) * mag.powf(params.p)
        };
        *v = forcing + taylor_remainder(&a[..dim], &b[..dim], params.p);
    }
    Field::from_values(grid, values, true)
}

/// How `W̃_t ψ = F` is handed to the linear solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearRoute {
    /// Conjugated Schrödinger form solved by CG and mapped back.
    Conjugated,
    /// Nonsymmetric drift stencil solved by BiCGSTAB (cross-check).
    Direct,
}

/// Solves `W̃_t ψ = rhs` through `W̃_t = −L_{t/(p−1)}`.
pub fn solve_rescaled(
    rhs: &Field,
    params: &Parameters,
    solver: &SolverConfig,
    route: LinearRoute,
) -> Result<SolveReport> {
    let shifted = params.with_shift(params.rescaled_shift())?;
    let neg = rhs.scaled(-1.0)?;
    let system = assemble(OperatorKind::Drift, &shifted, rhs.grid(), &neg)?;
    match route {
        LinearRoute::Direct => solve_direct(&system, solver),
        LinearRoute::Conjugated => solve(&system, solver),
    }
}

/// `J_λ(φ)`: the solution of `W̃_t ψ = nonlinear_rhs(φ)` with zero boundary
/// data.
pub fn apply_j(
    phi: &Field,
    g: &Perturbation,
    params: &Parameters,
    solver: &SolverConfig,
    route: LinearRoute,
) -> Result<Field> {
    let rhs = nonlinear_rhs(phi, g, params)?;
    if rhs.max_abs() == 0.0 {
        return Ok(Field::zeros(phi.grid()));
    }
    Ok(solve_rescaled(&rhs, params, solver, route)?.solution)
}

/// Heights of the probe bumps in [`linear_stability_constant`].
pub const PROBE_HEIGHTS: [f64; 6] = [0.01, 0.05, 0.25, 1.0, 4.0, 16.0];

/// Empirical `max ‖ψ‖_X / ‖F‖_Y` for `W̃_t ψ = F` over unit-`Y` Gaussian
/// bumps and boundary caps at the [`PROBE_HEIGHTS`] that fit inside the grid.
pub fn linear_stability_constant(
    grid: &Arc<Grid>,
    params: &Parameters,
    solver: &SolverConfig,
    route: LinearRoute,
) -> Result<f64> {
    let mut best: Option<f64> = None;
    for h in PROBE_HEIGHTS {
        if h <= grid.eps() || h >= grid.r_out() {
            continue;
        }
        for f in [bump_at(grid, params, NormKind::Y, h)?, boundary_cap(grid, params, NormKind::Y, h)?] {
            let rep = solve_rescaled(&f, params, solver, route)?;
            if let Some(r) = rep.stability_ratio {
                best = Some(best.map_or(r, |b: f64| b.max(r)));
            }
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("no probe bump fits the grid".into()))
}
