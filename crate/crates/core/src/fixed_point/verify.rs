use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::perturbation::Perturbation;
use crate::explicit_family::ExplicitSolution;
use crate::spaces::{
    magnitude, norm, stencil_gradient, stencil_laplacian, Axis, Field, FiniteDifference, Grid,
    NormKind, Parameters,
};
use crate::Result;

/// Residual of `u = u_t + φ*` in the perturbed equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `max |−Δ_h u − (1 + g(λx))|∇_h u|^p|` over interior nodes
    pub max_residual: f64,
    /// `Y` norm of the same nodal residual
    pub y_residual: f64,
    /// The same two quantities for `u_t` alone with `g = 0`.
    pub truncation_max: f64,
    pub truncation_y: f64,
    /// `min |∇_h u|` over interior nodes with `x_N > 1`
    pub certificate: f64,
    pub nonzero: bool,
}

/// Nodal residual `−Δ_h u − (1 + g(λx))|∇_h u|^p`, zero on the boundary.
pub fn pde_residual(u: &Field, g: &Perturbation, lambda: f64, p: f64) -> Result<Field> {
    u.check_finite()?;
    let grid = u.grid();
    let grad = stencil_gradient(grid, u.values());
    let lap = stencil_laplacian(grid, u.values());
    let values = (0..grid.len())
        .map(|i| match lap[i] {
            Some(l) if !grid.is_boundary(i) => {
                let weight = 1.0 + g.eval_dilated(&grid.point(i), lambda);
                -l - weight * magnitude(&grad[i]).powf(p)
            }
            _ => 0.0,
        })
        .collect();
    Field::from_values(grid, values, true)
}

pub fn verify_solution(phi_star: &Field, g: &Perturbation, params: &Parameters) -> Result<ResidualReport> {
    let grid = phi_star.grid();
    let base = ExplicitSolution::new(params)?.field(grid)?;
    let u = Field::from_values(
        grid,
        base.values().iter().zip(phi_star.values()).map(|(a, b)| a + b).collect(),
        false,
    )?;
    let res = pde_residual(&u, g, params.lambda, params.p)?;
    let trunc = pde_residual(&base, &Perturbation::Zero, params.lambda, params.p)?;
    let grad = stencil_gradient(grid, u.values());
    let certificate = (0..grid.len())
        .filter(|&i| !grid.is_boundary(i) && grid.height(i) > 1.0)
        .map(|i| magnitude(&grad[i]))
        .fold(f64::INFINITY, f64::min);
    Ok(ResidualReport {
        max_residual: res.max_abs(),
        y_residual: norm(&res, params, NormKind::Y, &FiniteDifference)?.total,
        truncation_max: trunc.max_abs(),
        truncation_y: norm(&trunc, params, NormKind::Y, &FiniteDifference)?.total,
        certificate,
        nonzero: certificate > 0.0 && certificate.is_finite(),
    })
}

/// `v(y) = λ^{(p−2)/(p−1)} u(y/λ)` on the grid with every axis stretched by
/// λ; `v` solves the undilated problem whenever `u` solves the dilated one.
pub fn undilate(u: &Field, params: &Parameters) -> Result<Field> {
    let lambda = params.lambda;
    let axes = u
        .grid()
        .axes()
        .iter()
        .map(|a| Axis::from_nodes(a.nodes().iter().map(|x| x * lambda).collect()))
        .collect::<Result<Vec<_>>>()?;
    let grid = Arc::new(Grid::new(axes)?);
    let c = lambda.powf((params.p - 2.0) / (params.p - 1.0));
    Field::from_values(&grid, u.values().iter().map(|v| c * v).collect(), false)
}
