use super::field::Field;
use super::params::Parameters;
use super::stencil::gradient;
use crate::Result;

/// `(x_N + t)^μ`
pub fn shift_weight(params: &Parameters, height: f64) -> f64 {
    (height + params.t).powf(params.mu)
}

/// `ψ(x) = (x_N + t)^μ φ(x)`
pub fn phi_to_psi(phi: &Field, params: &Parameters) -> Result<Field> {
    let dim = phi.grid().dim();
    phi.map(|p, v| shift_weight(params, p[dim - 1]) * v)
}

/// `φ(x) = ψ(x) / (x_N + t)^μ`
pub fn psi_to_phi(psi: &Field, params: &Parameters) -> Result<Field> {
    let dim = psi.grid().dim();
    psi.map(|p, v| v / shift_weight(params, p[dim - 1]))
}

/// Largest interior discrepancy between the stencil gradient of
/// `φ = ψ/(x_N+t)^μ` and `∇ψ/(x_N+t)^μ − μ e_N ψ/(x_N+t)^{μ+1}` built from the
/// stencil gradient of ψ. Vanishes at the order of the stencil.
pub fn gradient_relation_check(psi: &Field, params: &Parameters) -> Result<f64> {
    psi.check_finite()?;
    let grid = psi.grid();
    let dim = grid.dim();
    let phi = psi_to_phi(psi, params)?;
    let grad_phi = gradient(grid, phi.values());
    let grad_psi = gradient(grid, psi.values());
    let mut worst = 0.0f64;
    for i in (0..grid.len()).filter(|&i| !grid.is_boundary(i)) {
        let s = grid.height(i) + params.t;
        let w = s.powf(params.mu);
        for a in 0..dim {
            let mut expected = grad_psi[i][a] / w;
            if a == dim - 1 {
                expected -= params.mu * psi.values()[i] / (w * s);
            }
            worst = worst.max((grad_phi[i][a] - expected).abs());
        }
    }
    Ok(worst)
}
