use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::assemble::{assemble, LinearSystem, OperatorKind};
use super::krylov::{bicgstab, pcg, KrylovOutcome, LinePreconditioner};
use crate::spaces::{norm, phi_to_psi, psi_to_phi, shift_weight, Field, FiniteDifference, NormKind, WeightedNormReport};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Relative algebraic residual at which the Krylov iteration stops.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_iters: 20_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub kind: OperatorKind,
    /// φ for the drift form, ψ otherwise.
    pub solution: Field,
    pub iterations: usize,
    pub algebraic_residual: f64,
    /// Weighted norm (`Y` or `Y_ψ`) of the interior stencil residual.
    pub pde_residual: f64,
    /// `X` norm of φ, or `X̂_ψ` norm of ψ.
    pub solution_norm: WeightedNormReport,
    /// `Y` norm of f, or `Y_ψ` norm of h.
    pub rhs_norm: WeightedNormReport,
    /// `solution_norm / rhs_norm`; `None` for zero data.
    pub stability_ratio: Option<f64>,
}

impl SolveReport {
    /// Flat `key=value` record, one pair per line.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "kind={}", self.kind);
        let _ = writeln!(s, "nodes={}", self.solution.len());
        let _ = writeln!(s, "iterations={}", self.iterations);
        let _ = writeln!(s, "algebraic_residual={:.16e}", self.algebraic_residual);
        let _ = writeln!(s, "pde_residual={:.16e}", self.pde_residual);
        let _ = writeln!(s, "solution_norm_kind={}", self.solution_norm.kind);
        let _ = writeln!(s, "solution_norm={:.16e}", self.solution_norm.total);
        let _ = writeln!(s, "rhs_norm_kind={}", self.rhs_norm.kind);
        let _ = writeln!(s, "rhs_norm={:.16e}", self.rhs_norm.total);
        match self.stability_ratio {
            Some(r) => {
                let _ = writeln!(s, "stability_ratio={r:.16e}");
            }
            None => s.push_str("stability_ratio=n/a\n"),
        }
        s
    }
}

/// Solves the system. The Schrödinger forms go through preconditioned CG on
/// the volume-scaled matrix; the drift form is conjugated to `L^t` with
/// `h = −(x_N+t)^μ f`, solved the same way and mapped back.
pub fn solve(system: &LinearSystem, config: &SolverConfig) -> Result<SolveReport> {
    match system.kind() {
        OperatorKind::Drift => {
            let params = system.params();
            let f = system.rhs();
            let dim = system.grid().dim();
            let h = f.map(|p, v| -shift_weight(params, p[dim - 1]) * v)?;
            let conjugate = assemble(OperatorKind::Schrodinger, params, system.grid(), &h)?;
            let (psi, outcome) = symmetric_solve(&conjugate, config, None)?;
            let phi = psi_to_phi(&psi, params)?;
            drift_report(system, phi, outcome)
        }
        _ => {
            let (psi, outcome) = symmetric_solve(system, config, None)?;
            schrodinger_report(system, psi, outcome)
        }
    }
}

/// As [`solve`] for the Schrödinger forms, starting CG from `initial`. Used
/// for kernel checks, where the right-hand side vanishes and convergence is
/// measured against the initial residual.
pub fn solve_from(system: &LinearSystem, config: &SolverConfig, initial: &Field) -> Result<SolveReport> {
    let (psi, outcome) = symmetric_solve(system, config, Some(initial.values()))?;
    schrodinger_report(system, psi, outcome)
}

/// Cross-check mode: BiCGSTAB directly on the nonsymmetric drift matrix.
pub fn solve_direct(system: &LinearSystem, config: &SolverConfig) -> Result<SolveReport> {
    let a = system.scaled_matrix();
    let b = scaled_rhs(system);
    let pc = LinePreconditioner::new(&a, system.grid().vertical().len());
    let outcome = bicgstab(&a, &pc, &b, config.tol, config.max_iters)?;
    let solution = Field::from_values(system.grid(), outcome.solution.clone(), true)?;
    match system.kind() {
        OperatorKind::Drift => drift_report(system, solution, outcome),
        _ => schrodinger_report(system, solution, outcome),
    }
}

fn scaled_rhs(system: &LinearSystem) -> Vec<f64> {
    let grid = system.grid();
    system
        .rhs()
        .values()
        .iter()
        .zip(system.volumes())
        .enumerate()
        .map(|(i, (h, v))| if grid.is_boundary(i) { 0.0 } else { h * v })
        .collect()
}

fn symmetric_solve(
    system: &LinearSystem,
    config: &SolverConfig,
    initial: Option<&[f64]>,
) -> Result<(Field, KrylovOutcome)> {
    let a = system.scaled_matrix();
    let b = scaled_rhs(system);
    let pc = LinePreconditioner::new(&a, system.grid().vertical().len());
    let x0 = initial.map(|x| {
        let grid = system.grid();
        x.iter()
            .enumerate()
            .map(|(i, &v)| if grid.is_boundary(i) { 0.0 } else { v })
            .collect::<Vec<f64>>()
    });
    let outcome = pcg(&a, &pc, &b, x0.as_deref(), config.tol, config.max_iters)?;
    let psi = Field::from_values(system.grid(), outcome.solution.clone(), true)?;
    Ok((psi, outcome))
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

fn schrodinger_report(system: &LinearSystem, psi: Field, outcome: KrylovOutcome) -> Result<SolveReport> {
    let params = system.params();
    let residual = system.residual(&psi)?;
    let pde = norm(&residual, params, NormKind::Ypsi, &FiniteDifference)?.total;
    let solution_norm = norm(&psi, params, NormKind::XpsiHat, &FiniteDifference)?;
    let rhs_norm = norm(system.rhs(), params, NormKind::Ypsi, &FiniteDifference)?;
    Ok(SolveReport {
        kind: system.kind(),
        stability_ratio: ratio(solution_norm.total, rhs_norm.total),
        solution: psi,
        iterations: outcome.iterations,
        algebraic_residual: outcome.relative_residual,
        pde_residual: pde,
        solution_norm,
        rhs_norm,
    })
}

fn drift_report(system: &LinearSystem, phi: Field, outcome: KrylovOutcome) -> Result<SolveReport> {
    let params = system.params();
    let residual = system.residual(&phi)?;
    let pde = norm(&residual, params, NormKind::Y, &FiniteDifference)?.total;
    let solution_norm = norm(&phi, params, NormKind::X, &FiniteDifference)?;
    let rhs_norm = norm(system.rhs(), params, NormKind::Y, &FiniteDifference)?;
    Ok(SolveReport {
        kind: system.kind(),
        stability_ratio: ratio(solution_norm.total, rhs_norm.total),
        solution: phi,
        iterations: outcome.iterations,
        algebraic_residual: outcome.relative_residual,
        pde_residual: pde,
        solution_norm,
        rhs_norm,
    })
}

/// The conjugated unknown `ψ = (x_N+t)^μ φ` of a drift solve.
pub fn conjugated_solution(report: &SolveReport, system: &LinearSystem) -> Result<Field> {
    match report.kind {
        OperatorKind::Drift => phi_to_psi(&report.solution, system.params()),
        _ => Ok(report.solution.clone()),
    }
}
