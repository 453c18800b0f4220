use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::assemble::{assemble, OperatorKind};
use super::solve::{conjugated_solution, solve, SolverConfig};
use crate::explicit_family::reference_barrier;
use crate::spaces::{
    norm, norm_in, shift_weight, Field, FiniteDifference, Grid, NormKind, Parameters, Point,
};
use crate::{Error, Result};

/// Smooth bump centred at height 1 on the vertical axis, scaled to unit norm
/// of `kind` on `grid`.
pub fn unit_bump(grid: &Arc<Grid>, params: &Parameters, kind: NormKind) -> Result<Field> {
    bump_at(grid, params, kind, 1.0)
}

/// Gaussian `exp(−|x − h e_N|²/(h²/2))` centred at height `h`, normalised to
/// unit `kind` norm; `h = 1` is [`unit_bump`].
pub fn bump_at(grid: &Arc<Grid>, params: &Parameters, kind: NormKind, height: f64) -> Result<Field> {
    if !(height > 0.0 && height.is_finite()) {
        return Err(Error::InvalidParameter(format!("bump height {height} must be positive")));
    }
    let dim = grid.dim();
    let w = 0.5 * height * height;
    let raw = Field::from_fn_dirichlet(grid, |p| {
        let mut r2 = (p[dim - 1] - height).powi(2);
        for c in &p[..dim - 1] {
            r2 += c * c;
        }
        (-r2 / w).exp()
    })?;
    if raw.max_abs() == 0.0 {
        return Err(Error::InvalidParameter(format!("bump at height {height} misses every interior node")));
    }
    let n = norm(&raw, params, kind, &FiniteDifference)?.total;
    raw.scaled(1.0 / n)
}

/// `(1 − |x|²/h²)³₊`, centred at the origin and cut by the boundary,
/// normalised to unit `kind` norm.
pub fn boundary_cap(grid: &Arc<Grid>, params: &Parameters, kind: NormKind, height: f64) -> Result<Field> {
    if !(height > 0.0 && height.is_finite()) {
        return Err(Error::InvalidParameter(format!("cap height {height} must be positive")));
    }
    let raw = Field::from_fn_dirichlet(grid, |p| {
        let r2: f64 = p.iter().map(|c| c * c).sum::<f64>() / (height * height);
        if r2 < 1.0 {
            (1.0 - r2).powi(3)
        } else {
            0.0
        }
    })?;
    if raw.max_abs() == 0.0 {
        return Err(Error::InvalidParameter(format!("cap of height {height} misses every interior node")));
    }
    let n = norm(&raw, params, kind, &FiniteDifference)?.total;
    raw.scaled(1.0 / n)
}

/// Rule producing the data of one exhaustion entry on its own grid.
pub type DataRule<'a> = dyn Fn(&Arc<Grid>, &Parameters) -> Result<Field> + Sync + 'a;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExhaustionConfig {
    pub dim: usize,
    /// Increasing outer radii; each box uses ε = 1/R.
    pub radii: Vec<f64>,
    pub transverse_spacing: f64,
    /// Vertical growth ratio cap; derived from σ when absent.
    pub max_ratio: Option<f64>,
    /// Core window `|x_i| ≤ core_half_width`, `core_heights.0 ≤ x_N ≤ core_heights.1`.
    pub core_half_width: f64,
    pub core_heights: (f64, f64),
}

impl Default for ExhaustionConfig {
    fn default() -> Self {
        ExhaustionConfig {
            dim: 2,
            radii: vec![8.0, 16.0, 32.0],
            transverse_spacing: 0.25,
            max_ratio: None,
            core_half_width: 4.0,
            core_heights: (0.25, 4.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionRow {
    pub r: f64,
    pub nodes: usize,
    pub iterations: usize,
    pub stability_ratio: Option<f64>,
    pub core_norm: f64,
    /// Core-window norm of the difference to the previous entry.
    pub cauchy_difference: Option<f64>,
    /// `max |ψ| / (‖h‖_{Y_ψ} H̃₀(x_N))` over interior nodes; 0 for zero data.
    pub domination: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionTable {
    pub kind: OperatorKind,
    pub rows: Vec<ExhaustionRow>,
    /// `max / min` of the stability ratios.
    pub ratio_variation: Option<f64>,
    pub cauchy_decreasing: bool,
    pub dominated: bool,
    pub flags: Vec<String>,
}

pub fn exhaustion_study(
    kind: OperatorKind,
    params: &Parameters,
    data: &DataRule<'_>,
    config: &ExhaustionConfig,
    solver: &SolverConfig,
) -> Result<ExhaustionTable> {
    if config.radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("exhaustion radii must increase".into()));
    }
    let (lo, hi) = config.core_heights;
    let half = config.core_half_width;
    if let Some(&r0) = config.radii.first() {
        if !(lo > 1.0 / r0 && hi < r0 && half < r0) {
            return Err(Error::InvalidParameter(format!(
                "core window must lie inside the smallest box (R = {r0})"
            )));
        }
    }
    let dim = config.dim;
    let in_core = move |p: &Point| {
        p[dim - 1] >= lo && p[dim - 1] <= hi && p[..dim - 1].iter().all(|c| c.abs() <= half)
    };
    let solution_kind = match kind {
        OperatorKind::Drift => NormKind::X,
        _ => NormKind::XpsiHat,
    };
    let max_ratio = config
        .max_ratio
        .unwrap_or_else(|| Grid::max_ratio_for(params.sigma));

    let mut rows = Vec::with_capacity(config.radii.len());
    let mut previous: Option<Field> = None;
    for &r in &config.radii {
        let grid = Arc::new(Grid::exhaustion(dim, r, max_ratio, config.transverse_spacing)?);
        let rhs = data(&grid, params)?;
        let system = assemble(kind, params, &grid, &rhs)?;
        let report = solve(&system, solver)?;
        let core_norm =
            norm_in(&report.solution, params, solution_kind, &FiniteDifference, Some(&in_core))?.total;
        let cauchy_difference = match &previous {
            Some(prev) => {
                let here = &report.solution;
                let diff = prev.map(|p, v| here.interpolate(p).unwrap_or(0.0) - v)?;
                Some(norm_in(&diff, params, solution_kind, &FiniteDifference, Some(&in_core))?.total)
            }
            None => None,
        };
        let domination = domination_ratio(&system, &report, params)?;
        rows.push(ExhaustionRow {
            r,
            nodes: grid.len(),
            iterations: report.iterations,
            stability_ratio: report.stability_ratio,
            core_norm,
            cauchy_difference,
            domination,
        });
        previous = Some(report.solution);
    }

    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.stability_ratio).collect();
    let ratio_variation = (!ratios.is_empty()).then(|| {
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    });
    let diffs: Vec<f64> = rows.iter().filter_map(|r| r.cauchy_difference).collect();
    let cauchy_decreasing = diffs.windows(2).all(|w| w[1] <= w[0]);
    let dominated = rows.iter().all(|r| r.domination <= 1.0);
    let mut flags = Vec::new();
    if !cauchy_decreasing {
        flags.push("core-window Cauchy differences do not decrease".to_string());
    }
    if rows.windows(2).any(|w| w[1].core_norm > 2.0 * w[0].core_norm.max(f64::MIN_POSITIVE)) {
        flags.push("core-window norm more than doubles between consecutive radii".to_string());
    }
    if !dominated {
        flags.push("supersolution domination fails".to_string());
    }
    Ok(ExhaustionTable {
        kind,
        rows,
        ratio_variation,
        cauchy_decreasing,
        dominated,
        flags,
    })
}

fn domination_ratio(
    system: &super::assemble::LinearSystem,
    report: &super::solve::SolveReport,
    params: &Parameters,
) -> Result<f64> {
    let grid = system.grid();
    let dim = grid.dim();
    let h = match system.kind() {
        OperatorKind::Drift => system
            .rhs()
            .map(|p, v| -shift_weight(params, p[dim - 1]) * v)?,
        _ => system.rhs().clone(),
    };
    let h_norm = norm(&h, params, NormKind::Ypsi, &FiniteDifference)?.total;
    if h_norm == 0.0 {
        return Ok(0.0);
    }
    let psi = conjugated_solution(report, system)?;
    let mut worst = 0.0f64;
    for i in (0..grid.len()).filter(|&i| !grid.is_boundary(i)) {
        let barrier = h_norm * reference_barrier(params, grid.height(i));
        worst = worst.max(psi.values()[i].abs() / barrier);
    }
    Ok(worst)
}

/// Ratio spread beyond which a continuation sweep is flagged.
pub const BLOW_UP_FACTOR: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationRow {
    pub tau: f64,
    pub iterations: usize,
    pub solution_norm: f64,
    pub rhs_norm: f64,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationTable {
    pub rows: Vec<ContinuationRow>,
    pub max_ratio: Option<f64>,
    pub min_ratio: Option<f64>,
    /// `max_ratio > BLOW_UP_FACTOR · min_ratio`
    pub blow_up: bool,
}

/// Solves `L^t_τ ψ = h` for every τ and records `‖ψ‖_{X̂_ψ} / ‖h‖_{Y_ψ}`.
pub fn continuation_sweep(
    params: &Parameters,
    grid: &Arc<Grid>,
    h: &Field,
    taus: &[f64],
    solver: &SolverConfig,
) -> Result<ContinuationTable> {
    if let Some(&bad) = taus.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::TauOutOfRange(bad));
    }
    let mut rows = Vec::with_capacity(taus.len());
    for &tau in taus {
        let system = assemble(OperatorKind::Continuation { tau }, params, grid, h)?;
        let report = solve(&system, solver)?;
        rows.push(ContinuationRow {
            tau,
            iterations: report.iterations,
            solution_norm: report.solution_norm.total,
            rhs_norm: report.rhs_norm.total,
            ratio: report.stability_ratio,
        });
    }
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let max_ratio = ratios.iter().cloned().reduce(f64::max);
    let min_ratio = ratios.iter().cloned().reduce(f64::min);
    let blow_up = match (max_ratio, min_ratio) {
        (Some(a), Some(b)) => !(a <= BLOW_UP_FACTOR * b),
        _ => false,
    };
    Ok(ContinuationTable {
        rows,
        max_ratio,
        min_ratio,
        blow_up,
    })
}
