use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sparse::CsrMatrix;
use crate::spaces::{Field, Grid, Parameters};
use crate::{Error, Result};

/// Which linear operator a system discretises.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorKind {
    /// `L_t φ = Δφ + γ φ_{x_N}/(x_N+t)`
    Drift,
    /// `L^t ψ = −Δψ + μ(μ−1) ψ/(x_N+t)²`
    Schrodinger,
    /// `L^t_τ ψ = −Δψ + τ μ(μ−1) ψ/(x_N+t)²`
    Continuation { tau: f64 },
}

impl OperatorKind {
    /// Coefficient multiplying `ψ/(x_N+t)²`, or `None` for the drift form.
    fn potential_scale(self) -> Option<f64> {
        match self {
            OperatorKind::Drift => None,
            OperatorKind::Schrodinger => Some(1.0),
            OperatorKind::Continuation { tau } => Some(tau),
        }
    }

    pub fn is_symmetric(self) -> bool {
        !matches!(self, OperatorKind::Drift)
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorKind::Drift => f.write_str("drift"),
            OperatorKind::Schrodinger => f.write_str("schrodinger"),
            OperatorKind::Continuation { tau } => write!(f, "continuation(tau={tau})"),
        }
    }
}

/// An assembled Dirichlet problem on a truncated half-space grid.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    kind: OperatorKind,
    params: Parameters,
    grid: Arc<Grid>,
    matrix: CsrMatrix,
    rhs: Field,
    volumes: Vec<f64>,
}

impl LinearSystem {
    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn params(&self) -> &Parameters {
        &self.params
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Operator matrix as written (Dirichlet rows are identity rows).
    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn rhs(&self) -> &Field {
        &self.rhs
    }

    /// Dual cell volumes at interior nodes, 1 on the boundary.
    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    /// Rows scaled by the dual cell volume; symmetric for the Schrödinger
    /// forms.
    pub fn scaled_matrix(&self) -> CsrMatrix {
        self.matrix.scale_rows(&self.volumes)
    }

    /// Interior residual `A u − rhs`, zero on Dirichlet rows.
    pub fn residual(&self, u: &Field) -> Result<Field> {
        if !u.same_grid(&self.rhs) {
            return Err(Error::GridMismatch("residual of a field on another grid".into()));
        }
        let au = self.matrix.matvec(u.values());
        let values = au
            .iter()
            .zip(self.rhs.values())
            .enumerate()
            .map(|(i, (a, b))| if self.grid.is_boundary(i) { 0.0 } else { a - b })
            .collect();
        Field::from_values(&self.grid, values, true)
    }

    pub fn write_matrix(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.matrix.to_coo_text())?;
        Ok(())
    }
}

/// Assembles `kind` on `grid` with right-hand side `rhs`. Boundary values of
/// `rhs` are replaced by zero.
pub fn assemble(
    kind: OperatorKind,
    params: &Parameters,
    grid: &Arc<Grid>,
    rhs: &Field,
) -> Result<LinearSystem> {
    if **rhs.grid() != **grid {
        return Err(Error::GridMismatch("right-hand side lives on another grid".into()));
    }
    rhs.check_finite()?;
    let matrix = match kind.potential_scale() {
        Some(tau) => {
            if !(0.0..=1.0).contains(&tau) {
                return Err(Error::TauOutOfRange(tau));
            }
            schrodinger_matrix(grid, params, tau)
        }
        None => {
            if params.t < 1.0 {
                return Err(Error::ShiftTooSmall(params.t));
            }
            drift_matrix(grid, params.gamma, params.t, true)?
        }
    };
    let rhs = Field::from_values(grid, rhs.values().to_vec(), true)?;
    Ok(LinearSystem {
        kind,
        params: params.clone(),
        grid: Arc::clone(grid),
        matrix,
        rhs,
        volumes: dual_volumes(grid),
    })
}

/// Stencil matrix of `W̃_t ψ = −Δψ − p ψ_{x_N}/((p−1)x_N + t)` with identity
/// Dirichlet rows.
pub fn rescaled_drift_matrix(grid: &Grid, params: &Parameters) -> CsrMatrix {
    let (p, t) = (params.p, params.t);
    build(grid, |i, row| {
        push_laplacian(grid, i, -1.0, row);
        let x = grid.height(i);
        push_vertical_d1(grid, i, -p / ((p - 1.0) * x + t), row);
    })
}

fn dual_volumes(grid: &Grid) -> Vec<f64> {
    (0..grid.len())
        .map(|i| {
            if grid.is_boundary(i) {
                1.0
            } else {
                let m = grid.multi(i);
                (0..grid.dim()).map(|a| grid.axis(a).dual_width(m[a])).product()
            }
        })
        .collect()
}

fn schrodinger_matrix(grid: &Grid, params: &Parameters, tau: f64) -> CsrMatrix {
    let c = tau * params.potential();
    build(grid, |i, row| {
        push_laplacian(grid, i, -1.0, row);
        let s = grid.height(i) + params.t;
        row.push((i, c / (s * s)));
    })
}

fn drift_matrix(grid: &Grid, gamma: f64, t: f64, check_peclet: bool) -> Result<CsrMatrix> {
    if check_peclet {
        let v = grid.vertical();
        for j in 1..v.len() - 1 {
            let (hm, hp) = v.spacings(j);
            let x = v.nodes()[j];
            let peclet = gamma * hm.max(hp) / (x + t);
            if peclet >= 2.0 {
                return Err(Error::Peclet { peclet, height: x });
            }
        }
    }
    Ok(build(grid, |i, row| {
        push_laplacian(grid, i, 1.0, row);
        push_vertical_d1(grid, i, gamma / (grid.height(i) + t), row);
    }))
}

/// Matrix with identity boundary rows and interior rows from `fill`; entries
/// in boundary columns are dropped (zero Dirichlet data).
fn build(grid: &Grid, fill: impl Fn(usize, &mut Vec<(usize, f64)>) + Sync) -> CsrMatrix {
    let rows = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            if grid.is_boundary(i) {
                return vec![(i, 1.0)];
            }
            let mut row = Vec::with_capacity(2 * grid.dim() + 1);
            fill(i, &mut row);
            row.retain(|&(j, _)| j == i || !grid.is_boundary(j));
            row
        })
        .collect();
    CsrMatrix::from_rows(rows)
}

fn push_laplacian(grid: &Grid, i: usize, scale: f64, row: &mut Vec<(usize, f64)>) {
    let m = grid.multi(i);
    for a in 0..grid.dim() {
        if let Some((idx, w)) = grid.axis(a).d2_weights(m[a]) {
            for k in 0..3 {
                let j = i + idx[k] * grid.stride(a) - m[a] * grid.stride(a);
                row.push((j, scale * w[k]));
            }
        }
    }
}

fn push_vertical_d1(grid: &Grid, i: usize, scale: f64, row: &mut Vec<(usize, f64)>) {
    let a = grid.dim() - 1;
    let m = grid.multi(i)[a];
    let (idx, w) = grid.vertical().d1_weights(m);
    for k in 0..3 {
        row.push((i + idx[k] - m, scale * w[k]));
    }
}
