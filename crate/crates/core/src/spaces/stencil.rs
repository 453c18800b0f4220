use std::sync::Arc;

use rayon::prelude::*;

use super::field::Field;
use super::grid::{Grid, Point};
use crate::{Error, Result};

/// Source of nodal gradients and Laplacians for the weighted norms.
pub trait DerivativeOracle {
    fn gradient(&self, field: &Field) -> Result<Vec<Point>>;

    /// Laplacian at every node; `None` where the oracle has no value
    /// (boundary nodes for stencils).
    fn laplacian(&self, field: &Field) -> Result<Vec<Option<f64>>>;
}

/// Second-order three-point differences along each axis.
#[derive(Clone, Copy, Debug, Default)]
pub struct FiniteDifference;

impl DerivativeOracle for FiniteDifference {
    fn gradient(&self, field: &Field) -> Result<Vec<Point>> {
        field.check_finite()?;
        Ok(gradient(field.grid(), field.values()))
    }

    fn laplacian(&self, field: &Field) -> Result<Vec<Option<f64>>> {
        field.check_finite()?;
        Ok(laplacian(field.grid(), field.values()))
    }
}

/// Closed-form derivatives bound to a specific grid.
pub struct AnalyticDerivatives {
    grid: Arc<Grid>,
    gradient: Box<dyn Fn(&Point) -> Point + Send + Sync>,
    laplacian: Box<dyn Fn(&Point) -> f64 + Send + Sync>,
}

impl AnalyticDerivatives {
    pub fn new(
        grid: &Arc<Grid>,
        gradient: impl Fn(&Point) -> Point + Send + Sync + 'static,
        laplacian: impl Fn(&Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        AnalyticDerivatives {
            grid: Arc::clone(grid),
            gradient: Box::new(gradient),
            laplacian: Box::new(laplacian),
        }
    }

    fn check(&self, field: &Field) -> Result<()> {
        if Arc::ptr_eq(&self.grid, field.grid()) || *self.grid == **field.grid() {
            Ok(())
        } else {
            Err(Error::GridMismatch(
                "analytic derivative oracle bound to a different grid".into(),
            ))
        }
    }
}

impl DerivativeOracle for AnalyticDerivatives {
    fn gradient(&self, field: &Field) -> Result<Vec<Point>> {
        self.check(field)?;
        Ok((0..self.grid.len())
            .map(|i| (self.gradient)(&self.grid.point(i)))
            .collect())
    }

    fn laplacian(&self, field: &Field) -> Result<Vec<Option<f64>>> {
        self.check(field)?;
        Ok((0..self.grid.len())
            .map(|i| Some((self.laplacian)(&self.grid.point(i))))
            .collect())
    }
}

/// First derivative along axis `a` at every node.
pub(crate) fn partial(grid: &Grid, values: &[f64], a: usize) -> Vec<f64> {
    let axis = grid.axis(a);
    let stride = grid.stride(a);
    (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let i = grid.axis_index(flat, a);
            let base = flat - i * stride;
            let (idx, w) = axis.d1_weights(i);
            idx.iter()
                .zip(w)
                .map(|(&j, w)| w * values[base + j * stride])
                .sum()
        })
        .collect()
}

pub(crate) fn gradient(grid: &Grid, values: &[f64]) -> Vec<Point> {
    let mut out = vec![[0.0; 3]; grid.len()];
    for a in 0..grid.dim() {
        for (o, d) in out.iter_mut().zip(partial(grid, values, a)) {
            o[a] = d;
        }
    }
    out
}

pub(crate) fn laplacian(grid: &Grid, values: &[f64]) -> Vec<Option<f64>> {
    (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let mut sum = 0.0;
            for a in 0..grid.dim() {
                let axis = grid.axis(a);
                let stride = grid.stride(a);
                let i = grid.axis_index(flat, a);
                let (idx, w) = axis.d2_weights(i)?;
                let base = flat - i * stride;
                sum += idx
                    .iter()
                    .zip(w)
                    .map(|(&j, w)| w * values[base + j * stride])
                    .sum::<f64>();
            }
            Some(sum)
        })
        .collect()
}

pub(crate) fn magnitude(v: &Point) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}
