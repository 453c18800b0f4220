use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use super::grid::{Axis, Grid, Point};
use crate::{Error, Result};

/// Scalar nodal values on a [`Grid`].
///
/// With the Dirichlet flag set every boundary node holds exactly zero.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
    dirichlet: bool,
}

impl Field {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Field {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.len()],
            dirichlet: true,
        }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>, dirichlet: bool) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        let mut field = Field {
            grid: Arc::clone(grid),
            values,
            dirichlet,
        };
        if dirichlet {
            field.zero_boundary();
        }
        Ok(field)
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(&Point) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self::from_values(grid, values, false)
    }

    /// Samples `f` and then forces zero boundary data.
    pub fn from_fn_dirichlet(grid: &Arc<Grid>, f: impl Fn(&Point) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self::from_values(grid, values, true)
    }

    fn zero_boundary(&mut self) {
        for i in 0..self.values.len() {
            if self.grid.is_boundary(i) {
                self.values[i] = 0.0;
            }
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_dirichlet(&self) -> bool {
        self.dirichlet
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch("fields live on different grids".into()))
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(node) => Err(Error::NonFinite { node }),
            None => Ok(()),
        }
    }

    pub fn scaled(&self, c: f64) -> Result<Field> {
        Field::from_values(
            &self.grid,
            self.values.iter().map(|v| c * v).collect(),
            self.dirichlet,
        )
    }

    /// `self + c · other`
    pub fn axpy(&self, c: f64, other: &Field) -> Result<Field> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        Field::from_values(&self.grid, values, self.dirichlet && other.dirichlet)
    }

    pub fn difference(&self, other: &Field) -> Result<Field> {
        self.axpy(-1.0, other)
    }

    /// Applies `f(point, value)` nodewise; the Dirichlet flag is kept.
    pub fn map(&self, f: impl Fn(&Point, f64) -> f64) -> Result<Field> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(&self.grid.point(i), v))
            .collect();
        Field::from_values(&self.grid, values, self.dirichlet)
    }

    /// Multilinear interpolation at `point`; `None` outside the grid box.
    pub fn interpolate(&self, point: &Point) -> Option<f64> {
        let dim = self.grid.dim();
        let mut lo = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..dim {
            let nodes = self.grid.axis(a).nodes();
            let x = point[a];
            let n = nodes.len();
            let tol = 1e-12 * (nodes[n - 1] - nodes[0]);
            if x < nodes[0] - tol || x > nodes[n - 1] + tol {
                return None;
            }
            let j = nodes.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
            lo[a] = j;
            frac[a] = ((x - nodes[j]) / (nodes[j + 1] - nodes[j])).clamp(0.0, 1.0);
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << dim) {
            let mut w = 1.0;
            let mut flat = 0;
            for a in 0..dim {
                let up = (corner >> a) & 1;
                w *= if up == 1 { frac[a] } else { 1.0 - frac[a] };
                flat += (lo[a] + up) * self.grid.stride(a);
            }
            if w != 0.0 {
                acc += w * self.values[flat];
            }
        }
        Some(acc)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Plain-text dump: the grid header, then one `x_1 … x_N value` row per
    /// node in row-major order.
    pub fn to_dump(&self) -> String {
        let mut out = self.grid.dump_header();
        out.push('\n');
        let dim = self.grid.dim();
        for (i, v) in self.values.iter().enumerate() {
            let p = self.grid.point(i);
            for c in &p[..dim] {
                let _ = write!(out, "{c:.16e} ");
            }
            let _ = writeln!(out, "{v:.16e}");
        }
        out
    }

    pub fn write_dump(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_dump())?;
        Ok(())
    }

    /// Parses the dump format back into a grid and a field. The Dirichlet flag
    /// is set when every boundary value is exactly zero.
    pub fn parse_dump(text: &str) -> Result<Field> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty dump".into()))?;
        let tokens: Vec<&str> = header.split_whitespace().collect();
        let dim: usize = tokens
            .first()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad header `{header}`")))?;
        if !(1..=3).contains(&dim) || tokens.len() != 3 + dim {
            return Err(Error::Parse(format!("bad header `{header}`")));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::Parse(format!("`{s}`: {e}")))
        };
        let r_out = parse_f(tokens[1])?;
        let eps = parse_f(tokens[2])?;
        let shape: Vec<usize> = tokens[3..]
            .iter()
            .map(|t| t.parse().map_err(|e| Error::Parse(format!("`{t}`: {e}"))))
            .collect::<Result<_>>()?;
        let total: usize = shape.iter().product();

        let mut coords: Vec<Vec<f64>> = shape.iter().map(|&n| vec![f64::NAN; n]).collect();
        let mut values = Vec::with_capacity(total);
        let mut strides = vec![1usize; dim];
        for a in (0..dim - 1).rev() {
            strides[a] = strides[a + 1] * shape[a + 1];
        }
        for (row, line) in lines.enumerate() {
            if row >= total {
                return Err(Error::Parse("more rows than the header declares".into()));
            }
            let nums: Vec<f64> = line.split_whitespace().map(parse_f).collect::<Result<_>>()?;
            if nums.len() != dim + 1 {
                return Err(Error::Parse(format!("row {row} has {} columns", nums.len())));
            }
            for a in 0..dim {
                let ia = (row / strides[a]) % shape[a];
                coords[a][ia] = nums[a];
            }
            values.push(nums[dim]);
        }
        if values.len() != total {
            return Err(Error::Parse(format!(
                "expected {total} rows, found {}",
                values.len()
            )));
        }
        let axes = coords
            .into_iter()
            .map(Axis::from_nodes)
            .collect::<Result<Vec<_>>>()?;
        let grid = Grid::new(axes)?;
        if (grid.r_out() - r_out).abs() > 1e-12 * r_out.abs().max(1.0)
            || (grid.eps() - eps).abs() > 1e-12 * eps.abs().max(1.0)
        {
            return Err(Error::Parse("header extent disagrees with the rows".into()));
        }
        let grid = Arc::new(grid);
        let dirichlet = (0..grid.len())
            .filter(|&i| grid.is_boundary(i))
            .all(|i| values[i] == 0.0);
        Field::from_values(&grid, values, dirichlet)
    }
}
