use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Node coordinates padded to three components; unused trailing entries are 0
/// and the vertical coordinate `x_N` sits at index `dim - 1`.
pub type Point = [f64; 3];

/// One coordinate axis: strictly increasing node positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    nodes: Vec<f64>,
}

impl Axis {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidGrid(format!(
                "an axis needs at least 3 nodes, got {}",
                nodes.len()
            )));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid("non-finite axis node".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("axis nodes must be strictly increasing".into()));
        }
        Ok(Axis { nodes })
    }

    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let n = n.max(2);
        let h = (hi - lo) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
        nodes[n - 1] = hi;
        Self::from_nodes(nodes)
    }

    /// `x_i = lo (hi/lo)^{i/(n-1)}`; constant ratio between consecutive nodes.
    pub fn geometric(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::InvalidGrid(format!(
                "geometric axis needs 0 < lo < hi, got [{lo}, {hi}]"
            )));
        }
        let n = n.max(2);
        let span = (hi / lo).ln();
        let mut nodes: Vec<f64> = (0..n)
            .map(|i| lo * (span * i as f64 / (n - 1) as f64).exp())
            .collect();
        nodes[0] = lo;
        nodes[n - 1] = hi;
        Self::from_nodes(nodes)
    }

    /// Spacings grow geometrically by `ratio` starting from `lo`, which is the
    /// same as a smooth exponential map of a uniform parameter.
    pub fn graded(lo: f64, hi: f64, n: usize, ratio: f64) -> Result<Self> {
        if !(ratio > 0.0) {
            return Err(Error::InvalidGrid(format!("grading ratio {ratio} must be positive")));
        }
        if (ratio - 1.0).abs() < 1e-14 {
            return Self::uniform(lo, hi, n);
        }
        let n = n.max(2);
        let cells = (n - 1) as i32;
        let h0 = (hi - lo) * (ratio - 1.0) / (ratio.powi(cells) - 1.0);
        let mut nodes = Vec::with_capacity(n);
        let mut x = lo;
        let mut h = h0;
        nodes.push(lo);
        for _ in 1..n {
            x += h;
            h *= ratio;
            nodes.push(x);
        }
        nodes[n - 1] = hi;
        Self::from_nodes(nodes)
    }

    /// Symmetric sinh clustering on `[-half_width, half_width]` toward 0.
    /// `stretch = 0` gives the uniform axis.
    pub fn clustered(half_width: f64, n: usize, stretch: f64) -> Result<Self> {
        if stretch.abs() < 1e-12 {
            return Self::uniform(-half_width, half_width, n);
        }
        let n = n.max(3);
        let denom = stretch.sinh();
        let mut nodes: Vec<f64> = (0..n)
            .map(|i| {
                let xi = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                half_width * (stretch * xi).sinh() / denom
            })
            .collect();
        nodes[0] = -half_width;
        nodes[n - 1] = half_width;
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self::from_nodes(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.nodes[0]
    }

    pub fn last(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Spacing below and above node `i` (the missing side is reported as the
    /// present one).
    pub fn spacings(&self, i: usize) -> (f64, f64) {
        let n = self.nodes.len();
        let below = if i > 0 { self.nodes[i] - self.nodes[i - 1] } else { f64::NAN };
        let above = if i + 1 < n { self.nodes[i + 1] - self.nodes[i] } else { f64::NAN };
        match (i == 0, i + 1 == n) {
            (true, _) => (above, above),
            (_, true) => (below, below),
            _ => (below, above),
        }
    }

    /// Three-point first-derivative weights at node `i`: central in the
    /// interior, one-sided second order at the two ends.
    pub fn d1_weights(&self, i: usize) -> ([usize; 3], [f64; 3]) {
        let x = &self.nodes;
        let n = x.len();
        if i == 0 {
            let h1 = x[1] - x[0];
            let h2 = x[2] - x[1];
            let w0 = -(2.0 * h1 + h2) / (h1 * (h1 + h2));
            let w1 = (h1 + h2) / (h1 * h2);
            let w2 = -h1 / (h2 * (h1 + h2));
            ([0, 1, 2], [w0, w1, w2])
        } else if i == n - 1 {
            let g1 = x[n - 1] - x[n - 2];
            let g2 = x[n - 2] - x[n - 3];
            let wl = (2.0 * g1 + g2) / (g1 * (g1 + g2));
            let wm = -(g1 + g2) / (g1 * g2);
            let wf = g1 / (g2 * (g1 + g2));
            ([n - 3, n - 2, n - 1], [wf, wm, wl])
        } else {
            let hm = x[i] - x[i - 1];
            let hp = x[i + 1] - x[i];
            let s = hm + hp;
            (
                [i - 1, i, i + 1],
                [-hp / (hm * s), (hp - hm) / (hm * hp), hm / (hp * s)],
            )
        }
    }

    /// Three-point second-derivative weights at an interior node.
    pub fn d2_weights(&self, i: usize) -> Option<([usize; 3], [f64; 3])> {
        let x = &self.nodes;
        if i == 0 || i + 1 >= x.len() {
            return None;
        }
        let hm = x[i] - x[i - 1];
        let hp = x[i + 1] - x[i];
        let s = hm + hp;
        Some((
            [i - 1, i, i + 1],
            [2.0 / (hm * s), -2.0 / (hm * hp), 2.0 / (hp * s)],
        ))
    }

    /// Dual cell width `(h_- + h_+)/2` used to symmetrise the Laplacian.
    pub fn dual_width(&self, i: usize) -> f64 {
        let (hm, hp) = self.spacings(i);
        0.5 * (hm + hp)
    }

    /// Index of the node nearest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let pos = self.nodes.partition_point(|&v| v < x);
        if pos == 0 {
            0
        } else if pos >= self.nodes.len() {
            self.nodes.len() - 1
        } else if (self.nodes[pos] - x).abs() < (x - self.nodes[pos - 1]).abs() {
            pos
        } else {
            pos - 1
        }
    }

    /// Index of a node equal to `x` up to a relative tolerance.
    pub fn find(&self, x: f64, rel_tol: f64) -> Option<usize> {
        let i = self.nearest(x);
        let scale = x.abs().max(1.0);
        ((self.nodes[i] - x).abs() <= rel_tol * scale).then_some(i)
    }
}

/// Tensor-product grid over a truncated half-space `[-R, R]^{N-1} × [ε, R]`.
///
/// Axes are ordered `x_1, …, x_N` with the vertical axis last; nodes are
/// stored row-major, so the vertical index runs fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Axis>,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1, 2 or 3, got {}",
                axes.len()
            )));
        }
        let dim = axes.len();
        let mut strides = vec![1usize; dim];
        for a in (0..dim - 1).rev() {
            strides[a] = strides[a + 1] * axes[a + 1].len();
        }
        let len = strides[0] * axes[0].len();
        Ok(Grid { axes, strides, len })
    }

    /// One-dimensional grid made of a single vertical axis.
    pub fn vertical_only(axis: Axis) -> Result<Self> {
        Self::new(vec![axis])
    }

    /// Vertical geometric axis on `[eps, r_out]` and `n_transverse` nodes on
    /// `[-r_out, r_out]` per transverse axis (sinh-clustered toward 0 when
    /// `clustering > 0`).
    pub fn half_space(
        dim: usize,
        eps: f64,
        r_out: f64,
        n_vertical: usize,
        n_transverse: usize,
        clustering: f64,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        let vertical = Axis::geometric(eps, r_out, n_vertical)?;
        let mut axes = Vec::with_capacity(dim);
        for _ in 0..dim - 1 {
            axes.push(Axis::clustered(r_out, n_transverse, clustering)?);
        }
        axes.push(vertical);
        Self::new(axes)
    }

    /// Exhaustion box `Q_{R,1/R}`: vertical nodes `R^{-1} q^i` with `q` no larger
    /// than `max_ratio` and `x_N = 1` on a node, transverse nodes uniform with
    /// spacing at most `transverse_spacing`. For `R = 2^k` the ratio is the same
    /// `2^{1/m}` for every `k`, and the grids are nested.
    pub fn exhaustion(
        dim: usize,
        r: f64,
        max_ratio: f64,
        transverse_spacing: f64,
    ) -> Result<Self> {
        if !(r > 1.0) {
            return Err(Error::InvalidGrid(format!("exhaustion radius R = {r} must exceed 1")));
        }
        if !(max_ratio > 1.0) {
            return Err(Error::InvalidGrid(format!("vertical ratio {max_ratio} must exceed 1")));
        }
        let eps = 1.0 / r;
        // ratio 2^{1/m}, so boxes with R a power of two share their nodes
        let per_octave = (2f64.ln() / max_ratio.ln() - 1e-9).ceil();
        let half = (per_octave * r.log2() - 1e-9).ceil().max(3.0) as usize;
        let vertical = Axis::geometric(eps, r, 2 * half + 1)?;
        let mut axes = Vec::with_capacity(dim);
        if dim > 1 {
            let cells = ((2.0 * r / transverse_spacing) - 1e-9).ceil().max(2.0) as usize;
            let cells = cells + cells % 2;
            for _ in 0..dim - 1 {
                axes.push(Axis::uniform(-r, r, cells + 1)?);
            }
        }
        axes.push(vertical);
        let grid = Self::new(axes)?;
        grid.check_exhaustion_layout()?;
        Ok(grid)
    }

    /// Largest vertical ratio for which `x_N^{-σ-1}` varies by at most 5%
    /// across a cell.
    pub fn max_ratio_for(sigma: f64) -> f64 {
        1.05f64.powf(1.0 / (1.0 + sigma))
    }

    fn check_exhaustion_layout(&self) -> Result<()> {
        let v = self.vertical().nodes();
        let below = v.iter().filter(|&&x| x > 0.0 && x <= 1.0 + 1e-12).count();
        let above = v.iter().filter(|&&x| x >= 1.0 - 1e-12).count();
        if below < 3 || above < 3 {
            return Err(Error::InvalidGrid(format!(
                "need ≥ 3 vertical nodes in (0,1] and in [1,R], got {below} and {above}"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    pub fn vertical(&self) -> &Axis {
        &self.axes[self.axes.len() - 1]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::len).collect()
    }

    pub fn stride(&self, a: usize) -> usize {
        self.strides[a]
    }

    /// Outer extent: the top of the vertical axis.
    pub fn r_out(&self) -> f64 {
        self.vertical().last()
    }

    /// Height of the bottom face.
    pub fn eps(&self) -> f64 {
        self.vertical().first()
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn multi(&self, flat: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        let mut rest = flat;
        for (a, s) in self.strides.iter().enumerate() {
            out[a] = rest / s;
            rest %= s;
        }
        out
    }

    pub fn axis_index(&self, flat: usize, a: usize) -> usize {
        (flat / self.strides[a]) % self.axes[a].len()
    }

    pub fn vertical_index(&self, flat: usize) -> usize {
        flat % self.vertical().len()
    }

    pub fn point(&self, flat: usize) -> Point {
        let m = self.multi(flat);
        let mut out = [0.0; 3];
        for a in 0..self.dim() {
            out[a] = self.axes[a].nodes()[m[a]];
        }
        out
    }

    pub fn height(&self, flat: usize) -> f64 {
        self.vertical().nodes()[self.vertical_index(flat)]
    }

    /// Euclidean norm of the node position.
    pub fn radius(&self, flat: usize) -> f64 {
        self.point(flat).iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_boundary(&self, flat: usize) -> bool {
        let m = self.multi(flat);
        (0..self.dim()).any(|a| m[a] == 0 || m[a] + 1 == self.axes[a].len())
    }

    /// Vertical index treated as belonging to both the inner (`x_N ≤ 1`) and
    /// outer (`x_N ≥ 1`) norm regions: the node closest to 1, provided it lies
    /// within one local spacing of 1.
    pub fn unit_node(&self) -> Option<usize> {
        let v = self.vertical();
        let i = v.nearest(1.0);
        let (hm, hp) = v.spacings(i);
        ((v.nodes()[i] - 1.0).abs() <= hm.max(hp)).then_some(i)
    }

    /// Header line of the plain-text dump format: `N R_out eps nx_1 … nx_N`.
    pub fn dump_header(&self) -> String {
        let mut s = format!("{} {:.16e} {:.16e}", self.dim(), self.r_out(), self.eps());
        for a in &self.axes {
            s.push_str(&format!(" {}", a.len()));
        }
        s
    }
}
