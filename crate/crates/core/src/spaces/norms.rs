use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::field::Field;
use super::grid::Point;
use super::params::Parameters;
use super::stencil::{magnitude, DerivativeOracle};
use crate::{Error, Result};

/// The weighted sup norms. Each has an inner part over `0 < x_N ≤ 1` and an
/// outer part over `x_N ≥ 1`:
///
/// | kind      | inner weights                              | outer weights                                  |
/// |-----------|--------------------------------------------|------------------------------------------------|
/// | `X`       | `x^σ |∇φ|`                                  | `x^α |∇φ|`                                      |
/// | `Y`       | `x^{σ+1} |f|`                               | `x^{α+1} |f|`                                   |
/// | `Xhat`    | `x^σ |∇φ| + x^{σ+1} |Δφ|`                   | `x^α |∇φ| + x^{α+1} |Δφ|`                       |
/// | `Xpsi`    | `x^{σ-1} |ψ|`                               | `x^{α-1-μ} |ψ|`                                 |
/// | `Ypsi`    | `x^{σ+1} |h|`                               | `x^{α+1-μ} |h|`                                 |
/// | `XpsiHat` | `x^{σ-1}|ψ| + x^σ|∇ψ| + x^{σ+1}|Δψ|`        | `x^{α-1-μ}|ψ| + x^{α-μ}|∇ψ| + x^{α+1-μ}|Δψ|`   |
///
/// Laplacian tiers are only evaluated where the oracle supplies a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormKind {
    X,
    Y,
    Xhat,
    Xpsi,
    Ypsi,
    XpsiHat,
}

impl NormKind {
    pub const ALL: [NormKind; 6] = [
        NormKind::X,
        NormKind::Y,
        NormKind::Xhat,
        NormKind::Xpsi,
        NormKind::Ypsi,
        NormKind::XpsiHat,
    ];

    fn needs_gradient(self) -> bool {
        matches!(self, NormKind::X | NormKind::Xhat | NormKind::XpsiHat)
    }

    fn needs_laplacian(self) -> bool {
        matches!(self, NormKind::Xhat | NormKind::XpsiHat)
    }

    /// Exponents of the (value, gradient, Laplacian) tiers; `None` for tiers
    /// the norm does not contain.
    fn exponents(self, pr: &Parameters, outer: bool) -> [Option<f64>; 3] {
        let (s, a, m) = (pr.sigma, pr.alpha, pr.mu);
        match (self, outer) {
            (NormKind::X, false) => [None, Some(s), None],
            (NormKind::X, true) => [None, Some(a), None],
            (NormKind::Y, false) => [Some(s + 1.0), None, None],
            (NormKind::Y, true) => [Some(a + 1.0), None, None],
            (NormKind::Xhat, false) => [None, Some(s), Some(s + 1.0)],
            (NormKind::Xhat, true) => [None, Some(a), Some(a + 1.0)],
            (NormKind::Xpsi, false) => [Some(s - 1.0), None, None],
            (NormKind::Xpsi, true) => [Some(a - 1.0 - m), None, None],
            (NormKind::Ypsi, false) => [Some(s + 1.0), None, None],
            (NormKind::Ypsi, true) => [Some(a + 1.0 - m), None, None],
            (NormKind::XpsiHat, false) => [Some(s - 1.0), Some(s), Some(s + 1.0)],
            (NormKind::XpsiHat, true) => [Some(a - 1.0 - m), Some(a - m), Some(a + 1.0 - m)],
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NormKind::X => "X",
            NormKind::Y => "Y",
            NormKind::Xhat => "Xhat",
            NormKind::Xpsi => "Xpsi",
            NormKind::Ypsi => "Ypsi",
            NormKind::XpsiHat => "Xpsi_hat",
        };
        f.write_str(s)
    }
}

impl FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "X" => NormKind::X,
            "Y" => NormKind::Y,
            "Xhat" => NormKind::Xhat,
            "Xpsi" => NormKind::Xpsi,
            "Ypsi" => NormKind::Ypsi,
            "Xpsi_hat" | "XpsiHat" => NormKind::XpsiHat,
            other => return Err(Error::Parse(format!("unknown norm kind `{other}`"))),
        })
    }
}

/// Inner and outer parts of a discrete weighted sup norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormReport {
    pub kind: NormKind,
    pub inner: f64,
    pub outer: f64,
    /// `max(inner, outer)`
    pub total: f64,
    /// Flat index of the node attaining `total`, if any node was visited.
    pub argmax: Option<usize>,
    pub location: Option<Vec<f64>>,
}

impl WeightedNormReport {
    /// Flat `key=value` record, one pair per line.
    pub fn to_kv(&self) -> String {
        let mut s = format!(
            "kind={}\ninner={:.16e}\nouter={:.16e}\ntotal={:.16e}\n",
            self.kind, self.inner, self.outer, self.total
        );
        match (&self.argmax, &self.location) {
            (Some(i), Some(loc)) => {
                s.push_str(&format!("argmax={i}\n"));
                let coords: Vec<String> = loc.iter().map(|c| format!("{c:.16e}")).collect();
                s.push_str(&format!("location={}\n", coords.join(",")));
            }
            _ => s.push_str("argmax=none\nlocation=none\n"),
        }
        s
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut kind = None;
        let (mut inner, mut outer, mut total) = (None, None, None);
        let mut argmax = None;
        let mut location = None;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("`{line}` is not key=value")))?;
            let num = |v: &str| v.parse::<f64>().map_err(|e| Error::Parse(e.to_string()));
            match k {
                "kind" => kind = Some(v.parse()?),
                "inner" => inner = Some(num(v)?),
                "outer" => outer = Some(num(v)?),
                "total" => total = Some(num(v)?),
                "argmax" if v != "none" => {
                    argmax = Some(v.parse().map_err(|_| Error::Parse(format!("argmax `{v}`")))?)
                }
                "location" if v != "none" => {
                    location = Some(v.split(',').map(num).collect::<Result<Vec<_>>>()?)
                }
                "argmax" | "location" => {}
                other => return Err(Error::Parse(format!("unknown key `{other}`"))),
            }
        }
        let missing = |k: &str| Error::Parse(format!("missing key `{k}`"));
        Ok(WeightedNormReport {
            kind: kind.ok_or_else(|| missing("kind"))?,
            inner: inner.ok_or_else(|| missing("inner"))?,
            outer: outer.ok_or_else(|| missing("outer"))?,
            total: total.ok_or_else(|| missing("total"))?,
            argmax,
            location,
        })
    }
}

/// Discrete weighted sup norm over every node with `x_N > 0`.
pub fn norm(
    field: &Field,
    params: &Parameters,
    kind: NormKind,
    oracle: &dyn DerivativeOracle,
) -> Result<WeightedNormReport> {
    norm_in(field, params, kind, oracle, None)
}

/// As [`norm`], restricted to the nodes accepted by `window`. Derivatives are
/// still taken on the full grid, so shrinking the window never increases the
/// result.
pub fn norm_in(
    field: &Field,
    params: &Parameters,
    kind: NormKind,
    oracle: &dyn DerivativeOracle,
    window: Option<&dyn Fn(&Point) -> bool>,
) -> Result<WeightedNormReport> {
    field.check_finite()?;
    let grid = field.grid();
    let grad = if kind.needs_gradient() {
        let g = oracle.gradient(field)?;
        if g.len() != grid.len() {
            return Err(Error::GridMismatch("gradient length differs from grid".into()));
        }
        Some(g)
    } else {
        None
    };
    let lap = if kind.needs_laplacian() {
        let l = oracle.laplacian(field)?;
        if l.len() != grid.len() {
            return Err(Error::GridMismatch("Laplacian length differs from grid".into()));
        }
        Some(l)
    } else {
        None
    };
    let unit = grid.unit_node();
    let vertical = grid.vertical().nodes();
    let inner_exp = kind.exponents(params, false);
    let outer_exp = kind.exponents(params, true);

    let tier_sum = |exps: &[Option<f64>; 3], i: usize, x: f64| -> f64 {
        let mut s = 0.0;
        if let Some(e) = exps[0] {
            s += x.powf(e) * field.values()[i].abs();
        }
        if let (Some(e), Some(g)) = (exps[1], grad.as_ref()) {
            s += x.powf(e) * magnitude(&g[i]);
        }
        if let (Some(e), Some(l)) = (exps[2], lap.as_ref()) {
            if let Some(v) = l[i] {
                s += x.powf(e) * v.abs();
            }
        }
        s
    };

    let mut inner = (0.0f64, None::<usize>);
    let mut outer = (0.0f64, None::<usize>);
    for i in 0..grid.len() {
        let vi = grid.vertical_index(i);
        let x = vertical[vi];
        if x <= 0.0 {
            continue;
        }
        if let Some(w) = window {
            if !w(&grid.point(i)) {
                continue;
            }
        }
        let at_unit = unit == Some(vi);
        if x < 1.0 || at_unit {
            let v = tier_sum(&inner_exp, i, x);
            if inner.1.is_none() || v > inner.0 {
                inner = (v, Some(i));
            }
        }
        if x > 1.0 || at_unit {
            let v = tier_sum(&outer_exp, i, x);
            if outer.1.is_none() || v > outer.0 {
                outer = (v, Some(i));
            }
        }
    }
    let (total, argmax) = if outer.0 > inner.0 {
        (outer.0, outer.1)
    } else {
        (inner.0, inner.1.or(outer.1))
    };
    Ok(WeightedNormReport {
        kind,
        inner: inner.0,
        outer: outer.0,
        total,
        argmax,
        location: argmax.map(|i| grid.point(i)[..grid.dim()].to_vec()),
    })
}
