use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fixed_point::taylor_remainder;
use crate::{Error, Result};

/// Relative slack allowed on the remainder lower bound.
pub const LOWER_BOUND_SLACK: f64 = 1e-12;

/// The three vector inequalities, each of the form `lhs ≤ C · rhs`:
///
/// * `Ineq1`: `0 ≤ |x+y|^p − |x|^p − p|x|^{p−2}x·y ≤ C|y|^p`
/// * `Ineq2`: `| |x+y|^p − p|x|^{p−2}x·y − |x+z|^p + p|x|^{p−2}x·z | ≤ C(|y|^{p−1} + |z|^{p−1})|y−z|`
/// * `Ineq3`: `| |x+y|^p − |x+z|^p | ≤ C(|y|^{p−1} + |z|^{p−1} + |x|^{p−1})|y−z|`
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityId {
    Ineq1,
    Ineq2,
    Ineq3,
}

impl InequalityId {
    pub const ALL: [InequalityId; 3] = [InequalityId::Ineq1, InequalityId::Ineq2, InequalityId::Ineq3];
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InequalityId::Ineq1 => "ineq_1",
            InequalityId::Ineq2 => "ineq_2",
            InequalityId::Ineq3 => "ineq_3",
        })
    }
}

impl FromStr for InequalityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ineq_1" => Ok(InequalityId::Ineq1),
            "ineq_2" => Ok(InequalityId::Ineq2),
            "ineq_3" => Ok(InequalityId::Ineq3),
            other => Err(Error::Parse(format!("unknown inequality `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityEstimate {
    pub id: InequalityId,
    pub p: f64,
    pub samples: u64,
    pub dimension: usize,
    pub seed: u64,
    /// Constant the violation is measured against.
    pub candidate: f64,
    /// `max (lhs/rhs) − candidate` over samples with `rhs > 0`.
    pub max_violation: f64,
    /// `max lhs/rhs`: the smallest constant every sample satisfies.
    pub minimal_constant: f64,
    pub worst_index: u64,
    pub worst: Triple,
    /// Samples whose remainder fell below `−slack · (term magnitudes)`
    /// (ineq_1 only).
    pub lower_bound_violations: u64,
    /// Most negative normalised remainder seen (ineq_1 only).
    pub min_lower_margin: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(u, v)| u - v).collect()
}

fn sum(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(u, v)| u + v).collect()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm(&v);
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

fn vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let m = log_uniform(rng, 1e-6, 1e6);
    direction(rng, dim).into_iter().map(|c| m * c).collect()
}

fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|c| s * c).collect()
}

/// The sample with the given index; reproducible from `(seed, index)`.
/// Indices cycle through uniform, near-antipodal, `y = εx`, collinear,
/// `x = 0`, `y ≈ z` and balanced-magnitude families.
pub fn sample_triple(seed: u64, index: u64, dim: usize) -> Triple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let x = vector(&mut rng, dim);
    match index % 7 {
        0 => Triple {
            y: vector(&mut rng, dim),
            z: vector(&mut rng, dim),
            x,
        },
        1 => {
            let y = scaled(&x, -(1.0 + rng.gen_range(-1e-3..1e-3)));
            let z = scaled(&x, -log_uniform(&mut rng, 1e-3, 1e3));
            Triple { x, y, z }
        }
        2 => {
            let e = log_uniform(&mut rng, 1e-6, 1e6) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let y = scaled(&x, e);
            let z = scaled(&x, e * (1.0 + rng.gen_range(-0.5..0.5)));
            Triple { x, y, z }
        }
        3 => {
            let u = direction(&mut rng, dim);
            let mut c = || rng.gen_range(-1.0..1.0) * log_uniform(&mut rng, 1e-3, 1e3);
            let (a, b, d) = (c(), c(), c());
            Triple {
                x: scaled(&u, a),
                y: scaled(&u, b),
                z: scaled(&u, d),
            }
        }
        4 => Triple {
            x: vec![0.0; dim],
            y: vector(&mut rng, dim),
            z: vector(&mut rng, dim),
        },
        5 => {
            let y = vector(&mut rng, dim);
            let rel = log_uniform(&mut rng, 1e-6, 1e-1);
            let z = sum(&y, &scaled(&direction(&mut rng, dim), rel * norm(&y)));
            Triple { x, y, z }
        }
        _ => {
            let m = norm(&x);
            let y = scaled(&direction(&mut rng, dim), m * log_uniform(&mut rng, 0.1, 10.0));
            let z = scaled(&direction(&mut rng, dim), m * log_uniform(&mut rng, 0.1, 10.0));
            Triple { x, y, z }
        }
    }
}

/// `|x+y|^p − |x+z|^p` without cancellation: `|x+y|² − |x+z|²` factors as
/// `(y−z)·(2x+y+z)`.
fn power_difference(x: &[f64], y: &[f64], z: &[f64], p: f64) -> f64 {
    let a = norm(&sum(x, y));
    let b = norm(&sum(x, z));
    if a == 0.0 || b == 0.0 {
        return a.powf(p) - b.powf(p);
    }
    let w: Vec<f64> = x.iter().zip(y).zip(z).map(|((xi, yi), zi)| 2.0 * xi + yi + zi).collect();
    let d = dot(&diff(y, z), &w) / (a + b);
    b.powf(p) * (p * (d / b).ln_1p()).exp_m1()
}

/// `(lhs, rhs)` of the inequality for one triple.
pub fn inequality_sides(id: InequalityId, t: &Triple, p: f64) -> (f64, f64) {
    let (x, y, z) = (&t.x, &t.y, &t.z);
    match id {
        InequalityId::Ineq1 => (taylor_remainder(x, y, p), norm(y).powf(p)),
        InequalityId::Ineq2 => {
            // the linear-in-x terms cancel, so the left side is a difference of remainders
            let lhs = (taylor_remainder(x, y, p) - taylor_remainder(x, z, p)).abs();
            let rhs = (norm(y).powf(p - 1.0) + norm(z).powf(p - 1.0)) * norm(&diff(y, z));
            (lhs, rhs)
        }
        InequalityId::Ineq3 => {
            let lhs = power_difference(x, y, z, p).abs();
            let rhs = (norm(y).powf(p - 1.0) + norm(z).powf(p - 1.0) + norm(x).powf(p - 1.0))
                * norm(&diff(y, z));
            (lhs, rhs)
        }
    }
}

/// Remainder of ineq_1 from the plain formula, divided by the magnitude of
/// its terms; convexity makes it ≥ 0 up to rounding.
pub fn normalised_plain_remainder(x: &[f64], y: &[f64], p: f64) -> f64 {
    let nx = norm(x);
    let a = norm(&sum(x, y)).powf(p);
    let b = nx.powf(p);
    let lin = if nx == 0.0 { 0.0 } else { p * nx.powf(p - 2.0) * dot(x, y) };
    let scale = a + b + lin.abs();
    if scale == 0.0 {
        0.0
    } else {
        (a - b - lin) / scale
    }
}

#[derive(Clone)]
struct Shard {
    ratio: f64,
    index: u64,
    lower_violations: u64,
    min_lower: f64,
    lower_index: u64,
}

impl Shard {
    fn merge(self, other: Shard) -> Shard {
        // ties resolve to the smaller index, so the reduction is order independent
        let (ratio, index) = if other.ratio > self.ratio
            || (other.ratio == self.ratio && other.index < self.index)
        {
            (other.ratio, other.index)
        } else {
            (self.ratio, self.index)
        };
        let (min_lower, lower_index) = if other.min_lower < self.min_lower
            || (other.min_lower == self.min_lower && other.lower_index < self.lower_index)
        {
            (other.min_lower, other.lower_index)
        } else {
            (self.min_lower, self.lower_index)
        };
        Shard {
            ratio,
            index,
            lower_violations: self.lower_violations + other.lower_violations,
            min_lower,
            lower_index,
        }
    }
}

pub fn check_inequality(
    id: InequalityId,
    p: f64,
    samples: u64,
    dimension: usize,
    seed: u64,
    candidate: Option<f64>,
) -> Result<InequalityEstimate> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must lie in (1, 2]")));
    }
    if samples < 100_000 {
        return Err(Error::InvalidParameter(format!("{samples} samples; at least 100000 required")));
    }
    if dimension == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let empty = Shard {
        ratio: f64::NEG_INFINITY,
        index: u64::MAX,
        lower_violations: 0,
        min_lower: f64::INFINITY,
        lower_index: u64::MAX,
    };
    let shard = (0..samples)
        .into_par_iter()
        .map(|i| {
            let t = sample_triple(seed, i, dimension);
            let (lhs, rhs) = inequality_sides(id, &t, p);
            let ratio = if rhs > 0.0 { lhs / rhs } else { f64::NEG_INFINITY };
            let (lower_violations, min_lower) = if id == InequalityId::Ineq1 {
                let r = normalised_plain_remainder(&t.x, &t.y, p);
                (u64::from(r < -LOWER_BOUND_SLACK), r)
            } else {
                (0, f64::INFINITY)
            };
            Shard {
                ratio,
                index: i,
                lower_violations,
                min_lower,
                lower_index: i,
            }
        })
        .reduce(|| empty.clone(), Shard::merge);
    if shard.lower_violations > 0 {
        return Err(Error::LowerBoundViolated {
            violation: shard.min_lower,
            index: shard.lower_index,
        });
    }
    let minimal = shard.ratio.max(0.0);
    let candidate = candidate.unwrap_or(minimal);
    Ok(InequalityEstimate {
        id,
        p,
        samples,
        dimension,
        seed,
        candidate,
        max_violation: minimal - candidate,
        minimal_constant: minimal,
        worst_index: shard.index,
        worst: sample_triple(seed, shard.index, dimension),
        lower_bound_violations: shard.lower_violations,
        min_lower_margin: if id == InequalityId::Ineq1 { shard.min_lower } else { 0.0 },
    })
}
