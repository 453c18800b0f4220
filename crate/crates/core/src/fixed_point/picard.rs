use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::nonlinear::{apply_j, LinearRoute};
use super::perturbation::Perturbation;
use super::smallness::{smallness_conditions, SmallnessReport};
use super::verify::pde_residual;
use crate::explicit_family::ExplicitSolution;
use crate::linear_solver::SolverConfig;
use crate::spaces::{norm, Field, FiniteDifference, Grid, NormKind, Parameters};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardConfig {
    /// Ball radius R in the X norm.
    pub radius: f64,
    pub delta: f64,
    pub max_iters: usize,
    /// Stop once `‖φ_{k+1} − φ_k‖_X < tol`.
    pub tol: f64,
    pub route: LinearRoute,
    /// Empirical constant for the advisory smallness report.
    pub constant: Option<f64>,
    pub solver: SolverConfig,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            radius: 0.1,
            delta: 0.05,
            max_iters: 100,
            tol: 1e-8,
            route: LinearRoute::Conjugated,
            constant: None,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationStep {
    pub k: usize,
    /// `‖φ_k‖_X`
    pub norm: f64,
    /// `‖φ_k − φ_{k−1}‖_X`
    pub increment: f64,
    /// `increment_k / increment_{k−1}`
    pub ratio: Option<f64>,
    /// `Y` norm of the nodal residual of `u_t + φ_k`
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub radius: f64,
    pub delta: f64,
    pub lambda: f64,
    pub grid_id: String,
    pub steps: Vec<IterationStep>,
    pub converged: bool,
    pub smallness: Option<SmallnessReport>,
    pub warnings: Vec<String>,
}

impl IterationTrace {
    /// Largest recorded contraction ratio.
    pub fn max_ratio(&self) -> Option<f64> {
        self.steps.iter().filter_map(|s| s.ratio).reduce(f64::max)
    }

    /// One row per step; `tag` fills a trailing `config_hash` column.
    pub fn to_csv(&self, tag: &str) -> String {
        let mut s = String::from("k,norm,increment,ratio,residual,config_hash\n");
        for st in &self.steps {
            let ratio = st.ratio.map_or_else(String::new, |r| format!("{r:.16e}"));
            let _ = writeln!(
                s,
                "{},{:.16e},{:.16e},{},{:.16e},{}",
                st.k, st.norm, st.increment, ratio, st.residual, tag
            );
        }
        s
    }
}

/// Short identifier of a grid layout.
pub fn grid_id(grid: &Grid) -> String {
    let shape: Vec<String> = grid.shape().iter().map(usize::to_string).collect();
    format!("N{}-eps{:e}-R{:e}-{}", grid.dim(), grid.eps(), grid.r_out(), shape.join("x"))
}

fn x_norm(f: &Field, params: &Parameters) -> Result<f64> {
    Ok(norm(f, params, NormKind::X, &FiniteDifference)?.total)
}

fn residual_y(phi: &Field, base: &Field, g: &Perturbation, params: &Parameters) -> Result<f64> {
    let u = Field::from_values(
        phi.grid(),
        base.values().iter().zip(phi.values()).map(|(a, b)| a + b).collect(),
        false,
    )?;
    let r = pde_residual(&u, g, params.lambda, params.p)?;
    Ok(norm(&r, params, NormKind::Y, &FiniteDifference)?.total)
}

/// Picard iteration `φ_{k+1} = J_λ(φ_k)` from `φ_0 = 0`.
pub fn picard_solve(
    g: &Perturbation,
    params: &Parameters,
    config: &PicardConfig,
    grid: &Arc<Grid>,
) -> Result<(IterationTrace, Field)> {
    g.validate()?;
    let mut warnings = Vec::new();
    let smallness = match config.constant {
        Some(c) => {
            let rep = smallness_conditions(config.radius, config.delta, g, params, c)?;
            if !rep.passes() {
                warnings.push(format!(
                    "smallness conditions unmet (into margin {:.3e}, contraction margin {:.3e})",
                    rep.into_margin, rep.contraction_margin
                ));
            }
            Some(rep)
        }
        None => None,
    };
    let base = ExplicitSolution::new(params)?.field(grid)?;
    let mut trace = IterationTrace {
        radius: config.radius,
        delta: config.delta,
        lambda: params.lambda,
        grid_id: grid_id(grid),
        steps: Vec::new(),
        converged: false,
        smallness,
        warnings,
    };
    let mut phi = Field::zeros(grid);
    let mut prev_increment: Option<f64> = None;
    let mut above_one = 0usize;
    for k in 1..=config.max_iters {
        let next = apply_j(&phi, g, params, &config.solver, config.route)?;
        let norm_next = x_norm(&next, params)?;
        let increment = x_norm(&next.difference(&phi)?, params)?;
        let ratio = prev_increment.and_then(|p| (p > 0.0).then(|| increment / p));
        trace.steps.push(IterationStep {
            k,
            norm: norm_next,
            increment,
            ratio,
            residual: residual_y(&next, &base, g, params)?,
        });
        if norm_next > config.radius {
            return Err(Error::EscapedBall {
                step: k,
                norm: norm_next,
                radius: config.radius,
            });
        }
        if let Some(q) = ratio {
            above_one = if q > 1.0 { above_one + 1 } else { 0 };
            if above_one >= 3 {
                return Err(Error::Diverging { step: k, ratio: q });
            }
        }
        phi = next;
        if increment < config.tol {
            trace.converged = true;
            break;
        }
        prev_increment = Some(increment);
    }
    if !trace.converged {
        trace
            .warnings
            .push(format!("no convergence within {} iterations", config.max_iters));
    }
    Ok((trace, phi))
}

/// Random smooth element of the closed ball `B_R`: an envelope vanishing on
/// every face times a few random modes, scaled to `‖φ‖_X = fraction · R`.
pub fn random_ball_element(
    grid: &Arc<Grid>,
    params: &Parameters,
    radius: f64,
    fraction: f64,
    seed: u64,
) -> Result<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = grid.dim();
    let eps = grid.eps();
    let modes: Vec<([f64; 2], f64, f64)> = (0..4)
        .map(|_| {
            (
                [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(-1.0..1.0),
            )
        })
        .collect();
    let scale = rng.gen_range(0.2..2.0);
    let raw = Field::from_fn_dirichlet(grid, |p| {
        let y = p[dim - 1];
        let r2: f64 = p[..dim - 1].iter().map(|c| c * c).sum();
        let envelope = (y - eps) * (-y / scale).exp() * (-r2 / 4.0).exp();
        let wave: f64 = modes
            .iter()
            .map(|(k, phase, a)| {
                let arg = k[0] * p[0] + if dim > 2 { k[1] * p[1] } else { 0.0 } + 0.5 * y;
                a * (arg + phase).cos()
            })
            .sum();
        envelope * (1.0 + wave)
    })?;
    let n = x_norm(&raw, params)?;
    if n == 0.0 {
        return Ok(raw);
    }
    raw.scaled(fraction * radius / n)
}
