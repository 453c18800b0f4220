use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use crate::fixed_point::{
    linear_stability_constant, picard_solve, solve_rescaled, verify_solution, PicardConfig, PROBE_HEIGHTS,
};
use crate::lemma_lab::{check_inequality, liouville_halfspace_evidence, liouville_strip_evidence, InequalityId};
use crate::linear_solver::{
    boundary_cap, bump_at, continuation_sweep, exhaustion_study, unit_bump, OperatorKind,
};
use crate::spaces::{Field, Grid, NormKind, Parameters};
use crate::{Error, Result};

/// Key scalars of one run; the columns of a sweep table.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub kind: String,
    pub config_hash: String,
    pub seed: u64,
    pub stability_ratio: Option<f64>,
    pub contraction_ratio: Option<f64>,
    pub residual: Option<f64>,
    pub into_margin: Option<f64>,
    pub contraction_margin: Option<f64>,
    pub upper_margin: Option<f64>,
    pub lower_margin: Option<f64>,
    pub converged: Option<bool>,
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: String,
    pub config_hash: String,
    pub code_version: String,
    pub seed: u64,
    pub wall_time_seconds: f64,
    pub artifacts: Vec<String>,
}

/// Machine-readable failure record, written as `error.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    /// `config` or `numerical`
    pub category: String,
    pub exit_code: i32,
    pub message: String,
    pub config_hash: Option<String>,
}

impl ErrorRecord {
    pub fn new(err: &Error, config_hash: Option<String>) -> Self {
        let numerical = err.is_numerical();
        ErrorRecord {
            category: if numerical { "numerical" } else { "config" }.into(),
            exit_code: exit_code(err),
            message: err.to_string(),
            config_hash,
        }
    }
}

/// 2 for configuration errors, 3 for numerical failures.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub summary: Summary,
    pub manifest: Manifest,
}

/// Collects the files of one run.
struct Artifacts {
    dir: PathBuf,
    names: Vec<String>,
}

impl Artifacts {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), contents)?;
        self.names.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
        self.write(name, &(text + "\n"))
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.16e}"))
}

/// Runs the experiment into `config.output_dir`. On failure an `error.json`
/// record is left there as well.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    let hash = config.hash().ok();
    let result = run_inner(config);
    if let Err(e) = &result {
        let _ = write_error(&config.output_dir, &ErrorRecord::new(e, hash));
    }
    result
}

pub fn write_error(dir: &Path, record: &ErrorRecord) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let text = serde_json::to_string_pretty(record).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(dir.join("error.json"), text + "\n")?;
    Ok(())
}

fn run_inner(config: &ExperimentConfig) -> Result<RunOutcome> {
    let start = Instant::now();
    config.validate()?;
    let hash = config.hash()?;
    std::fs::create_dir_all(&config.output_dir)?;
    let stale = config.output_dir.join("error.json");
    if stale.exists() {
        std::fs::remove_file(stale)?;
    }
    let mut art = Artifacts {
        dir: config.output_dir.clone(),
        names: Vec::new(),
    };
    art.write("config.toml", &config.canonical_toml()?)?;
    let mut summary = Summary {
        kind: config.kind.name().into(),
        config_hash: hash.clone(),
        seed: config.seed,
        ..Summary::default()
    };
    let params = config.params()?;
    match config.kind {
        ExperimentKind::LinearStability => linear_stability(config, &params, &hash, &mut art, &mut summary)?,
        ExperimentKind::Exhaustion => exhaustion(config, &params, &hash, &mut art, &mut summary)?,
        ExperimentKind::Continuation => continuation(config, &params, &hash, &mut art, &mut summary)?,
        ExperimentKind::Picard => {
            picard(config, &params, &hash, &mut art, &mut summary, config.picard.clone())?;
        }
        ExperimentKind::Lemma => {
            lemma(config, &params, &mut art)?;
        }
        ExperimentKind::Liouville => liouville(config, &params, &mut art, &mut summary)?,
        ExperimentKind::FullPipeline => full_pipeline(config, &params, &hash, &mut art, &mut summary)?,
    }
    art.json("summary.json", &summary)?;
    let mut manifest = Manifest {
        kind: config.kind.name().into(),
        config_hash: hash,
        code_version: env!("CARGO_PKG_VERSION").into(),
        seed: config.seed,
        wall_time_seconds: 0.0,
        artifacts: art.names.clone(),
    };
    manifest.artifacts.push("manifest.json".into());
    manifest.wall_time_seconds = start.elapsed().as_secs_f64();
    art.json("manifest.json", &manifest)?;
    Ok(RunOutcome {
        dir: config.output_dir.clone(),
        summary,
        manifest,
    })
}

fn linear_stability(
    config: &ExperimentConfig,
    params: &Parameters,
    hash: &str,
    art: &mut Artifacts,
    summary: &mut Summary,
) -> Result<()> {
    let grid = config.grid.build()?;
    let mut csv = String::from("family,height,stability_ratio,iterations,pde_residual,config_hash\n");
    let mut best: Option<f64> = None;
    for h in PROBE_HEIGHTS {
        if h <= grid.eps() || h >= grid.r_out() {
            continue;
        }
        for (family, f) in [
            ("gaussian", bump_at(&grid, params, NormKind::Y, h)?),
            ("boundary_cap", boundary_cap(&grid, params, NormKind::Y, h)?),
        ] {
            let rep = solve_rescaled(&f, params, &config.solver, config.picard.route)?;
            if let Some(r) = rep.stability_ratio {
                best = Some(best.map_or(r, |b: f64| b.max(r)));
            }
            let _ = writeln!(
                csv,
                "{family},{h:.16e},{},{},{:.16e},{hash}",
                opt(rep.stability_ratio),
                rep.iterations,
                rep.pde_residual
            );
        }
    }
    art.write("stability.csv", &csv)?;
    summary.stability_ratio = best;
    Ok(())
}

fn exhaustion(
    config: &ExperimentConfig,
    params: &Parameters,
    hash: &str,
    art: &mut Artifacts,
    summary: &mut Summary,
) -> Result<()> {
    let kind = config.exhaustion.operator;
    let norm_kind = if kind == OperatorKind::Drift { NormKind::Y } else { NormKind::Ypsi };
    let data = |g: &std::sync::Arc<Grid>, p: &Parameters| unit_bump(g, p, norm_kind);
    let table = exhaustion_study(kind, params, &data, &config.exhaustion.study, &config.solver)?;
    let mut csv = String::from("r,nodes,iterations,stability_ratio,core_norm,cauchy_difference,domination,config_hash\n");
    for row in &table.rows {
        let _ = writeln!(
            csv,
            "{:.16e},{},{},{},{:.16e},{},{:.16e},{hash}",
            row.r,
            row.nodes,
            row.iterations,
            opt(row.stability_ratio),
            row.core_norm,
            opt(row.cauchy_difference),
            row.domination
        );
    }
    art.write("exhaustion.csv", &csv)?;
    art.json("exhaustion.json", &table)?;
    summary.stability_ratio = table.rows.iter().filter_map(|r| r.stability_ratio).reduce(f64::max);
    summary.flags = table.flags.clone();
    Ok(())
}

fn continuation(
    config: &ExperimentConfig,
    params: &Parameters,
    hash: &str,
    art: &mut Artifacts,
    summary: &mut Summary,
) -> Result<()> {
    let grid = config.grid.build()?;
    let h = unit_bump(&grid, params, NormKind::Ypsi)?;
    let table = continuation_sweep(params, &grid, &h, &config.continuation.taus, &config.solver)?;
    let mut csv = String::from("tau,iterations,solution_norm,rhs_norm,ratio,config_hash\n");
    for row in &table.rows {
        let _ = writeln!(
            csv,
            "{:.16e},{},{:.16e},{:.16e},{},{hash}",
            row.tau,
            row.iterations,
            row.solution_norm,
            row.rhs_norm,
            opt(row.ratio)
        );
    }
    art.write("continuation.csv", &csv)?;
    art.json("continuation.json", &table)?;
    summary.stability_ratio = table.max_ratio;
    if table.blow_up {
        summary.flags.push("stability ratio varies by more than the blow-up factor".into());
    }
    Ok(())
}

fn picard(
    config: &ExperimentConfig,
    params: &Parameters,
    hash: &str,
    art: &mut Artifacts,
    summary: &mut Summary,
    picard: PicardConfig,
) -> Result<Field> {
    let grid = config.grid.build()?;
    let (trace, phi) = picard_solve(&config.perturbation, params, &picard, &grid)?;
    art.write("trace.csv", &trace.to_csv(hash))?;
    art.json("trace.json", &trace)?;
    summary.contraction_ratio = trace.max_ratio();
    summary.residual = trace.steps.last().map(|s| s.residual);
    summary.converged = Some(trace.converged);
    if let Some(s) = &trace.smallness {
        summary.into_margin = Some(s.into_margin);
        summary.contraction_margin = Some(s.contraction_margin);
    }
    summary.flags.extend(trace.warnings.iter().cloned());
    Ok(phi)
}

fn lemma(config: &ExperimentConfig, params: &Parameters, art: &mut Artifacts) -> Result<f64> {
    let estimates = InequalityId::ALL
        .iter()
        .map(|&id| check_inequality(id, params.p, config.lemma.samples, config.lemma.dimension, config.seed, None))
        .collect::<Result<Vec<_>>>()?;
    art.json("lemma.json", &estimates)?;
    Ok(estimates.iter().map(|e| e.minimal_constant).fold(0.0, f64::max))
}

fn liouville(
    config: &ExperimentConfig,
    params: &Parameters,
    art: &mut Artifacts,
    summary: &mut Summary,
) -> Result<()> {
    let grid = config.grid.build()?;
    let l = &config.liouville;
    let strip = l
        .taus
        .iter()
        .map(|&tau| liouville_strip_evidence(tau, l.t, params, &grid, &l.fit, &config.solver, config.seed))
        .collect::<Result<Vec<_>>>()?;
    let halfspace = l
        .taus
        .iter()
        .map(|&tau| liouville_halfspace_evidence(tau, params, &l.windows))
        .collect::<Result<Vec<_>>>()?;
    for r in &strip {
        for fit in [&r.decay, &r.growth] {
            if (fit.fitted - fit.expected).abs() > 0.02 {
                summary.flags.push(format!(
                    "tau={}: fitted exponent {} differs from {}",
                    r.tau, fit.fitted, fit.expected
                ));
            }
        }
    }
    summary.upper_margin = halfspace.iter().map(|h| h.upper_margin).reduce(f64::min);
    summary.lower_margin = halfspace.iter().map(|h| h.lower_margin).reduce(f64::min);
    art.json(
        "liouville.json",
        &serde_json::json!({ "strip": strip, "halfspace": halfspace }),
    )?;
    Ok(())
}

#[derive(Serialize)]
struct PipelineConstants {
    linear_stability: f64,
    inequality: f64,
    empirical: f64,
}

fn full_pipeline(
    config: &ExperimentConfig,
    params: &Parameters,
    hash: &str,
    art: &mut Artifacts,
    summary: &mut Summary,
) -> Result<()> {
    let grid = config.grid.build()?;
    let c_lin = linear_stability_constant(&grid, params, &config.picard.solver, config.picard.route)?;
    let c_ineq = lemma(config, params, art)?;
    let empirical = config.picard.constant.unwrap_or(c_lin * c_ineq);
    art.json(
        "constants.json",
        &PipelineConstants {
            linear_stability: c_lin,
            inequality: c_ineq,
            empirical,
        },
    )?;
    let pc = PicardConfig {
        constant: Some(empirical),
        ..config.picard.clone()
    };
    let phi = picard(config, params, hash, art, summary, pc)?;
    art.write("solution.dump", &phi.to_dump())?;
    let report = verify_solution(&phi, &config.perturbation, params)?;
    art.json("residual.json", &report)?;
    summary.stability_ratio = Some(c_lin);
    summary.residual = Some(report.max_residual);
    if !report.nonzero {
        summary.flags.push("nonzero certificate failed".into());
    }
    Ok(())
}
