use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use super::run::{run, Summary};
use crate::{Error, Result};

/// Axis names accepted by [`sweep`]; `p`, `sigma`, `t`, `lambda` address the
/// parameter section and `tau` the τ list of the continuation or Liouville
/// section.
pub fn sweep_axes() -> &'static [&'static str] {
    &[
        "p",
        "sigma",
        "t",
        "lambda",
        "tau",
        "seed",
        "solver.tol",
        "picard.radius",
        "picard.delta",
        "picard.tol",
        "picard.constant",
        "grid.eps",
        "grid.r_out",
        "grid.n_vertical",
        "grid.n_transverse",
        "grid.clustering",
        "lemma.samples",
        "liouville.t",
        "perturbation.amplitude",
        "perturbation.radius",
        "perturbation.width",
        "perturbation.decay",
    ]
}

const INTEGER_AXES: [&str; 4] = ["seed", "grid.n_vertical", "grid.n_transverse", "lemma.samples"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub ok: bool,
    pub error: Option<String>,
    pub summary: Option<Summary>,
    pub dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: String,
    pub rows: Vec<SweepRow>,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.16e}"))
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "index,axis,value,status,stability_ratio,contraction_ratio,residual,into_margin,\
             contraction_margin,upper_margin,lower_margin,converged,config_hash,error\n",
        );
        for r in &self.rows {
            let sm = r.summary.clone().unwrap_or_default();
            let err = r
                .error
                .as_deref()
                .unwrap_or("")
                .replace([',', '\n'], ";");
            let _ = writeln!(
                s,
                "{},{},{:.16e},{},{},{},{},{},{},{},{},{},{},{}",
                r.index,
                self.axis,
                r.value,
                if r.ok { "ok" } else { "failed" },
                opt(sm.stability_ratio),
                opt(sm.contraction_ratio),
                opt(sm.residual),
                opt(sm.into_margin),
                opt(sm.contraction_margin),
                opt(sm.upper_margin),
                opt(sm.lower_margin),
                sm.converged.map_or_else(String::new, |c| c.to_string()),
                sm.config_hash,
                err
            );
        }
        s
    }

    /// Column of a summary scalar, `None` for failed rows.
    pub fn column(&self, pick: impl Fn(&Summary) -> Option<f64>) -> Vec<Option<f64>> {
        self.rows
            .iter()
            .map(|r| r.summary.as_ref().and_then(&pick))
            .collect()
    }
}

fn resolve(axis: &str, kind: ExperimentKind) -> Vec<String> {
    match axis {
        "p" | "sigma" | "t" | "lambda" => vec!["parameters".into(), axis.into()],
        "tau" if kind == ExperimentKind::Liouville => vec!["liouville".into(), "taus".into()],
        "tau" => vec!["continuation".into(), "taus".into()],
        other => other.split('.').map(str::to_string).collect(),
    }
}

fn check_axis(template: &ExperimentConfig, axis: &str) -> Result<()> {
    if !sweep_axes().contains(&axis) {
        return Err(Error::Config(format!(
            "unknown sweep axis `{axis}`; expected one of {}",
            sweep_axes().join(", ")
        )));
    }
    if axis == "tau" && !matches!(template.kind, ExperimentKind::Continuation | ExperimentKind::Liouville) {
        return Err(Error::Config("axis `tau` needs a continuation or liouville experiment".into()));
    }
    Ok(())
}

/// The template with one axis set to `value`.
pub fn with_axis(template: &ExperimentConfig, axis: &str, value: f64) -> Result<ExperimentConfig> {
    check_axis(template, axis)?;
    let mut doc: toml::Table =
        toml::from_str(&template.to_toml()?).map_err(|e| Error::Config(e.to_string()))?;
    let path = resolve(axis, template.kind);
    let new = if axis == "tau" {
        toml::Value::Array(vec![toml::Value::Float(value)])
    } else if INTEGER_AXES.contains(&axis) {
        if !(value >= 0.0 && value.fract() == 0.0 && value < 9.0e15) {
            return Err(Error::Config(format!("axis `{axis}` needs a nonnegative integer, got {value}")));
        }
        toml::Value::Integer(value as i64)
    } else {
        toml::Value::Float(value)
    };
    let (last, parents) = path.split_last().expect("axis path is never empty");
    let mut table = &mut doc;
    for key in parents {
        table = table
            .entry(key.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{key}` is not a section")))?;
    }
    if parents.first().map(String::as_str) == Some("perturbation") && !table.contains_key(last) {
        return Err(Error::Config(format!("the configured perturbation has no `{last}` field")));
    }
    table.insert(last.clone(), new);
    let text = toml::to_string(&doc).map_err(|e| Error::Config(e.to_string()))?;
    ExperimentConfig::from_toml(&text)
}

/// Runs one experiment per value, at most `workers` at a time, each in its
/// own subdirectory of the template's output directory, and writes the
/// collated `sweep.csv`. Failed entries are kept as rows.
pub fn sweep(template: &ExperimentConfig, axis: &str, values: &[f64], workers: usize) -> Result<SweepTable> {
    check_axis(template, axis)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let name = axis.replace('.', "_");
    let rows: Vec<SweepRow> = pool.install(|| {
        values
            .par_iter()
            .enumerate()
            .map(|(index, &value)| {
                let dir = template.output_dir.join(format!("{name}-{index:03}"));
                let outcome = with_axis(template, axis, value).and_then(|mut c| {
                    c.output_dir = dir.clone();
                    run(&c)
                });
                match outcome {
                    Ok(o) => SweepRow {
                        index,
                        value,
                        ok: true,
                        error: None,
                        summary: Some(o.summary),
                        dir,
                    },
                    Err(e) => SweepRow {
                        index,
                        value,
                        ok: false,
                        error: Some(e.to_string()),
                        summary: None,
                        dir,
                    },
                }
            })
            .collect()
    });
    let table = SweepTable {
        axis: axis.to_string(),
        rows,
    };
    std::fs::create_dir_all(&template.output_dir)?;
    std::fs::write(template.output_dir.join("sweep.csv"), table.to_csv())?;
    Ok(table)
}
