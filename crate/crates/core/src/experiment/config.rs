use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::fixed_point::{Perturbation, PicardConfig};
use crate::lemma_lab::EulerFitConfig;
use crate::linear_solver::{ExhaustionConfig, OperatorKind, SolverConfig};
use crate::spaces::{Grid, Parameters};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    LinearStability,
    Exhaustion,
    Continuation,
    Picard,
    Lemma,
    Liouville,
    FullPipeline,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::LinearStability => "linear-stability",
            ExperimentKind::Exhaustion => "exhaustion",
            ExperimentKind::Continuation => "continuation",
            ExperimentKind::Picard => "picard",
            ExperimentKind::Lemma => "lemma",
            ExperimentKind::Liouville => "liouville",
            ExperimentKind::FullPipeline => "full-pipeline",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParameterInputs {
    pub p: f64,
    pub sigma: f64,
    pub t: f64,
    pub lambda: f64,
}

impl Default for ParameterInputs {
    fn default() -> Self {
        ParameterInputs {
            p: 1.5,
            sigma: crate::spaces::DEFAULT_SIGMA,
            t: 1.0,
            lambda: 20.0,
        }
    }
}

/// Arguments of [`Grid::half_space`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub dim: usize,
    pub eps: f64,
    pub r_out: f64,
    pub n_vertical: usize,
    pub n_transverse: usize,
    pub clustering: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            dim: 2,
            eps: 1e-3,
            r_out: 32.0,
            n_vertical: 120,
            n_transverse: 121,
            clustering: 6.0,
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<Arc<Grid>> {
        Ok(Arc::new(Grid::half_space(
            self.dim,
            self.eps,
            self.r_out,
            self.n_vertical,
            self.n_transverse,
            self.clustering,
        )?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExhaustionSection {
    pub operator: OperatorKind,
    pub study: ExhaustionConfig,
}

impl Default for ExhaustionSection {
    fn default() -> Self {
        ExhaustionSection {
            operator: OperatorKind::Schrodinger,
            study: ExhaustionConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuationSection {
    pub taus: Vec<f64>,
}

impl Default for ContinuationSection {
    fn default() -> Self {
        ContinuationSection {
            taus: (0..=10).map(|i| f64::from(i) / 10.0).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LemmaSection {
    pub samples: u64,
    pub dimension: usize,
}

impl Default for LemmaSection {
    fn default() -> Self {
        LemmaSection {
            samples: 1_000_000,
            dimension: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LiouvilleSection {
    pub taus: Vec<f64>,
    pub t: f64,
    pub windows: Vec<f64>,
    pub fit: EulerFitConfig,
}

impl Default for LiouvilleSection {
    fn default() -> Self {
        LiouvilleSection {
            taus: vec![0.25, 0.5, 1.0],
            t: 1.0,
            windows: vec![10.0, 100.0],
            fit: EulerFitConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub parameters: ParameterInputs,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_perturbation")]
    pub perturbation: Perturbation,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub picard: PicardConfig,
    #[serde(default)]
    pub exhaustion: ExhaustionSection,
    #[serde(default)]
    pub continuation: ContinuationSection,
    #[serde(default)]
    pub lemma: LemmaSection,
    #[serde(default)]
    pub liouville: LiouvilleSection,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("dhj-out")
}

fn default_perturbation() -> Perturbation {
    Perturbation::CompactBump { amplitude: 1.0, radius: 1.0 }
}

impl ExperimentConfig {
    /// Every section at its default.
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            seed: 0,
            output_dir: default_output_dir(),
            parameters: ParameterInputs::default(),
            grid: GridConfig::default(),
            perturbation: default_perturbation(),
            solver: SolverConfig::default(),
            picard: PicardConfig::default(),
            exhaustion: ExhaustionSection::default(),
            continuation: ContinuationSection::default(),
            lemma: LemmaSection::default(),
            liouville: LiouvilleSection::default(),
        }
    }

    /// Parses TOML; unknown keys are errors.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn params(&self) -> Result<Parameters> {
        let p = &self.parameters;
        Parameters::derive(p.p, p.sigma, p.t, p.lambda)
    }

    /// TOML form with the output directory blanked, so relocated runs share it.
    pub fn canonical_toml(&self) -> Result<String> {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        c.to_toml()
    }

    /// SHA-256 of [`Self::canonical_toml`].
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.canonical_toml()?.as_bytes())))
    }

    /// Checks everything that can be checked without running the experiment.
    pub fn validate(&self) -> Result<()> {
        let params = self.params()?;
        let positive = |what: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} = {v} must be positive")))
            }
        };
        positive("solver.tol", self.solver.tol)?;
        positive("picard.tol", self.picard.tol)?;
        positive("picard.solver.tol", self.picard.solver.tol)?;
        positive("picard.radius", self.picard.radius)?;
        positive("picard.delta", self.picard.delta)?;
        if self.solver.max_iters == 0 || self.picard.max_iters == 0 || self.picard.solver.max_iters == 0 {
            return Err(Error::Config("iteration limits must be positive".into()));
        }
        if let Some(c) = self.picard.constant {
            positive("picard.constant", c)?;
        }
        self.perturbation.validate()?;
        match self.kind {
            ExperimentKind::Exhaustion => {
                let e = &self.exhaustion.study;
                if e.radii.is_empty() {
                    return Err(Error::Config("exhaustion.radii is empty".into()));
                }
                positive("exhaustion.transverse_spacing", e.transverse_spacing)?;
            }
            ExperimentKind::Continuation => {
                self.grid.build()?;
                if let Some(&bad) = self.continuation.taus.iter().find(|t| !(0.0..=1.0).contains(*t)) {
                    return Err(Error::TauOutOfRange(bad));
                }
            }
            ExperimentKind::Lemma => {
                if self.lemma.samples < 100_000 {
                    return Err(Error::Config(format!(
                        "lemma.samples = {} must be at least 100000",
                        self.lemma.samples
                    )));
                }
                if !(params.p <= 2.0) {
                    return Err(Error::Config(format!("p = {} must not exceed 2", params.p)));
                }
            }
            ExperimentKind::Liouville => {
                self.grid.build()?;
                positive("liouville.t", self.liouville.t)?;
                if let Some(&bad) = self.liouville.taus.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
                    return Err(Error::TauOutOfRange(bad));
                }
                if self.liouville.windows.iter().any(|w| !(*w > 1.0)) {
                    return Err(Error::Config("liouville.windows must exceed 1".into()));
                }
                positive("liouville.fit.span", self.liouville.fit.span)?;
                if !(self.liouville.fit.ratio > 1.0) {
                    return Err(Error::Config("liouville.fit.ratio must exceed 1".into()));
                }
            }
            ExperimentKind::LinearStability | ExperimentKind::Picard | ExperimentKind::FullPipeline => {
                self.grid.build()?;
            }
        }
        Ok(())
    }
}
