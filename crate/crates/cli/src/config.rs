//! TOML experiment configurations.
//!
//! ```toml
//! theorem_id = "gaussian-series"
//! thresholds = [0.5, 1.0, 1.5]
//! trials = 10000
//! alpha = 0.01
//! seed = 7
//! output = "out.csv"
//!
//! [ensemble]
//! kind = "series"
//! variable = "rademacher"
//! coefficients = ["a1.tensor"]
//! ```
//!
//! Tensor paths and `output` are resolved against the directory holding the config.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Serialize};
use tprod_core::bounds::HadamardMode;
use tprod_core::ensembles::{EigenLaw, MultiplierKind, VariableKind};
use tprod_core::verification::catalog::{DEFAULT_ALPHA, DEFAULT_TRIALS};
use tprod_core::verification::catalog::TpsdParams;
use tprod_core::verification::EnsembleSpec;
use tprod_core::{literal, spectral, DenseTensor3, TheoremId, Threshold};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub theorem_id: String,
    pub thresholds: ThresholdGrid,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub ensemble: EnsembleConfig,
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

/// Scalar thresholds, or one vector threshold per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThresholdGrid {
    Scalar(Vec<f64>),
    Vector(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variable {
    Gaussian,
    Rademacher,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Multiplier {
    Rademacher,
    Adapted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Stated,
    AllSlices,
}

/// `"degenerate"`, `"uniform"` or `{ bernoulli = q }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Law {
    Degenerate,
    Uniform,
    Bernoulli(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnsembleConfig {
    Series {
        variable: Variable,
        coefficients: Vec<String>,
    },
    RectangularSeries {
        variable: Variable,
        coefficients: Vec<String>,
    },
    BoundedTpsd {
        n_sum: usize,
        m: usize,
        p: usize,
        t_cap: f64,
        law: Law,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
        #[serde(default)]
        construction_seed: u64,
        #[serde(default)]
        average: bool,
    },
    CenteredBounded {
        n_sum: usize,
        m: usize,
        p: usize,
        t_cap: f64,
        law: Law,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
        #[serde(default)]
        construction_seed: u64,
    },
    Martingale {
        multiplier: Multiplier,
        caps: Vec<String>,
    },
    Mcdiarmid {
        terms: Vec<String>,
    },
    Hadamard {
        pattern: String,
        #[serde(default = "default_mode")]
        mode: Mode,
    },
}

fn default_mode() -> Mode {
    Mode::Stated
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn render(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn theorem(&self) -> anyhow::Result<TheoremId> {
        Ok(self.theorem_id.parse()?)
    }

    pub fn grid(&self) -> anyhow::Result<Vec<Threshold>> {
        match &self.thresholds {
            ThresholdGrid::Scalar(v) => Ok(v.iter().map(|&t| Threshold::Scalar(t)).collect()),
            ThresholdGrid::Vector(rows) => rows
                .iter()
                .map(|b| Threshold::vector(b.clone()).map_err(Into::into))
                .collect(),
        }
    }

    /// Reads every tensor file under `base` and assembles the ensemble.
    pub fn ensemble_spec(&self, base: &Path) -> anyhow::Result<EnsembleSpec> {
        let load_all = |paths: &[String], hermitian: bool| -> anyhow::Result<Vec<DenseTensor3>> {
            paths.iter().map(|p| load_tensor(base, p, hermitian)).collect()
        };
        Ok(match &self.ensemble {
            EnsembleConfig::Series { variable, coefficients } => EnsembleSpec::Series {
                kind: variable.into(),
                coefficients: load_all(coefficients, true)?,
                rectangular: false,
            },
            EnsembleConfig::RectangularSeries { variable, coefficients } => EnsembleSpec::Series {
                kind: variable.into(),
                coefficients: load_all(coefficients, false)?,
                rectangular: true,
            },
            EnsembleConfig::BoundedTpsd {
                n_sum,
                m,
                p,
                t_cap,
                law,
                weights,
                construction_seed,
                average,
            } => EnsembleSpec::BoundedTpsd {
                params: tpsd_params(*n_sum, *m, *p, *t_cap, *law, weights, *construction_seed),
                average: *average,
            },
            EnsembleConfig::CenteredBounded {
                n_sum,
                m,
                p,
                t_cap,
                law,
                weights,
                construction_seed,
            } => EnsembleSpec::CenteredBounded {
                params: tpsd_params(*n_sum, *m, *p, *t_cap, *law, weights, *construction_seed),
            },
            EnsembleConfig::Martingale { multiplier, caps } => EnsembleSpec::Martingale {
                kind: match multiplier {
                    Multiplier::Rademacher => MultiplierKind::Rademacher,
                    Multiplier::Adapted => MultiplierKind::Adapted,
                },
                caps: load_all(caps, true)?,
            },
            EnsembleConfig::Mcdiarmid { terms } => EnsembleSpec::McDiarmid {
                terms: load_all(terms, true)?,
            },
            EnsembleConfig::Hadamard { pattern, mode } => EnsembleSpec::Hadamard {
                pattern: load_tensor(base, pattern, false)?,
                mode: match mode {
                    Mode::Stated => HadamardMode::Stated,
                    Mode::AllSlices => HadamardMode::AllSlices,
                },
            },
        })
    }

    pub fn output_path(&self, base: &Path) -> Option<PathBuf> {
        self.output.as_ref().map(|o| base.join(o))
    }
}

fn load_tensor(base: &Path, rel: &str, hermitian: bool) -> anyhow::Result<DenseTensor3> {
    let path = base.join(rel);
    let t = literal::read_file(&path).map_err(|e| anyhow!("tensor {}: {e}", path.display()))?;
    if hermitian {
        if !t.shape().is_square() {
            bail!("tensor {}: expected a square tensor, got {}", path.display(), t.shape());
        }
        spectral::ensure_hermitian(&t).map_err(|e| anyhow!("tensor {}: {e}", path.display()))?;
    }
    Ok(t)
}

impl From<&Variable> for VariableKind {
    fn from(v: &Variable) -> Self {
        match v {
            Variable::Gaussian => VariableKind::Gaussian,
            Variable::Rademacher => VariableKind::Rademacher,
        }
    }
}

fn tpsd_params(
    n_sum: usize,
    m: usize,
    p: usize,
    t_cap: f64,
    law: Law,
    weights: &Option<Vec<f64>>,
    construction_seed: u64,
) -> TpsdParams {
    TpsdParams {
        n_sum,
        m,
        p,
        t_cap,
        law: match law {
            Law::Degenerate => EigenLaw::Degenerate,
            Law::Uniform => EigenLaw::Uniform,
            Law::Bernoulli(q) => EigenLaw::Bernoulli(q),
        },
        weights: weights.clone().unwrap_or_else(|| vec![1.0; m]),
        construction_seed,
    }
}
