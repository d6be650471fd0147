//! Experiment configuration: JSON document, validated into numerical models.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::channels::{stationary_state, GkslGenerator, Semigroup};
use crate::circulant::{circulant_semigroup, CirculantSpec};
use crate::error::Error;
use crate::linalg::{CMatrix, C64};
use crate::states::{make_density, DensityMatrix};

/// Complex matrix as rows of `[re, im]` pairs.
pub type MatrixInput = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<TimeGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelConfig {
    Circulant(CirculantModel),
    Gksl(GkslModel),
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CirculantModel {
    pub p: usize,
    #[serde(default = "one")]
    pub q: usize,
    pub alpha: AlphaInput,
}

/// α either flat in row-major order or as `p` rows of length `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaInput {
    Flat(Vec<f64>),
    Nested(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GkslModel {
    #[serde(rename = "H")]
    pub h: MatrixInput,
    #[serde(default)]
    pub lindblad_ops: Vec<MatrixInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<MatrixInput>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Epr,
    Relent,
    Choi,
    CheckSqdb,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Epr => "epr",
            Command::Relent => "relent",
            Command::Choi => "choi",
            Command::CheckSqdb => "check-sqdb",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeGrid {
    Geometric { t0: f64, levels: usize },
    Explicit { times: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

/// A configuration problem, located by the path of the offending field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid configuration at {path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// A model ready for the numerical pipelines.
#[derive(Debug, Clone)]
pub enum Model {
    Circulant(CirculantSpec),
    Gksl {
        generator: GkslGenerator,
        rho: Option<DensityMatrix>,
    },
}

impl Model {
    pub fn semigroup(&self) -> Semigroup {
        match self {
            Model::Circulant(spec) => circulant_semigroup(spec),
            Model::Gksl { generator, .. } => Semigroup::from_gksl(generator),
        }
    }

    /// The reference state: `I/pq`, the configured ρ, or a stationary state.
    pub fn state(&self, sg: &Semigroup) -> crate::Result<DensityMatrix> {
        match self {
            Model::Circulant(spec) => Ok(DensityMatrix::maximally_mixed(spec.dim())),
            Model::Gksl { rho: Some(rho), .. } => Ok(rho.clone()),
            Model::Gksl { rho: None, .. } => stationary_state(sg),
        }
    }
}

fn matrix_from_input(input: &MatrixInput, path: &str) -> Result<CMatrix, ConfigError> {
    let rows = input.len();
    if rows == 0 {
        return Err(ConfigError::at(path, "matrix is empty"));
    }
    if let Some(bad) = input.iter().position(|r| r.len() != rows) {
        return Err(ConfigError::at(
            format!("{path}[{bad}]"),
            format!("expected a square matrix with {rows} columns per row"),
        ));
    }
    Ok(CMatrix::from_fn(rows, rows, |r, c| {
        let [re, im] = input[r][c];
        C64::new(re, im)
    }))
}

fn describe(err: Error) -> String {
    match err {
        Error::Dimension(m) | Error::Validation(m) | Error::Domain(m) => m,
        other => other.to_string(),
    }
}

impl CirculantModel {
    fn flat_alpha(&self) -> Result<Vec<f64>, ConfigError> {
        match &self.alpha {
            AlphaInput::Flat(values) => Ok(values.clone()),
            AlphaInput::Nested(rows) => {
                if rows.len() != self.p || rows.iter().any(|r| r.len() != self.q) {
                    return Err(ConfigError::at(
                        "model.circulant.alpha",
                        format!("nested alpha must have {} rows of length {}", self.p, self.q),
                    ));
                }
                Ok(rows.concat())
            }
        }
    }

    pub fn spec(&self) -> Result<CirculantSpec, ConfigError> {
        if self.p == 0 {
            return Err(ConfigError::at("model.circulant.p", "p must be at least 1"));
        }
        if self.q == 0 {
            return Err(ConfigError::at("model.circulant.q", "q must be at least 1"));
        }
        CirculantSpec::new(self.p, self.q, self.flat_alpha()?)
            .map_err(|e| ConfigError::at("model.circulant.alpha", describe(e)))
    }
}

impl GkslModel {
    pub fn build(&self) -> Result<(GkslGenerator, Option<DensityMatrix>), ConfigError> {
        let h = matrix_from_input(&self.h, "model.gksl.H")?;
        let d = h.nrows();
        let mut ops = Vec::with_capacity(self.lindblad_ops.len());
        for (k, op) in self.lindblad_ops.iter().enumerate() {
            let path = format!("model.gksl.lindblad_ops[{k}]");
            let m = matrix_from_input(op, &path)?;
            if m.nrows() != d {
                return Err(ConfigError::at(path, format!("expected a {d}x{d} matrix")));
            }
            ops.push(m);
        }
        let generator = GkslGenerator::new(h, ops)
            .map_err(|e| ConfigError::at("model.gksl.H", describe(e)))?;
        let rho = match &self.rho {
            None => None,
            Some(input) => {
                let m = matrix_from_input(input, "model.gksl.rho")?;
                if m.nrows() != d {
                    return Err(ConfigError::at("model.gksl.rho", format!("expected a {d}x{d} matrix")));
                }
                Some(make_density(m).map_err(|e| ConfigError::at("model.gksl.rho", describe(e)))?)
            }
        };
        Ok((generator, rho))
    }
}

impl TimeGrid {
    fn validate(&self) -> Result<(), ConfigError> {
        match self {
            TimeGrid::Geometric { t0, levels } => {
                if !(t0.is_finite() && *t0 > 0.0) {
                    return Err(ConfigError::at("t_grid.t0", "t0 must be a positive number"));
                }
                if *levels == 0 {
                    return Err(ConfigError::at("t_grid.levels", "levels must be at least 1"));
                }
            }
            TimeGrid::Explicit { times } => {
                if times.is_empty() {
                    return Err(ConfigError::at("t_grid.times", "at least one time is required"));
                }
                if let Some(k) = times.iter().position(|t| !(t.is_finite() && *t >= 0.0)) {
                    return Err(ConfigError::at(
                        format!("t_grid.times[{k}]"),
                        "times must be finite and nonnegative",
                    ));
                }
            }
        }
        Ok(())
    }

    /// The sample times, in the order they were given or generated.
    pub fn times(&self) -> Vec<f64> {
        match self {
            TimeGrid::Geometric { t0, levels } => {
                (0..*levels).map(|k| t0 * 0.5f64.powi(k as i32)).collect()
            }
            TimeGrid::Explicit { times } => times.clone(),
        }
    }
}

impl ExperimentConfig {
    pub fn model(&self) -> Result<Model, ConfigError> {
        match &self.model {
            ModelConfig::Circulant(c) => Ok(Model::Circulant(c.spec()?)),
            ModelConfig::Gksl(g) => {
                let (generator, rho) = g.build()?;
                Ok(Model::Gksl { generator, rho })
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model()?;
        if let Some(grid) = &self.t_grid {
            grid.validate()?;
        }
        Ok(())
    }
}

/// Parses and validates a JSON configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::at(if path == "." { "<root>".to_string() } else { path }, e.inner().to_string())
    })?;
    config.validate()?;
    Ok(config)
}
