//! JSON run configuration.
//!
//! ```json
//! {
//!   "model": { "gaussian_location": { "p": 2, "sigma": 0.05 } },
//!   "prior": { "uniform_ball": { "R": 1.0 } },
//!   "poi": "norm",
//!   "flock": "radial",
//!   "distortion": "squared",
//!   "tgrid": { "n": 2048, "t_max": "auto" },
//!   "quadrature": { "radial_nodes": 4096 },
//!   "seed": 42,
//!   "oracle": { "n_trials": 20000, "n_is": 2000 }
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use zzbound_core::engine::{BoundOptions, DEFAULT_QUAD_NODES, DEFAULT_T_NODES};
use zzbound_core::{
    BoundProblem, DensityMode, Discretizer, DistortionFn, Execution, Flock, GaussianLocationModel, ParamOfInterest,
    Prior, UniformBallPrior, UniformIntervalPrior,
};

use crate::error::CliError;

/// Tolerance on u·v = 1 for linear flocks.
pub const LINEAR_FLOCK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub prior: PriorConfig,
    pub poi: PoiConfig,
    pub flock: FlockConfig,
    #[serde(default)]
    pub density_mode: DensityModeConfig,
    pub distortion: DistortionFn,
    #[serde(default)]
    pub tgrid: TGridConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    GaussianLocation { p: usize, sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorConfig {
    UniformBall {
        #[serde(rename = "R", alias = "radius")]
        radius: f64,
    },
    UniformInterval {
        lo: f64,
        hi: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PoiConfig {
    Norm,
    Linear { u: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FlockConfig {
    Radial,
    Linear { v: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityModeConfig {
    #[default]
    ClosedForm,
    NumericJacobian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TMaxConfig {
    Value(f64),
    Keyword(String),
}

impl Default for TMaxConfig {
    fn default() -> Self {
        TMaxConfig::Keyword("auto".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TGridConfig {
    #[serde(default = "default_t_nodes")]
    pub n: usize,
    #[serde(default)]
    pub t_max: TMaxConfig,
}

impl Default for TGridConfig {
    fn default() -> Self {
        TGridConfig {
            n: DEFAULT_T_NODES,
            t_max: TMaxConfig::default(),
        }
    }
}

fn default_t_nodes() -> usize {
    DEFAULT_T_NODES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default = "default_quad_nodes")]
    pub radial_nodes: usize,
    #[serde(default = "default_doublings")]
    pub max_doublings: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            radial_nodes: DEFAULT_QUAD_NODES,
            max_doublings: default_doublings(),
        }
    }
}

fn default_quad_nodes() -> usize {
    DEFAULT_QUAD_NODES
}

fn default_doublings() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub n_trials: usize,
    #[serde(default = "default_n_is")]
    pub n_is: usize,
}

fn default_n_is() -> usize {
    2000
}

/// The validated objects a run needs.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub problem: BoundProblem,
    pub distortion: DistortionFn,
    pub options: BoundOptions,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("<file>", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            CliError::config(
                if field == "." { "<root>".to_string() } else { field },
                e.inner().to_string(),
            )
        })
    }

    pub fn dim(&self) -> usize {
        match self.model {
            ModelConfig::GaussianLocation { p, .. } => p,
        }
    }

    pub fn sigma(&self) -> f64 {
        match self.model {
            ModelConfig::GaussianLocation { sigma, .. } => sigma,
        }
    }

    /// Checks cross-field consistency and builds the core objects.
    pub fn prepare(&self, execution: Execution) -> Result<Prepared, CliError> {
        let ModelConfig::GaussianLocation { p, sigma } = self.model;
        if p == 0 {
            return Err(CliError::config(
                "model.gaussian_location.p",
                "dimension must be at least 1",
            ));
        }
        let model = GaussianLocationModel::new(p, sigma)
            .map_err(|e| CliError::config("model.gaussian_location.sigma", e.to_string()))?;

        let prior: Prior = match self.prior {
            PriorConfig::UniformBall { radius } => UniformBallPrior::new(p, radius)
                .map_err(|e| CliError::config("prior.uniform_ball.R", e.to_string()))?
                .into(),
            PriorConfig::UniformInterval { lo, hi } => {
                if p != 1 {
                    return Err(CliError::config(
                        "prior.uniform_interval",
                        format!("interval priors need p = 1, model has p = {p}"),
                    ));
                }
                UniformIntervalPrior::new(lo, hi)
                    .map_err(|e| CliError::config("prior.uniform_interval", e.to_string()))?
                    .into()
            }
        };

        let poi = match &self.poi {
            PoiConfig::Norm => ParamOfInterest::Norm,
            PoiConfig::Linear { u } => {
                if u.len() != p {
                    return Err(CliError::config(
                        "poi.linear.u",
                        format!("length {} does not match p = {p}", u.len()),
                    ));
                }
                ParamOfInterest::linear(u.clone()).map_err(|e| CliError::config("poi.linear.u", e.to_string()))?
            }
        };

        let flock = match &self.flock {
            FlockConfig::Radial => Flock::radial(),
            FlockConfig::Linear { v } => {
                if v.len() != p {
                    return Err(CliError::config(
                        "flock.linear.v",
                        format!("length {} does not match p = {p}", v.len()),
                    ));
                }
                let PoiConfig::Linear { u } = &self.poi else {
                    return Err(CliError::config(
                        "flock.linear.v",
                        "a linear flock needs a linear parameter of interest",
                    ));
                };
                let uv: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
                if (uv - 1.0).abs() > LINEAR_FLOCK_TOLERANCE {
                    return Err(CliError::config(
                        "flock.linear.v",
                        format!("u·v must equal 1, got {uv}"),
                    ));
                }
                Flock::linear(v.clone()).map_err(|e| CliError::config("flock.linear.v", e.to_string()))?
            }
        };
        let flock = flock.with_density_mode(match self.density_mode {
            DensityModeConfig::ClosedForm => DensityMode::ClosedForm,
            DensityModeConfig::NumericJacobian => DensityMode::NumericJacobian,
        });

        self.distortion
            .validate()
            .map_err(|e| CliError::config("distortion", e.to_string()))?;

        if self.tgrid.n < 3 {
            return Err(CliError::config(
                "tgrid.n",
                format!("need at least 3 nodes, got {}", self.tgrid.n),
            ));
        }
        let t_max = match &self.tgrid.t_max {
            TMaxConfig::Keyword(k) if k == "auto" => None,
            TMaxConfig::Keyword(k) => {
                return Err(CliError::config(
                    "tgrid.t_max",
                    format!("expected a number or \"auto\", got {k:?}"),
                ))
            }
            TMaxConfig::Value(v) if v.is_finite() && *v > 0.0 => Some(*v),
            TMaxConfig::Value(v) => return Err(CliError::config("tgrid.t_max", format!("must be positive, got {v}"))),
        };
        if self.quadrature.radial_nodes < 16 {
            return Err(CliError::config(
                "quadrature.radial_nodes",
                format!("need at least 16 nodes, got {}", self.quadrature.radial_nodes),
            ));
        }
        if let Some(oracle) = &self.oracle {
            if oracle.n_trials < 1000 {
                return Err(CliError::config(
                    "oracle.n_trials",
                    format!("need at least 1000 trials, got {}", oracle.n_trials),
                ));
            }
            if oracle.n_is < 1000 {
                return Err(CliError::config(
                    "oracle.n_is",
                    format!("need at least 1000 importance samples, got {}", oracle.n_is),
                ));
            }
        }

        let problem =
            BoundProblem::new(model, prior, poi, flock).map_err(|e| CliError::config("model", e.to_string()))?;
        Discretizer::for_problem(&problem, self.quadrature.radial_nodes)
            .map_err(|e| CliError::config("flock", e.to_string()))?;

        Ok(Prepared {
            problem,
            distortion: self.distortion,
            options: BoundOptions {
                t_nodes: self.tgrid.n,
                t_max,
                quad_nodes: self.quadrature.radial_nodes,
                max_doublings: self.quadrature.max_doublings,
                execution,
                ..BoundOptions::default()
            },
        })
    }
}
