//! JSON experiment configuration shared by every CLI subcommand. Unknown keys
//! are rejected so config drift surfaces immediately.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::grid::TimeGrid;
use crate::kernels::{builtin_kernel, BuiltinKernel, Kernel};
use crate::resolvent::{build_discrete_elliptic, BoundaryCondition};
use crate::stochastic::JumpLaw;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Fractional { beta: f64 },
    KelvinVoigt { nu: f64, mu: f64 },
    LinearT,
    ConstantOne,
}

impl KernelSpec {
    pub fn build(&self) -> Result<Kernel> {
        let builtin = match *self {
            KernelSpec::Fractional { beta } => BuiltinKernel::Fractional { beta },
            KernelSpec::KelvinVoigt { nu, mu } => BuiltinKernel::KelvinVoigt { nu, mu },
            KernelSpec::LinearT => BuiltinKernel::LinearT,
            KernelSpec::ConstantOne => BuiltinKernel::ConstantOne,
        };
        builtin_kernel(builtin)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    Diagonal {
        entries: Vec<f64>,
    },
    Dense {
        rows: Vec<Vec<f64>>,
    },
    Elliptic {
        diffusion: f64,
        drift: f64,
        reaction: f64,
        interior_points: usize,
        domain: [f64; 2],
        boundary: BoundarySpec,
    },
    MatrixFile {
        path: String,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySpec {
    Dirichlet,
    Periodic,
}

impl OperatorSpec {
    pub fn build(&self) -> Result<DMatrix<f64>> {
        match self {
            OperatorSpec::Diagonal { entries } => {
                if entries.is_empty() {
                    return Err(CoreError::InvalidArgument("empty diagonal".into()));
                }
                Ok(DMatrix::from_fn(entries.len(), entries.len(), |i, j| {
                    if i == j {
                        entries[i]
                    } else {
                        0.0
                    }
                }))
            }
            OperatorSpec::Dense { rows } => {
                let n = rows.len();
                if n == 0 || rows.iter().any(|r| r.len() != n) {
                    return Err(CoreError::InvalidArgument(
                        "dense operator must be a nonempty square row list".into(),
                    ));
                }
                Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
            }
            OperatorSpec::Elliptic {
                diffusion,
                drift,
                reaction,
                interior_points,
                domain,
                boundary,
            } => {
                let m = *interior_points;
                let bc = match boundary {
                    BoundarySpec::Dirichlet => BoundaryCondition::Dirichlet,
                    BoundarySpec::Periodic => BoundaryCondition::Periodic,
                };
                let op = build_discrete_elliptic(
                    &vec![*diffusion; m],
                    &vec![*drift; m],
                    &vec![*reaction; m],
                    (domain[0], domain[1]),
                    bc,
                )?;
                Ok(op.matrix)
            }
            OperatorSpec::MatrixFile { path } => {
                let text = std::fs::read_to_string(path)?;
                let rows: Vec<Vec<f64>> = serde_json::from_str(&text)?;
                OperatorSpec::Dense { rows }.build()
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub horizon: f64,
    pub steps: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.horizon, self.steps)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default)]
    pub brownian_covariance: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub poisson_rate: Option<f64>,
    #[serde(default)]
    pub jump_law: Option<JumpLaw>,
}

impl NoiseSpec {
    pub fn covariance_matrix(&self, dim: usize) -> Result<Option<DMatrix<f64>>> {
        match &self.brownian_covariance {
            None => Ok(None),
            Some(rows) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(CoreError::DimensionMismatch {
                        expected: dim,
                        got: rows.len(),
                    });
                }
                Ok(Some(DMatrix::from_fn(dim, dim, |i, j| rows[i][j])))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Hash)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Certificate,
    ResolventResidual,
    CrossMethod,
    LaplaceBound,
    Gram,
    Bochner,
    WeakSolution,
    JumpTransfer,
    Regularity,
    MartingaleMean,
}

/// Central tolerance defaults, overridable per run; every report records the
/// values in force.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Gram minimum eigenvalue must sit above `-gram_rel * ||G||`.
    pub gram_rel: f64,
    /// Fourier-test values must sit above `-bochner`.
    pub bochner: f64,
    /// Direct vs spectral table sup difference (widened by the measured
    /// residual).
    pub cross_method: f64,
    /// Discrete defect of the direct resolvent solve.
    pub resolvent_residual: f64,
    /// Max pathwise defect of the weak-solution identity.
    pub weak_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            gram_rel: 1e-8,
            bochner: 1e-10,
            cross_method: 1e-6,
            resolvent_residual: 1e-9,
            weak_residual: 5e-3,
        }
    }
}

/// One config drives every subcommand; fields irrelevant to a subcommand are
/// simply unused, missing required fields are usage errors at run time.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: KernelSpec,
    #[serde(default)]
    pub operator: Option<OperatorSpec>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub checks: Option<Vec<CheckName>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub ensemble: Option<usize>,
    #[serde(default)]
    pub u0: Option<Vec<f64>>,
    #[serde(default)]
    pub phi_a_bound: Option<f64>,
    #[serde(default)]
    pub w: Option<f64>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub time_samples: Option<usize>,
    #[serde(default)]
    pub out_dir: Option<String>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        // serde skips `deny_unknown_fields` inside internally tagged enums, so
        // the tagged spots are key-checked explicitly before the typed parse.
        if let Some(kernel) = value.get("kernel") {
            validate_tagged_keys(
                kernel,
                "kernel",
                &[
                    ("fractional", &["beta"]),
                    ("kelvin_voigt", &["nu", "mu"]),
                    ("linear_t", &[]),
                    ("constant_one", &[]),
                ],
            )?;
        }
        if let Some(op) = value.get("operator") {
            validate_tagged_keys(
                op,
                "operator",
                &[
                    ("diagonal", &["entries"]),
                    ("dense", &["rows"]),
                    (
                        "elliptic",
                        &[
                            "diffusion",
                            "drift",
                            "reaction",
                            "interior_points",
                            "domain",
                            "boundary",
                        ],
                    ),
                    ("matrix_file", &["path"]),
                ],
            )?;
        }
        if let Some(law) = value.get("noise").and_then(|n| n.get("jump_law")) {
            validate_tagged_keys(
                law,
                "noise.jump_law",
                &[
                    ("rademacher", &["scale"]),
                    ("gaussian", &["sigma"]),
                    ("fixed", &["vector"]),
                ],
            )?;
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.clone().unwrap_or_default()
    }

    pub fn phi_a_bound(&self) -> f64 {
        self.phi_a_bound.unwrap_or(std::f64::consts::PI / 8.0)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

/// Reject keys that are not `type` plus the allowed set of the named variant.
fn validate_tagged_keys(
    value: &serde_json::Value,
    context: &str,
    variants: &[(&str, &[&str])],
) -> Result<()> {
    let obj = value.as_object().ok_or_else(|| {
        CoreError::InvalidArgument(format!("{context} must be a JSON object"))
    })?;
    let tag = obj
        .get("type")
        .and_then(|t| t.as_str())
        .ok_or_else(|| CoreError::InvalidArgument(format!("{context} needs a \"type\" tag")))?;
    let allowed = variants
        .iter()
        .find(|(name, _)| *name == tag)
        .map(|(_, keys)| *keys)
        .ok_or_else(|| {
            CoreError::InvalidArgument(format!("{context}: unknown type \"{tag}\""))
        })?;
    for key in obj.keys() {
        if key != "type" && !allowed.contains(&key.as_str()) {
            return Err(CoreError::InvalidArgument(format!(
                "{context}: unknown key \"{key}\" for type \"{tag}\""
            )));
        }
    }
    Ok(())
}
