//! Config file schema: a versioned JSON envelope naming an algorithm plus a
//! strictly validated, algorithm-specific parameter block.

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use flowq::anneal::{SaOptions, SolveMethod};
use flowq::integrator::{MeanEstimator, QaeEstimateMode};
use flowq::qae::QaeMode;

use crate::error::CliError;

pub const SCHEMA_VERSION: u64 = 1;
pub const DEFAULT_SWEEP_CAP: usize = 1024;

/// Top-level envelope every config file must match.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u64,
    /// Base RNG seed; the `--seed` flag overrides it.
    #[serde(default)]
    pub seed: u64,
    /// Output directory; the `--out` flag overrides it.
    #[serde(default)]
    pub out_dir: Option<String>,
    /// Whether to run classical cross-checks; `--oracle-check` overrides it.
    #[serde(default)]
    pub oracle_check: Option<bool>,
    pub algorithm: String,
    pub params: Value,
}

/// Parses and validates the envelope, returning it together with the raw
/// JSON value for the report's config echo.
pub fn load_config(path: &std::path::Path) -> Result<(ExperimentConfig, Value), CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
        path: path.display().to_string(),
        source,
    })?;
    let raw: Value = serde_json::from_str(&text).map_err(|source| CliError::ConfigJson {
        path: path.display().to_string(),
        source,
    })?;
    let config: ExperimentConfig =
        serde_json::from_value(raw.clone()).map_err(|e| CliError::Schema(e.to_string()))?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(CliError::Schema(format!(
            "schema_version {} is not supported; this build reads version {}",
            config.schema_version, SCHEMA_VERSION
        )));
    }
    Ok((config, raw))
}

/// Deserializes an algorithm parameter block, rejecting unknown fields.
pub fn parse_params<T: DeserializeOwned>(params: &Value) -> Result<T, CliError> {
    serde_json::from_value(params.clone()).map_err(|e| CliError::Schema(e.to_string()))
}

/// Pulls the `task` discriminator out of a parameter block and returns the
/// remaining object for task-specific parsing.
pub fn split_task(params: &Value) -> Result<(String, Value), CliError> {
    let Value::Object(map) = params else {
        return Err(CliError::Schema(
            "params must be a JSON object".to_string(),
        ));
    };
    let mut rest = map.clone();
    let Some(task) = rest.remove("task") else {
        return Err(CliError::Schema(
            "params requires a `task` field".to_string(),
        ));
    };
    let Value::String(task) = task else {
        return Err(CliError::Schema("`task` must be a string".to_string()));
    };
    Ok((task, Value::Object(rest)))
}

// ---------------------------------------------------------------------------
// encode

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodeAmplitudeParams {
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodeBasisToAmplitudeParams {
    /// Entries in `[0, 1]`.
    pub values: Vec<f64>,
    pub psi_bits: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodeBasisParams {
    /// One of `binary`, `fixed_point`, `unary`, `one_hot`.
    pub flavor: String,
    pub width: usize,
    /// Required for `fixed_point`.
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default)]
    pub integer_values: Vec<u64>,
    /// `fixed_point` only: real values to quantize and decode back.
    #[serde(default)]
    pub real_values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodeBlockParams {
    pub matrix: Vec<Vec<f64>>,
    /// Subnormalization; defaults to the spectral norm.
    #[serde(default)]
    pub alpha: Option<f64>,
}

// ---------------------------------------------------------------------------
// qae

/// Readout mode for a single estimation.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeParam {
    Exact,
    Sampled { shots: usize },
}

impl ModeParam {
    pub fn to_qae_mode(&self, seed: u64) -> QaeMode {
        match *self {
            ModeParam::Exact => QaeMode::Exact,
            ModeParam::Sampled { shots } => QaeMode::Sampled { shots, seed },
        }
    }
}

fn default_mode() -> ModeParam {
    ModeParam::Exact
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaeAmplitudeParams {
    /// The amplitude `a` the single-qubit oracle marks.
    pub target_amplitude: f64,
    pub n_phase: usize,
    #[serde(default = "default_mode")]
    pub mode: ModeParam,
    /// When set, run this many single-shot repetitions (odd) and report
    /// their median instead of a single estimate.
    #[serde(default)]
    pub median_reps: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaeMeanParams {
    /// Samples in `[0, 1]` whose mean is estimated.
    pub samples: Vec<f64>,
    pub n_phase: usize,
    #[serde(default = "default_mode")]
    pub mode: ModeParam,
}

// ---------------------------------------------------------------------------
// integrate

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum QaeReadoutParam {
    ExactDistribution,
    Sampled { shots: usize },
    Median { reps: usize },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorParam {
    /// Classical arithmetic mean; the stub the quantum estimates replace.
    Exact,
    Qae {
        n_phase: usize,
        mode: QaeReadoutParam,
    },
}

impl EstimatorParam {
    pub fn to_estimator(&self, seed: u64) -> MeanEstimator {
        match self {
            EstimatorParam::Exact => MeanEstimator::ExactClassical,
            EstimatorParam::Qae { n_phase, mode } => MeanEstimator::Qae {
                n_phase: *n_phase,
                mode: match *mode {
                    QaeReadoutParam::ExactDistribution => QaeEstimateMode::ExactDistribution,
                    QaeReadoutParam::Sampled { shots } => {
                        QaeEstimateMode::Sampled { shots, seed }
                    }
                    QaeReadoutParam::Median { reps } => QaeEstimateMode::Median { reps, seed },
                },
            },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateParams {
    /// Scalar dynamics `y' = sum_k coefficients[k] * y^k`. Exactly one of
    /// `coefficients` and `matrix` must be present.
    #[serde(default)]
    pub coefficients: Option<Vec<f64>>,
    /// Linear system dynamics `y' = M y`.
    #[serde(default)]
    pub matrix: Option<Vec<Vec<f64>>>,
    pub initial: Vec<f64>,
    pub horizon: f64,
    pub primary: usize,
    pub secondary: usize,
    /// Taylor expansion order per step.
    pub order: usize,
    pub estimator: EstimatorParam,
}

// ---------------------------------------------------------------------------
// copies

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopiesQuadraticParams {
    pub n_vars: usize,
    /// Sparse tensor entries `(alpha, k, l, value)` of the quadratic map in
    /// homogenized coordinates (index 0 is the constant slot).
    pub entries: Vec<(usize, usize, usize, f64)>,
    /// Initial unit vector as `[re, im]` pairs.
    pub initial: Vec<[f64; 2]>,
    pub epsilon: f64,
    pub dt: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopiesMeanfieldParams {
    pub n_copies: usize,
    pub dim: usize,
    /// Pair interaction tensor, a `dim^2 x dim^2` complex matrix of
    /// `[re, im]` pairs; must be anti-Hermitian after exchange
    /// symmetrization.
    pub tensor: Vec<Vec<[f64; 2]>>,
    pub initial: Vec<[f64; 2]>,
    pub dt: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopiesHistoryParams {
    pub n_copies: usize,
    /// Linear generator `G` of `x' = -G x`, complex entries.
    pub generator: Vec<Vec<[f64; 2]>>,
    pub initial: Vec<[f64; 2]>,
    /// Optional per-step forcing vectors.
    #[serde(default)]
    pub forcing: Option<Vec<Vec<[f64; 2]>>>,
    pub dt: f64,
    pub steps: usize,
}

// ---------------------------------------------------------------------------
// qade

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodParam {
    Exhaustive,
    SimulatedAnnealing {
        #[serde(default = "default_reads")]
        reads: usize,
        #[serde(default = "default_sweeps")]
        sweeps: usize,
        #[serde(default = "default_t_initial")]
        t_initial: f64,
        #[serde(default = "default_t_final")]
        t_final: f64,
    },
}

fn default_reads() -> usize {
    SaOptions::default().reads
}
fn default_sweeps() -> usize {
    SaOptions::default().sweeps
}
fn default_t_initial() -> f64 {
    SaOptions::default().t_initial
}
fn default_t_final() -> f64 {
    SaOptions::default().t_final
}

impl MethodParam {
    pub fn to_solve_method(&self, seed: u64) -> SolveMethod {
        match *self {
            MethodParam::Exhaustive => SolveMethod::Exhaustive,
            MethodParam::SimulatedAnnealing {
                reads,
                sweeps,
                t_initial,
                t_final,
            } => SolveMethod::SimulatedAnnealing(SaOptions {
                reads,
                sweeps,
                t_initial,
                t_final,
                seed,
            }),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermParam {
    pub field: usize,
    pub derivative_order: usize,
    /// Coefficient polynomial in ascending powers of `x`.
    pub coefficient: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionParam {
    pub terms: Vec<TermParam>,
    /// Inhomogeneity polynomial in ascending powers of `x`.
    #[serde(default)]
    pub inhomogeneity: Vec<f64>,
    pub domain: [f64; 2],
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QadeParams {
    pub n_fields: usize,
    pub conditions: Vec<ConditionParam>,
    /// `monomial` or `chebyshev`.
    pub basis_family: String,
    pub basis_degree: usize,
    /// Initial window centers, one per expansion weight.
    pub centers: Vec<f64>,
    /// Initial window half-width, shared by every weight.
    pub scale: f64,
    pub spins_per_weight: usize,
    pub epochs: usize,
    pub shrink: f64,
    pub method: MethodParam,
}

// ---------------------------------------------------------------------------
// qrk

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum QrkSolverParam {
    /// Exact continuous minimizer of the stage residuals.
    LeastSquares,
    /// Binary-window annealing solve with zoom epochs.
    Windowed {
        bits: usize,
        epochs: usize,
        method: MethodParam,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QrkParams {
    /// `rk4`, `implicit_midpoint`, `backward_euler`, or `explicit_euler`.
    pub tableau: String,
    /// Affine dynamics `f(u) = constant + M u`; `constant` defaults to zero.
    #[serde(default)]
    pub constant: Option<Vec<f64>>,
    pub matrix: Vec<Vec<f64>>,
    pub initial: Vec<f64>,
    pub dt: f64,
    pub solver: QrkSolverParam,
}

// ---------------------------------------------------------------------------
// qlbm

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldParam {
    /// Explicit per-site values.
    Values(Vec<f64>),
    Uniform { value: f64 },
    /// `floor + exp(-(x - center)^2 / (2 width^2))` per site.
    Gaussian { center: f64, width: f64, floor: f64 },
}

impl FieldParam {
    pub fn build(&self, sites: usize) -> Vec<f64> {
        match self {
            FieldParam::Values(values) => values.clone(),
            FieldParam::Uniform { value } => vec![*value; sites],
            FieldParam::Gaussian {
                center,
                width,
                floor,
            } => (0..sites)
                .map(|x| {
                    let d = (x as f64 - center) / width;
                    floor + (-0.5 * d * d).exp()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QlbmParams {
    pub sites: usize,
    pub speed: f64,
    pub steps: usize,
    pub field: FieldParam,
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBase {
    pub algorithm: String,
    pub params: Value,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// Dotted path into the base params object, e.g. `n_phase` or
    /// `solver.windowed.bits`.
    pub path: String,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub base: SweepBase,
    pub grid: Vec<SweepAxis>,
    #[serde(default = "default_sweep_cap")]
    pub max_points: usize,
}

fn default_sweep_cap() -> usize {
    DEFAULT_SWEEP_CAP
}

/// Sets `value` at a dotted `path` inside a params object, failing when an
/// intermediate segment is missing or not an object.
pub fn set_at_path(params: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(CliError::Schema(format!("bad grid path `{path}`")));
    }
    let mut cursor = params;
    for segment in &segments[..segments.len() - 1] {
        cursor = cursor
            .as_object_mut()
            .and_then(|map| map.get_mut(*segment))
            .ok_or_else(|| {
                CliError::Schema(format!(
                    "grid path `{path}`: segment `{segment}` is missing or not an object"
                ))
            })?;
    }
    let leaf = segments[segments.len() - 1];
    let Some(map) = cursor.as_object_mut() else {
        return Err(CliError::Schema(format!(
            "grid path `{path}`: parent of `{leaf}` is not an object"
        )));
    };
    map.insert(leaf.to_string(), value);
    Ok(())
}
