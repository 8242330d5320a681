//! Time marching with quadratures replaced by mean estimation.
//!
//! Each primary step expands the local solution of `y' = f(y)` in a short
//! Taylor series, samples the derivative polynomial on a secondary grid of
//! left endpoints, and advances by the step size times the sample mean. The
//! mean can be taken classically or handed to amplitude estimation
//! ([`MeanEstimator`]), after rescaling the samples into the unit interval.
//! Spatial problems enter through [`discretize_pde`], which compiles heat
//! and advection stencils on a periodic grid into the same polynomial
//! right-hand-side form.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::qae::{self, QaeMode};

/// Largest total degree a driver monomial may carry.
pub const MAX_DRIVER_DEGREE: usize = 4;
/// Largest local Taylor order of the solution expansion.
pub const MAX_TAYLOR_ORDER: usize = 4;

/// One term `coefficient * prod_k y[var_k]^exp_k` of a polynomial driver.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coefficient: f64,
    /// `(variable index, exponent)` pairs; exponents must be at least 1.
    pub powers: Vec<(usize, usize)>,
}

impl Monomial {
    pub fn constant(value: f64) -> Self {
        Self {
            coefficient: value,
            powers: Vec::new(),
        }
    }

    pub fn linear(coefficient: f64, var: usize) -> Self {
        Self {
            coefficient,
            powers: vec![(var, 1)],
        }
    }

    fn total_degree(&self) -> usize {
        self.powers.iter().map(|&(_, e)| e).sum()
    }
}

/// An autonomous polynomial system `y' = f(y)` with one monomial sum per
/// component.
#[derive(Debug, Clone)]
pub struct ODESystem {
    dim: usize,
    components: Vec<Vec<Monomial>>,
}

impl ODESystem {
    pub fn new(dim: usize, components: Vec<Vec<Monomial>>) -> Result<Self> {
        if dim == 0 || components.len() != dim {
            return Err(Error::DimensionMismatch {
                got: components.len(),
                want: dim.max(1),
            });
        }
        for terms in &components {
            for m in terms {
                let degree = m.total_degree();
                if degree > MAX_DRIVER_DEGREE {
                    return Err(Error::DriverDegreeTooLarge {
                        degree,
                        max: MAX_DRIVER_DEGREE,
                    });
                }
                for &(var, exp) in &m.powers {
                    if var >= dim {
                        return Err(Error::MonomialOutOfRange { var, dim });
                    }
                    if exp == 0 {
                        return Err(Error::MonomialOutOfRange { var, dim });
                    }
                }
            }
        }
        Ok(Self { dim, components })
    }

    /// Scalar equation `y' = sum_m coeffs[m] * y^m`.
    pub fn scalar_polynomial(coeffs: &[f64]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyInput);
        }
        let terms = coeffs
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a != 0.0)
            .map(|(m, &a)| {
                if m == 0 {
                    Monomial::constant(a)
                } else {
                    Monomial {
                        coefficient: a,
                        powers: vec![(0, m)],
                    }
                }
            })
            .collect();
        Self::new(1, vec![terms])
    }

    /// Linear system `y' = M y`.
    pub fn linear(matrix: &DMatrix<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                got: matrix.ncols(),
                want: dim,
            });
        }
        let components = (0..dim)
            .map(|i| {
                (0..dim)
                    .filter(|&j| matrix[(i, j)] != 0.0)
                    .map(|j| Monomial::linear(matrix[(i, j)], j))
                    .collect()
            })
            .collect();
        Self::new(dim, components)
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// Pointwise evaluation of the right-hand side.
    pub fn evaluate(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.dim {
            return Err(Error::StateDimensionMismatch {
                got: y.len(),
                want: self.dim,
            });
        }
        Ok(self
            .components
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|m| {
                        m.coefficient
                            * m.powers
                                .iter()
                                .map(|&(v, e)| y[v].powi(e as i32))
                                .product::<f64>()
                    })
                    .sum()
            })
            .collect())
    }

    /// Per-component Taylor coefficients `c[i][0..=order]` of the local
    /// solution around `y`, via the recursion
    /// `c_(k+1) = [f(series)]_k / (k + 1)`.
    fn taylor_series(&self, y: &[f64], order: usize) -> Vec<Vec<f64>> {
        let mut c: Vec<Vec<f64>> = y.iter().map(|&v| vec![v]).collect();
        for k in 0..order {
            let mut next = Vec::with_capacity(self.dim);
            for terms in &self.components {
                let composed = compose_terms(terms, &c, k + 1);
                next.push(composed[k] / (k + 1) as f64);
            }
            for (i, v) in next.into_iter().enumerate() {
                c[i].push(v);
            }
        }
        c
    }
}

/// Truncated product of two power series.
fn series_mul(a: &[f64], b: &[f64], trunc: usize) -> Vec<f64> {
    let mut out = vec![0.0; trunc];
    for (i, &ai) in a.iter().enumerate().take(trunc) {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(trunc - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Coefficients of a monomial sum evaluated on component series, truncated
/// to `trunc` terms.
fn compose_terms(terms: &[Monomial], series: &[Vec<f64>], trunc: usize) -> Vec<f64> {
    let mut acc = vec![0.0; trunc];
    for m in terms {
        let mut product = vec![0.0; trunc];
        product[0] = 1.0;
        for &(var, exp) in &m.powers {
            for _ in 0..exp {
                product = series_mul(&product, &series[var], trunc);
            }
        }
        for j in 0..trunc {
            acc[j] += m.coefficient * product[j];
        }
    }
    acc
}

/// Uniform two-level time grid: `primary` outer steps to `horizon`, each
/// sampled at `secondary` quadrature points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeMesh {
    horizon: f64,
    primary: usize,
    secondary: usize,
}

impl TimeMesh {
    pub fn new(horizon: f64, primary: usize, secondary: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() || primary == 0 || secondary == 0 {
            return Err(Error::BadTimeMesh {
                horizon,
                n_primary: primary,
                n_secondary: secondary,
            });
        }
        Ok(Self {
            horizon,
            primary,
            secondary,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn primary(&self) -> usize {
        self.primary
    }

    pub fn secondary(&self) -> usize {
        self.secondary
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.primary as f64
    }

    /// Time of mesh node `i`; the final node lands exactly on the horizon.
    pub fn node(&self, i: usize) -> f64 {
        if i == self.primary {
            self.horizon
        } else {
            i as f64 * self.dt()
        }
    }
}

/// How each quadrature mean is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanEstimator {
    /// Arithmetic mean of the rescaled samples; the classical stub the
    /// quantum estimates are compared against.
    ExactClassical,
    /// Amplitude estimation with `n_phase` phase qubits.
    Qae {
        n_phase: usize,
        mode: QaeEstimateMode,
    },
}

/// Readout strategy for the amplitude-estimation mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QaeEstimateMode {
    /// Mode of the exact phase distribution.
    ExactDistribution,
    /// Most frequent of `shots` seeded measurements. The seed is re-derived
    /// per step and component so repeated calls stay independent yet
    /// reproducible.
    Sampled { shots: usize, seed: u64 },
    /// Median of `reps` single-shot runs (must be odd).
    Median { reps: usize, seed: u64 },
}

/// Quadrature bookkeeping for one component of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentQuadrature {
    /// Smallest and largest derivative sample; the affine rescaling the
    /// estimator saw.
    pub lo: f64,
    pub hi: f64,
    /// Mean in original units; the step advances by `dt * mean_value`.
    pub mean_value: f64,
    /// All samples equal: the estimator was bypassed and `mean_value == lo`.
    pub degenerate: bool,
}

/// Per-step diagnostics.
#[derive(Debug, Clone)]
pub struct StepDiagnostics {
    pub step: usize,
    pub components: Vec<ComponentQuadrature>,
}

/// A completed integration: node times, the trajectory at each node, and the
/// quadrature record of every step.
#[derive(Debug, Clone)]
pub struct IntegrationResult {
    pub times: Vec<f64>,
    pub trajectory: Vec<Vec<f64>>,
    pub steps: Vec<StepDiagnostics>,
}

impl IntegrationResult {
    pub fn final_state(&self) -> &[f64] {
        self.trajectory.last().expect("trajectory is never empty")
    }
}

fn estimate_rescaled_mean(
    scaled: &[f64],
    estimator: &MeanEstimator,
    step: usize,
    component: usize,
    dim: usize,
) -> Result<f64> {
    match *estimator {
        MeanEstimator::ExactClassical => {
            Ok(scaled.iter().sum::<f64>() / scaled.len() as f64)
        }
        MeanEstimator::Qae { n_phase, mode } => {
            let salt = (step * dim + component) as u64;
            match mode {
                QaeEstimateMode::ExactDistribution => {
                    Ok(qae::estimate_mean(scaled, n_phase, &QaeMode::Exact)?.mean)
                }
                QaeEstimateMode::Sampled { shots, seed } => {
                    let mode = QaeMode::Sampled {
                        shots,
                        seed: seed.wrapping_add(salt),
                    };
                    Ok(qae::estimate_mean(scaled, n_phase, &mode)?.mean)
                }
                QaeEstimateMode::Median { reps, seed } => {
                    let oracle = qae::mean_oracle(scaled)?;
                    let med = qae::qae_median(&oracle, n_phase, reps, seed.wrapping_add(salt))?;
                    let padded = (oracle.dimension() / 2) as f64;
                    Ok(med.median * padded / scaled.len() as f64)
                }
            }
        }
    }
}

/// Marches `y' = f(y)` across the mesh with Taylor order `order`, replacing
/// each quadrature by the configured mean estimator.
pub fn solve(
    system: &ODESystem,
    y0: &[f64],
    mesh: &TimeMesh,
    order: usize,
    estimator: &MeanEstimator,
) -> Result<IntegrationResult> {
    if y0.len() != system.dimension() {
        return Err(Error::StateDimensionMismatch {
            got: y0.len(),
            want: system.dimension(),
        });
    }
    if order == 0 || order > MAX_TAYLOR_ORDER {
        return Err(Error::TaylorOrderTooLarge {
            requested: order,
            max: MAX_TAYLOR_ORDER,
        });
    }
    let dim = system.dimension();
    let dt = mesh.dt();
    let secondary = mesh.secondary();
    let h = dt / secondary as f64;

    let mut y = y0.to_vec();
    let mut times = vec![0.0];
    let mut trajectory = vec![y.clone()];
    let mut steps = Vec::with_capacity(mesh.primary());

    for step in 0..mesh.primary() {
        let series = system.taylor_series(&y, order);
        let mut next = vec![0.0; dim];
        let mut components = Vec::with_capacity(dim);
        for i in 0..dim {
            let deriv: Vec<f64> = (0..order)
                .map(|k| (k + 1) as f64 * series[i][k + 1])
                .collect();
            let samples: Vec<f64> = (0..secondary)
                .map(|s| {
                    let tau = s as f64 * h;
                    let mut v = deriv[order - 1];
                    for j in (0..order - 1).rev() {
                        v = v * tau + deriv[j];
                    }
                    v
                })
                .collect();
            let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let (mean_value, degenerate) = if hi == lo {
                (lo, true)
            } else {
                let scaled: Vec<f64> = samples.iter().map(|g| (g - lo) / (hi - lo)).collect();
                let mean = estimate_rescaled_mean(&scaled, estimator, step, i, dim)?;
                (lo + (hi - lo) * mean, false)
            };
            next[i] = y[i] + dt * mean_value;
            components.push(ComponentQuadrature {
                lo,
                hi,
                mean_value,
                degenerate,
            });
        }
        y = next;
        times.push(mesh.node(step + 1));
        trajectory.push(y.clone());
        steps.push(StepDiagnostics { step, components });
    }

    Ok(IntegrationResult {
        times,
        trajectory,
        steps,
    })
}

/// Continuum equations available for semidiscretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PdeEquation {
    /// `u_t = diffusivity * u_xx`.
    Heat { diffusivity: f64 },
    /// `u_t + speed * u_x = 0`.
    Advection { speed: f64 },
}

/// Spatial difference scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialScheme {
    Central,
    Upwind,
}

/// A periodic finite-difference semidiscretization.
#[derive(Debug, Clone)]
pub struct PdeDiscretization {
    pub system: ODESystem,
    pub grid: Vec<f64>,
    pub dx: f64,
}

/// Discretizes an equation on `n_points` periodic cells over `[x_lo, x_hi)`
/// (the right endpoint is identified with the left). Heat uses the standard
/// central second difference and rejects upwinding; advection offers central
/// differences or the sign-aware upwind stencil.
pub fn discretize_pde(
    equation: &PdeEquation,
    scheme: SpatialScheme,
    n_points: usize,
    x_lo: f64,
    x_hi: f64,
) -> Result<PdeDiscretization> {
    if n_points < 3 {
        return Err(Error::GridTooSmall(n_points));
    }
    if !(x_hi > x_lo) {
        return Err(Error::EmptyDomain { lo: x_lo, hi: x_hi });
    }
    let dx = (x_hi - x_lo) / n_points as f64;
    let grid: Vec<f64> = (0..n_points).map(|j| x_lo + j as f64 * dx).collect();
    let n = n_points;
    let mut matrix = DMatrix::<f64>::zeros(n, n);
    match (*equation, scheme) {
        (PdeEquation::Heat { diffusivity }, SpatialScheme::Central) => {
            if diffusivity <= 0.0 {
                return Err(Error::NonPositiveScale(diffusivity));
            }
            let w = diffusivity / (dx * dx);
            for j in 0..n {
                matrix[(j, j)] = -2.0 * w;
                matrix[(j, (j + 1) % n)] = w;
                matrix[(j, (j + n - 1) % n)] = w;
            }
        }
        (PdeEquation::Heat { .. }, SpatialScheme::Upwind) => {
            return Err(Error::UnsupportedScheme {
                scheme: "upwind",
                equation: "heat",
            });
        }
        (PdeEquation::Advection { speed }, SpatialScheme::Central) => {
            let w = -speed / (2.0 * dx);
            for j in 0..n {
                matrix[(j, (j + 1) % n)] = w;
                matrix[(j, (j + n - 1) % n)] = -w;
            }
        }
        (PdeEquation::Advection { speed }, SpatialScheme::Upwind) => {
            // Differences are taken from the side the wind blows from.
            let w = speed / dx;
            for j in 0..n {
                if speed >= 0.0 {
                    matrix[(j, j)] = -w;
                    matrix[(j, (j + n - 1) % n)] = w;
                } else {
                    matrix[(j, (j + 1) % n)] = -w;
                    matrix[(j, j)] = w;
                }
            }
        }
    }
    Ok(PdeDiscretization {
        system: ODESystem::linear(&matrix)?,
        grid,
        dx,
    })
}
