//! Nonlinear dynamics through interacting state copies.
//!
//! Three escalating schemes live here. [`apply_quadratic_map`] couples two
//! copies of an encoded state to a pointer qubit through an anti-symmetric
//! Hamiltonian, so that post-selecting the pointer leaves the image of a
//! quadratic map in the first copy; the success probability doubles as a
//! norm meter and [`euler_iterate`] chains such steps into an explicit
//! trajectory, tracking the exponential copy budget honestly.
//! [`meanfield_evolve`] instead evolves `n` copies under a pairwise
//! interaction Hamiltonian and compares the reduced single-copy density
//! matrix against the classical mean-field trajectory. Finally,
//! [`build_history_system`] stacks all time levels of an Euler recursion
//! into one block-bidiagonal linear system over tensor powers, solved
//! classically and read back per time level by a rank-one projection.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::encodings::spectral_norm;
use crate::error::{Error, Result};
use crate::oracles;
use crate::statevector::{DensityMatrix, RegisterLayout, Statevector};

/// Largest tolerated deviation of an interaction tensor from
/// anti-Hermitianity.
pub const ANTI_HERMITIAN_TOL: f64 = 1e-10;

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// An inhomogeneous quadratic map `w_a = sum_(k,l) t^(a)_(kl) zh_k zh_l`
/// over the extended vector `zh = (1, z_1, ..., z_d)`; the constant slot
/// makes affine and purely quadratic terms expressible in one tensor.
#[derive(Debug, Clone)]
pub struct QuadraticMap {
    n_vars: usize,
    /// `tensors[a - 1][(k, l)]` with `a` in `1..=n_vars`, `k, l` in
    /// `0..=n_vars`.
    tensors: Vec<DMatrix<f64>>,
}

impl QuadraticMap {
    pub fn new(n_vars: usize, tensors: Vec<DMatrix<f64>>) -> Result<Self> {
        if n_vars == 0 || tensors.len() != n_vars {
            return Err(Error::DimensionMismatch {
                got: tensors.len(),
                want: n_vars.max(1),
            });
        }
        let want = n_vars + 1;
        for t in &tensors {
            if t.nrows() != want || t.ncols() != want {
                return Err(Error::DimensionMismatch {
                    got: t.nrows().max(t.ncols()),
                    want,
                });
            }
        }
        Ok(Self { n_vars, tensors })
    }

    /// Builds a map from sparse `(a, k, l, value)` entries, `a` one-based
    /// over output components, `k`/`l` zero-based over the extended vector
    /// (slot 0 is the constant).
    pub fn from_entries(n_vars: usize, entries: &[(usize, usize, usize, f64)]) -> Result<Self> {
        if n_vars == 0 {
            return Err(Error::DimensionMismatch { got: 0, want: 1 });
        }
        let mut tensors = vec![DMatrix::<f64>::zeros(n_vars + 1, n_vars + 1); n_vars];
        for &(alpha, k, l, value) in entries {
            if alpha == 0 || alpha > n_vars || k > n_vars || l > n_vars {
                return Err(Error::CoefficientOutOfRange {
                    alpha,
                    k,
                    l,
                    n_vars,
                });
            }
            tensors[alpha - 1][(k, l)] += value;
        }
        Self::new(n_vars, tensors)
    }

    /// The identity map `w = z`, routed through the constant slot.
    pub fn identity(n_vars: usize) -> Result<Self> {
        let entries: Vec<_> = (1..=n_vars).map(|a| (a, a, 0, 1.0)).collect();
        Self::from_entries(n_vars, &entries)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Dimension of one encoded copy: the extended vector padded to a power
    /// of two.
    pub fn embedding_dim(&self) -> usize {
        (self.n_vars + 1).next_power_of_two()
    }

    /// Classical evaluation `w_a = sum t^(a)_(kl) zh_k zh_l`.
    pub fn apply_classical(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        if z.len() != self.n_vars {
            return Err(Error::StateDimensionMismatch {
                got: z.len(),
                want: self.n_vars,
            });
        }
        let mut extended = vec![Complex64::new(1.0, 0.0)];
        extended.extend_from_slice(z);
        Ok(self
            .tensors
            .iter()
            .map(|t| {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..=self.n_vars {
                    for l in 0..=self.n_vars {
                        acc += Complex64::new(t[(k, l)], 0.0) * extended[k] * extended[l];
                    }
                }
                acc
            })
            .collect())
    }

    /// The two-copy transition matrix: rows live on `(a, 0)` pairs, columns
    /// on `(k, l)` pairs, with a unit constant row keeping the `(0, 0)`
    /// reference amplitude alive. Acting on `phi x phi` with
    /// `phi = (1, z) / sqrt(2)` it produces
    /// `(1, F(z)) / 2` in the first copy against `|0>` in the second.
    pub fn transition_matrix(&self) -> DMatrix<Complex64> {
        let d = self.embedding_dim();
        let dim = d * d;
        let mut a = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        a[(0, 0)] = Complex64::new(1.0, 0.0);
        for alpha in 1..=self.n_vars {
            for k in 0..=self.n_vars {
                for l in 0..=self.n_vars {
                    let value = self.tensors[alpha - 1][(k, l)];
                    if value != 0.0 {
                        a[(alpha * d, k * d + l)] = Complex64::new(value, 0.0);
                    }
                }
            }
        }
        a
    }
}

/// Copy-pair amplitudes `phi = (1, z_1, ..., z_d, 0, ...) / sqrt(2)` for a
/// unit-norm `z`.
pub fn encode_phi(map: &QuadraticMap, z: &[Complex64]) -> Result<Vec<Complex64>> {
    if z.len() != map.n_vars() {
        return Err(Error::StateDimensionMismatch {
            got: z.len(),
            want: map.n_vars(),
        });
    }
    let norm = z.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized { norm });
    }
    let d = map.embedding_dim();
    let mut phi = vec![Complex64::new(0.0, 0.0); d];
    let w = std::f64::consts::FRAC_1_SQRT_2;
    phi[0] = Complex64::new(w, 0.0);
    for (j, &zj) in z.iter().enumerate() {
        phi[j + 1] = zj * w;
    }
    Ok(phi)
}

/// Reads `z` back out of copy amplitudes, dividing out the constant slot.
pub fn decode_phi(map: &QuadraticMap, phi: &[Complex64]) -> Result<Vec<Complex64>> {
    if phi.len() != map.embedding_dim() {
        return Err(Error::StateDimensionMismatch {
            got: phi.len(),
            want: map.embedding_dim(),
        });
    }
    let reference = phi[0];
    if reference.norm() < 1e-14 {
        return Err(Error::ZeroNorm);
    }
    Ok((1..=map.n_vars()).map(|j| phi[j] / reference).collect())
}

/// One pointer-coupled application of the quadratic map.
#[derive(Debug, Clone)]
pub struct QuadraticStepOutcome {
    /// The post-selected joint state (pointer collapsed to 1).
    pub state: Statevector,
    /// Exact probability of the pointer-1 branch.
    pub success_probability: f64,
    /// Norm meter `sqrt(max(0, 4 p / eps^2 - 1))`, a second-order-accurate
    /// estimate of `||F(z)||`.
    pub magnitude: f64,
    /// Normalized image direction read from the first copy (constant slot
    /// dropped).
    pub direction: Vec<Complex64>,
}

/// Couples two copies of `z` to a pointer qubit via the anti-symmetric
/// Hamiltonian `H = -i |1><0| (x) A + i |0><1| (x) A+` and post-selects the
/// pointer, leaving `(1, F(z)) / 2` (up to third-order corrections in
/// `epsilon`) in the first copy.
pub fn apply_quadratic_map(
    map: &QuadraticMap,
    z: &[Complex64],
    epsilon: f64,
) -> Result<QuadraticStepOutcome> {
    if !(epsilon > 0.0 && epsilon <= 0.2) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    let d = map.embedding_dim();
    let q = d.trailing_zeros() as usize;
    let layout = RegisterLayout::new(&[("copy1", q), ("copy2", q), ("pointer", 1)])?;
    let phi = encode_phi(map, z)?;

    let mut amps = vec![Complex64::new(0.0, 0.0); layout.dimension()];
    for m1 in 0..d {
        for m2 in 0..d {
            amps[(m1 * d + m2) << 1] = phi[m1] * phi[m2];
        }
    }
    let state = Statevector::from_amplitudes(layout.clone(), amps)?;

    // Pointer-coupled Hamiltonian: the pointer bit is the least significant
    // index bit, so pair (M, ptr) sits at 2 M + ptr.
    let a = map.transition_matrix();
    let dim = 2 * d * d;
    let mut h = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    let minus_i = Complex64::new(0.0, -1.0);
    let plus_i = Complex64::new(0.0, 1.0);
    for m in 0..d * d {
        for mp in 0..d * d {
            let entry = a[(m, mp)];
            if entry.norm_sqr() != 0.0 {
                h[(2 * m + 1, 2 * mp)] = minus_i * entry;
                h[(2 * mp, 2 * m + 1)] = plus_i * entry.conj();
            }
        }
    }

    let evolved = state.evolve(&h, epsilon)?;
    let pointer = layout.register_qubits("pointer")?[0];
    let (selected, success_probability) = evolved.postselect(pointer, true)?;

    let magnitude = (4.0 * success_probability / (epsilon * epsilon) - 1.0)
        .max(0.0)
        .sqrt();

    // The branch lives exactly in the copy2 = |0> slice; read the first
    // copy there and normalize away the constant slot.
    let mut image = Vec::with_capacity(map.n_vars());
    for alpha in 1..=map.n_vars() {
        let at = layout.index_with(&[
            ("copy1", alpha as u64),
            ("copy2", 0),
            ("pointer", 1),
        ])?;
        image.push(selected.amplitude(at));
    }
    let image_norm = image.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let direction = if image_norm > 0.0 {
        image
            .iter()
            .map(|a| a / Complex64::new(image_norm, 0.0))
            .collect()
    } else {
        image.clone()
    };

    Ok(QuadraticStepOutcome {
        state: selected,
        success_probability,
        magnitude,
        direction,
    })
}

/// A chained explicit-Euler trajectory driven by pointer measurements.
#[derive(Debug, Clone)]
pub struct EulerTrajectory {
    /// Normalized state after every step, initial point included.
    pub points: Vec<Vec<Complex64>>,
    pub magnitudes: Vec<f64>,
    pub success_probabilities: Vec<f64>,
    /// `(16 / eps^2)^steps`: input copies consumed by re-preparing and
    /// amplifying every chained measurement.
    pub copy_budget: f64,
}

/// Iterates `z <- normalize(z + dt * magnitude * direction)`, reading
/// magnitude and direction from a fresh pointer measurement at each step.
pub fn euler_iterate(
    map: &QuadraticMap,
    z0: &[Complex64],
    dt: f64,
    steps: usize,
    epsilon: f64,
) -> Result<EulerTrajectory> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::BadTimeMesh {
            horizon: dt,
            n_primary: steps,
            n_secondary: 1,
        });
    }
    let mut z = z0.to_vec();
    let mut points = vec![z.clone()];
    let mut magnitudes = Vec::with_capacity(steps);
    let mut success_probabilities = Vec::with_capacity(steps);
    for _ in 0..steps {
        let outcome = apply_quadratic_map(map, &z, epsilon)?;
        let mut w: Vec<Complex64> = z
            .iter()
            .zip(outcome.direction.iter())
            .map(|(zj, dj)| zj + Complex64::new(dt * outcome.magnitude, 0.0) * dj)
            .collect();
        let norm = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        for wj in &mut w {
            *wj /= Complex64::new(norm, 0.0);
        }
        magnitudes.push(outcome.magnitude);
        success_probabilities.push(outcome.success_probability);
        z = w;
        points.push(z.clone());
    }
    Ok(EulerTrajectory {
        points,
        magnitudes,
        success_probabilities,
        copy_budget: (16.0 / (epsilon * epsilon)).powi(steps as i32),
    })
}

/// A pairwise interaction acting identically on every unordered pair of
/// copies.
#[derive(Debug, Clone)]
pub struct MeanFieldSystem {
    n_copies: usize,
    dim: usize,
    /// Exchange-symmetrized anti-Hermitian pair tensor on `dim^2`.
    pair: DMatrix<Complex64>,
}

fn exchange_symmetrize(tensor: &DMatrix<Complex64>, d: usize) -> DMatrix<Complex64> {
    let dim = d * d;
    let mut out = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for i in 0..d {
        for k in 0..d {
            for j in 0..d {
                for l in 0..d {
                    let direct = tensor[(i * d + k, j * d + l)];
                    let swapped = tensor[(k * d + i, l * d + j)];
                    out[(i * d + k, j * d + l)] = (direct + swapped) * Complex64::new(0.5, 0.0);
                }
            }
        }
    }
    out
}

impl MeanFieldSystem {
    /// Builds the system from a raw pair tensor on `dim^2`, symmetrizing it
    /// under copy exchange and requiring the result to be anti-Hermitian so
    /// the collective Hamiltonian stays Hermitian.
    pub fn new(n_copies: usize, dim: usize, tensor: &DMatrix<Complex64>) -> Result<Self> {
        if n_copies < 2 {
            return Err(Error::DimensionMismatch {
                got: n_copies,
                want: 2,
            });
        }
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::CopyDimensionNotPowerOfTwo(dim));
        }
        if tensor.nrows() != dim * dim || tensor.ncols() != dim * dim {
            return Err(Error::DimensionMismatch {
                got: tensor.nrows().max(tensor.ncols()),
                want: dim * dim,
            });
        }
        let pair = exchange_symmetrize(tensor, dim);
        let deviation = (&pair + pair.adjoint())
            .iter()
            .map(|e| e.norm())
            .fold(0.0f64, f64::max);
        if deviation > ANTI_HERMITIAN_TOL {
            return Err(Error::NotAntiHermitian(deviation));
        }
        Ok(Self {
            n_copies,
            dim,
            pair,
        })
    }

    pub fn n_copies(&self) -> usize {
        self.n_copies
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pair_tensor(&self) -> &DMatrix<Complex64> {
        &self.pair
    }

    /// The single-copy feedback matrix `f(x) = <x|_2 Ft |x>_2`.
    pub fn feedback(&self, x: &[Complex64]) -> Result<DMatrix<Complex64>> {
        let d = self.dim;
        if x.len() != d {
            return Err(Error::StateDimensionMismatch {
                got: x.len(),
                want: d,
            });
        }
        let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
        for i in 0..d {
            for j in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    for l in 0..d {
                        acc += x[k].conj() * self.pair[(i * d + k, j * d + l)] * x[l];
                    }
                }
                m[(i, j)] = acc;
            }
        }
        Ok(m)
    }

    /// The collective Hamiltonian `H = (-i / n) sum_(j<k) Ft_(jk)` on
    /// `dim^n`.
    fn collective_hamiltonian(&self) -> DMatrix<Complex64> {
        let d = self.dim;
        let n = self.n_copies;
        let total = d.pow(n as u32);
        let mut h = DMatrix::from_element(total, total, Complex64::new(0.0, 0.0));
        let scale = Complex64::new(0.0, -1.0 / n as f64);
        let digit = |index: usize, copy: usize| -> usize {
            index / d.pow((n - 1 - copy) as u32) % d
        };
        for j in 0..n {
            for k in j + 1..n {
                let pj = d.pow((n - 1 - j) as u32);
                let pk = d.pow((n - 1 - k) as u32);
                for row in 0..total {
                    let ij = digit(row, j);
                    let ik = digit(row, k);
                    let base = row - ij * pj - ik * pk;
                    for a in 0..d {
                        for b in 0..d {
                            let entry = self.pair[(ij * d + ik, a * d + b)];
                            if entry.norm_sqr() != 0.0 {
                                let col = base + a * pj + b * pk;
                                h[(row, col)] += scale * entry;
                            }
                        }
                    }
                }
            }
        }
        h
    }
}

/// Outcome of a collective evolution compared against the classical
/// mean-field recursion.
#[derive(Debug, Clone)]
pub struct MeanFieldReport {
    /// Reduced state of the first copy after the evolution.
    pub density: DensityMatrix,
    /// Classical Euler trajectory `x <- normalize((I - dt f(x)) x)`.
    pub classical: Vec<Vec<Complex64>>,
    /// Largest spectral norm of `f(x)` along the classical trajectory.
    pub interaction_norm: f64,
    /// Trace distance between the reduced copy and the classical endpoint.
    pub deviation: f64,
}

/// Evolves `x0^(x n)` for `steps` steps of length `dt` under the collective
/// pair Hamiltonian, traces out all but the first copy, and reports the
/// distance to the classical mean-field endpoint.
pub fn meanfield_evolve(
    system: &MeanFieldSystem,
    x0: &[Complex64],
    dt: f64,
    steps: usize,
) -> Result<MeanFieldReport> {
    if !(dt > 0.0) || !dt.is_finite() || steps == 0 {
        return Err(Error::BadTimeMesh {
            horizon: dt,
            n_primary: steps,
            n_secondary: 1,
        });
    }
    let d = system.dim();
    let n = system.n_copies();
    if x0.len() != d {
        return Err(Error::StateDimensionMismatch {
            got: x0.len(),
            want: d,
        });
    }
    let norm = x0.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized { norm });
    }

    let q = d.trailing_zeros() as usize;
    let registers: Vec<(String, usize)> =
        (0..n).map(|c| (format!("copy{}", c + 1), q)).collect();
    let register_refs: Vec<(&str, usize)> =
        registers.iter().map(|(name, w)| (name.as_str(), *w)).collect();
    let layout = RegisterLayout::new(&register_refs)?;

    let mut amps = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..n {
        let mut next = Vec::with_capacity(amps.len() * d);
        for a in &amps {
            for xj in x0 {
                next.push(a * xj);
            }
        }
        amps = next;
    }
    let mut state = Statevector::from_amplitudes(layout, amps)?;

    let h = system.collective_hamiltonian();
    for _ in 0..steps {
        state = state.evolve(&h, -dt)?;
    }
    let density = state.partial_trace(&["copy1"])?;

    // Classical mean-field recursion at full interaction strength; the
    // collective dynamics carries the (n-1)/n pair-counting factor, which
    // the deviation metric absorbs.
    let mut x = x0.to_vec();
    let mut classical = vec![x.clone()];
    let mut interaction_norm = 0.0f64;
    for _ in 0..steps {
        let f = system.feedback(&x)?;
        interaction_norm = interaction_norm.max(spectral_norm(&f));
        let mut next = vec![Complex64::new(0.0, 0.0); d];
        for i in 0..d {
            let mut acc = x[i];
            for j in 0..d {
                acc -= Complex64::new(dt, 0.0) * f[(i, j)] * x[j];
            }
            next[i] = acc;
        }
        let norm = next.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        for v in &mut next {
            *v /= Complex64::new(norm, 0.0);
        }
        x = next;
        classical.push(x.clone());
    }
    let f_end = system.feedback(&x)?;
    interaction_norm = interaction_norm.max(spectral_norm(&f_end));

    let target = DensityMatrix::from_pure(&DVector::from_column_slice(&x))?;
    let deviation = density.trace_distance(&target)?;

    Ok(MeanFieldReport {
        density,
        classical,
        interaction_norm,
        deviation,
    })
}

/// Dynamics driving a history (all-time-levels) linear system.
#[derive(Debug, Clone)]
pub enum HistoryDynamics {
    /// `x' = -G x (+ forcing)`: blocks are single copies.
    Linear { generator: DMatrix<Complex64> },
    /// Pairwise tensor on `d^2`, exchange-symmetrized, averaged over the
    /// `binom(n, 2)` pairs: blocks are `n`-fold tensor powers.
    Pair { tensor: DMatrix<Complex64> },
}

/// The assembled block system `L X = B` over all time levels.
#[derive(Debug, Clone)]
pub struct HistorySystem {
    pub matrix: DMatrix<Complex64>,
    pub rhs: DVector<Complex64>,
    pub block_dim: usize,
    pub n_levels: usize,
    pub n_copies: usize,
    pub copy_dim: usize,
}

/// Hard cap on the assembled history dimension, keeping the dense solve
/// desk-sized.
pub const HISTORY_DIM_CAP: usize = 1 << 13;

/// Stacks the explicit Euler recursion
/// `X_k = (I - dt G) X_(k-1) + dt B_k` for `k = 1..=n_steps` into one
/// lower-bidiagonal system with identity diagonal blocks. `forcing`, when
/// given, supplies per-step vectors `b_k` whose tensor powers feed the
/// right-hand side.
pub fn build_history_system(
    dynamics: &HistoryDynamics,
    n_copies: usize,
    x0: &[Complex64],
    forcing: Option<&[Vec<Complex64>]>,
    dt: f64,
    n_steps: usize,
) -> Result<HistorySystem> {
    if n_copies == 0 {
        return Err(Error::DimensionMismatch { got: 0, want: 1 });
    }
    if !(dt >= 0.0) || !dt.is_finite() || n_steps == 0 {
        return Err(Error::BadTimeMesh {
            horizon: dt,
            n_primary: n_steps,
            n_secondary: 1,
        });
    }
    let d = x0.len();
    if d == 0 {
        return Err(Error::EmptyInput);
    }

    // Per-level generator on the tensor-power space.
    let block_dim = d.pow(n_copies as u32);
    let generator: DMatrix<Complex64> = match dynamics {
        HistoryDynamics::Linear { generator } => {
            if generator.nrows() != d || generator.ncols() != d {
                return Err(Error::DimensionMismatch {
                    got: generator.nrows().max(generator.ncols()),
                    want: d,
                });
            }
            if n_copies == 1 {
                generator.clone()
            } else {
                // Sum of single-copy generators acting on the power space.
                let mut g = DMatrix::from_element(
                    block_dim,
                    block_dim,
                    Complex64::new(0.0, 0.0),
                );
                for copy in 0..n_copies {
                    let stride = d.pow((n_copies - 1 - copy) as u32);
                    for row in 0..block_dim {
                        let digit = row / stride % d;
                        let base = row - digit * stride;
                        for a in 0..d {
                            let entry = generator[(digit, a)];
                            if entry.norm_sqr() != 0.0 {
                                g[(row, base + a * stride)] += entry;
                            }
                        }
                    }
                }
                g
            }
        }
        HistoryDynamics::Pair { tensor } => {
            if n_copies < 2 {
                return Err(Error::DimensionMismatch {
                    got: n_copies,
                    want: 2,
                });
            }
            if tensor.nrows() != d * d || tensor.ncols() != d * d {
                return Err(Error::DimensionMismatch {
                    got: tensor.nrows().max(tensor.ncols()),
                    want: d * d,
                });
            }
            let pair = exchange_symmetrize(tensor, d);
            let scale = Complex64::new(1.0 / binomial(n_copies, 2), 0.0);
            let mut g = DMatrix::from_element(block_dim, block_dim, Complex64::new(0.0, 0.0));
            let digit = |index: usize, copy: usize| -> usize {
                index / d.pow((n_copies - 1 - copy) as u32) % d
            };
            for j in 0..n_copies {
                for k in j + 1..n_copies {
                    let pj = d.pow((n_copies - 1 - j) as u32);
                    let pk = d.pow((n_copies - 1 - k) as u32);
                    for row in 0..block_dim {
                        let ij = digit(row, j);
                        let ik = digit(row, k);
                        let base = row - ij * pj - ik * pk;
                        for a in 0..d {
                            for b in 0..d {
                                let entry = pair[(ij * d + ik, a * d + b)];
                                if entry.norm_sqr() != 0.0 {
                                    g[(row, base + a * pj + b * pk)] += scale * entry;
                                }
                            }
                        }
                    }
                }
            }
            g
        }
    };

    let n_levels = n_steps + 1;
    let total = block_dim * n_levels;
    if total > HISTORY_DIM_CAP {
        return Err(Error::DenseCapExceeded {
            requested: total,
            cap: HISTORY_DIM_CAP,
        });
    }
    if let Some(bs) = forcing {
        if bs.len() != n_steps {
            return Err(Error::DimensionMismatch {
                got: bs.len(),
                want: n_steps,
            });
        }
        for b in bs {
            if b.len() != d {
                return Err(Error::DimensionMismatch {
                    got: b.len(),
                    want: d,
                });
            }
        }
    }

    let tensor_power = |v: &[Complex64]| -> Vec<Complex64> {
        let mut acc = vec![Complex64::new(1.0, 0.0)];
        for _ in 0..n_copies {
            let mut next = Vec::with_capacity(acc.len() * d);
            for a in &acc {
                for x in v {
                    next.push(a * x);
                }
            }
            acc = next;
        }
        acc
    };

    let mut matrix = DMatrix::from_element(total, total, Complex64::new(0.0, 0.0));
    for i in 0..total {
        matrix[(i, i)] = Complex64::new(1.0, 0.0);
    }
    // Subdiagonal blocks -(I - dt G).
    let dt_c = Complex64::new(dt, 0.0);
    for level in 1..n_levels {
        let r0 = level * block_dim;
        let c0 = (level - 1) * block_dim;
        for r in 0..block_dim {
            matrix[(r0 + r, c0 + r)] -= Complex64::new(1.0, 0.0);
            for c in 0..block_dim {
                let entry = generator[(r, c)];
                if entry.norm_sqr() != 0.0 {
                    matrix[(r0 + r, c0 + c)] += dt_c * entry;
                }
            }
        }
    }

    let mut rhs = DVector::from_element(total, Complex64::new(0.0, 0.0));
    for (i, v) in tensor_power(x0).into_iter().enumerate() {
        rhs[i] = v;
    }
    if let Some(bs) = forcing {
        for (step, b) in bs.iter().enumerate() {
            let offset = (step + 1) * block_dim;
            for (i, v) in tensor_power(b).into_iter().enumerate() {
                rhs[offset + i] = dt_c * v;
            }
        }
    }

    Ok(HistorySystem {
        matrix,
        rhs,
        block_dim,
        n_levels,
        n_copies,
        copy_dim: d,
    })
}

/// Solution of a history system with per-level single-copy readout.
#[derive(Debug, Clone)]
pub struct HistorySolution {
    /// Raw solution blocks, one per time level.
    pub blocks: Vec<Vec<Complex64>>,
    /// Single-copy vectors extracted from each block.
    pub extracted: Vec<Vec<Complex64>>,
}

/// Solves the stacked system with the independent dense solver and extracts
/// a single-copy vector per level: directly for one copy, otherwise the
/// principal left singular vector of the `d x d^(n-1)` reshape, scaled by
/// `||block||^(1/n)` and phased so its largest component is real positive.
pub fn solve_history(system: &HistorySystem) -> Result<HistorySolution> {
    let x = oracles::dense_solve(&system.matrix, &system.rhs)?;
    let d = system.copy_dim;
    let n = system.n_copies;
    let mut blocks = Vec::with_capacity(system.n_levels);
    let mut extracted = Vec::with_capacity(system.n_levels);
    for level in 0..system.n_levels {
        let offset = level * system.block_dim;
        let block: Vec<Complex64> =
            (0..system.block_dim).map(|i| x[offset + i]).collect();
        let single = if n == 1 {
            block.clone()
        } else {
            extract_principal_copy(&block, d, n)?
        };
        blocks.push(block);
        extracted.push(single);
    }
    Ok(HistorySolution { blocks, extracted })
}

fn extract_principal_copy(block: &[Complex64], d: usize, n: usize) -> Result<Vec<Complex64>> {
    let cols = block.len() / d;
    let block_norm = block.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if block_norm == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); d]);
    }
    let m = DMatrix::from_fn(d, cols, |r, c| block[r * cols + c]);
    let svd = m.svd(true, false);
    let u = svd.u.as_ref().expect("svd(true, _) keeps u");
    let mut top = 0usize;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > svd.singular_values[top] {
            top = i;
        }
    }
    let mut principal: Vec<Complex64> = (0..d).map(|r| u[(r, top)]).collect();

    // Phase convention: largest component real positive.
    let mut lead = 0usize;
    for (i, v) in principal.iter().enumerate() {
        if v.norm_sqr() > principal[lead].norm_sqr() {
            lead = i;
        }
    }
    let lead_val = principal[lead];
    if lead_val.norm() > 0.0 {
        let phase = lead_val.conj() / Complex64::new(lead_val.norm(), 0.0);
        for v in &mut principal {
            *v *= phase;
        }
    }
    let scale = block_norm.powf(1.0 / n as f64);
    Ok(principal
        .into_iter()
        .map(|v| v * Complex64::new(scale, 0.0))
        .collect())
}

/// Distance between complex vectors minimized over a global phase:
/// `sqrt(||a||^2 + ||b||^2 - 2 |<a, b>|)`.
pub fn phase_invariant_distance(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            got: b.len(),
            want: a.len(),
        });
    }
    let na: f64 = a.iter().map(|v| v.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|v| v.norm_sqr()).sum();
    let inner: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    Ok((na + nb - 2.0 * inner.norm()).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn unit2(a: f64, b: f64) -> Vec<Complex64> {
        let n = (a * a + b * b).sqrt();
        vec![c(a / n), c(b / n)]
    }

    #[test]
    fn identity_map_meters_a_unit_norm() {
        let map = QuadraticMap::identity(2).unwrap();
        let z = unit2(0.6, 0.8);
        let eps = 0.1;
        let out = apply_quadratic_map(&map, &z, eps).unwrap();
        // Measure-preserving image: success sits near eps^2 / 2.
        let expected = eps * eps / 2.0;
        assert!(
            (out.success_probability - expected).abs() <= 0.2 * expected,
            "p = {}, expected about {expected}",
            out.success_probability
        );
        assert!((out.magnitude - 1.0).abs() < 2e-2);
        let fidelity: f64 = out
            .direction
            .iter()
            .zip(z.iter())
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr();
        assert!(fidelity >= 1.0 - eps * eps, "fidelity {fidelity}");
    }

    #[test]
    fn quadratic_image_matches_the_classical_map() {
        // w = (z2^2, z1 z2): genuinely quadratic.
        let map = QuadraticMap::from_entries(
            2,
            &[(1, 2, 2, 1.0), (2, 1, 2, 1.0)],
        )
        .unwrap();
        let z = unit2(0.8, 0.6);
        let eps = 0.05;
        let out = apply_quadratic_map(&map, &z, eps).unwrap();
        let classical = map.apply_classical(&z).unwrap();
        let norm = classical.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let wanted: Vec<Complex64> = classical.iter().map(|v| v / c(norm)).collect();
        let fidelity: f64 = out
            .direction
            .iter()
            .zip(wanted.iter())
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr();
        assert!(fidelity >= 1.0 - eps * eps, "fidelity {fidelity}");
        assert!((out.magnitude - norm).abs() < 2e-2, "{} vs {norm}", out.magnitude);
    }

    #[test]
    fn branch_lives_in_the_copy2_zero_slice_with_real_amplitudes() {
        let map = QuadraticMap::identity(2).unwrap();
        let z = unit2(1.0, 2.0);
        let out = apply_quadratic_map(&map, &z, 0.15).unwrap();
        let layout = out.state.layout().clone();
        let d = map.embedding_dim() as u64;
        for m1 in 0..d {
            for m2 in 1..d {
                let at = layout
                    .index_with(&[("copy1", m1), ("copy2", m2), ("pointer", 1)])
                    .unwrap();
                assert!(out.state.amplitude(at).norm() < 1e-12, "({m1}, {m2})");
            }
        }
        let constant_slot = layout
            .index_with(&[("copy1", 0), ("copy2", 0), ("pointer", 1)])
            .unwrap();
        let lead = out.state.amplitude(constant_slot);
        assert!(lead.im.abs() < 1e-12);
        assert!(lead.re > 0.0);
    }

    #[test]
    fn map_and_input_validation() {
        assert!(matches!(
            QuadraticMap::from_entries(2, &[(3, 0, 0, 1.0)]),
            Err(Error::CoefficientOutOfRange { .. })
        ));
        assert!(matches!(
            QuadraticMap::from_entries(2, &[(1, 4, 0, 1.0)]),
            Err(Error::CoefficientOutOfRange { .. })
        ));
        let map = QuadraticMap::identity(2).unwrap();
        let z = unit2(1.0, 1.0);
        assert!(matches!(
            apply_quadratic_map(&map, &z, 0.0),
            Err(Error::EpsilonOutOfRange(_))
        ));
        assert!(matches!(
            apply_quadratic_map(&map, &z, 0.3),
            Err(Error::EpsilonOutOfRange(_))
        ));
        assert!(matches!(
            apply_quadratic_map(&map, &[c(1.0), c(1.0)], 0.1),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn phi_round_trip() {
        let map = QuadraticMap::identity(3).unwrap();
        let z = vec![c(0.5), c(0.5), Complex64::new(0.5, 0.5)];
        let phi = encode_phi(&map, &z).unwrap();
        assert_eq!(phi.len(), 4);
        let back = decode_phi(&map, &phi).unwrap();
        for (a, b) in back.iter().zip(z.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn euler_identity_map_is_stationary() {
        let map = QuadraticMap::identity(2).unwrap();
        let z0 = unit2(0.6, 0.8);
        let eps = 0.1;
        let run = euler_iterate(&map, &z0, 0.1, 3, eps).unwrap();
        for point in &run.points {
            let dist = phase_invariant_distance(point, &z0).unwrap();
            assert!(dist < 5e-3, "drift {dist}");
        }
        assert_eq!(run.copy_budget, (16.0 / (eps * eps)).powi(3));
    }

    #[test]
    fn euler_trajectory_follows_the_classical_recursion() {
        let map = QuadraticMap::from_entries(
            2,
            &[(1, 2, 0, 1.0), (2, 1, 1, 1.0)],
        )
        .unwrap();
        let dt = 0.1;
        let eps = 0.05;
        let steps = 5;
        let z0 = unit2(0.9, 0.4);
        let run = euler_iterate(&map, &z0, dt, steps, eps).unwrap();

        let mut x = z0.clone();
        for step in 0..steps {
            let image = map.apply_classical(&x).unwrap();
            let mut w: Vec<Complex64> = x
                .iter()
                .zip(image.iter())
                .map(|(xj, fj)| xj + c(dt) * fj)
                .collect();
            let norm = w.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            for v in &mut w {
                *v /= c(norm);
            }
            x = w;
            let dist = phase_invariant_distance(&run.points[step + 1], &x).unwrap();
            assert!(dist < 1e-3, "step {step}: {dist}");
        }
    }

    fn spin_flip_tensor() -> DMatrix<Complex64> {
        // -i sigma_x (x) sigma_x: anti-Hermitian and exchange symmetric.
        let mut t = DMatrix::from_element(4, 4, Complex64::new(0.0, 0.0));
        let mi = Complex64::new(0.0, -1.0);
        for i in 0..2 {
            for k in 0..2 {
                t[(i * 2 + k, (1 - i) * 2 + (1 - k))] = mi;
            }
        }
        t
    }

    #[test]
    fn meanfield_reduced_state_tracks_the_classical_euler_step() {
        let system = MeanFieldSystem::new(6, 2, &spin_flip_tensor()).unwrap();
        let x0 = unit2(0.8, 0.6);
        let dt = 0.1;
        let report = meanfield_evolve(&system, &x0, dt, 1).unwrap();
        let bound = 10.0 * (report.interaction_norm * dt).powi(2);
        assert!(
            report.deviation <= bound,
            "deviation {} vs bound {bound}",
            report.deviation
        );
    }

    #[test]
    fn zero_interaction_is_exactly_stationary() {
        let zero = DMatrix::from_element(4, 4, Complex64::new(0.0, 0.0));
        let system = MeanFieldSystem::new(3, 2, &zero).unwrap();
        let x0 = unit2(1.0, 1.0);
        let report = meanfield_evolve(&system, &x0, 0.2, 2).unwrap();
        assert!(report.deviation < 1e-12);
        assert_eq!(report.interaction_norm, 0.0);
    }

    #[test]
    fn interaction_tensor_must_be_anti_hermitian() {
        let mut t = DMatrix::from_element(4, 4, Complex64::new(0.0, 0.0));
        t[(0, 0)] = c(1.0); // Hermitian piece survives symmetrization.
        assert!(matches!(
            MeanFieldSystem::new(2, 2, &t),
            Err(Error::NotAntiHermitian(_))
        ));
        assert!(matches!(
            MeanFieldSystem::new(1, 2, &spin_flip_tensor()),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            MeanFieldSystem::new(2, 3, &spin_flip_tensor()),
            Err(Error::CopyDimensionNotPowerOfTwo(3))
        ));
    }

    #[test]
    fn single_copy_history_reproduces_euler_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let d = 3;
        let g = DMatrix::from_fn(d, d, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let x0: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let dt = 0.05;
        let steps = 8;
        let system = build_history_system(
            &HistoryDynamics::Linear {
                generator: g.clone(),
            },
            1,
            &x0,
            None,
            dt,
            steps,
        )
        .unwrap();
        let solution = solve_history(&system).unwrap();

        let mut x = x0.clone();
        for level in 0..=steps {
            for (a, b) in solution.extracted[level].iter().zip(x.iter()) {
                assert!((a - b).norm() < 1e-12, "level {level}");
            }
            let mut next = vec![Complex64::new(0.0, 0.0); d];
            for i in 0..d {
                let mut acc = x[i];
                for j in 0..d {
                    acc -= Complex64::new(dt, 0.0) * g[(i, j)] * x[j];
                }
                next[i] = acc;
            }
            x = next;
        }
    }

    #[test]
    fn forced_history_matches_the_driven_recursion() {
        let g = DMatrix::from_fn(2, 2, |r, c_| {
            if r == c_ {
                c(0.5)
            } else {
                c(0.0)
            }
        });
        let x0 = vec![c(1.0), c(0.0)];
        let forcing: Vec<Vec<Complex64>> =
            (0..4).map(|k| vec![c(0.1 * k as f64), c(0.2)]).collect();
        let dt = 0.1;
        let system = build_history_system(
            &HistoryDynamics::Linear {
                generator: g.clone(),
            },
            1,
            &x0,
            Some(&forcing),
            dt,
            4,
        )
        .unwrap();
        let solution = solve_history(&system).unwrap();

        let mut x = x0.clone();
        for (step, b) in forcing.iter().enumerate() {
            let mut next = vec![Complex64::new(0.0, 0.0); 2];
            for i in 0..2 {
                let mut acc = x[i] + c(dt) * b[i];
                for j in 0..2 {
                    acc -= c(dt) * g[(i, j)] * x[j];
                }
                next[i] = acc;
            }
            x = next;
            for (a, bx) in solution.extracted[step + 1].iter().zip(x.iter()) {
                assert!((a - bx).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn two_copy_extraction_recovers_the_initial_tensor_factor() {
        // At dt = 0 every level is x0 (x) x0; extraction must return x0
        // itself up to the phase convention.
        let x0 = unit2(0.6, -0.8);
        let system = build_history_system(
            &HistoryDynamics::Pair {
                tensor: spin_flip_tensor(),
            },
            2,
            &x0,
            None,
            0.0,
            3,
        )
        .unwrap();
        let solution = solve_history(&system).unwrap();
        for level in 0..=3 {
            // The distance metric subtracts near-equal quadratic forms, so
            // even bit-exact agreement floors out near sqrt(machine eps).
            let dist = phase_invariant_distance(&solution.extracted[level], &x0).unwrap();
            assert!(dist < 1e-7, "level {level}: {dist}");
        }
    }

    #[test]
    fn two_copy_history_stays_near_the_single_copy_recursion() {
        let x0 = unit2(1.0, 0.3);
        let dt = 0.02;
        let steps = 5;
        let meanfield = MeanFieldSystem::new(2, 2, &spin_flip_tensor()).unwrap();
        let system = build_history_system(
            &HistoryDynamics::Pair {
                tensor: spin_flip_tensor(),
            },
            2,
            &x0,
            None,
            dt,
            steps,
        )
        .unwrap();
        let solution = solve_history(&system).unwrap();

        // Classical single-copy recursion without renormalization.
        let mut x = x0.clone();
        for level in 1..=steps {
            let f = meanfield.feedback(&x).unwrap();
            let mut next = vec![Complex64::new(0.0, 0.0); 2];
            for i in 0..2 {
                let mut acc = x[i];
                for j in 0..2 {
                    acc -= c(dt) * f[(i, j)] * x[j];
                }
                next[i] = acc;
            }
            x = next;
            let dist = phase_invariant_distance(&solution.extracted[level], &x).unwrap();
            assert!(dist < 5e-2, "level {level}: {dist}");
        }
    }

    #[test]
    fn history_cap_and_shape_validation() {
        let x0 = vec![c(1.0); 8];
        let g = DMatrix::from_element(8, 8, c(0.0));
        assert!(matches!(
            build_history_system(
                &HistoryDynamics::Linear { generator: g },
                4,
                &x0,
                None,
                0.1,
                3
            ),
            Err(Error::DenseCapExceeded { .. })
        ));
        let small = DMatrix::from_element(2, 2, c(0.0));
        assert!(matches!(
            build_history_system(
                &HistoryDynamics::Linear { generator: small },
                1,
                &[c(1.0), c(0.0)],
                Some(&[vec![c(0.0)]]),
                0.1,
                2
            ),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let a = unit2(0.6, 0.8);
        let phase = Complex64::from_polar(1.0, 1.234);
        let b: Vec<Complex64> = a.iter().map(|v| v * phase).collect();
        assert!(phase_invariant_distance(&a, &b).unwrap() < 1e-12);
        let d = phase_invariant_distance(&a, &unit2(0.8, -0.6)).unwrap();
        assert!((d - 2.0f64.sqrt()).abs() < 1e-12);
    }
}
