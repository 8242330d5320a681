//! Quantum amplitude estimation.
//!
//! A [`GroverOperator`] packages a state-preparation unitary `A`, the set of
//! "good" basis states, and the walk operator `Q = -A S_i A+ S_g` built from
//! reflections about the initial state and about the good subspace. Phase
//! estimation on `Q` turns the good-state amplitude `a = sin^2(theta)` into a
//! peak of the phase-register distribution at `y ~ theta N / pi`, which
//! [`qae`] reads out either as the exact distribution or as seeded samples
//! from it. [`qae_median`] sharpens the sampled estimate by taking the median
//! of an odd number of independent runs, and [`mean_oracle`] /
//! [`estimate_mean`] specialize the machinery to the mean of a bounded sample
//! set by rotating a chaperon qubit by each sample value.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::statevector::{
    iqft_op, qft_matrix, unitarity_deviation, RegisterLayout, Statevector, UnitaryOp,
};

/// Amplitudes closer than this to 0 or 1 are flagged as degenerate: the
/// underlying rotation angle is then a multiple of pi/2 and estimation
/// carries no information beyond the flag.
pub const DEGENERATE_AMPLITUDE_TOL: f64 = 1e-12;

/// State preparation plus the reflections that make up one Grover iterate.
#[derive(Debug, Clone)]
pub struct GroverOperator {
    prep: DMatrix<Complex64>,
    walk: DMatrix<Complex64>,
    good: Vec<bool>,
    initial_index: usize,
    amplitude: f64,
}

impl GroverOperator {
    /// Builds the walk operator for a preparation unitary `prep`, the good
    /// states marked in `good`, and the basis state `initial_index` that
    /// `prep` acts on. The dimension must be a power of two so the operator
    /// fits a qubit register.
    pub fn new(prep: DMatrix<Complex64>, good: Vec<bool>, initial_index: usize) -> Result<Self> {
        let dim = prep.nrows();
        if prep.ncols() != dim || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                got: prep.ncols(),
                want: dim.next_power_of_two().max(2),
            });
        }
        if good.len() != dim {
            return Err(Error::DimensionMismatch {
                got: good.len(),
                want: dim,
            });
        }
        if initial_index >= dim {
            return Err(Error::DimensionMismatch {
                got: initial_index,
                want: dim,
            });
        }
        let deviation = unitarity_deviation(&prep);
        if deviation > 1e-10 {
            return Err(Error::NotUnitary {
                deviation,
                tolerance: 1e-10,
            });
        }

        // Q = -(A S_i A+) S_g: S_i flips the initial-state column of A,
        // S_g flips the good-state columns of the reflected product.
        let mut flipped = prep.clone();
        for r in 0..dim {
            flipped[(r, initial_index)] = -flipped[(r, initial_index)];
        }
        let mut walk = flipped * prep.adjoint();
        for c in 0..dim {
            let sign = if good[c] { 1.0 } else { -1.0 };
            for r in 0..dim {
                walk[(r, c)] *= Complex64::new(sign, 0.0);
            }
        }

        let amplitude = (0..dim)
            .filter(|&j| good[j])
            .map(|j| prep[(j, initial_index)].norm_sqr())
            .sum::<f64>();

        Ok(Self {
            prep,
            walk,
            good,
            initial_index,
            amplitude,
        })
    }

    pub fn dimension(&self) -> usize {
        self.prep.nrows()
    }

    pub fn prep(&self) -> &DMatrix<Complex64> {
        &self.prep
    }

    pub fn walk(&self) -> &DMatrix<Complex64> {
        &self.walk
    }

    pub fn good_mask(&self) -> &[bool] {
        &self.good
    }

    pub fn initial_index(&self) -> usize {
        self.initial_index
    }

    /// Probability of the good subspace in the prepared state, computed
    /// directly from the preparation column.
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Rotation angle `theta = arcsin(sqrt(a))` of the two-dimensional
    /// invariant subspace.
    pub fn theta(&self) -> f64 {
        self.amplitude.clamp(0.0, 1.0).sqrt().asin()
    }

    /// True when the amplitude sits at 0 or 1 within
    /// [`DEGENERATE_AMPLITUDE_TOL`], where the walk operator degenerates to
    /// a reflection.
    pub fn degenerate(&self) -> bool {
        self.amplitude <= DEGENERATE_AMPLITUDE_TOL
            || self.amplitude >= 1.0 - DEGENERATE_AMPLITUDE_TOL
    }
}

/// How the phase-register measurement is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QaeMode {
    /// Return the full exact distribution; the point estimate is its mode.
    Exact,
    /// Draw `shots` seeded measurements from the exact distribution; the
    /// point estimate is the most frequent outcome.
    Sampled { shots: usize, seed: u64 },
}

/// Outcome of one amplitude-estimation run.
#[derive(Debug, Clone)]
pub struct QaeResult {
    /// Exact probability of each phase-register value `y`.
    pub distribution: Vec<f64>,
    /// The reported measurement: distribution mode (exact) or most frequent
    /// sample (sampled), with ties broken toward the smaller `y`.
    pub modal_index: u64,
    /// `sin^2(pi * modal_index / 2^n_phase)`.
    pub estimate: f64,
    pub n_phase: usize,
    /// Sampled mode only: measurement tallies keyed by `y`.
    pub counts: Option<BTreeMap<u64, usize>>,
}

fn amplitude_from_phase_index(y: u64, n_phase: usize) -> f64 {
    let n = (1u64 << n_phase) as f64;
    let s = (std::f64::consts::PI * y as f64 / n).sin();
    s * s
}

fn modal_entry(distribution: &[f64]) -> u64 {
    let mut best = 0usize;
    for (y, &p) in distribution.iter().enumerate() {
        if p > distribution[best] {
            best = y;
        }
    }
    best as u64
}

/// Runs textbook phase estimation on the walk operator: Hadamards on the
/// phase register, controlled powers `Q^(2^t)` by repeated squaring, inverse
/// Fourier transform, then the phase-register marginal.
pub fn qae(grover: &GroverOperator, n_phase: usize, mode: &QaeMode) -> Result<QaeResult> {
    if n_phase == 0 {
        return Err(Error::EmptyPhaseRegister(0));
    }
    let dim = grover.dimension();
    let m = dim.trailing_zeros() as usize;
    let layout = RegisterLayout::new(&[("phase", n_phase), ("system", m)])?;
    let system_qubits = layout.register_qubits("system")?;
    let phase_qubits = layout.register_qubits("phase")?;

    let start = layout.index_with(&[("system", grover.initial_index() as u64)])?;
    let mut state = Statevector::basis(layout.clone(), start)?;
    state = state.apply(&UnitaryOp::dense(
        grover.prep().clone(),
        system_qubits.clone(),
    )?)?;
    for &q in &phase_qubits {
        state = state.apply(&UnitaryOp::dense(
            crate::statevector::hadamard(),
            vec![q],
        )?)?;
    }

    let mut power = grover.walk().clone();
    for t in 0..n_phase {
        let control = layout.register_qubit_with_weight("phase", t)?;
        let op = UnitaryOp::dense(power.clone(), system_qubits.clone())?.controlled(control, true)?;
        state = state.apply(&op)?;
        if t + 1 < n_phase {
            power = &power * &power;
        }
    }

    state = state.apply(&iqft_op(phase_qubits)?)?;
    let distribution = state.register_marginal("phase")?;

    match *mode {
        QaeMode::Exact => {
            let modal_index = modal_entry(&distribution);
            Ok(QaeResult {
                estimate: amplitude_from_phase_index(modal_index, n_phase),
                distribution,
                modal_index,
                n_phase,
                counts: None,
            })
        }
        QaeMode::Sampled { shots, seed } => {
            if shots == 0 {
                return Err(Error::NoSamples);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
            for _ in 0..shots {
                let draw: f64 = rng.gen();
                let mut acc = 0.0;
                let mut picked = distribution.len() as u64 - 1;
                for (y, &p) in distribution.iter().enumerate() {
                    acc += p;
                    if draw < acc {
                        picked = y as u64;
                        break;
                    }
                }
                *counts.entry(picked).or_insert(0) += 1;
            }
            // BTreeMap iteration is ascending in y, so keeping strict
            // inequality breaks count ties toward the smaller outcome.
            let mut modal_index = 0u64;
            let mut modal_count = 0usize;
            for (&y, &c) in &counts {
                if c > modal_count {
                    modal_index = y;
                    modal_count = c;
                }
            }
            Ok(QaeResult {
                estimate: amplitude_from_phase_index(modal_index, n_phase),
                distribution,
                modal_index,
                n_phase,
                counts: Some(counts),
            })
        }
    }
}

/// Median-amplified estimate over an odd number of single-shot runs.
#[derive(Debug, Clone)]
pub struct MedianEstimate {
    /// Per-run point estimates in run order.
    pub estimates: Vec<f64>,
    pub median: f64,
    /// Chernoff bound `exp(-reps / 8)` on the probability that the median
    /// falls outside the single-run confidence interval.
    pub failure_probability_bound: f64,
}

/// Runs `reps` independent single-shot estimations (seeds `seed + rep`) and
/// reports their median. The exact distribution is computed once and each
/// run draws from it, which is statistically identical to repeating the
/// whole circuit.
pub fn qae_median(
    grover: &GroverOperator,
    n_phase: usize,
    reps: usize,
    seed: u64,
) -> Result<MedianEstimate> {
    if reps == 0 || reps % 2 == 0 {
        return Err(Error::BadMedianCount(reps));
    }
    let exact = qae(grover, n_phase, &QaeMode::Exact)?;
    let mut estimates = Vec::with_capacity(reps);
    for rep in 0..reps {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(rep as u64));
        let draw: f64 = rng.gen();
        let mut acc = 0.0;
        let mut picked = exact.distribution.len() as u64 - 1;
        for (y, &p) in exact.distribution.iter().enumerate() {
            acc += p;
            if draw < acc {
                picked = y as u64;
                break;
            }
        }
        estimates.push(amplitude_from_phase_index(picked, n_phase));
    }
    let mut sorted = estimates.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("estimates are finite"));
    Ok(MedianEstimate {
        median: sorted[reps / 2],
        estimates,
        failure_probability_bound: (-(reps as f64) / 8.0).exp(),
    })
}

/// Builds the Grover operator whose amplitude is the mean of `samples` over
/// the zero-padded power-of-two index range.
///
/// The preparation acts on an index register plus one chaperon qubit (the
/// least significant): a Fourier transform spreads the index register
/// uniformly, then a block-diagonal rotation sends the chaperon
/// `|1> -> sqrt(1 - g_j)|0> + sqrt(g_j)|1>` for each index `j`. Good states
/// are those with the chaperon set, so the amplitude is exactly
/// `sum(g_j) / padded_len`.
pub fn mean_oracle(samples: &[f64]) -> Result<GroverOperator> {
    if samples.is_empty() {
        return Err(Error::NoSamples);
    }
    for (index, &value) in samples.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::SampleOutOfUnitRange { index, value });
        }
    }
    let padded = samples.len().next_power_of_two().max(2);
    let n_index = padded.trailing_zeros() as usize;
    let dim = padded * 2;

    let zero = Complex64::new(0.0, 0.0);
    let mut rotation = DMatrix::from_element(dim, dim, zero);
    for j in 0..padded {
        let g = samples.get(j).copied().unwrap_or(0.0);
        let root_g = g.sqrt();
        let root_not = (1.0 - g).max(0.0).sqrt();
        // Column |0>_c completes the |1>_c column to a unitary block.
        rotation[(2 * j, 2 * j)] = Complex64::new(-root_g, 0.0);
        rotation[(2 * j, 2 * j + 1)] = Complex64::new(root_not, 0.0);
        rotation[(2 * j + 1, 2 * j)] = Complex64::new(root_not, 0.0);
        rotation[(2 * j + 1, 2 * j + 1)] = Complex64::new(root_g, 0.0);
    }

    let spread = qft_matrix(n_index)?.kronecker(&DMatrix::<Complex64>::identity(2, 2));
    let prep = rotation * spread;

    let good: Vec<bool> = (0..dim).map(|idx| idx & 1 == 1).collect();
    GroverOperator::new(prep, good, 1)
}

/// Mean estimate with its raw amplitude-estimation diagnostics.
#[derive(Debug, Clone)]
pub struct MeanEstimate {
    /// Estimated mean of the input samples (padding corrected).
    pub mean: f64,
    /// Raw amplitude estimate before the padding correction.
    pub amplitude: f64,
    /// The amplitude the oracle encodes, known in closed form.
    pub exact_amplitude: f64,
    pub sample_len: usize,
    pub padded_len: usize,
    /// Set when the encoded amplitude sits at 0 or 1, where the phase
    /// distribution collapses and the estimate is exact by construction.
    pub degenerate: bool,
    pub qae: QaeResult,
}

/// Estimates the mean of `samples` in `[0, 1]` through amplitude estimation
/// with `n_phase` phase qubits.
pub fn estimate_mean(samples: &[f64], n_phase: usize, mode: &QaeMode) -> Result<MeanEstimate> {
    let oracle = mean_oracle(samples)?;
    let result = qae(&oracle, n_phase, mode)?;
    let padded_len = oracle.dimension() / 2;
    let correction = padded_len as f64 / samples.len() as f64;
    Ok(MeanEstimate {
        mean: result.estimate * correction,
        amplitude: result.estimate,
        exact_amplitude: oracle.amplitude(),
        sample_len: samples.len(),
        padded_len,
        degenerate: oracle.degenerate(),
        qae: result,
    })
}
