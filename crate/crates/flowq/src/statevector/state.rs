use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use super::density::DensityMatrix;
use super::layout::RegisterLayout;
use super::op::{OpKind, UnitaryOp};
use crate::error::{Error, Result};

/// Post-selection branches below this probability are treated as impossible.
pub const POSTSELECT_THRESHOLD: f64 = 1e-12;

/// Normalization tolerance for externally supplied amplitude vectors.
pub const NORM_TOL: f64 = 1e-10;

/// Exact eigendecomposition is used for Hamiltonian evolution up to this
/// dimension; larger problems fall back to a norm-controlled series expansion.
pub const EXACT_EVOLUTION_DIM: usize = 1 << 12;

/// Dense complex statevector over a named register layout.
///
/// Amplitudes are indexed by basis index with qubit 0 as the least-significant
/// bit. The `norm_ledger` accumulates the physical scale factored out of the
/// unit-norm amplitudes: preparation routines store the original vector norm
/// there and every post-selection multiplies it by the square root of the
/// branch probability, so `amplitudes * norm_ledger` always reconstructs the
/// unnormalized physical vector an idealized hardware run would produce.
#[derive(Debug, Clone)]
pub struct Statevector {
    layout: RegisterLayout,
    amps: Vec<Complex64>,
    norm_ledger: f64,
    unnormalized: bool,
}

impl Statevector {
    /// The all-zeros basis state.
    pub fn zero(layout: RegisterLayout) -> Self {
        Self::basis(layout, 0).expect("index 0 is always in range")
    }

    /// A single basis state.
    pub fn basis(layout: RegisterLayout, index: usize) -> Result<Self> {
        let dim = layout.dimension();
        if index >= dim {
            return Err(Error::BasisIndexOutOfRange { index, dim });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            layout,
            amps,
            norm_ledger: 1.0,
            unnormalized: false,
        })
    }

    /// Wraps an amplitude vector that must already be normalized.
    pub fn from_amplitudes(layout: RegisterLayout, amps: Vec<Complex64>) -> Result<Self> {
        let dim = layout.dimension();
        if amps.len() != dim {
            return Err(Error::DimensionMismatch {
                got: amps.len(),
                want: dim,
            });
        }
        let norm = vector_norm(&amps);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            layout,
            amps,
            norm_ledger: 1.0,
            unnormalized: false,
        })
    }

    /// Wraps an amplitude vector without the unit-norm requirement.
    ///
    /// The state is flagged unnormalized; probabilities and measurements still
    /// work but are taken relative to the actual norm.
    pub fn from_amplitudes_unnormalized(
        layout: RegisterLayout,
        amps: Vec<Complex64>,
    ) -> Result<Self> {
        let dim = layout.dimension();
        if amps.len() != dim {
            return Err(Error::DimensionMismatch {
                got: amps.len(),
                want: dim,
            });
        }
        if vector_norm(&amps) == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            layout,
            amps,
            norm_ledger: 1.0,
            unnormalized: true,
        })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn dimension(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm(&self) -> f64 {
        vector_norm(&self.amps)
    }

    pub fn norm_ledger(&self) -> f64 {
        self.norm_ledger
    }

    pub fn is_unnormalized(&self) -> bool {
        self.unnormalized
    }

    /// Overwrites the ledger, e.g. when a preparation routine factored a known
    /// scale out of the amplitudes.
    pub fn set_norm_ledger(&mut self, ledger: f64) {
        self.norm_ledger = ledger;
    }

    /// Inner product `<self|other>`.
    pub fn overlap(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Applies a unitary operator, consuming the state.
    pub fn apply(mut self, op: &UnitaryOp) -> Result<Self> {
        let n = self.layout.total_qubits();
        let max = op.max_qubit();
        if max >= n {
            return Err(Error::QubitOutOfRange {
                index: max,
                total: n,
            });
        }
        let targets = op.targets();
        let k = targets.len();
        let sub_dim = 1usize << k;

        // Placement table: sub-index -> full-index bits on the target qubits.
        let mut spread = vec![0usize; sub_dim];
        for (j, slot) in spread.iter_mut().enumerate() {
            for (pos, &q) in targets.iter().enumerate() {
                if (j >> (k - 1 - pos)) & 1 == 1 {
                    *slot |= 1 << q;
                }
            }
        }

        let mut control_mask = 0usize;
        let mut control_value = 0usize;
        for &(c, v) in op.controls() {
            control_mask |= 1 << c;
            if v {
                control_value |= 1 << c;
            }
        }

        let free: Vec<usize> = (0..n).filter(|q| !targets.contains(q)).collect();
        let free_count = free.len();

        match &op.kind {
            OpKind::Dense(matrix) => {
                let mut gathered = vec![Complex64::new(0.0, 0.0); sub_dim];
                for outer in 0..(1usize << free_count) {
                    let mut base = 0usize;
                    for (i, &q) in free.iter().enumerate() {
                        if (outer >> i) & 1 == 1 {
                            base |= 1 << q;
                        }
                    }
                    if base & control_mask != control_value {
                        continue;
                    }
                    for j in 0..sub_dim {
                        gathered[j] = self.amps[base | spread[j]];
                    }
                    for r in 0..sub_dim {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for c in 0..sub_dim {
                            acc += matrix[(r, c)] * gathered[c];
                        }
                        self.amps[base | spread[r]] = acc;
                    }
                }
            }
            OpKind::Diagonal(phases) => {
                for outer in 0..(1usize << free_count) {
                    let mut base = 0usize;
                    for (i, &q) in free.iter().enumerate() {
                        if (outer >> i) & 1 == 1 {
                            base |= 1 << q;
                        }
                    }
                    if base & control_mask != control_value {
                        continue;
                    }
                    for j in 0..sub_dim {
                        self.amps[base | spread[j]] *= phases[j];
                    }
                }
            }
            OpKind::Permutation(map) => {
                let mut gathered = vec![Complex64::new(0.0, 0.0); sub_dim];
                for outer in 0..(1usize << free_count) {
                    let mut base = 0usize;
                    for (i, &q) in free.iter().enumerate() {
                        if (outer >> i) & 1 == 1 {
                            base |= 1 << q;
                        }
                    }
                    if base & control_mask != control_value {
                        continue;
                    }
                    for j in 0..sub_dim {
                        gathered[j] = self.amps[base | spread[j]];
                    }
                    for j in 0..sub_dim {
                        self.amps[base | spread[map[j]]] = gathered[j];
                    }
                }
            }
        }
        Ok(self)
    }

    /// Probability that the given qubit reads the given value.
    pub fn qubit_probability(&self, qubit: usize, value: bool) -> Result<f64> {
        let n = self.layout.total_qubits();
        if qubit >= n {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                total: n,
            });
        }
        let want = usize::from(value) << qubit;
        let mask = 1usize << qubit;
        let total: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == want)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let norm_sq = self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>();
        Ok(total / norm_sq)
    }

    /// Projects onto the branch where `qubit` reads `value`, renormalizes, and
    /// returns the branch probability. The norm ledger absorbs
    /// `sqrt(probability)` so physical scales survive post-selection.
    pub fn postselect(mut self, qubit: usize, value: bool) -> Result<(Self, f64)> {
        let probability = self.qubit_probability(qubit, value)?;
        if probability < POSTSELECT_THRESHOLD {
            return Err(Error::ImpossibleOutcome {
                probability,
                threshold: POSTSELECT_THRESHOLD,
            });
        }
        let want = usize::from(value) << qubit;
        let mask = 1usize << qubit;
        let scale = 1.0 / probability.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == want {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        self.norm_ledger *= probability.sqrt();
        Ok((self, probability))
    }

    /// Reduced density matrix over a contiguous run of registers.
    ///
    /// `keep` must list adjacent registers in layout order; everything else is
    /// traced out.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::EmptyTraceSelection);
        }
        let names = self.layout.register_names();
        let mut positions = Vec::with_capacity(keep.len());
        for name in keep {
            match names.iter().position(|n| n == name) {
                Some(p) => positions.push(p),
                None => return Err(Error::UnknownRegister(name.to_string())),
            }
        }
        for pair in positions.windows(2) {
            if pair[1] != pair[0] + 1 {
                return Err(Error::NonContiguousTraceSelection);
            }
        }
        let last = keep[positions.len() - 1];
        let lsb = self.layout.register_lsb(last)?;
        let width: usize = keep
            .iter()
            .map(|name| self.layout.register_width(name).expect("validated above"))
            .sum();
        let keep_dim = 1usize << width;
        let n = self.layout.total_qubits();
        let high_bits = n - lsb - width;

        let mut rho = DMatrix::from_element(keep_dim, keep_dim, Complex64::new(0.0, 0.0));
        let mut block = vec![Complex64::new(0.0, 0.0); keep_dim];
        for hi in 0..(1usize << high_bits) {
            for lo in 0..(1usize << lsb) {
                let base = (hi << (lsb + width)) | lo;
                for (kv, slot) in block.iter_mut().enumerate() {
                    *slot = self.amps[base | (kv << lsb)];
                }
                for a in 0..keep_dim {
                    for b in 0..keep_dim {
                        rho[(a, b)] += block[a] * block[b].conj();
                    }
                }
            }
        }
        DensityMatrix::new(rho)
    }

    /// Evolves under `exp(i H t)` for a Hermitian matrix `H` on the full
    /// state space.
    ///
    /// Up to [`EXACT_EVOLUTION_DIM`] the propagator comes from an exact
    /// eigendecomposition; beyond that a sliced Taylor series is used with the
    /// slice count chosen so each slice has `||H t / K|| <= 1/2`, making the
    /// 16-term truncation error below 1e-19 per slice.
    pub fn evolve(self, hamiltonian: &DMatrix<Complex64>, t: f64) -> Result<Self> {
        let dim = self.dimension();
        if hamiltonian.nrows() != dim || hamiltonian.ncols() != dim {
            return Err(Error::OperatorDimensionMismatch {
                got: hamiltonian.nrows(),
                want: dim,
            });
        }
        let deviation = hermiticity_deviation(hamiltonian);
        if deviation > NORM_TOL {
            return Err(Error::NotHermitian {
                deviation,
                tolerance: NORM_TOL,
            });
        }
        if dim <= EXACT_EVOLUTION_DIM {
            self.evolve_eigen(hamiltonian, t)
        } else {
            self.evolve_series(hamiltonian, t)
        }
    }

    fn evolve_eigen(mut self, hamiltonian: &DMatrix<Complex64>, t: f64) -> Result<Self> {
        let eig = hamiltonian.clone().symmetric_eigen();
        let psi = DVector::from_column_slice(&self.amps);
        let mut coords = eig.eigenvectors.adjoint() * psi;
        for (j, c) in coords.iter_mut().enumerate() {
            *c *= Complex64::from_polar(1.0, eig.eigenvalues[j] * t);
        }
        let evolved = &eig.eigenvectors * coords;
        self.amps.copy_from_slice(evolved.as_slice());
        Ok(self)
    }

    pub(crate) fn evolve_series(mut self, hamiltonian: &DMatrix<Complex64>, t: f64) -> Result<Self> {
        // Frobenius norm upper-bounds the spectral norm, so slicing by it is
        // conservative.
        let frob = hamiltonian.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        let slices = ((frob * t.abs() / 0.5).ceil() as usize).max(1);
        let step = Complex64::new(0.0, t / slices as f64);
        let psi0 = DVector::from_column_slice(&self.amps);
        let mut psi = psi0;
        for _ in 0..slices {
            let mut acc = psi.clone();
            let mut term = psi.clone();
            for j in 1..=16usize {
                term = hamiltonian * term * (step / j as f64);
                acc += &term;
            }
            psi = acc;
        }
        self.amps.copy_from_slice(psi.as_slice());
        Ok(self)
    }

    /// Marginal probabilities of a register's values.
    pub fn register_marginal(&self, register: &str) -> Result<Vec<f64>> {
        let width = self.layout.register_width(register)?;
        let mut probs = vec![0.0f64; 1 << width];
        let norm_sq = self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>();
        for (i, a) in self.amps.iter().enumerate() {
            let v = self.layout.value_of(register, i)? as usize;
            probs[v] += a.norm_sqr() / norm_sq;
        }
        Ok(probs)
    }

    /// Samples `shots` measurement outcomes of one register in the
    /// computational basis. Deterministic for a fixed `(state, shots, seed)`.
    pub fn measure_counts(
        &self,
        register: &str,
        shots: u64,
        seed: u64,
    ) -> Result<BTreeMap<u64, u64>> {
        let probs = self.register_marginal(register)?;
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0f64;
        for p in &probs {
            acc += p;
            cdf.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for _ in 0..shots {
            let u: f64 = rng.gen();
            let mut outcome = probs.len() - 1;
            for (v, &edge) in cdf.iter().enumerate() {
                if u < edge {
                    outcome = v;
                    break;
                }
            }
            *counts.entry(outcome as u64).or_insert(0) += 1;
        }
        Ok(counts)
    }
}

pub(crate) fn vector_norm(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Max-norm deviation of a matrix from its own adjoint.
pub fn hermiticity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}
