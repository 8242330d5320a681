//! Loading classical data into quantum registers.
//!
//! Four strategies are covered: amplitude encoding (values as normalized
//! amplitudes), basis encoding in binary / fixed-point / unary / one-hot
//! flavors, conversion from basis-encoded data to amplitude form through an
//! ancilla rotation and post-selection, and block encoding of a non-unitary
//! matrix as the corner of a larger unitary.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::statevector::{RegisterLayout, Statevector, UnitaryOp};

/// Result of amplitude-encoding a real vector.
///
/// The state holds `x / ||x||` over the first `source_len` basis states,
/// padded with exact zeros up to the next power of two; `norm` is the factor
/// required to reconstruct the source.
#[derive(Debug, Clone)]
pub struct AmplitudeEncoding {
    pub state: Statevector,
    pub norm: f64,
    pub source_len: usize,
}

impl AmplitudeEncoding {
    /// Reconstructs the encoded vector: first `source_len` amplitudes scaled
    /// back by the stored norm.
    pub fn decode_source(&self) -> Vec<f64> {
        self.state.amplitudes()[..self.source_len]
            .iter()
            .map(|a| a.re * self.norm)
            .collect()
    }
}

/// Stores `x / ||x||` as amplitudes over a register named `data`.
pub fn amplitude_encode(x: &[f64]) -> Result<AmplitudeEncoding> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let width = bit_width_for(x.len());
    let layout = RegisterLayout::new(&[("data", width)])?;
    let mut amps = vec![Complex64::new(0.0, 0.0); layout.dimension()];
    for (i, v) in x.iter().enumerate() {
        amps[i] = Complex64::new(v / norm, 0.0);
    }
    let state = Statevector::from_amplitudes(layout, amps)?;
    Ok(AmplitudeEncoding {
        state,
        norm,
        source_len: x.len(),
    })
}

/// Returns the raw amplitude vector of a state, padding included.
pub fn amplitude_decode(state: &Statevector) -> Vec<Complex64> {
    state.amplitudes().to_vec()
}

fn bit_width_for(len: usize) -> usize {
    let padded = len.next_power_of_two();
    padded.trailing_zeros().max(1) as usize
}

/// Basis-encoding flavor.
///
/// - `Binary`: the value is the basis index.
/// - `FixedPoint`: reals in `[-scale (1 - 2^-w), +scale (1 - 2^-w)]` on a
///   uniform grid with spacing `scale * 2^(1-w)`.
/// - `Unary`: value `k` sets the `k` lowest qubits, so the basis index is
///   `2^k - 1`. (Reading the bit string with qubit 0 leftmost, value 2 at
///   width 4 prints as `1100`.)
/// - `OneHot`: value `k` in `1..=w` sets qubit `k - 1` alone; 0 is rejected
///   because no qubit would be set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisFlavor {
    Binary,
    FixedPoint { scale: f64 },
    Unary,
    OneHot,
}

impl BasisFlavor {
    fn name(&self) -> &'static str {
        match self {
            BasisFlavor::Binary => "binary",
            BasisFlavor::FixedPoint { .. } => "fixed-point",
            BasisFlavor::Unary => "unary",
            BasisFlavor::OneHot => "one-hot",
        }
    }
}

/// A basis encoding of classical values into a register of `width` qubits.
#[derive(Debug, Clone)]
pub struct BasisEncoding {
    pub flavor: BasisFlavor,
    pub width: usize,
}

impl BasisEncoding {
    pub fn binary(width: usize) -> Self {
        Self {
            flavor: BasisFlavor::Binary,
            width,
        }
    }

    pub fn fixed_point(width: usize, scale: f64) -> Self {
        Self {
            flavor: BasisFlavor::FixedPoint { scale },
            width,
        }
    }

    pub fn unary(width: usize) -> Self {
        Self {
            flavor: BasisFlavor::Unary,
            width,
        }
    }

    pub fn one_hot(width: usize) -> Self {
        Self {
            flavor: BasisFlavor::OneHot,
            width,
        }
    }

    /// Encodes an integer value to a basis index (binary, unary, one-hot).
    pub fn encode_integer(&self, value: u64) -> Result<u64> {
        let out_of_range = || Error::EncodingOutOfRange {
            value: value.to_string(),
            flavor: self.flavor.name(),
            width: self.width,
        };
        match self.flavor {
            BasisFlavor::Binary => {
                if self.width < 64 && value >= (1u64 << self.width) {
                    return Err(out_of_range());
                }
                Ok(value)
            }
            BasisFlavor::Unary => {
                if value > self.width as u64 {
                    return Err(out_of_range());
                }
                Ok((1u64 << value) - 1)
            }
            BasisFlavor::OneHot => {
                if value == 0 || value > self.width as u64 {
                    return Err(out_of_range());
                }
                Ok(1u64 << (value - 1))
            }
            BasisFlavor::FixedPoint { .. } => Err(Error::EncodingFlavorMismatch {
                flavor: self.flavor.name(),
                operation: "integer encoding",
            }),
        }
    }

    /// Decodes a basis index back to the integer it represents.
    pub fn decode_integer(&self, index: u64) -> Result<u64> {
        let bad_pattern = || Error::EncodingOutOfRange {
            value: format!("index {index}"),
            flavor: self.flavor.name(),
            width: self.width,
        };
        match self.flavor {
            BasisFlavor::Binary => Ok(index),
            BasisFlavor::Unary => {
                let k = index.trailing_ones() as u64;
                if index != (1u64 << k) - 1 || k > self.width as u64 {
                    return Err(bad_pattern());
                }
                Ok(k)
            }
            BasisFlavor::OneHot => {
                if index.count_ones() != 1 {
                    return Err(bad_pattern());
                }
                let pos = index.trailing_zeros() as u64;
                if pos >= self.width as u64 {
                    return Err(bad_pattern());
                }
                Ok(pos + 1)
            }
            BasisFlavor::FixedPoint { .. } => Err(Error::EncodingFlavorMismatch {
                flavor: self.flavor.name(),
                operation: "integer decoding",
            }),
        }
    }

    /// Quantizes a real value onto the fixed-point grid and returns its basis
    /// index. Representable values are `scale * (2k + 1 - 2^w) / 2^w`.
    pub fn encode_real(&self, value: f64) -> Result<u64> {
        let BasisFlavor::FixedPoint { scale } = self.flavor else {
            return Err(Error::EncodingFlavorMismatch {
                flavor: self.flavor.name(),
                operation: "real encoding",
            });
        };
        let w = self.width as i32;
        let bound = scale * (1.0 - 0.5f64.powi(w));
        if value.abs() > bound {
            return Err(Error::EncodingOutOfRange {
                value: format!("{value}"),
                flavor: self.flavor.name(),
                width: self.width,
            });
        }
        let spacing = scale * 0.5f64.powi(w - 1);
        let k = ((value + bound) / spacing + 0.5).floor();
        let max_index = (1u64 << self.width) - 1;
        Ok((k as u64).min(max_index))
    }

    /// Maps a basis index back to the grid point it represents; the round
    /// trip error of `decode(encode(v))` is at most `scale * 2^-w`.
    pub fn decode_real(&self, index: u64) -> Result<f64> {
        let BasisFlavor::FixedPoint { scale } = self.flavor else {
            return Err(Error::EncodingFlavorMismatch {
                flavor: self.flavor.name(),
                operation: "real decoding",
            });
        };
        if index >= (1u64 << self.width) {
            return Err(Error::EncodingOutOfRange {
                value: format!("index {index}"),
                flavor: self.flavor.name(),
                width: self.width,
            });
        }
        let w = self.width as i32;
        Ok(scale * ((2 * index + 1) as f64 * 0.5f64.powi(w) - 1.0))
    }
}

/// Converts basis-encoded data `d` in `[0, 1]^N` to amplitude form.
///
/// A uniform superposition over indices is tagged with an angle register of
/// `psi_bits` qubits holding the quantized arc-cosine representation of each
/// `d_j`, an ancilla is rotated so its `|0>` branch carries weight `d_j`,
/// the ancilla is post-selected on 0, and the angle register is uncomputed.
/// The rotation itself is applied exactly per index (the angle register only
/// stores the finite-precision bookkeeping), so the returned state carries
/// amplitudes exactly proportional to `d_j` and the success probability is
/// exactly `sum(d_j^2) / N_padded`.
pub fn basis_to_amplitude(d: &[f64], psi_bits: usize) -> Result<(Statevector, f64)> {
    if d.is_empty() {
        return Err(Error::EmptyInput);
    }
    for (index, &value) in d.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::SampleOutOfUnitRange { index, value });
        }
    }
    if d.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroNorm);
    }
    let psi_bits = psi_bits.max(1);
    let index_bits = bit_width_for(d.len());
    let padded = 1usize << index_bits;

    let layout = RegisterLayout::new(&[("index", index_bits), ("psi", psi_bits), ("ancilla", 1)])?;
    let index_qubits = layout.register_qubits("index")?;
    let psi_qubits = layout.register_qubits("psi")?;
    let ancilla = layout.register_qubits("ancilla")?[0];

    // Uniform superposition over the index register, everything else |0>.
    let mut amps = vec![Complex64::new(0.0, 0.0); layout.dimension()];
    let weight = 1.0 / (padded as f64).sqrt();
    for j in 0..padded {
        let at = layout.index_with(&[("index", j as u64)])?;
        amps[at] = Complex64::new(weight, 0.0);
    }
    let mut state = Statevector::from_amplitudes(layout.clone(), amps)?;

    // Quantized angle table: psi_j = (2/pi) arccos(d_j), stored as an integer
    // fraction of the register range.
    let levels = (1u64 << psi_bits) - 1;
    let quantized: Vec<u64> = (0..padded)
        .map(|j| {
            let dj = d.get(j).copied().unwrap_or(0.0);
            let psi = dj.clamp(0.0, 1.0).acos() / FRAC_PI_2;
            (psi * levels as f64).round() as u64
        })
        .collect();

    // Oracle writing the angle register: (j, s) -> (j, s + psi_j mod 2^p).
    let psi_dim = 1usize << psi_bits;
    let mut forward = vec![0usize; padded * psi_dim];
    for j in 0..padded {
        for s in 0..psi_dim {
            let src = (j << psi_bits) | s;
            let dst = (j << psi_bits) | ((s + quantized[j] as usize) % psi_dim);
            forward[src] = dst;
        }
    }
    let mut oracle_targets = index_qubits.clone();
    oracle_targets.extend_from_slice(&psi_qubits);
    let write_psi = UnitaryOp::permutation(forward.clone(), oracle_targets.clone())?;
    state = state.apply(&write_psi)?;

    // Per-index ancilla rotation with the exact coefficient d_j.
    for j in 0..padded {
        let dj = d.get(j).copied().unwrap_or(0.0);
        let s = (1.0 - dj * dj).max(0.0).sqrt();
        let rot = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(dj, 0.0),
                Complex64::new(-s, 0.0),
                Complex64::new(s, 0.0),
                Complex64::new(dj, 0.0),
            ],
        );
        let mut op = UnitaryOp::dense(rot, vec![ancilla])?;
        for (pos, &q) in index_qubits.iter().enumerate() {
            let bit = (j >> (index_bits - 1 - pos)) & 1 == 1;
            op = op.controlled(q, bit)?;
        }
        state = state.apply(&op)?;
    }

    let (state, success_probability) = state.postselect(ancilla, false)?;

    // Uncompute the angle register so it disentangles back to |0...0>.
    let mut inverse = vec![0usize; forward.len()];
    for (src, &dst) in forward.iter().enumerate() {
        inverse[dst] = src;
    }
    let erase_psi = UnitaryOp::permutation(inverse, oracle_targets)?;
    let state = state.apply(&erase_psi)?;

    Ok((state, success_probability))
}

/// A non-unitary matrix embedded as the top-left block of a unitary.
///
/// `unitary` acts on one more qubit than the padded matrix needs; with both
/// projections onto the ancilla-`|0>` corner, `alpha * P U P` recovers the
/// original matrix.
#[derive(Debug, Clone)]
pub struct BlockEncoding {
    pub matrix: DMatrix<Complex64>,
    pub alpha: f64,
    pub unitary: DMatrix<Complex64>,
    pub padded_dim: usize,
}

impl BlockEncoding {
    /// Reads the encoded matrix back out of the unitary: the top-left block
    /// times `alpha`, truncated to the original size.
    pub fn extract(&self) -> DMatrix<Complex64> {
        let n = self.matrix.nrows();
        DMatrix::from_fn(n, n, |r, c| {
            self.unitary[(r, c)] * Complex64::new(self.alpha, 0.0)
        })
    }

    /// Wraps the unitary as an operator on explicit target qubits
    /// (most-significant-first; the first target is the block-selection
    /// ancilla).
    pub fn as_op(&self, targets: Vec<usize>) -> Result<UnitaryOp> {
        UnitaryOp::dense(self.unitary.clone(), targets)
    }

    /// Number of qubits the unitary acts on.
    pub fn qubit_count(&self) -> usize {
        (2 * self.padded_dim).trailing_zeros() as usize
    }
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(a: &DMatrix<Complex64>) -> f64 {
    if a.iter().all(|e| e.norm_sqr() == 0.0) {
        return 0.0;
    }
    let svd = a.clone().svd(false, false);
    svd.singular_values.max()
}

/// Builds the standard unitary dilation of `A / alpha`:
///
/// ```text
/// U = [ B              sqrt(I - B B+) ]
///     [ sqrt(I - B+B)     -B+         ]
/// ```
///
/// with `B = A / alpha` padded up to a power of two. Requires
/// `alpha >= ||A||` within 1e-12 so the square roots stay real. The dilation
/// is assembled from one singular value decomposition `B = W S V+` as
/// `diag(W, V) [[S, C], [C, -S]] diag(V+, W+)` with `C = sqrt(I - S^2)`,
/// which keeps it unitary to machine precision even when singular values sit
/// exactly at 1.
pub fn block_encode(a: &DMatrix<Complex64>, alpha: f64) -> Result<BlockEncoding> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::DimensionMismatch {
            got: a.ncols(),
            want: a.nrows().max(1),
        });
    }
    let norm = spectral_norm(a);
    if alpha <= 0.0 || alpha < norm - 1e-12 {
        return Err(Error::AlphaBelowNorm { alpha, norm });
    }
    let n = a.nrows();
    let padded = n.next_power_of_two();
    let mut b = DMatrix::from_element(padded, padded, Complex64::new(0.0, 0.0));
    for r in 0..n {
        for c in 0..n {
            b[(r, c)] = a[(r, c)] / alpha;
        }
    }
    let svd = b.svd(true, true);
    let w = svd.u.as_ref().expect("svd(true, true) keeps u");
    let v_t = svd.v_t.as_ref().expect("svd(true, true) keeps v_t");
    let sines: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&s| s.min(1.0))
        .collect();
    let cosines: Vec<f64> = sines.iter().map(|&s| (1.0 - s * s).sqrt()).collect();

    // Left factor diag(W, V), middle rotation, right factor diag(V+, W+).
    let dim = 2 * padded;
    let zero = Complex64::new(0.0, 0.0);
    let mut left = DMatrix::from_element(dim, dim, zero);
    let mut middle = DMatrix::from_element(dim, dim, zero);
    let mut right = DMatrix::from_element(dim, dim, zero);
    for r in 0..padded {
        for c in 0..padded {
            left[(r, c)] = w[(r, c)];
            left[(r + padded, c + padded)] = v_t[(c, r)].conj();
            right[(r, c)] = v_t[(r, c)];
            right[(r + padded, c + padded)] = w[(c, r)].conj();
        }
        middle[(r, r)] = Complex64::new(sines[r], 0.0);
        middle[(r, r + padded)] = Complex64::new(cosines[r], 0.0);
        middle[(r + padded, r)] = Complex64::new(cosines[r], 0.0);
        middle[(r + padded, r + padded)] = Complex64::new(-sines[r], 0.0);
    }
    let unitary = &left * middle * right;
    let deviation = crate::statevector::unitarity_deviation(&unitary);
    if deviation > 1e-10 {
        return Err(Error::NotUnitary {
            deviation,
            tolerance: 1e-10,
        });
    }
    Ok(BlockEncoding {
        matrix: a.clone(),
        alpha,
        unitary,
        padded_dim: padded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn basis_vector_encodes_to_a_basis_state() {
        let enc = amplitude_encode(&[0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(enc.norm, 1.0);
        assert!((enc.state.amplitude(2).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ones_vector_pads_with_exact_zeros() {
        let enc = amplitude_encode(&[1.0; 7]).unwrap();
        assert!((enc.norm - 7f64.sqrt()).abs() < 1e-12);
        let expected = 1.0 / 7f64.sqrt();
        for i in 0..7 {
            assert!((enc.state.amplitude(i).re - expected).abs() < 1e-12);
        }
        assert_eq!(enc.state.amplitude(7).norm(), 0.0);
    }

    #[test]
    fn amplitude_round_trip_over_random_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let len = rng.gen_range(1..=32);
            let x: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            if x.iter().all(|v| v.abs() < 1e-12) {
                continue;
            }
            let enc = amplitude_encode(&x).unwrap();
            let back = enc.decode_source();
            for (a, b) in x.iter().zip(back.iter()) {
                assert!((a - b).abs() <= 1e-12 * enc.norm.max(1.0));
            }
        }
    }

    #[test]
    fn empty_and_zero_vectors_are_rejected() {
        assert!(matches!(amplitude_encode(&[]), Err(Error::EmptyInput)));
        assert!(matches!(amplitude_encode(&[0.0, 0.0]), Err(Error::ZeroNorm)));
    }

    #[test]
    fn binary_flavor_is_the_identity_on_indices() {
        let enc = BasisEncoding::binary(3);
        assert_eq!(enc.encode_integer(5).unwrap(), 0b101);
        assert_eq!(enc.decode_integer(0b101).unwrap(), 5);
        assert!(enc.encode_integer(8).is_err());
        assert_eq!(enc.encode_integer(0).unwrap(), 0);
    }

    #[test]
    fn unary_value_sets_the_lowest_qubits() {
        let enc = BasisEncoding::unary(4);
        // Two lowest qubits set; with qubit 0 printed leftmost this is 1100.
        assert_eq!(enc.encode_integer(2).unwrap(), 0b0011);
        assert_eq!(enc.decode_integer(0b0011).unwrap(), 2);
        assert_eq!(enc.encode_integer(0).unwrap(), 0);
        assert_eq!(enc.encode_integer(4).unwrap(), 0b1111);
        assert!(enc.encode_integer(5).is_err());
        assert!(enc.decode_integer(0b0101).is_err());
    }

    #[test]
    fn one_hot_maps_value_k_to_qubit_k_minus_one() {
        let enc = BasisEncoding::one_hot(4);
        assert_eq!(enc.encode_integer(3).unwrap(), 0b0100);
        assert_eq!(enc.decode_integer(0b0100).unwrap(), 3);
        assert!(enc.encode_integer(0).is_err(), "0 has no set qubit");
        assert!(enc.encode_integer(5).is_err());
        assert!(enc.decode_integer(0b0110).is_err());
    }

    #[test]
    fn fixed_point_round_trip_stays_within_grid_resolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for width in 2..=8usize {
            let scale = 1.0 + rng.gen::<f64>() * 3.0;
            let enc = BasisEncoding::fixed_point(width, scale);
            let bound = scale * (1.0 - 0.5f64.powi(width as i32));
            for _ in 0..50 {
                let v = (rng.gen::<f64>() * 2.0 - 1.0) * bound;
                let index = enc.encode_real(v).unwrap();
                let back = enc.decode_real(index).unwrap();
                assert!(
                    (back - v).abs() <= scale * 0.5f64.powi(width as i32) + 1e-12,
                    "width {width}: {v} -> {back}"
                );
            }
            assert!(enc.encode_real(bound * 1.01).is_err());
            assert!(enc.encode_real(-bound * 1.01).is_err());
        }
    }

    #[test]
    fn flavor_mismatch_is_reported() {
        assert!(matches!(
            BasisEncoding::binary(3).encode_real(0.5),
            Err(Error::EncodingFlavorMismatch { .. })
        ));
        assert!(matches!(
            BasisEncoding::fixed_point(3, 1.0).encode_integer(1),
            Err(Error::EncodingFlavorMismatch { .. })
        ));
    }

    #[test]
    fn basis_to_amplitude_all_ones_is_uniform_with_certain_success() {
        let (state, prob) = basis_to_amplitude(&[1.0; 4], 6).unwrap();
        assert!((prob - 1.0).abs() < 1e-12);
        let expected = 0.5;
        for j in 0..4u64 {
            let at = state.layout().index_with(&[("index", j)]).unwrap();
            assert!((state.amplitude(at).re - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_to_amplitude_matches_the_exact_success_formula() {
        let (state, prob) = basis_to_amplitude(&[0.6, 0.8], 8).unwrap();
        assert!((prob - 0.5).abs() < 1e-12);
        let a0 = state
            .amplitude(state.layout().index_with(&[("index", 0)]).unwrap())
            .re;
        let a1 = state
            .amplitude(state.layout().index_with(&[("index", 1)]).unwrap())
            .re;
        assert!((a0 - 0.6).abs() < 1e-10);
        assert!((a1 - 0.8).abs() < 1e-10);
    }

    #[test]
    fn basis_to_amplitude_random_vectors_scale_proportionally() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let len = [2usize, 4, 8][rng.gen_range(0..3)];
            let d: Vec<f64> = (0..len).map(|_| rng.gen::<f64>()).collect();
            let (state, prob) = basis_to_amplitude(&d, 6).unwrap();
            let padded = len.next_power_of_two() as f64;
            let expected = d.iter().map(|v| v * v).sum::<f64>() / padded;
            assert!((prob - expected).abs() < 1e-12);
            let scale = 1.0 / d.iter().map(|v| v * v).sum::<f64>().sqrt();
            for (j, &dj) in d.iter().enumerate() {
                let at = state.layout().index_with(&[("index", j as u64)]).unwrap();
                assert!((state.amplitude(at).re - dj * scale).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_entry_stays_exactly_zero() {
        let (state, _) = basis_to_amplitude(&[0.5, 0.0, 0.25, 1.0], 6).unwrap();
        let at = state.layout().index_with(&[("index", 1)]).unwrap();
        assert_eq!(state.amplitude(at).norm(), 0.0);
    }

    #[test]
    fn angle_register_is_uncomputed() {
        let (state, _) = basis_to_amplitude(&[0.3, 0.9, 0.5], 5).unwrap();
        let marginal = state.register_marginal("psi").unwrap();
        assert!((marginal[0] - 1.0).abs() < 1e-12);
        for &p in &marginal[1..] {
            assert!(p < 1e-12);
        }
    }

    #[test]
    fn out_of_range_data_is_rejected() {
        assert!(matches!(
            basis_to_amplitude(&[0.5, 1.2], 4),
            Err(Error::SampleOutOfUnitRange { .. })
        ));
        assert!(matches!(
            basis_to_amplitude(&[-0.1], 4),
            Err(Error::SampleOutOfUnitRange { .. })
        ));
    }

    #[test]
    fn block_encoding_of_identity_has_identity_corner() {
        let eye = DMatrix::<Complex64>::identity(2, 2);
        let be = block_encode(&eye, 1.0).unwrap();
        let extracted = be.extract();
        for r in 0..2 {
            for c in 0..2 {
                assert!((extracted[(r, c)] - eye[(r, c)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn block_encoding_recovers_a_scaled_pauli() {
        let a = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let be = block_encode(&a, 0.5).unwrap();
        let extracted = be.extract();
        for r in 0..2 {
            for c in 0..2 {
                assert!((extracted[(r, c)] - a[(r, c)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn alpha_below_the_spectral_norm_is_rejected() {
        let eye = DMatrix::<Complex64>::identity(2, 2);
        assert!(matches!(
            block_encode(&eye, 0.9),
            Err(Error::AlphaBelowNorm { .. })
        ));
    }

    #[test]
    fn random_block_encodings_are_unitary_and_extract_cleanly() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..25 {
            let n = rng.gen_range(1..=8);
            let a = DMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let alpha = spectral_norm(&a) * (1.0 + rng.gen::<f64>());
            let be = block_encode(&a, alpha).unwrap();
            assert!(crate::statevector::unitarity_deviation(&be.unitary) < 1e-10);
            let extracted = be.extract();
            for r in 0..n {
                for c in 0..n {
                    assert!((extracted[(r, c)] - a[(r, c)]).norm() < 1e-10);
                }
            }
        }
    }
}
