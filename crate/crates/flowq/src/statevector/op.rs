use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Unitarity / unit-modulus tolerance used when constructing operators.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Dense transforms (including the Fourier transform) are refused beyond this
/// many target qubits; a 2^10 x 2^10 complex matrix is the largest this
/// library materializes.
pub const DENSE_TARGET_CAP: usize = 10;

#[derive(Debug, Clone)]
pub(crate) enum OpKind {
    /// Explicit matrix on the listed target qubits.
    Dense(DMatrix<Complex64>),
    /// Unit-modulus multipliers indexed by the targets' combined value.
    Diagonal(Vec<Complex64>),
    /// Bijection on the targets' combined value; amplitude at `j` moves to `map[j]`.
    Permutation(Vec<usize>),
}

/// A unitary acting on a subset of qubits, optionally conditioned on control
/// qubits.
///
/// Target lists are ordered most-significant-first: `targets[0]` supplies the
/// top bit of the sub-index the operator's matrix (or table) is indexed by,
/// which matches the register value convention in
/// [`RegisterLayout`](super::RegisterLayout). Controlled operators are never
/// expanded into dense matrices over control + target space; application
/// touches only the basis-state blocks where every control matches.
#[derive(Debug, Clone)]
pub struct UnitaryOp {
    pub(crate) kind: OpKind,
    pub(crate) targets: Vec<usize>,
    /// `(qubit, required value)` pairs; all must match for the op to act.
    pub(crate) controls: Vec<(usize, bool)>,
}

fn check_targets(targets: &[usize]) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if targets[..i].contains(&t) {
            return Err(Error::RepeatedTarget(t));
        }
    }
    Ok(())
}

impl UnitaryOp {
    /// Wraps a dense matrix acting on `targets` (most-significant-first).
    ///
    /// Fails unless the matrix is square with dimension `2^targets.len()` and
    /// unitary within [`UNITARITY_TOL`].
    pub fn dense(matrix: DMatrix<Complex64>, targets: Vec<usize>) -> Result<Self> {
        check_targets(&targets)?;
        if targets.len() > DENSE_TARGET_CAP {
            return Err(Error::DenseCapExceeded {
                requested: targets.len(),
                cap: DENSE_TARGET_CAP,
            });
        }
        let dim = 1usize << targets.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::OperatorDimensionMismatch {
                got: matrix.nrows(),
                want: dim,
            });
        }
        let deviation = unitarity_deviation(&matrix);
        if deviation > UNITARITY_TOL {
            return Err(Error::NotUnitary {
                deviation,
                tolerance: UNITARITY_TOL,
            });
        }
        Ok(Self {
            kind: OpKind::Dense(matrix),
            targets,
            controls: Vec::new(),
        })
    }

    /// Diagonal operator with unit-modulus entries indexed by the targets'
    /// combined value.
    pub fn diagonal(phases: Vec<Complex64>, targets: Vec<usize>) -> Result<Self> {
        check_targets(&targets)?;
        let dim = 1usize << targets.len();
        if phases.len() != dim {
            return Err(Error::OperatorDimensionMismatch {
                got: phases.len(),
                want: dim,
            });
        }
        for (index, p) in phases.iter().enumerate() {
            let modulus = p.norm();
            if (modulus - 1.0).abs() > UNITARITY_TOL {
                return Err(Error::NotUnitModulus { index, modulus });
            }
        }
        Ok(Self {
            kind: OpKind::Diagonal(phases),
            targets,
            controls: Vec::new(),
        })
    }

    /// Permutation of the targets' basis states; amplitude at sub-index `j`
    /// moves to `map[j]`.
    pub fn permutation(map: Vec<usize>, targets: Vec<usize>) -> Result<Self> {
        check_targets(&targets)?;
        let dim = 1usize << targets.len();
        if map.len() != dim {
            return Err(Error::OperatorDimensionMismatch {
                got: map.len(),
                want: dim,
            });
        }
        let mut hit = vec![false; dim];
        for (src, &dst) in map.iter().enumerate() {
            if dst >= dim || hit[dst] {
                return Err(Error::NotAPermutation(src));
            }
            hit[dst] = true;
        }
        Ok(Self {
            kind: OpKind::Permutation(map),
            targets,
            controls: Vec::new(),
        })
    }

    /// Conditions the operator on `control` being in the given basis value.
    ///
    /// Controls stack: wrapping an already-controlled operator adds another
    /// control. The control qubit must be disjoint from the targets and from
    /// existing controls.
    pub fn controlled(self, control: usize, value: bool) -> Result<Self> {
        if self.targets.contains(&control) || self.controls.iter().any(|&(c, _)| c == control) {
            return Err(Error::ControlOverlapsTarget(control));
        }
        let mut op = self;
        op.controls.push((control, value));
        Ok(op)
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn controls(&self) -> &[(usize, bool)] {
        &self.controls
    }

    /// Highest qubit index the operator touches (targets or controls).
    pub fn max_qubit(&self) -> usize {
        self.targets
            .iter()
            .chain(self.controls.iter().map(|(c, _)| c))
            .copied()
            .max()
            .unwrap_or(0)
    }

    /// Materializes the uncontrolled action as a dense matrix on the target
    /// subspace. Intended for composition and tests, not for applying ops.
    pub fn target_matrix(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.targets.len();
        match &self.kind {
            OpKind::Dense(m) => m.clone(),
            OpKind::Diagonal(phases) => DMatrix::from_fn(dim, dim, |r, c| {
                if r == c {
                    phases[r]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
            OpKind::Permutation(map) => DMatrix::from_fn(dim, dim, |r, c| {
                if map[c] == r {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        }
    }
}

/// Max-norm deviation of `U U^dagger` from the identity.
pub fn unitarity_deviation(matrix: &DMatrix<Complex64>) -> f64 {
    let product = matrix * matrix.adjoint();
    let mut worst: f64 = 0.0;
    for r in 0..product.nrows() {
        for c in 0..product.ncols() {
            let expected = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((product[(r, c)] - Complex64::new(expected, 0.0)).norm());
        }
    }
    worst
}

/// Discrete Fourier transform matrix on `n` qubits:
/// `U[k][j] = exp(2 pi i j k / 2^n) / sqrt(2^n)`.
///
/// For `n = 1` this is exactly the Hadamard gate. Dense construction is
/// refused above [`DENSE_TARGET_CAP`] qubits.
pub fn qft_matrix(n: usize) -> Result<DMatrix<Complex64>> {
    if n == 0 {
        return Err(Error::EmptyPhaseRegister(0));
    }
    if n > DENSE_TARGET_CAP {
        return Err(Error::DenseCapExceeded {
            requested: n,
            cap: DENSE_TARGET_CAP,
        });
    }
    let dim = 1usize << n;
    let scale = 1.0 / (dim as f64).sqrt();
    Ok(DMatrix::from_fn(dim, dim, |k, j| {
        let angle = 2.0 * PI * (j as f64) * (k as f64) / (dim as f64);
        Complex64::from_polar(scale, angle)
    }))
}

/// Inverse Fourier transform on `n` qubits (conjugate transpose of [`qft_matrix`]).
pub fn iqft_matrix(n: usize) -> Result<DMatrix<Complex64>> {
    Ok(qft_matrix(n)?.adjoint())
}

/// Fourier transform as an operator on the given target qubits
/// (most-significant-first).
pub fn qft_op(targets: Vec<usize>) -> Result<UnitaryOp> {
    let m = qft_matrix(targets.len())?;
    UnitaryOp::dense(m, targets)
}

/// Inverse Fourier transform as an operator on the given target qubits.
pub fn iqft_op(targets: Vec<usize>) -> Result<UnitaryOp> {
    let m = iqft_matrix(targets.len())?;
    UnitaryOp::dense(m, targets)
}

/// The Hadamard gate.
pub fn hadamard() -> DMatrix<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(h, 0.0),
            Complex64::new(h, 0.0),
            Complex64::new(h, 0.0),
            Complex64::new(-h, 0.0),
        ],
    )
}

/// Real rotation `[[cos t, -sin t], [sin t, cos t]]`, mapping
/// `|0> -> cos t |0> + sin t |1>`.
pub fn real_rotation(theta: f64) -> DMatrix<Complex64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(c, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(c, 0.0),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qft_on_one_qubit_is_hadamard() {
        let q = qft_matrix(1).unwrap();
        let h = hadamard();
        for r in 0..2 {
            for c in 0..2 {
                assert!((q[(r, c)] - h[(r, c)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn qft_is_unitary_and_inverse_composes_to_identity() {
        for n in 1..=6 {
            let q = qft_matrix(n).unwrap();
            assert!(unitarity_deviation(&q) < 1e-12, "n = {n}");
            let prod = iqft_matrix(n).unwrap() * &q;
            let dim = 1usize << n;
            for r in 0..dim {
                for c in 0..dim {
                    let expected = if r == c { 1.0 } else { 0.0 };
                    assert!((prod[(r, c)] - Complex64::new(expected, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn qft_respects_dense_cap() {
        assert!(matches!(
            qft_matrix(DENSE_TARGET_CAP + 1),
            Err(Error::DenseCapExceeded { .. })
        ));
        assert!(matches!(qft_matrix(0), Err(Error::EmptyPhaseRegister(0))));
    }

    #[test]
    fn non_unitary_matrix_is_rejected() {
        let bad = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(
            UnitaryOp::dense(bad, vec![0]),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn diagonal_requires_unit_modulus() {
        let err = UnitaryOp::diagonal(
            vec![Complex64::new(0.5, 0.0), Complex64::new(1.0, 0.0)],
            vec![0],
        );
        assert!(matches!(err, Err(Error::NotUnitModulus { .. })));
    }

    #[test]
    fn permutation_must_be_bijective() {
        assert!(matches!(
            UnitaryOp::permutation(vec![0, 0], vec![0]),
            Err(Error::NotAPermutation(_))
        ));
        assert!(UnitaryOp::permutation(vec![1, 0], vec![0]).is_ok());
    }

    #[test]
    fn control_may_not_overlap_targets() {
        let op = UnitaryOp::dense(hadamard(), vec![2]).unwrap();
        assert!(matches!(
            op.clone().controlled(2, true),
            Err(Error::ControlOverlapsTarget(2))
        ));
        let op = op.controlled(0, true).unwrap();
        assert!(matches!(
            op.controlled(0, false),
            Err(Error::ControlOverlapsTarget(0))
        ));
    }
}
