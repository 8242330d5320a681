use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::state::hermiticity_deviation;
use crate::error::{Error, Result};

const DENSITY_TOL: f64 = 1e-10;

/// Reduced density matrix produced by a partial trace.
///
/// Construction checks Hermiticity, unit trace, and positivity (eigenvalues
/// above `-1e-10`), so a held value is always a valid quantum state.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let deviation = hermiticity_deviation(&entries);
        if deviation > DENSITY_TOL {
            return Err(Error::NotHermitian {
                deviation,
                tolerance: DENSITY_TOL,
            });
        }
        let trace: Complex64 = (0..entries.nrows()).map(|i| entries[(i, i)]).sum();
        if (trace.re - 1.0).abs() > DENSITY_TOL || trace.im.abs() > DENSITY_TOL {
            return Err(Error::NotNormalized { norm: trace.re });
        }
        let eig = entries.clone().symmetric_eigen();
        if let Some(lambda) = eig.eigenvalues.iter().find(|&&l| l < -DENSITY_TOL) {
            return Err(Error::NotNormalized { norm: *lambda });
        }
        Ok(Self { entries })
    }

    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.entries[(r, c)]
    }

    /// Trace distance `0.5 * ||rho - sigma||_1` via the eigenvalues of the
    /// Hermitian difference.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if other.dimension() != self.dimension() {
            return Err(Error::OperatorDimensionMismatch {
                got: other.dimension(),
                want: self.dimension(),
            });
        }
        let diff = &self.entries - &other.entries;
        let eig = diff.symmetric_eigen();
        Ok(0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
    }

    /// Overlap `<x| rho |x>` with a pure state.
    pub fn fidelity_with_pure(&self, x: &DVector<Complex64>) -> Result<f64> {
        if x.len() != self.dimension() {
            return Err(Error::OperatorDimensionMismatch {
                got: x.len(),
                want: self.dimension(),
            });
        }
        let value = (x.adjoint() * &self.entries * x)[(0, 0)];
        Ok(value.re)
    }

    /// Density matrix of a pure state vector.
    pub fn from_pure(x: &DVector<Complex64>) -> Result<Self> {
        let norm = x.norm();
        if norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let unit = x / Complex64::new(norm, 0.0);
        let rho = &unit * unit.adjoint();
        Self::new(rho)
    }
}
