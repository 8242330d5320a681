//! Least-squares loss assembly for linear differential conditions.
//!
//! Each condition is a linear functional of the unknown fields sampled at
//! finitely many points; squaring and summing the residuals yields an
//! exactly quadratic loss over the basis-expansion weights, ready for spin
//! encoding.

use nalgebra::{DMatrix, DVector};

use super::basis::{BasisSet, Polynomial};
use super::ising::{solve_ising, spin_encode, SolveMethod, SpinEncoding};
use crate::error::{Error, Result};

/// One summand `C(x) * d^k f_field / dx^k` of a condition.
#[derive(Debug, Clone)]
pub struct EquationTerm {
    /// Which unknown field the term differentiates.
    pub field: usize,
    pub derivative_order: usize,
    /// Variable coefficient `C(x)`.
    pub coefficient: Polynomial,
}

/// A single enforced condition: `sum of terms + inhomogeneity = 0` on every
/// sample point.
#[derive(Debug, Clone)]
pub struct Condition {
    pub terms: Vec<EquationTerm>,
    /// The inhomogeneous part `B(x)` added to the field terms.
    pub inhomogeneity: Polynomial,
    /// Closed interval the samples must lie in.
    pub domain: (f64, f64),
    pub samples: Vec<f64>,
}

/// A system of linear conditions over `n_fields` unknown functions.
#[derive(Debug, Clone)]
pub struct FunctionalResidual {
    n_fields: usize,
    conditions: Vec<Condition>,
}

impl FunctionalResidual {
    pub fn new(n_fields: usize, conditions: Vec<Condition>) -> Result<Self> {
        if n_fields == 0 {
            return Err(Error::DimensionMismatch { got: 0, want: 1 });
        }
        for (i, condition) in conditions.iter().enumerate() {
            if condition.samples.is_empty() {
                return Err(Error::EmptySampleSet(i));
            }
            let (lo, hi) = condition.domain;
            if !(hi >= lo) {
                return Err(Error::EmptyDomain { lo, hi });
            }
            for &x in &condition.samples {
                if x < lo || x > hi {
                    return Err(Error::SampleOutsideDomain { x, lo, hi });
                }
            }
            for term in &condition.terms {
                if term.field >= n_fields {
                    return Err(Error::DimensionMismatch {
                        got: term.field,
                        want: n_fields,
                    });
                }
            }
        }
        Ok(Self {
            n_fields,
            conditions,
        })
    }

    pub fn n_fields(&self) -> usize {
        self.n_fields
    }

    pub fn conditions(&self) -> &[Condition] {
        &self.conditions
    }
}

/// The assembled quadratic `loss(w) = w' J w + h' w + constant`, always a
/// sum of squares and therefore non-negative.
#[derive(Debug, Clone)]
pub struct ContinuousQuadraticLoss {
    j: DMatrix<f64>,
    h: DVector<f64>,
    constant: f64,
    n_fields: usize,
    n_basis: usize,
}

impl ContinuousQuadraticLoss {
    pub fn quadratic_matrix(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn linear_vector(&self) -> &DVector<f64> {
        &self.h
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn n_fields(&self) -> usize {
        self.n_fields
    }

    pub fn n_basis(&self) -> usize {
        self.n_basis
    }

    pub fn weight_count(&self) -> usize {
        self.n_fields * self.n_basis
    }

    /// Flattened weight index of `(field, basis function)`.
    pub fn weight_index(&self, field: usize, m: usize) -> usize {
        field * self.n_basis + m
    }

    pub fn evaluate(&self, w: &[f64]) -> Result<f64> {
        if w.len() != self.weight_count() {
            return Err(Error::DimensionMismatch {
                got: w.len(),
                want: self.weight_count(),
            });
        }
        let w = DVector::from_column_slice(w);
        Ok((w.transpose() * &self.j * &w)[(0, 0)] + self.h.dot(&w) + self.constant)
    }
}

/// Builds the quadratic loss from squared condition residuals: for every
/// sample the residual is affine in the weights, `r(x) . w + B(x)`, with
/// `r_(field, m)(x) = sum over the condition's terms of
/// C(x) d^k Phi_m(x)`.
pub fn assemble_loss(
    problem: &FunctionalResidual,
    basis: &BasisSet,
) -> Result<ContinuousQuadraticLoss> {
    if basis.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n_basis = basis.len();
    let n_weights = problem.n_fields() * n_basis;
    let mut j = DMatrix::zeros(n_weights, n_weights);
    let mut h = DVector::zeros(n_weights);
    let mut constant = 0.0;

    for condition in problem.conditions() {
        for &x in &condition.samples {
            let mut row = DVector::zeros(n_weights);
            for term in &condition.terms {
                let c = term.coefficient.evaluate(x);
                if c == 0.0 {
                    continue;
                }
                for m in 0..n_basis {
                    row[term.field * n_basis + m] +=
                        c * basis.evaluate(m, term.derivative_order, x)?;
                }
            }
            let b = condition.inhomogeneity.evaluate(x);
            j += &row * row.transpose();
            h += row * (2.0 * b);
            constant += b * b;
        }
    }

    Ok(ContinuousQuadraticLoss {
        j,
        h,
        constant,
        n_fields: problem.n_fields(),
        n_basis,
    })
}

/// A decoded weight vector bundled with its basis for evaluation.
#[derive(Debug, Clone)]
pub struct ReconstructedField {
    weights: DVector<f64>,
    basis: BasisSet,
    n_fields: usize,
}

impl ReconstructedField {
    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// `f_field(x) = sum over m of w_(field, m) Phi_m(x)`.
    pub fn evaluate(&self, field: usize, x: f64) -> Result<f64> {
        if field >= self.n_fields {
            return Err(Error::DimensionMismatch {
                got: field,
                want: self.n_fields,
            });
        }
        let n_basis = self.basis.len();
        let mut acc = 0.0;
        for m in 0..n_basis {
            acc += self.weights[field * n_basis + m] * self.basis.evaluate(m, 0, x)?;
        }
        Ok(acc)
    }
}

/// Decodes a spin string into weights, wraps them in an evaluator, and
/// reports the residual loss at the decoded point.
pub fn decode_and_reconstruct(
    sigma: &[i8],
    enc: &SpinEncoding,
    basis: &BasisSet,
    loss: &ContinuousQuadraticLoss,
) -> Result<(ReconstructedField, f64)> {
    let weights = enc.decode(sigma)?;
    let residual = loss.evaluate(weights.as_slice())?;
    Ok((
        ReconstructedField {
            weights,
            basis: basis.clone(),
            n_fields: loss.n_fields(),
        },
        residual,
    ))
}

/// Per-epoch record of a zoom run.
#[derive(Debug, Clone)]
pub struct ZoomReport {
    /// Best decoded weights across all epochs (the initial window center
    /// counts as a candidate).
    pub weights: DVector<f64>,
    pub best_residual: f64,
    /// Raw residual of each epoch's decoded solution.
    pub residuals: Vec<f64>,
    /// Running minimum of the candidate residuals, including the starting
    /// center; non-increasing by construction.
    pub best_so_far: Vec<f64>,
    pub final_encoding: SpinEncoding,
}

/// Iteratively solves, re-centers the encoding on the decoded weights, and
/// shrinks the scale, keeping the best decoded weights seen.
pub fn zoom_iterate(
    problem: &FunctionalResidual,
    basis: &BasisSet,
    enc0: &SpinEncoding,
    epochs: usize,
    shrink: f64,
    method: &SolveMethod,
) -> Result<ZoomReport> {
    if epochs == 0 {
        return Err(Error::EmptyInput);
    }
    if !(shrink > 0.0 && shrink < 1.0) {
        return Err(Error::ShrinkOutOfRange(shrink));
    }
    let loss = assemble_loss(problem, basis)?;
    if enc0.n_weights() != loss.weight_count() {
        return Err(Error::DimensionMismatch {
            got: enc0.n_weights(),
            want: loss.weight_count(),
        });
    }

    let mut enc = enc0.clone();
    let mut best_weights = DVector::from_column_slice(enc.centers());
    let mut best_residual = loss.evaluate(best_weights.as_slice())?;
    let mut residuals = Vec::with_capacity(epochs);
    let mut best_so_far = Vec::with_capacity(epochs);

    for _ in 0..epochs {
        let ising = spin_encode(&loss, &enc)?;
        let solution = solve_ising(&ising, method)?;
        let weights = enc.decode(&solution.spins)?;
        let residual = loss.evaluate(weights.as_slice())?;
        if residual < best_residual {
            best_residual = residual;
            best_weights = weights.clone();
        }
        residuals.push(residual);
        best_so_far.push(best_residual);
        enc = enc.recentered(weights.as_slice(), shrink)?;
    }

    Ok(ZoomReport {
        weights: best_weights,
        best_residual,
        residuals,
        best_so_far,
        final_encoding: enc,
    })
}
