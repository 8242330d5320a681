//! Polynomial basis sets with analytic derivatives.
//!
//! Field ansatz and variable coefficients alike are represented as dense
//! polynomials, so every derivative an equation asks for is exact rather
//! than finite-differenced.

use crate::error::{Error, Result};

/// Highest derivative order an equation term may request.
pub const MAX_DERIVATIVE_ORDER: usize = 6;

/// A dense univariate polynomial in ascending powers of `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(vec![value])
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(p, &c)| p as f64 * c)
                .collect(),
        )
    }

    pub fn derivative_n(&self, order: usize) -> Self {
        let mut out = self.clone();
        for _ in 0..order {
            out = out.derivative();
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; len];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Self::new(out)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * factor).collect())
    }

    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }
}

/// Which classical family generated a basis set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisFamily {
    Monomial,
    /// Chebyshev polynomials of the first kind, shifted onto `[0, 1]`.
    Chebyshev,
}

impl BasisFamily {
    pub fn name(&self) -> &'static str {
        match self {
            BasisFamily::Monomial => "monomial",
            BasisFamily::Chebyshev => "chebyshev",
        }
    }
}

/// An ordered set of polynomial basis functions used to expand unknown
/// fields.
#[derive(Debug, Clone)]
pub struct BasisSet {
    family: BasisFamily,
    functions: Vec<Polynomial>,
}

impl BasisSet {
    /// `{1, x, x^2, ..., x^degree}`.
    pub fn monomial(degree: usize) -> Self {
        let functions = (0..=degree)
            .map(|d| {
                let mut coeffs = vec![0.0; d + 1];
                coeffs[d] = 1.0;
                Polynomial::new(coeffs)
            })
            .collect();
        Self {
            family: BasisFamily::Monomial,
            functions,
        }
    }

    /// First-kind Chebyshev polynomials mapped onto `[0, 1]`, generated by
    /// the recurrence `T_(m+1) = 2 (2x - 1) T_m - T_(m-1)`.
    pub fn chebyshev(degree: usize) -> Self {
        let shift = Polynomial::new(vec![-1.0, 2.0]);
        let mut functions = vec![Polynomial::constant(1.0)];
        if degree >= 1 {
            functions.push(shift.clone());
        }
        for m in 2..=degree {
            let next = shift
                .multiply(&functions[m - 1])
                .scale(2.0)
                .add(&functions[m - 2].scale(-1.0));
            functions.push(next);
        }
        Self {
            family: BasisFamily::Chebyshev,
            functions,
        }
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn function(&self, m: usize) -> Result<&Polynomial> {
        self.functions.get(m).ok_or(Error::DimensionMismatch {
            got: m,
            want: self.functions.len(),
        })
    }

    /// `d^order Phi_m / dx^order` evaluated at `x`.
    pub fn evaluate(&self, m: usize, derivative_order: usize, x: f64) -> Result<f64> {
        if derivative_order > MAX_DERIVATIVE_ORDER {
            return Err(Error::DerivativeOrderTooLarge(
                derivative_order,
                MAX_DERIVATIVE_ORDER,
            ));
        }
        Ok(self.function(m)?.derivative_n(derivative_order).evaluate(x))
    }
}
