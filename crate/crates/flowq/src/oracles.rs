//! Independent classical references.
//!
//! Everything in this module is implemented from first principles — a
//! Runge-Kutta integrator, Gaussian elimination with partial pivoting, a
//! registry of closed-form solutions, and a plain scalar replica of the
//! Taylor-quadrature stepping scheme — precisely so the quantum-flavored
//! modules can be validated against code that shares none of their kernels.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Classic fourth-order Runge-Kutta over `steps` uniform steps from `t0` to
/// `t1`, returning the final state.
pub fn rk4_integrate<F>(f: F, y0: &[f64], t0: f64, t1: f64, steps: usize) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    if steps == 0 || !(t1 > t0) {
        return Err(Error::BadTimeMesh {
            horizon: t1 - t0,
            n_primary: steps,
            n_secondary: 0,
        });
    }
    let h = (t1 - t0) / steps as f64;
    let dim = y0.len();
    let mut y = y0.to_vec();
    let shifted = |y: &[f64], k: &[f64], scale: f64| -> Vec<f64> {
        (0..dim).map(|i| y[i] + scale * k[i]).collect()
    };
    for step in 0..steps {
        let t = t0 + step as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &shifted(&y, &k1, 0.5 * h));
        let k3 = f(t + 0.5 * h, &shifted(&y, &k2, 0.5 * h));
        let k4 = f(t + h, &shifted(&y, &k3, h));
        for i in 0..dim {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(y)
}

/// Relative pivot threshold below which elimination reports singularity.
pub const PIVOT_TOL: f64 = 1e-12;

/// Largest residual `||Ax - b||_inf / max(1, ||b||_inf)` accepted from a
/// solve before it is reported as singular (ill-conditioned in practice).
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Solves `A x = b` for complex `A` by Gaussian elimination with partial
/// pivoting, rejecting matrices whose pivots collapse relative to the
/// largest input entry and double-checking the residual of the returned
/// solution.
pub fn dense_solve(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            got: a.ncols(),
            want: n,
        });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            got: b.len(),
            want: n,
        });
    }
    let scale = a.iter().map(|e| e.norm()).fold(0.0f64, f64::max);
    if scale == 0.0 {
        return Err(Error::SingularMatrix(PIVOT_TOL));
    }

    let mut m = a.clone();
    let mut rhs = b.clone();
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_mag = m[(col, col)].norm();
        for r in col + 1..n {
            let mag = m[(r, col)].norm();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = r;
            }
        }
        if pivot_mag < PIVOT_TOL * scale {
            return Err(Error::SingularMatrix(PIVOT_TOL));
        }
        if pivot_row != col {
            m.swap_rows(col, pivot_row);
            rhs.swap_rows(col, pivot_row);
        }
        let pivot = m[(col, col)];
        for r in col + 1..n {
            let factor = m[(r, col)] / pivot;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for c in col..n {
                let sub = factor * m[(col, c)];
                m[(r, c)] -= sub;
            }
            let sub = factor * rhs[col];
            rhs[r] -= sub;
        }
    }

    let mut x = DVector::from_element(n, Complex64::new(0.0, 0.0));
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for c in row + 1..n {
            acc -= m[(row, c)] * x[c];
        }
        x[row] = acc / m[(row, row)];
    }

    let residual = (a * &x - b).iter().map(|e| e.norm()).fold(0.0f64, f64::max);
    let b_scale = b.iter().map(|e| e.norm()).fold(1.0f64, f64::max);
    if residual > RESIDUAL_TOL * b_scale {
        return Err(Error::SingularMatrix(RESIDUAL_TOL));
    }
    Ok(x)
}

/// Closed-form references used to pin expected outputs in tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    /// `y(t) = exp(-t)`, the solution of `y' = -y`, `y(0) = 1`; one argument
    /// `t >= 0`.
    ExpDecay,
    /// One implicit-midpoint step of `y' = -y` from `y = 1`:
    /// `(1 - dt/2) / (1 + dt/2)`; one argument `0 <= dt < 2`.
    ImplicitMidpointStep,
    /// The target curve `f(x) = x^2` for curve-fitting problems; one
    /// argument.
    QadeQuadratic,
    /// `u(x, t) = exp(-t) sin(x)`, the lowest decaying mode of the unit heat
    /// equation on `[0, 2 pi]`; arguments `(x, t)` with `t >= 0`.
    HeatModeDecay,
}

impl ClosedForm {
    pub fn lookup(name: &str) -> Result<Self> {
        match name {
            "exp_decay" => Ok(Self::ExpDecay),
            "implicit_midpoint_step" => Ok(Self::ImplicitMidpointStep),
            "qade_quadratic" => Ok(Self::QadeQuadratic),
            "heat_mode_decay" => Ok(Self::HeatModeDecay),
            other => Err(Error::UnknownClosedForm(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ExpDecay => "exp_decay",
            Self::ImplicitMidpointStep => "implicit_midpoint_step",
            Self::QadeQuadratic => "qade_quadratic",
            Self::HeatModeDecay => "heat_mode_decay",
        }
    }

    /// Number of arguments `evaluate` expects.
    pub fn arity(&self) -> usize {
        match self {
            Self::HeatModeDecay => 2,
            _ => 1,
        }
    }

    pub fn evaluate(&self, args: &[f64]) -> Result<f64> {
        if args.len() != self.arity() {
            return Err(Error::DimensionMismatch {
                got: args.len(),
                want: self.arity(),
            });
        }
        match self {
            Self::ExpDecay => {
                let t = args[0];
                if t < 0.0 {
                    return Err(Error::SampleOutsideDomain {
                        x: t,
                        lo: 0.0,
                        hi: f64::INFINITY,
                    });
                }
                Ok((-t).exp())
            }
            Self::ImplicitMidpointStep => {
                let dt = args[0];
                if !(0.0..2.0).contains(&dt) {
                    return Err(Error::SampleOutsideDomain {
                        x: dt,
                        lo: 0.0,
                        hi: 2.0,
                    });
                }
                Ok((1.0 - dt / 2.0) / (1.0 + dt / 2.0))
            }
            Self::QadeQuadratic => Ok(args[0] * args[0]),
            Self::HeatModeDecay => {
                let (x, t) = (args[0], args[1]);
                let two_pi = 2.0 * std::f64::consts::PI;
                if !(0.0..=two_pi).contains(&x) {
                    return Err(Error::SampleOutsideDomain {
                        x,
                        lo: 0.0,
                        hi: two_pi,
                    });
                }
                if t < 0.0 {
                    return Err(Error::SampleOutsideDomain {
                        x: t,
                        lo: 0.0,
                        hi: f64::INFINITY,
                    });
                }
                Ok((-t).exp() * x.sin())
            }
        }
    }
}

/// Convenience wrapper around [`ClosedForm::lookup`].
pub fn closed_form(name: &str) -> Result<ClosedForm> {
    ClosedForm::lookup(name)
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

/// Coefficients of `f(series)` truncated to `trunc` terms, where `f` is the
/// polynomial with coefficients `f_coeffs` (index = power).
fn compose_polynomial(f_coeffs: &[f64], series: &[f64], trunc: usize) -> Vec<f64> {
    let mut acc = vec![0.0; trunc];
    let mut power = vec![0.0; trunc];
    power[0] = 1.0;
    for (m, &a) in f_coeffs.iter().enumerate() {
        if m > 0 {
            power = series_mul(&power, series, trunc);
        }
        for j in 0..trunc {
            acc[j] += a * power[j];
        }
    }
    acc
}

/// Local Taylor coefficients of the solution of `y' = f(y)` around `y`:
/// `c_0 = y`, `c_(k+1) = [f(series)]_k / (k + 1)`.
fn taylor_coefficients(f_coeffs: &[f64], y: f64, order: usize) -> Vec<f64> {
    let mut c = vec![y];
    for k in 0..order {
        let composed = compose_polynomial(f_coeffs, &c, k + 1);
        c.push(composed[k] / (k + 1) as f64);
    }
    c
}

/// One step of the Taylor-quadrature scheme: expand the local solution to
/// `order`, sample its derivative polynomial at `secondary` left endpoints,
/// rescale the samples to the unit interval, advance by the step times the
/// recovered mean. Degenerate sample sets (all equal) shortcut to that value.
fn reference_step(f_coeffs: &[f64], y: f64, dt: f64, secondary: usize, order: usize) -> f64 {
    let c = taylor_coefficients(f_coeffs, y, order);
    let deriv: Vec<f64> = (0..order).map(|k| (k + 1) as f64 * c[k + 1]).collect();
    let h = dt / secondary as f64;
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
    let mean_value = if hi == lo {
        lo
    } else {
        let mean = samples
            .iter()
            .map(|g| (g - lo) / (hi - lo))
            .sum::<f64>()
            / secondary as f64;
        lo + (hi - lo) * mean
    };
    y + dt * mean_value
}

/// Scalar replica of the Taylor-quadrature time marcher for
/// `y' = f(y)` with polynomial `f`, over `primary` uniform steps to `t_end`
/// with `secondary` quadrature samples per step. Returns the trajectory at
/// all `primary + 1` mesh nodes.
pub fn taylor_quadrature_reference(
    f_coeffs: &[f64],
    y0: f64,
    t_end: f64,
    primary: usize,
    secondary: usize,
    order: usize,
) -> Result<Vec<f64>> {
    if primary == 0 || secondary == 0 || !(t_end > 0.0) {
        return Err(Error::BadTimeMesh {
            horizon: t_end,
            n_primary: primary,
            n_secondary: secondary,
        });
    }
    if order == 0 || order > 4 {
        return Err(Error::TaylorOrderTooLarge {
            requested: order,
            max: 4,
        });
    }
    if f_coeffs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let dt = t_end / primary as f64;
    let mut trajectory = Vec::with_capacity(primary + 1);
    trajectory.push(y0);
    let mut y = y0;
    for _ in 0..primary {
        y = reference_step(f_coeffs, y, dt, secondary, order);
        trajectory.push(y);
    }
    Ok(trajectory)
}
