//! Annealing-style formulations of differential equations.
//!
//! Two routes to a spin objective live here. The first expands unknown
//! fields in a polynomial basis, squares the sampled equation residuals
//! into an exact quadratic loss over the expansion weights, fixed-point
//! encodes each weight in spins, and refines by zooming the encoding
//! window. The second poses a single Runge-Kutta step as a least-squares
//! problem over the next state and the stage values, either solved
//! continuously or pushed through an adaptively windowed binary encoding.
//! Both produce standard Ising/QUBO objectives; exhaustive enumeration and
//! seeded simulated annealing stand in for annealing hardware.

pub mod basis;
pub mod ising;
pub mod loss;
pub mod runge_kutta;

pub use basis::{BasisFamily, BasisSet, Polynomial, MAX_DERIVATIVE_ORDER};
pub use ising::{
    solve_ising, spin_encode, IsingProblem, IsingSolution, SaOptions, SolveMethod, SpinEncoding,
    EXHAUSTIVE_SPIN_CAP,
};
pub use loss::{
    assemble_loss, decode_and_reconstruct, zoom_iterate, Condition, ContinuousQuadraticLoss,
    EquationTerm, FunctionalResidual, ReconstructedField, ZoomReport,
};
pub use runge_kutta::{
    build_rk_residual, rk_windowed_solve, rk_windowed_solve_from, solve_rk_least_squares,
    ButcherTableau, PolynomialDynamics, RKStageProblem, RkObjective, RkSolution,
    WindowedEncoding, WindowedEpoch, WindowedReport, DYNAMICS_WIDTH_CAP,
};

#[cfg(test)]
mod tests {
    use super::*;

    /// f'' = 2 with f(0) = 0 and f(1) = 1, whose exact solution x^2 is
    /// representable over the monomials {1, x, x^2} as (0, 0, 1).
    pub(crate) fn poisson_like_problem() -> FunctionalResidual {
        let interior = Condition {
            terms: vec![EquationTerm {
                field: 0,
                derivative_order: 2,
                coefficient: Polynomial::constant(1.0),
            }],
            inhomogeneity: Polynomial::constant(-2.0),
            domain: (0.0, 1.0),
            samples: (0..=4).map(|i| i as f64 / 4.0).collect(),
        };
        let left = Condition {
            terms: vec![EquationTerm {
                field: 0,
                derivative_order: 0,
                coefficient: Polynomial::constant(1.0),
            }],
            inhomogeneity: Polynomial::zero(),
            domain: (0.0, 0.0),
            samples: vec![0.0],
        };
        let right = Condition {
            terms: vec![EquationTerm {
                field: 0,
                derivative_order: 0,
                coefficient: Polynomial::constant(1.0),
            }],
            inhomogeneity: Polynomial::constant(-1.0),
            domain: (1.0, 1.0),
            samples: vec![1.0],
        };
        FunctionalResidual::new(1, vec![interior, left, right]).unwrap()
    }

    #[test]
    fn zoom_recovers_the_exact_quadratic_solution() {
        let problem = poisson_like_problem();
        let basis = BasisSet::monomial(2);
        let s0 = 2.0;
        let enc0 = SpinEncoding::uniform(3, 0.0, s0, 3).unwrap();
        let report = zoom_iterate(
            &problem,
            &basis,
            &enc0,
            6,
            0.5,
            &SolveMethod::Exhaustive,
        )
        .unwrap();
        let expected = [0.0, 0.0, 1.0];
        let bound = s0 * 0.5f64.powi(8);
        for (i, &e) in expected.iter().enumerate() {
            assert!(
                (report.weights[i] - e).abs() <= bound,
                "w[{i}] = {} vs {e}, bound {bound}",
                report.weights[i]
            );
        }
    }

    #[test]
    fn zoom_best_so_far_never_increases() {
        let problem = poisson_like_problem();
        let basis = BasisSet::monomial(2);
        let enc0 = SpinEncoding::uniform(3, 0.3, 1.5, 2).unwrap();
        let report = zoom_iterate(
            &problem,
            &basis,
            &enc0,
            5,
            0.5,
            &SolveMethod::Exhaustive,
        )
        .unwrap();
        for pair in report.best_so_far.windows(2) {
            assert!(pair[1] <= pair[0]);
        }
        assert_eq!(report.residuals.len(), 5);
    }

    #[test]
    fn zoom_from_an_exact_center_keeps_zero_residual() {
        // The starting center is itself a candidate, so a window already
        // centered on the solution reports zero residual from epoch one.
        let problem = poisson_like_problem();
        let basis = BasisSet::monomial(2);
        let enc0 =
            SpinEncoding::new(vec![0.0, 0.0, 1.0], vec![0.5, 0.5, 0.5], 2).unwrap();
        let report = zoom_iterate(
            &problem,
            &basis,
            &enc0,
            4,
            0.5,
            &SolveMethod::Exhaustive,
        )
        .unwrap();
        for &b in &report.best_so_far {
            assert!(b < 1e-20, "best-so-far residual {b}");
        }
        assert!(report.best_residual < 1e-20);
    }

    #[test]
    fn zoom_validates_its_knobs() {
        let problem = poisson_like_problem();
        let basis = BasisSet::monomial(2);
        let enc0 = SpinEncoding::uniform(3, 0.0, 1.0, 2).unwrap();
        assert!(matches!(
            zoom_iterate(&problem, &basis, &enc0, 0, 0.5, &SolveMethod::Exhaustive),
            Err(crate::error::Error::EmptyInput)
        ));
        assert!(matches!(
            zoom_iterate(&problem, &basis, &enc0, 2, 1.0, &SolveMethod::Exhaustive),
            Err(crate::error::Error::ShrinkOutOfRange(_))
        ));
    }
}
