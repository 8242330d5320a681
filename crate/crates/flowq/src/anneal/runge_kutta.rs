//! Runge-Kutta time steps recast as least-squares objectives, solvable
//! continuously or over adaptively windowed binary variables.
//!
//! One implicit (or explicit) step is characterized by two residual
//! families: the update equation `u_next - u - dt * sum_o b_o K_o` and the
//! stage equations `K_o - f(u + dt * sum_e A_oe K_e)`. Their summed squares
//! vanish exactly at the classical Runge-Kutta solution, so minimizing the
//! objective reproduces the step. For affine dynamics the objective is
//! quadratic, which makes it expressible over binary windows as a QUBO and
//! refinable by halving each variable's window between solves.

use nalgebra::{DMatrix, DVector};

use super::ising::{solve_ising, IsingProblem, SolveMethod};
use crate::error::{Error, Result};

/// Weights of an `s`-stage Runge-Kutta method.
#[derive(Debug, Clone)]
pub struct ButcherTableau {
    name: String,
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
}

impl ButcherTableau {
    pub fn new(name: &str, a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>) -> Result<Self> {
        let s = b.len();
        if a.nrows() != s || a.ncols() != s || c.len() != s {
            return Err(Error::TableauShapeMismatch {
                a: a.nrows().max(a.ncols()).max(c.len()),
                b: s,
            });
        }
        let sum: f64 = b.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InconsistentTableau(sum));
        }
        Ok(Self {
            name: name.to_string(),
            a,
            b,
            c,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    /// True when the stage matrix is strictly lower triangular, so stages
    /// resolve sequentially.
    pub fn is_explicit(&self) -> bool {
        let s = self.stages();
        (0..s).all(|i| (i..s).all(|j| self.a[(i, j)] == 0.0))
    }

    /// The classical fourth-order method.
    pub fn rk4() -> Self {
        let mut a = DMatrix::zeros(4, 4);
        a[(1, 0)] = 0.5;
        a[(2, 1)] = 0.5;
        a[(3, 2)] = 1.0;
        let b = DVector::from_column_slice(&[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0]);
        let c = DVector::from_column_slice(&[0.0, 0.5, 0.5, 1.0]);
        Self::new("rk4", a, b, c).expect("classical tableau is consistent")
    }

    pub fn implicit_midpoint() -> Self {
        Self::new(
            "implicit-midpoint",
            DMatrix::from_element(1, 1, 0.5),
            DVector::from_element(1, 1.0),
            DVector::from_element(1, 0.5),
        )
        .expect("classical tableau is consistent")
    }

    pub fn backward_euler() -> Self {
        Self::new(
            "backward-euler",
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 1.0),
            DVector::from_element(1, 1.0),
        )
        .expect("classical tableau is consistent")
    }

    pub fn explicit_euler() -> Self {
        Self::new(
            "explicit-euler",
            DMatrix::zeros(1, 1),
            DVector::from_element(1, 1.0),
            DVector::zeros(1),
        )
        .expect("classical tableau is consistent")
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "rk4" => Some(Self::rk4()),
            "implicit-midpoint" => Some(Self::implicit_midpoint()),
            "backward-euler" => Some(Self::backward_euler()),
            "explicit-euler" => Some(Self::explicit_euler()),
            _ => None,
        }
    }
}

/// Polynomial vector field `f(u) = sum over degrees g of T_g u^(tensor g)`,
/// stored per degree as an `N x N^g` matrix acting on the flattened tensor
/// power.
#[derive(Debug, Clone)]
pub struct PolynomialDynamics {
    dim: usize,
    terms: Vec<DMatrix<f64>>,
}

/// Largest flattened tensor-power width a dynamics term may have.
pub const DYNAMICS_WIDTH_CAP: usize = 1 << 16;

impl PolynomialDynamics {
    pub fn new(dim: usize, terms: Vec<DMatrix<f64>>) -> Result<Self> {
        if dim == 0 || terms.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut width = 1usize;
        for (degree, term) in terms.iter().enumerate() {
            if term.nrows() != dim || term.ncols() != width {
                return Err(Error::DimensionMismatch {
                    got: term.nrows().max(term.ncols()),
                    want: dim.max(width),
                });
            }
            if degree + 1 < terms.len() {
                width = width.checked_mul(dim).filter(|&w| w <= DYNAMICS_WIDTH_CAP).ok_or(
                    Error::DenseCapExceeded {
                        requested: usize::MAX,
                        cap: DYNAMICS_WIDTH_CAP,
                    },
                )?;
            }
        }
        Ok(Self { dim, terms })
    }

    /// Pure linear dynamics `f(u) = M u`.
    pub fn linear(matrix: DMatrix<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        Self::new(dim, vec![DMatrix::zeros(dim, 1), matrix])
    }

    /// Affine dynamics `f(u) = constant + M u`.
    pub fn affine(constant: DVector<f64>, matrix: DMatrix<f64>) -> Result<Self> {
        let dim = constant.len();
        let constant = DMatrix::from_column_slice(dim, 1, constant.as_slice());
        Self::new(dim, vec![constant, matrix])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Highest power of the state appearing in the field.
    pub fn degree(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn is_affine(&self) -> bool {
        self.degree() <= 1
    }

    pub fn term(&self, degree: usize) -> Option<&DMatrix<f64>> {
        self.terms.get(degree)
    }

    pub fn evaluate(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        if u.len() != self.dim {
            return Err(Error::StateDimensionMismatch {
                got: u.len(),
                want: self.dim,
            });
        }
        let mut out = DVector::zeros(self.dim);
        let mut power = DVector::from_element(1, 1.0);
        for (degree, term) in self.terms.iter().enumerate() {
            if degree > 0 {
                let mut next = DVector::zeros(power.len() * self.dim);
                for (i, &p) in power.iter().enumerate() {
                    for (j, &uj) in u.iter().enumerate() {
                        next[i * self.dim + j] = p * uj;
                    }
                }
                power = next;
            }
            out += term * &power;
        }
        Ok(out)
    }
}

/// One Runge-Kutta step posed as data: current state, step size, tableau,
/// and the polynomial field.
#[derive(Debug, Clone)]
pub struct RKStageProblem {
    pub dynamics: PolynomialDynamics,
    pub state: DVector<f64>,
    pub dt: f64,
    pub tableau: ButcherTableau,
}

impl RKStageProblem {
    pub fn new(
        dynamics: PolynomialDynamics,
        state: DVector<f64>,
        dt: f64,
        tableau: ButcherTableau,
    ) -> Result<Self> {
        if state.len() != dynamics.dim() {
            return Err(Error::StateDimensionMismatch {
                got: state.len(),
                want: dynamics.dim(),
            });
        }
        if !dt.is_finite() || dt < 0.0 {
            return Err(Error::BadTimeMesh {
                horizon: dt,
                n_primary: 1,
                n_secondary: 1,
            });
        }
        Ok(Self {
            dynamics,
            state,
            dt,
            tableau,
        })
    }

    fn n_variables(&self) -> usize {
        (self.tableau.stages() + 1) * self.dynamics.dim()
    }
}

/// Sum-of-squared-residuals objective over the flattened variable vector
/// `[u_next, K_1, ..., K_s]`.
#[derive(Debug, Clone)]
pub struct RkObjective {
    problem: RKStageProblem,
}

/// Builds the residual objective for one step.
pub fn build_rk_residual(problem: &RKStageProblem) -> RkObjective {
    RkObjective {
        problem: problem.clone(),
    }
}

impl RkObjective {
    pub fn n_variables(&self) -> usize {
        self.problem.n_variables()
    }

    pub fn problem(&self) -> &RKStageProblem {
        &self.problem
    }

    fn split(&self, x: &DVector<f64>) -> (DVector<f64>, Vec<DVector<f64>>) {
        let n = self.problem.dynamics.dim();
        let s = self.problem.tableau.stages();
        let u_next = x.rows(0, n).into_owned();
        let stages = (0..s)
            .map(|o| x.rows(n * (o + 1), n).into_owned())
            .collect();
        (u_next, stages)
    }

    /// All residuals at the given variable assignment: `n` update rows
    /// followed by `s * n` stage rows.
    pub fn residuals(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.n_variables() {
            return Err(Error::StateDimensionMismatch {
                got: x.len(),
                want: self.n_variables(),
            });
        }
        let p = &self.problem;
        let n = p.dynamics.dim();
        let s = p.tableau.stages();
        let (u_next, stages) = self.split(x);

        let mut out = DVector::zeros((s + 1) * n);
        let mut update = u_next - &p.state;
        for o in 0..s {
            update -= &stages[o] * (p.dt * p.tableau.b()[o]);
        }
        out.rows_mut(0, n).copy_from(&update);

        for o in 0..s {
            let mut argument = p.state.clone();
            for e in 0..s {
                let coupling = p.tableau.a()[(o, e)];
                if coupling != 0.0 {
                    argument += &stages[e] * (p.dt * coupling);
                }
            }
            let row = &stages[o] - p.dynamics.evaluate(&argument)?;
            out.rows_mut(n * (o + 1), n).copy_from(&row);
        }
        Ok(out)
    }

    pub fn evaluate(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.residuals(x)?.norm_squared())
    }

    /// For affine dynamics the residuals are affine, `r(x) = M x + q`;
    /// returns `(M, q)`.
    pub fn linear_system(&self) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let p = &self.problem;
        if !p.dynamics.is_affine() {
            return Err(Error::NonAffineDynamics);
        }
        let n = p.dynamics.dim();
        let s = p.tableau.stages();
        let rows = (s + 1) * n;
        let cols = self.n_variables();
        let zero_order = p.dynamics.term(0).expect("degree-0 term always present");
        let first_order = p.dynamics.term(1);

        let mut m = DMatrix::zeros(rows, cols);
        let mut q = DVector::zeros(rows);

        // Update rows: u_next - u - dt sum_o b_o K_o.
        for j in 0..n {
            m[(j, j)] = 1.0;
            q[j] = -p.state[j];
            for o in 0..s {
                m[(j, n * (o + 1) + j)] = -p.dt * p.tableau.b()[o];
            }
        }
        // Stage rows: K_o - f(u + dt sum_e A_oe K_e) with f affine.
        for o in 0..s {
            for j in 0..n {
                let row = n * (o + 1) + j;
                m[(row, n * (o + 1) + j)] += 1.0;
                q[row] = -zero_order[(j, 0)];
                if let Some(l1) = first_order {
                    for k in 0..n {
                        q[row] -= l1[(j, k)] * p.state[k];
                        for e in 0..s {
                            let coupling = p.tableau.a()[(o, e)];
                            if coupling != 0.0 {
                                m[(row, n * (e + 1) + k)] -= p.dt * coupling * l1[(j, k)];
                            }
                        }
                    }
                }
            }
        }
        Ok((m, q))
    }
}

/// A minimizing assignment for one step.
#[derive(Debug, Clone)]
pub struct RkSolution {
    pub u_next: DVector<f64>,
    /// Stage values, one column per stage.
    pub stages: DMatrix<f64>,
    pub objective: f64,
}

/// Exact continuous minimizer of the affine residual objective via singular
/// value decomposition.
pub fn solve_rk_least_squares(objective: &RkObjective) -> Result<RkSolution> {
    let (m, q) = objective.linear_system()?;
    let svd = m.svd(true, true);
    let x = svd
        .solve(&(-&q), 1e-13)
        .map_err(|_| Error::SingularMatrix(1e-13))?;
    let x = DVector::from_column_slice(x.as_slice());
    let value = objective.evaluate(&x)?;
    let (u_next, stages) = objective.split(&x);
    let n = objective.problem.dynamics.dim();
    let s = objective.problem.tableau.stages();
    let mut stage_matrix = DMatrix::zeros(n, s);
    for (o, stage) in stages.iter().enumerate() {
        stage_matrix.set_column(o, stage);
    }
    Ok(RkSolution {
        u_next,
        stages: stage_matrix,
        objective: value,
    })
}

/// Binary window for one continuous variable: decoded value
/// `2^-k * B + d` with `B` the unsigned integer read from the bits.
#[derive(Debug, Clone)]
pub struct WindowedEncoding {
    pub scale_exponents: Vec<i32>,
    pub offsets: Vec<f64>,
    pub bits: usize,
}

impl WindowedEncoding {
    /// Windows centered on the given values, each wide enough to cover
    /// `center ± (1 + |center|)`.
    pub fn centered(centers: &[f64], bits: usize) -> Result<Self> {
        if bits == 0 || centers.is_empty() {
            return Err(Error::EmptyInput);
        }
        let levels = (1u64 << bits) as f64 - 1.0;
        let mut scale_exponents = Vec::with_capacity(centers.len());
        let mut offsets = Vec::with_capacity(centers.len());
        for &center in centers {
            let span = 2.0 * (1.0 + center.abs());
            let k = (levels / span).log2().floor() as i32;
            let step = 0.5f64.powi(k);
            scale_exponents.push(k);
            offsets.push(center - step * levels / 2.0);
        }
        Ok(Self {
            scale_exponents,
            offsets,
            bits,
        })
    }

    pub fn n_variables(&self) -> usize {
        self.offsets.len()
    }

    pub fn decode(&self, variable: usize, level: u64) -> f64 {
        0.5f64.powi(self.scale_exponents[variable]) * level as f64 + self.offsets[variable]
    }

    /// Highest representable level.
    pub fn max_level(&self) -> u64 {
        (1u64 << self.bits) - 1
    }
}

/// One window-refinement epoch.
#[derive(Debug, Clone)]
pub struct WindowedEpoch {
    pub values: DVector<f64>,
    /// Per variable: decoded level hit the bottom or top of its window.
    pub saturated: Vec<bool>,
    pub objective: f64,
}

/// Full record of a windowed solve.
#[derive(Debug, Clone)]
pub struct WindowedReport {
    pub epochs: Vec<WindowedEpoch>,
    pub solution: RkSolution,
    pub encoding: WindowedEncoding,
}

/// Solves one affine Runge-Kutta step over binary windows, re-centering
/// every window on its decoded value after each epoch and halving it
/// whenever the decode was interior.
pub fn rk_windowed_solve(
    problem: &RKStageProblem,
    bits: usize,
    epochs: usize,
    method: &SolveMethod,
) -> Result<(DVector<f64>, WindowedReport)> {
    let objective = build_rk_residual(problem);
    if !problem.dynamics.is_affine() {
        return Err(Error::NonAffineDynamics);
    }
    // A priori center: the zero-step-size limit u_next = u, K_o = f(u).
    let f0 = problem.dynamics.evaluate(&problem.state)?;
    let mut centers: Vec<f64> = problem.state.iter().cloned().collect();
    for _ in 0..problem.tableau.stages() {
        centers.extend(f0.iter().cloned());
    }
    let encoding = WindowedEncoding::centered(&centers, bits)?;
    rk_windowed_solve_from(&objective, encoding, epochs, method)
}

/// Windowed solve from an explicit starting encoding; the plain entry point
/// derives one from the zero-step-size guess.
pub fn rk_windowed_solve_from(
    objective: &RkObjective,
    mut encoding: WindowedEncoding,
    epochs: usize,
    method: &SolveMethod,
) -> Result<(DVector<f64>, WindowedReport)> {
    if epochs == 0 {
        return Err(Error::EmptyInput);
    }
    let n_vars = objective.n_variables();
    if encoding.n_variables() != n_vars {
        return Err(Error::DimensionMismatch {
            got: encoding.n_variables(),
            want: n_vars,
        });
    }
    let (m, q) = objective.linear_system()?;
    let bits = encoding.bits;
    let levels = encoding.max_level();

    let mut epoch_reports = Vec::with_capacity(epochs);
    let mut values = DVector::zeros(n_vars);

    for _ in 0..epochs {
        // Residuals are affine in the bits: r = M g + q with
        // g_v = 2^-k_v sum_beta 2^beta bit_(v, beta) + d_v.
        let mut bit_matrix = DMatrix::zeros(m.nrows(), n_vars * bits);
        for r in 0..m.nrows() {
            for v in 0..n_vars {
                let base = m[(r, v)] * 0.5f64.powi(encoding.scale_exponents[v]);
                if base != 0.0 {
                    for beta in 0..bits {
                        bit_matrix[(r, v * bits + beta)] = base * (1u64 << beta) as f64;
                    }
                }
            }
        }
        let offset_vec = DVector::from_column_slice(&encoding.offsets);
        let shift = &m * offset_vec + &q;

        let qubo = bit_matrix.transpose() * &bit_matrix;
        let linear = bit_matrix.transpose() * &shift * 2.0;
        let constant = shift.norm_squared();
        let ising = IsingProblem::from_qubo(&qubo, &linear, constant)?;
        let solution = solve_ising(&ising, method)?;

        let mut saturated = vec![false; n_vars];
        for v in 0..n_vars {
            let mut level = 0u64;
            for beta in 0..bits {
                if solution.spins[v * bits + beta] == 1 {
                    level |= 1 << beta;
                }
            }
            values[v] = encoding.decode(v, level);
            saturated[v] = level == 0 || level == levels;
        }
        let objective_value = objective.evaluate(&values)?;
        epoch_reports.push(WindowedEpoch {
            values: values.clone(),
            saturated: saturated.clone(),
            objective: objective_value,
        });

        // Refine: halve interior windows, re-center all of them.
        for v in 0..n_vars {
            if !saturated[v] {
                encoding.scale_exponents[v] += 1;
            }
            let step = 0.5f64.powi(encoding.scale_exponents[v]);
            encoding.offsets[v] = values[v] - step * levels as f64 / 2.0;
        }
    }

    let n = objective.problem.dynamics.dim();
    let s = objective.problem.tableau.stages();
    let u_next = values.rows(0, n).into_owned();
    let mut stage_matrix = DMatrix::zeros(n, s);
    for o in 0..s {
        stage_matrix.set_column(o, &values.rows(n * (o + 1), n));
    }
    let final_objective = objective.evaluate(&values)?;
    Ok((
        u_next.clone(),
        WindowedReport {
            epochs: epoch_reports,
            solution: RkSolution {
                u_next,
                stages: stage_matrix,
                objective: final_objective,
            },
            encoding,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::ClosedForm;

    fn scalar_decay() -> PolynomialDynamics {
        PolynomialDynamics::linear(DMatrix::from_element(1, 1, -1.0)).unwrap()
    }

    #[test]
    fn tableau_validation_and_flags() {
        assert!(ButcherTableau::rk4().is_explicit());
        assert!(ButcherTableau::explicit_euler().is_explicit());
        assert!(!ButcherTableau::implicit_midpoint().is_explicit());
        assert!(!ButcherTableau::backward_euler().is_explicit());
        for name in ["rk4", "implicit-midpoint", "backward-euler", "explicit-euler"] {
            let t = ButcherTableau::by_name(name).unwrap();
            assert!((t.b().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(matches!(
            ButcherTableau::new(
                "broken",
                DMatrix::zeros(1, 1),
                DVector::from_element(1, 0.9),
                DVector::zeros(1)
            ),
            Err(Error::InconsistentTableau(_))
        ));
    }

    #[test]
    fn zero_step_minimizer_is_the_current_state_and_field() {
        let problem = RKStageProblem::new(
            scalar_decay(),
            DVector::from_element(1, 2.0),
            0.0,
            ButcherTableau::rk4(),
        )
        .unwrap();
        let solution = solve_rk_least_squares(&build_rk_residual(&problem)).unwrap();
        assert!((solution.u_next[0] - 2.0).abs() < 1e-12);
        for o in 0..4 {
            assert!((solution.stages[(0, o)] - (-2.0)).abs() < 1e-12);
        }
        assert!(solution.objective < 1e-20);
    }

    #[test]
    fn rk4_least_squares_matches_the_classical_step() {
        let problem = RKStageProblem::new(
            scalar_decay(),
            DVector::from_element(1, 1.0),
            0.1,
            ButcherTableau::rk4(),
        )
        .unwrap();
        let solution = solve_rk_least_squares(&build_rk_residual(&problem)).unwrap();
        assert!(
            (solution.u_next[0] - 0.9048375).abs() < 1e-10,
            "{}",
            solution.u_next[0]
        );
        assert!(solution.objective < 1e-18);
    }

    #[test]
    fn implicit_midpoint_least_squares_matches_the_closed_form() {
        let dt = 0.1;
        let problem = RKStageProblem::new(
            scalar_decay(),
            DVector::from_element(1, 1.0),
            dt,
            ButcherTableau::implicit_midpoint(),
        )
        .unwrap();
        let solution = solve_rk_least_squares(&build_rk_residual(&problem)).unwrap();
        let reference = ClosedForm::ImplicitMidpointStep
            .evaluate(&[dt])
            .unwrap();
        assert!((solution.u_next[0] - reference).abs() < 1e-12);
    }

    #[test]
    fn multidimensional_affine_step_matches_direct_evaluation() {
        // Explicit Euler on f(u) = b + M u has the closed update
        // u + dt f(u); checks the vector-valued assembly end to end.
        let matrix = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let constant = DVector::from_column_slice(&[0.3, -0.2]);
        let dynamics = PolynomialDynamics::affine(constant.clone(), matrix.clone()).unwrap();
        let u = DVector::from_column_slice(&[1.0, 2.0]);
        let dt = 0.05;
        let problem =
            RKStageProblem::new(dynamics, u.clone(), dt, ButcherTableau::explicit_euler())
                .unwrap();
        let solution = solve_rk_least_squares(&build_rk_residual(&problem)).unwrap();
        let expected = &u + (&constant + &matrix * &u) * dt;
        assert!((solution.u_next - expected).norm() < 1e-12);
    }

    #[test]
    fn quadratic_dynamics_evaluate_but_refuse_the_linear_path() {
        // f(u) = u^2 on a scalar: degree-2 term is a 1 x 1 block.
        let dynamics = PolynomialDynamics::new(
            1,
            vec![
                DMatrix::zeros(1, 1),
                DMatrix::zeros(1, 1),
                DMatrix::from_element(1, 1, 1.0),
            ],
        )
        .unwrap();
        assert_eq!(dynamics.degree(), 2);
        let value = dynamics.evaluate(&DVector::from_element(1, 3.0)).unwrap();
        assert!((value[0] - 9.0).abs() < 1e-12);

        let problem = RKStageProblem::new(
            dynamics,
            DVector::from_element(1, 1.0),
            0.1,
            ButcherTableau::explicit_euler(),
        )
        .unwrap();
        assert!(matches!(
            build_rk_residual(&problem).linear_system(),
            Err(Error::NonAffineDynamics)
        ));
        // The nonlinear objective is still directly evaluable.
        let x = DVector::from_column_slice(&[1.1, 1.0]);
        let objective = build_rk_residual(&problem);
        let residuals = objective.residuals(&x).unwrap();
        assert!((residuals[0] - (1.1 - 1.0 - 0.1)).abs() < 1e-12);
        assert!((residuals[1] - (1.0 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn stationary_dynamics_converge_onto_the_state() {
        let dynamics = PolynomialDynamics::linear(DMatrix::zeros(1, 1)).unwrap();
        let problem = RKStageProblem::new(
            dynamics,
            DVector::from_element(1, 0.7),
            0.1,
            ButcherTableau::explicit_euler(),
        )
        .unwrap();
        let (u_next, report) =
            rk_windowed_solve(&problem, 4, 20, &SolveMethod::Exhaustive).unwrap();
        assert!((u_next[0] - 0.7).abs() < 1e-5, "{}", u_next[0]);
        assert!(report.epochs.len() == 20);
    }

    #[test]
    fn windowed_implicit_midpoint_closes_on_the_continuous_answer() {
        let dt = 0.1;
        let problem = RKStageProblem::new(
            scalar_decay(),
            DVector::from_element(1, 1.0),
            dt,
            ButcherTableau::implicit_midpoint(),
        )
        .unwrap();
        let (u_next, report) =
            rk_windowed_solve(&problem, 6, 10, &SolveMethod::Exhaustive).unwrap();
        let reference = ClosedForm::ImplicitMidpointStep.evaluate(&[dt]).unwrap();
        assert!(
            (u_next[0] - reference).abs() <= 1e-3,
            "{} vs {reference}",
            u_next[0]
        );
        // Objectives should improve as windows tighten.
        let first = report.epochs.first().unwrap().objective;
        let last = report.epochs.last().unwrap().objective;
        assert!(last <= first);
    }

    #[test]
    fn out_of_window_solutions_flag_saturation() {
        let problem = RKStageProblem::new(
            scalar_decay(),
            DVector::from_element(1, 1.0),
            0.1,
            ButcherTableau::implicit_midpoint(),
        )
        .unwrap();
        let objective = build_rk_residual(&problem);
        // Both windows sit far below the solution.
        let encoding = WindowedEncoding {
            scale_exponents: vec![8, 8],
            offsets: vec![-3.0, -3.0],
            bits: 4,
        };
        let (_, report) =
            rk_windowed_solve_from(&objective, encoding, 1, &SolveMethod::Exhaustive).unwrap();
        assert!(report.epochs[0].saturated.iter().all(|&s| s));
    }

    #[test]
    fn windowed_solve_requires_affine_dynamics() {
        let dynamics = PolynomialDynamics::new(
            1,
            vec![
                DMatrix::zeros(1, 1),
                DMatrix::zeros(1, 1),
                DMatrix::from_element(1, 1, 1.0),
            ],
        )
        .unwrap();
        let problem = RKStageProblem::new(
            dynamics,
            DVector::from_element(1, 1.0),
            0.1,
            ButcherTableau::explicit_euler(),
        )
        .unwrap();
        assert!(matches!(
            rk_windowed_solve(&problem, 4, 3, &SolveMethod::Exhaustive),
            Err(Error::NonAffineDynamics)
        ));
    }
}
