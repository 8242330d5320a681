//! Spin encodings, Ising objectives, and classical solvers standing in for
//! annealing hardware.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::loss::ContinuousQuadraticLoss;
use crate::error::{Error, Result};

/// Exhaustive enumeration refuses problems beyond this many spins.
pub const EXHAUSTIVE_SPIN_CAP: usize = 24;

/// Fixed-point spin encoding of continuous weights:
/// `w_i = c_i + s_i * sum over alpha of sigma_(i, alpha) / 2^alpha`.
#[derive(Debug, Clone)]
pub struct SpinEncoding {
    centers: Vec<f64>,
    scales: Vec<f64>,
    n_spins: usize,
}

impl SpinEncoding {
    pub fn new(centers: Vec<f64>, scales: Vec<f64>, n_spins: usize) -> Result<Self> {
        if centers.is_empty() || centers.len() != scales.len() {
            return Err(Error::DimensionMismatch {
                got: scales.len(),
                want: centers.len().max(1),
            });
        }
        if n_spins == 0 {
            return Err(Error::DimensionMismatch { got: 0, want: 1 });
        }
        for &s in &scales {
            if !(s > 0.0) {
                return Err(Error::NonPositiveScale(s));
            }
        }
        Ok(Self {
            centers,
            scales,
            n_spins,
        })
    }

    /// Same center and scale for every weight.
    pub fn uniform(n_weights: usize, center: f64, scale: f64, n_spins: usize) -> Result<Self> {
        Self::new(vec![center; n_weights], vec![scale; n_weights], n_spins)
    }

    pub fn n_weights(&self) -> usize {
        self.centers.len()
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn total_spins(&self) -> usize {
        self.centers.len() * self.n_spins
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Extreme decodable values for one weight:
    /// `c -/+ s (1 - 2^-n_spins)`.
    pub fn window(&self, weight: usize) -> (f64, f64) {
        let reach = self.scales[weight] * (1.0 - 0.5f64.powi(self.n_spins as i32));
        (self.centers[weight] - reach, self.centers[weight] + reach)
    }

    /// Spin index of `(weight, alpha)` with `alpha` in `1..=n_spins`;
    /// weight-major ordering.
    pub fn spin_index(&self, weight: usize, alpha: usize) -> usize {
        weight * self.n_spins + (alpha - 1)
    }

    pub fn decode(&self, sigma: &[i8]) -> Result<DVector<f64>> {
        if sigma.len() != self.total_spins() {
            return Err(Error::SpinCountMismatch {
                got: sigma.len(),
                want: self.total_spins(),
            });
        }
        for (i, &s) in sigma.iter().enumerate() {
            if s != 1 && s != -1 {
                return Err(Error::BadSpinValue(i));
            }
        }
        let mut w = DVector::zeros(self.n_weights());
        for i in 0..self.n_weights() {
            let mut acc = 0.0;
            for alpha in 1..=self.n_spins {
                acc += f64::from(sigma[self.spin_index(i, alpha)]) * 0.5f64.powi(alpha as i32);
            }
            w[i] = self.centers[i] + self.scales[i] * acc;
        }
        Ok(w)
    }

    /// New encoding centered on `centers` with every scale multiplied by
    /// `shrink`.
    pub fn recentered(&self, centers: &[f64], shrink: f64) -> Result<Self> {
        if centers.len() != self.n_weights() {
            return Err(Error::DimensionMismatch {
                got: centers.len(),
                want: self.n_weights(),
            });
        }
        if !(shrink > 0.0 && shrink < 1.0) {
            return Err(Error::ShrinkOutOfRange(shrink));
        }
        Self::new(
            centers.to_vec(),
            self.scales.iter().map(|&s| s * shrink).collect(),
            self.n_spins,
        )
    }
}

/// Energy `E(sigma) = sigma' J sigma + h' sigma + constant` over spins
/// `sigma in {-1, +1}^n`, with `J` symmetric and zero on the diagonal
/// (diagonal terms are constants since `sigma^2 = 1`).
#[derive(Debug, Clone)]
pub struct IsingProblem {
    couplings: DMatrix<f64>,
    fields: DVector<f64>,
    constant: f64,
}

impl IsingProblem {
    /// Symmetrizes the coupling matrix and folds its diagonal into the
    /// constant.
    pub fn new(couplings: DMatrix<f64>, fields: DVector<f64>, constant: f64) -> Result<Self> {
        let n = fields.len();
        if couplings.nrows() != n || couplings.ncols() != n {
            return Err(Error::DimensionMismatch {
                got: couplings.nrows().max(couplings.ncols()),
                want: n,
            });
        }
        let mut sym = DMatrix::zeros(n, n);
        let mut folded = constant;
        for i in 0..n {
            folded += couplings[(i, i)];
            for j in 0..n {
                if i != j {
                    sym[(i, j)] = 0.5 * (couplings[(i, j)] + couplings[(j, i)]);
                }
            }
        }
        Ok(Self {
            couplings: sym,
            fields,
            constant: folded,
        })
    }

    pub fn n_spins(&self) -> usize {
        self.fields.len()
    }

    pub fn couplings(&self) -> &DMatrix<f64> {
        &self.couplings
    }

    pub fn fields(&self) -> &DVector<f64> {
        &self.fields
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn energy(&self, sigma: &[i8]) -> Result<f64> {
        let n = self.n_spins();
        if sigma.len() != n {
            return Err(Error::SpinCountMismatch {
                got: sigma.len(),
                want: n,
            });
        }
        let mut e = self.constant;
        for i in 0..n {
            let si = f64::from(sigma[i]);
            e += self.fields[i] * si;
            for j in 0..n {
                e += si * self.couplings[(i, j)] * f64::from(sigma[j]);
            }
        }
        Ok(e)
    }

    /// Equivalent QUBO `E(b) = b' Q b + linear' b + constant` over bits
    /// `b = (sigma + 1) / 2`.
    pub fn to_qubo(&self) -> (DMatrix<f64>, DVector<f64>, f64) {
        let n = self.n_spins();
        let q = &self.couplings * 4.0;
        let mut linear = DVector::zeros(n);
        let mut constant = self.constant;
        for i in 0..n {
            let row_sum: f64 = (0..n).map(|j| self.couplings[(i, j)]).sum();
            linear[i] = 2.0 * self.fields[i] - 4.0 * row_sum;
            constant += row_sum - self.fields[i];
        }
        (q, linear, constant)
    }

    /// Builds the Ising form of a QUBO objective via `sigma = 2 b - 1`.
    pub fn from_qubo(q: &DMatrix<f64>, linear: &DVector<f64>, constant: f64) -> Result<Self> {
        let n = linear.len();
        if q.nrows() != n || q.ncols() != n {
            return Err(Error::DimensionMismatch {
                got: q.nrows().max(q.ncols()),
                want: n,
            });
        }
        // b' Q b = (1/4)(sigma + 1)' Q (sigma + 1); the diagonal of Q has
        // b^2 = b handled automatically by the substitution.
        let mut couplings = DMatrix::zeros(n, n);
        let mut fields = DVector::zeros(n);
        let mut folded = constant;
        for i in 0..n {
            fields[i] += 0.5 * linear[i];
            folded += 0.5 * linear[i];
            for j in 0..n {
                let avg = 0.25 * (q[(i, j)] + q[(j, i)]) * 0.5;
                // avg = (symmetrized Q)_(ij) / 4.
                couplings[(i, j)] += avg;
                fields[i] += avg;
                fields[j] += avg;
                folded += avg;
            }
        }
        Self::new(couplings, fields, folded)
    }

    /// Plain-text edge list: `i j J_ij` lines for couplings, `i h_i` lines
    /// for fields.
    pub fn to_edge_list_text(&self) -> String {
        let n = self.n_spins();
        let mut out = String::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.couplings[(i, j)] != 0.0 {
                    out.push_str(&format!("{i} {j} {:.16e}\n", self.couplings[(i, j)]));
                }
            }
        }
        for i in 0..n {
            if self.fields[i] != 0.0 {
                out.push_str(&format!("{i} {:.16e}\n", self.fields[i]));
            }
        }
        out
    }
}

/// Substitutes the spin encoding into a quadratic loss, producing an Ising
/// energy that equals the loss at every decoded point.
pub fn spin_encode(loss: &ContinuousQuadraticLoss, enc: &SpinEncoding) -> Result<IsingProblem> {
    let n_weights = loss.weight_count();
    if enc.n_weights() != n_weights {
        return Err(Error::DimensionMismatch {
            got: enc.n_weights(),
            want: n_weights,
        });
    }
    let n_total = enc.total_spins();

    // w = c + T sigma with T[(i, (i, alpha))] = s_i 2^-alpha; substituting
    // into w' J w + h' w + k gives sigma' (T' J T) sigma
    // + (2 J c + h)' T sigma + (c' J c + h' c + k).
    let mut t = DMatrix::zeros(n_weights, n_total);
    for i in 0..n_weights {
        for alpha in 1..=enc.n_spins() {
            t[(i, enc.spin_index(i, alpha))] = enc.scales()[i] * 0.5f64.powi(alpha as i32);
        }
    }
    let j = loss.quadratic_matrix();
    let h = loss.linear_vector();
    let c = DVector::from_column_slice(enc.centers());

    let couplings = t.transpose() * j * &t;
    let fields = t.transpose() * (j * &c * 2.0 + h);
    let constant = (c.transpose() * j * &c)[(0, 0)] + h.dot(&c) + loss.constant();

    IsingProblem::new(couplings, fields, constant)
}

/// How to minimize an Ising objective.
#[derive(Debug, Clone)]
pub enum SolveMethod {
    /// Gray-code walk over all spin strings; exact but capped.
    Exhaustive,
    SimulatedAnnealing(SaOptions),
}

/// Seeded simulated-annealing schedule: geometric temperature ladder,
/// single-spin Metropolis sweeps, best energy kept across reads.
#[derive(Debug, Clone)]
pub struct SaOptions {
    pub reads: usize,
    pub sweeps: usize,
    pub t_initial: f64,
    pub t_final: f64,
    pub seed: u64,
}

impl Default for SaOptions {
    fn default() -> Self {
        Self {
            reads: 32,
            sweeps: 256,
            t_initial: 10.0,
            t_final: 0.05,
            seed: 0,
        }
    }
}

/// A minimizing (or best-found) spin string and its energy.
#[derive(Debug, Clone)]
pub struct IsingSolution {
    pub spins: Vec<i8>,
    pub energy: f64,
}

pub fn solve_ising(problem: &IsingProblem, method: &SolveMethod) -> Result<IsingSolution> {
    match method {
        SolveMethod::Exhaustive => solve_exhaustive(problem),
        SolveMethod::SimulatedAnnealing(options) => solve_annealed(problem, options),
    }
}

/// Local fields `l_i = sum over j of J_ij sigma_j`, maintained
/// incrementally so each flip costs O(n).
fn local_fields(problem: &IsingProblem, sigma: &[i8]) -> Vec<f64> {
    let n = problem.n_spins();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| problem.couplings[(i, j)] * f64::from(sigma[j]))
                .sum()
        })
        .collect()
}

/// Energy change from flipping spin `i`.
fn flip_delta(problem: &IsingProblem, sigma: &[i8], local: &[f64], i: usize) -> f64 {
    -2.0 * f64::from(sigma[i]) * (2.0 * local[i] + problem.fields[i])
}

fn apply_flip(problem: &IsingProblem, sigma: &mut [i8], local: &mut [f64], i: usize) {
    sigma[i] = -sigma[i];
    let delta = 2.0 * f64::from(sigma[i]);
    for j in 0..sigma.len() {
        if j != i {
            local[j] += delta * problem.couplings[(j, i)];
        }
    }
}

fn solve_exhaustive(problem: &IsingProblem) -> Result<IsingSolution> {
    let n = problem.n_spins();
    if n > EXHAUSTIVE_SPIN_CAP {
        return Err(Error::SpinCapExceeded {
            requested: n,
            cap: EXHAUSTIVE_SPIN_CAP,
        });
    }
    let mut sigma = vec![1i8; n];
    let mut local = local_fields(problem, &sigma);
    let mut energy = problem.energy(&sigma)?;
    let mut best = sigma.clone();
    let mut best_energy = energy;

    // Gray-code walk: step t flips bit trailing_zeros(t), visiting every
    // string exactly once with one flip per step.
    for t in 1u64..(1u64 << n) {
        let i = t.trailing_zeros() as usize;
        energy += flip_delta(problem, &sigma, &local, i);
        apply_flip(problem, &mut sigma, &mut local, i);
        if energy < best_energy {
            best_energy = energy;
            best.copy_from_slice(&sigma);
        }
    }
    Ok(IsingSolution {
        spins: best,
        energy: best_energy,
    })
}

fn solve_annealed(problem: &IsingProblem, options: &SaOptions) -> Result<IsingSolution> {
    if options.reads == 0 || options.sweeps == 0 {
        return Err(Error::NoSamples);
    }
    if !(options.t_initial > 0.0) || !(options.t_final > 0.0) {
        return Err(Error::NonPositiveScale(options.t_initial.min(options.t_final)));
    }
    let n = problem.n_spins();
    let ratio = options.t_final / options.t_initial;
    let mut best: Option<IsingSolution> = None;

    for read in 0..options.reads {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed.wrapping_add(read as u64));
        let mut sigma: Vec<i8> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        let mut local = local_fields(problem, &sigma);
        let mut energy = problem.energy(&sigma)?;
        let mut read_best = sigma.clone();
        let mut read_best_energy = energy;

        for sweep in 0..options.sweeps {
            let fraction = if options.sweeps > 1 {
                sweep as f64 / (options.sweeps - 1) as f64
            } else {
                0.0
            };
            let temperature = options.t_initial * ratio.powf(fraction);
            for i in 0..n {
                let delta = flip_delta(problem, &sigma, &local, i);
                if delta <= 0.0 || rng.gen::<f64>() < (-delta / temperature).exp() {
                    energy += delta;
                    apply_flip(problem, &mut sigma, &mut local, i);
                    if energy < read_best_energy {
                        read_best_energy = energy;
                        read_best.copy_from_slice(&sigma);
                    }
                }
            }
        }
        if best.as_ref().map_or(true, |b| read_best_energy < b.energy) {
            best = Some(IsingSolution {
                spins: read_best,
                energy: read_best_energy,
            });
        }
    }
    Ok(best.expect("at least one read"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anneal::basis::{BasisSet, Polynomial};
    use crate::anneal::loss::{assemble_loss, Condition, EquationTerm, FunctionalResidual};

    #[test]
    fn two_bit_decode_hits_the_documented_values() {
        let enc = SpinEncoding::uniform(1, 0.0, 1.0, 2).unwrap();
        assert_eq!(enc.decode(&[1, 1]).unwrap()[0], 0.75);
        assert_eq!(enc.decode(&[-1, -1]).unwrap()[0], -0.75);
        let (lo, hi) = enc.window(0);
        assert_eq!((lo, hi), (-0.75, 0.75));
    }

    #[test]
    fn single_bit_window_spans_plus_minus_one() {
        let enc = SpinEncoding::uniform(1, 0.0, 2.0, 1).unwrap();
        assert_eq!(enc.decode(&[1]).unwrap()[0], 1.0);
        assert_eq!(enc.decode(&[-1]).unwrap()[0], -1.0);
    }

    #[test]
    fn encoding_validation() {
        assert!(matches!(
            SpinEncoding::uniform(2, 0.0, 0.0, 3),
            Err(Error::NonPositiveScale(_))
        ));
        let enc = SpinEncoding::uniform(2, 0.0, 1.0, 2).unwrap();
        assert!(matches!(
            enc.decode(&[1, 1, 1]),
            Err(Error::SpinCountMismatch { .. })
        ));
        assert!(matches!(
            enc.decode(&[1, 1, 1, 0]),
            Err(Error::BadSpinValue(3))
        ));
    }

    #[test]
    fn spin_energy_equals_decoded_loss_exhaustively() {
        // Random-ish 3-weight quadratic assembled from conditions, three
        // spins per weight: enumerate all 512 strings.
        let condition = Condition {
            terms: vec![
                EquationTerm {
                    field: 0,
                    derivative_order: 0,
                    coefficient: Polynomial::new(vec![0.3, 1.1]),
                },
                EquationTerm {
                    field: 0,
                    derivative_order: 1,
                    coefficient: Polynomial::constant(-0.7),
                },
            ],
            inhomogeneity: Polynomial::new(vec![0.4, -0.9]),
            domain: (0.0, 1.0),
            samples: vec![0.1, 0.5, 0.9],
        };
        let problem = FunctionalResidual::new(1, vec![condition]).unwrap();
        let basis = BasisSet::monomial(2);
        let loss = assemble_loss(&problem, &basis).unwrap();
        let enc =
            SpinEncoding::new(vec![0.2, -0.4, 0.1], vec![1.0, 0.5, 2.0], 3).unwrap();
        let ising = spin_encode(&loss, &enc).unwrap();

        let n = enc.total_spins();
        for pattern in 0..(1u32 << n) {
            let sigma: Vec<i8> = (0..n)
                .map(|b| if pattern >> b & 1 == 1 { 1 } else { -1 })
                .collect();
            let energy = ising.energy(&sigma).unwrap();
            let w = enc.decode(&sigma).unwrap();
            let loss_value = loss.evaluate(w.as_slice()).unwrap();
            assert!(
                (energy - loss_value).abs() < 1e-10,
                "pattern {pattern}: {energy} vs {loss_value}"
            );
        }
        // Couplings are symmetric with an empty diagonal.
        for i in 0..n {
            assert_eq!(ising.couplings()[(i, i)], 0.0);
            for j in 0..n {
                assert_eq!(ising.couplings()[(i, j)], ising.couplings()[(j, i)]);
            }
        }
    }

    #[test]
    fn single_spin_field_sets_the_sign() {
        let problem = IsingProblem::new(
            DMatrix::zeros(1, 1),
            DVector::from_column_slice(&[2.0]),
            0.0,
        )
        .unwrap();
        let solution = solve_ising(&problem, &SolveMethod::Exhaustive).unwrap();
        assert_eq!(solution.spins, vec![-1]);
        assert_eq!(solution.energy, -2.0);
    }

    #[test]
    fn ferromagnetic_pair_aligns() {
        let mut j = DMatrix::zeros(2, 2);
        j[(0, 1)] = -1.0;
        j[(1, 0)] = -1.0;
        let problem = IsingProblem::new(j, DVector::zeros(2), 0.0).unwrap();
        let solution = solve_ising(&problem, &SolveMethod::Exhaustive).unwrap();
        assert_eq!(solution.spins[0], solution.spins[1]);
        assert_eq!(solution.energy, -2.0);
    }

    #[test]
    fn exhaustive_cap_is_enforced() {
        let n = EXHAUSTIVE_SPIN_CAP + 1;
        let problem =
            IsingProblem::new(DMatrix::zeros(n, n), DVector::zeros(n), 0.0).unwrap();
        assert!(matches!(
            solve_ising(&problem, &SolveMethod::Exhaustive),
            Err(Error::SpinCapExceeded { .. })
        ));
    }

    fn random_instance(seed: u64, n: usize) -> IsingProblem {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut j = DMatrix::zeros(n, n);
        for i in 0..n {
            for k in i + 1..n {
                let v = rng.gen::<f64>() * 2.0 - 1.0;
                j[(i, k)] = v;
                j[(k, i)] = v;
            }
        }
        let h = DVector::from_fn(n, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        IsingProblem::new(j, h, 0.0).unwrap()
    }

    #[test]
    fn annealing_matches_exhaustive_on_random_instances() {
        let mut hits = 0;
        let trials = 25;
        for trial in 0..trials {
            let problem = random_instance(1000 + trial, 16);
            let exact = solve_ising(&problem, &SolveMethod::Exhaustive).unwrap();
            let sa = solve_ising(
                &problem,
                &SolveMethod::SimulatedAnnealing(SaOptions {
                    seed: 77 + trial,
                    ..SaOptions::default()
                }),
            )
            .unwrap();
            assert!(sa.energy >= exact.energy - 1e-9);
            if (sa.energy - exact.energy).abs() < 1e-9 {
                hits += 1;
            }
        }
        assert!(hits >= trials - 1, "SA found {hits}/{trials} optima");
    }

    #[test]
    fn annealing_is_deterministic_per_seed() {
        let problem = random_instance(5, 12);
        let options = SaOptions {
            seed: 42,
            ..SaOptions::default()
        };
        let a = solve_ising(&problem, &SolveMethod::SimulatedAnnealing(options.clone())).unwrap();
        let b = solve_ising(&problem, &SolveMethod::SimulatedAnnealing(options)).unwrap();
        assert_eq!(a.spins, b.spins);
        assert_eq!(a.energy.to_bits(), b.energy.to_bits());
    }

    #[test]
    fn qubo_round_trip_preserves_energies() {
        let problem = random_instance(9, 6);
        let (q, linear, constant) = problem.to_qubo();
        let back = IsingProblem::from_qubo(&q, &linear, constant).unwrap();
        for pattern in 0..(1u32 << 6) {
            let sigma: Vec<i8> = (0..6)
                .map(|b| if pattern >> b & 1 == 1 { 1 } else { -1 })
                .collect();
            let direct = problem.energy(&sigma).unwrap();
            let round = back.energy(&sigma).unwrap();
            assert!((direct - round).abs() < 1e-10);
            // The QUBO form evaluated at b = (sigma + 1) / 2 agrees too.
            let b = DVector::from_fn(6, |i, _| f64::from(sigma[i] + 1) / 2.0);
            let qubo_value = (b.transpose() * &q * &b)[(0, 0)] + linear.dot(&b) + constant;
            assert!((direct - qubo_value).abs() < 1e-10);
        }
    }

    #[test]
    fn edge_list_has_one_line_per_nonzero() {
        let mut j = DMatrix::zeros(3, 3);
        j[(0, 1)] = 0.5;
        j[(1, 0)] = 0.5;
        let h = DVector::from_column_slice(&[0.0, -1.0, 0.0]);
        let problem = IsingProblem::new(j, h, 0.0).unwrap();
        let text = problem.to_edge_list_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("0 1 "));
        assert!(lines[1].starts_with("1 "));
    }
}
