//! One-dimensional two-velocity lattice Boltzmann transport, run either
//! classically on distribution fields or as a quantum circuit on a dense
//! statevector.
//!
//! The lattice carries a scalar concentration `phi` on `M` periodic sites.
//! Each site splits its mass between a right-moving and a left-moving
//! population according to an advection speed `u`; one step is a local
//! collision (relaxation toward that equilibrium split) followed by streaming
//! of each population to its neighbour. On the quantum side the two
//! populations live in a velocity qubit, the site index in a position
//! register, and the non-unitary collision is carried out as an even mixture
//! of two unitaries selected by an ancilla — a postselection on the ancilla
//! then projects onto the relaxed distribution. A second postselection during
//! readout collapses the two populations back into the concentration field.
//!
//! Success probabilities of both postselections are reported per step; the
//! driver reinitializes a fresh state from the previous output field every
//! step, so reported norms describe a single-shot pipeline rather than an
//! amortized one.

use nalgebra::Complex;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::statevector::{hadamard, RegisterLayout, Statevector, UnitaryOp};

/// Parameters of the two-velocity lattice: site count, advection speed, the
/// squared lattice sound speed entering the equilibrium split, and the
/// collision (relaxation) rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct D1Q2Params {
    sites: usize,
    speed: f64,
    sound_speed_sq: f64,
    collision_rate: f64,
}

impl D1Q2Params {
    /// A lattice of `sites` periodic cells advecting at speed `speed`, with
    /// the squared sound speed fixed at 1 and the collision rate at 1 (full
    /// relaxation to equilibrium each step, the regime the unitary collision
    /// split reproduces).
    ///
    /// `sites` must be a power of two of at least 2 so the position register
    /// fills its qubits exactly, and `|speed|` may not exceed the squared
    /// sound speed or the equilibrium weights would leave `[0, 1]`.
    pub fn new(sites: usize, speed: f64) -> Result<Self> {
        if sites < 2 || !sites.is_power_of_two() {
            return Err(Error::BadLatticeSize(sites));
        }
        let params = Self {
            sites,
            speed,
            sound_speed_sq: 1.0,
            collision_rate: 1.0,
        };
        params.check_speed()?;
        Ok(params)
    }

    /// Replaces the squared sound speed (default 1). The advection speed is
    /// re-validated against the new bound.
    pub fn with_sound_speed_sq(mut self, sound_speed_sq: f64) -> Result<Self> {
        if !(sound_speed_sq > 0.0) {
            return Err(Error::NonPositiveScale(sound_speed_sq));
        }
        self.sound_speed_sq = sound_speed_sq;
        self.check_speed()?;
        Ok(self)
    }

    /// Replaces the collision rate (default 1). Only the classical
    /// distribution-level step honours a rate away from 1; the unitary
    /// collision refuses it. Rates in `(0, 2)` are the stable range.
    pub fn with_collision_rate(mut self, collision_rate: f64) -> Result<Self> {
        if !(collision_rate > 0.0) {
            return Err(Error::NonPositiveScale(collision_rate));
        }
        self.collision_rate = collision_rate;
        Ok(self)
    }

    fn check_speed(&self) -> Result<()> {
        if self.speed.abs() > self.sound_speed_sq {
            return Err(Error::SpeedOutOfRange {
                u: self.speed.abs(),
                bound: self.sound_speed_sq,
            });
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn sound_speed_sq(&self) -> f64 {
        self.sound_speed_sq
    }

    pub fn collision_rate(&self) -> f64 {
        self.collision_rate
    }

    /// Number of qubits in the position register, `log2(sites)`.
    pub fn site_bits(&self) -> usize {
        self.sites.trailing_zeros() as usize
    }

    /// Equilibrium weight of the right-moving population,
    /// `(1 + u / c_s^2) / 2`.
    pub fn weight_right(&self) -> f64 {
        0.5 * (1.0 + self.speed / self.sound_speed_sq)
    }

    /// Equilibrium weight of the left-moving population,
    /// `(1 - u / c_s^2) / 2`.
    pub fn weight_left(&self) -> f64 {
        0.5 * (1.0 - self.speed / self.sound_speed_sq)
    }
}

/// A scalar concentration field on the lattice sites.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    values: Vec<f64>,
}

impl LatticeField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Self { values })
    }

    pub fn uniform(sites: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; sites])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Total mass, the sum over sites.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Largest absolute per-site difference against another field of the same
    /// length.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::DistributionSizeMismatch {
                got: other.len(),
                want: self.len(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Velocity-resolved populations: entries `0..M` hold the right movers,
/// entries `M..2M` the left movers, so index `v * M + x` addresses population
/// `v` at site `x` — the same ordering the velocity and position registers
/// produce on the quantum side.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionVector {
    populations: Vec<f64>,
    sites: usize,
}

impl DistributionVector {
    pub fn new(populations: Vec<f64>, sites: usize) -> Result<Self> {
        if populations.len() != 2 * sites {
            return Err(Error::DistributionSizeMismatch {
                got: populations.len(),
                want: 2 * sites,
            });
        }
        Ok(Self { populations, sites })
    }

    /// The equilibrium split of a concentration field: right movers weighted
    /// by `weight_right`, left movers by `weight_left`.
    pub fn equilibrium(field: &LatticeField, params: &D1Q2Params) -> Result<Self> {
        Self::check_field(field, params)?;
        let (wr, wl) = (params.weight_right(), params.weight_left());
        let mut populations = Vec::with_capacity(2 * field.len());
        populations.extend(field.values().iter().map(|phi| wr * phi));
        populations.extend(field.values().iter().map(|phi| wl * phi));
        Self::new(populations, field.len())
    }

    /// The field copied into both populations, `[phi; phi]`. This is the
    /// state the quantum pipeline encodes: the collision operator maps it to
    /// the equilibrium split.
    pub fn duplicated(field: &LatticeField, params: &D1Q2Params) -> Result<Self> {
        Self::check_field(field, params)?;
        let mut populations = Vec::with_capacity(2 * field.len());
        populations.extend_from_slice(field.values());
        populations.extend_from_slice(field.values());
        Self::new(populations, field.len())
    }

    fn check_field(field: &LatticeField, params: &D1Q2Params) -> Result<()> {
        if field.len() != params.sites() {
            return Err(Error::DistributionSizeMismatch {
                got: 2 * field.len(),
                want: 2 * params.sites(),
            });
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    pub fn get(&self, velocity: usize, site: usize) -> f64 {
        self.populations[velocity * self.sites + site]
    }

    /// Euclidean norm over all populations.
    pub fn norm(&self) -> f64 {
        self.populations.iter().map(|f| f * f).sum::<f64>().sqrt()
    }

    /// Zeroth moment: the concentration field recovered by summing the two
    /// populations at each site.
    pub fn moments(&self) -> LatticeField {
        let values = (0..self.sites)
            .map(|x| self.populations[x] + self.populations[self.sites + x])
            .collect();
        LatticeField { values }
    }
}

/// One classical lattice Boltzmann step at the distribution level: relax each
/// population toward the equilibrium split of its own zeroth moment by the
/// collision rate, then stream right movers one site up and left movers one
/// site down with periodic wrap.
pub fn classical_distribution_step(
    dist: &DistributionVector,
    params: &D1Q2Params,
) -> Result<DistributionVector> {
    if dist.sites() != params.sites() {
        return Err(Error::DistributionSizeMismatch {
            got: 2 * dist.sites(),
            want: 2 * params.sites(),
        });
    }
    let m = params.sites();
    let omega = params.collision_rate();
    let (wr, wl) = (params.weight_right(), params.weight_left());
    let phi = dist.moments();

    let mut collided = vec![0.0; 2 * m];
    for x in 0..m {
        let eq_r = wr * phi.values()[x];
        let eq_l = wl * phi.values()[x];
        collided[x] = dist.get(0, x) + omega * (eq_r - dist.get(0, x));
        collided[m + x] = dist.get(1, x) + omega * (eq_l - dist.get(1, x));
    }

    let mut streamed = vec![0.0; 2 * m];
    for x in 0..m {
        streamed[(x + 1) % m] = collided[x];
        streamed[m + (x + m - 1) % m] = collided[m + x];
    }
    DistributionVector::new(streamed, m)
}

/// One classical step at the field level. With the collision rate at 1 the
/// post-collision populations are exactly the equilibrium split regardless of
/// how the incoming field was distributed, so the field update is
/// `phi'[j] = w_r * phi[j-1] + w_l * phi[j+1]` with periodic wrap — the
/// reference the quantum pipeline is checked against. Total mass is conserved
/// exactly because the two weights sum to 1.
///
/// For rates away from 1 the step starts from the equilibrium split of the
/// given field, which keeps it well-defined but makes the rate drop out.
pub fn classical_lbm_step(field: &LatticeField, params: &D1Q2Params) -> Result<LatticeField> {
    let start = DistributionVector::equilibrium(field, params)?;
    Ok(classical_distribution_step(&start, params)?.moments())
}

/// The register layout shared by every circuit in this module: one ancilla
/// qubit on top, then a combined velocity-and-position register `q` whose top
/// bit selects the population and whose remaining `log2(sites)` bits hold the
/// site index. A basis index therefore reads `a * 2M + v * M + x`.
fn lattice_layout(site_bits: usize) -> Result<RegisterLayout> {
    RegisterLayout::new(&[("ancilla", 1), ("q", 1 + site_bits)])
}

/// Loads a distribution vector into the `a = 0` block of a fresh state,
/// normalized; returns the state together with the Euclidean norm that was
/// divided out, which readout needs to restore physical amplitudes.
pub fn encode_distribution(dist: &DistributionVector) -> Result<(Statevector, f64)> {
    let m = dist.sites();
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::BadLatticeSize(m));
    }
    let norm = dist.norm();
    if norm <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    let site_bits = m.trailing_zeros() as usize;
    let layout = lattice_layout(site_bits)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); layout.dimension()];
    for (i, f) in dist.populations().iter().enumerate() {
        amps[i] = Complex64::new(f / norm, 0.0);
    }
    Ok((Statevector::from_amplitudes(layout, amps)?, norm))
}

/// Reads the `a = 0` block back into a distribution vector, undoing the
/// normalization recorded at encode time. Only meaningful on states whose
/// ancilla has been postselected to `|0>` (or never left it); the stored norm
/// ledger is folded in so postselections are accounted for.
pub fn decode_distribution(state: &Statevector, encoded_norm: f64) -> Result<DistributionVector> {
    let site_bits = state.layout().register_width("q")? - 1;
    let m = 1usize << site_bits;
    let scale = encoded_norm * state.norm_ledger();
    let populations = (0..2 * m).map(|i| scale * state.amplitude(i).re).collect();
    DistributionVector::new(populations, m)
}

/// The diagonal collision operator and its unitary splitting.
///
/// The target operator `A` multiplies population `v` at every site by that
/// population's equilibrium weight (times 2, so that acting on the duplicated
/// field `[phi; phi]` yields the equilibrium split exactly while keeping the
/// entries within `[0, 1]` — the weights already sum to 1). `A` itself is a
/// contraction, not a unitary; it is realized as the even mixture of
/// `C± = A ± i sqrt(I - A^2)`, both unitary and diagonal, selected by an
/// ancilla.
#[derive(Debug, Clone)]
pub struct CollisionOps {
    diag: Vec<f64>,
    c_plus: UnitaryOp,
    c_minus: UnitaryOp,
    site_bits: usize,
}

impl CollisionOps {
    /// Diagonal entries of the non-unitary target `A`, indexed `v * M + x`.
    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// The `A + i sqrt(I - A^2)` branch.
    pub fn c_plus(&self) -> &UnitaryOp {
        &self.c_plus
    }

    /// The `A - i sqrt(I - A^2)` branch.
    pub fn c_minus(&self) -> &UnitaryOp {
        &self.c_minus
    }

    pub fn site_bits(&self) -> usize {
        self.site_bits
    }

    /// Norm of `A` applied to the `a = 0` block of `state`, squared — the
    /// success probability the collision postselection will have on this
    /// state.
    pub fn target_norm_sq(&self, state: &Statevector) -> f64 {
        self.diag
            .iter()
            .enumerate()
            .map(|(i, a)| (a * state.amplitude(i).norm()).powi(2))
            .sum()
    }
}

/// Builds the splitting `C± = A ± i sqrt(I - A^2)` for arbitrary diagonal
/// entries of `A`, each of which must lie in `[-1, 1]` for the square root to
/// exist. The entry count fixes the lattice size `M = len / 2`.
pub fn collision_from_diagonal(diag: Vec<f64>) -> Result<CollisionOps> {
    let m = diag.len() / 2;
    if diag.len() % 2 != 0 || m < 2 || !m.is_power_of_two() {
        return Err(Error::BadLatticeSize(m));
    }
    for &a in &diag {
        if !(a.abs() <= 1.0) {
            return Err(Error::SpeedOutOfRange {
                u: a.abs(),
                bound: 1.0,
            });
        }
    }
    let site_bits = m.trailing_zeros() as usize;
    let layout = lattice_layout(site_bits)?;
    let q_targets = layout.register_qubits("q")?;

    let mut plus = Vec::with_capacity(diag.len());
    let mut minus = Vec::with_capacity(diag.len());
    for &a in &diag {
        let s = (1.0 - a * a).max(0.0).sqrt();
        plus.push(Complex::new(a, s));
        minus.push(Complex::new(a, -s));
    }
    Ok(CollisionOps {
        diag,
        c_plus: UnitaryOp::diagonal(plus, q_targets.clone())?,
        c_minus: UnitaryOp::diagonal(minus, q_targets)?,
        site_bits,
    })
}

/// The collision operator for the given lattice parameters: population `v`
/// is scaled by twice its equilibrium weight at every site, so the duplicated
/// field relaxes to the equilibrium split in one application. Requires the
/// collision rate to be exactly 1 — partial relaxation is not a diagonal map
/// of the populations.
pub fn build_collision(params: &D1Q2Params) -> Result<CollisionOps> {
    if params.collision_rate() != 1.0 {
        return Err(Error::UnsupportedScheme {
            scheme: "collision rate away from 1",
            equation: "unitary collision splitting",
        });
    }
    let m = params.sites();
    let mut diag = vec![0.0; 2 * m];
    diag[..m].fill(params.weight_right());
    diag[m..].fill(params.weight_left());
    collision_from_diagonal(diag)
}

/// Applies the collision as a linear combination of the two unitaries:
/// Hadamard on the ancilla, `C+` on the ancilla's `|0>` branch and `C-` on
/// its `|1>` branch, Hadamard again, then postselection of the ancilla on
/// `|0>`. The surviving branch carries `A` applied to the input block, and
/// the returned probability equals `|| A psi ||^2` for the encoded unit
/// vector `psi` exactly.
pub fn collide(state: Statevector, ops: &CollisionOps) -> Result<(Statevector, f64)> {
    let ancilla = state.layout().register_qubit_with_weight("ancilla", 0)?;
    let h = UnitaryOp::dense(hadamard(), vec![ancilla])?;
    let on_zero = ops.c_plus.clone().controlled(ancilla, false)?;
    let on_one = ops.c_minus.clone().controlled(ancilla, true)?;
    let state = state
        .apply(&h)?
        .apply(&on_zero)?
        .apply(&on_one)?
        .apply(&h)?;
    state.postselect(ancilla, false)
}

/// Streams the populations: the right-moving block (`v = 0`) shifts its site
/// index up by one and the left-moving block (`v = 1`) down by one, both with
/// periodic wrap. Exact and unitary — a permutation of basis states.
pub fn stream(state: Statevector) -> Result<Statevector> {
    let q_targets = state.layout().register_qubits("q")?;
    let m = 1usize << (q_targets.len() - 1);
    let mut map = vec![0usize; 2 * m];
    for x in 0..m {
        map[x] = (x + 1) % m;
        map[m + x] = m + (x + m - 1) % m;
    }
    let op = UnitaryOp::permutation(map, q_targets)?;
    state.apply(&op)
}

/// Gate-count accounting for one streaming step compiled to multi-controlled
/// NOT gates. The cyclic increment on a `site_bits`-wide register is a
/// cascade of `site_bits` controlled-NOTs (the widest controlled on every
/// lower position bit), the decrement mirrors it, and each gate additionally
/// carries the velocity qubit as a control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StreamingCost {
    /// Total multi-controlled NOT gates: `2 * site_bits`.
    pub mcx_gates: usize,
    /// Largest control count on any single gate: `site_bits` (the
    /// lowest-position flip controlled on the velocity qubit and all
    /// `site_bits - 1` lower position bits).
    pub max_controls: usize,
}

pub fn streaming_cost(site_bits: usize) -> StreamingCost {
    StreamingCost {
        mcx_gates: 2 * site_bits,
        max_controls: site_bits,
    }
}

/// Collapses the two populations into the concentration field: swap the
/// (postselected, `|0>`) ancilla with the velocity qubit, apply a Hadamard to
/// the ancilla so its `|0>` branch carries the sum of the two populations over
/// sqrt(2), then postselect ancilla and velocity qubit on `|0>`.
///
/// Returns the field — rescaled by `sqrt(2)`, the recorded encoding norm, and
/// the state's norm ledger, so the values are physical — and the joint
/// success probability of the two postselections.
pub fn macroscopic_readout(
    state: Statevector,
    encoded_norm: f64,
) -> Result<(LatticeField, f64)> {
    let layout = state.layout();
    let ancilla = layout.register_qubit_with_weight("ancilla", 0)?;
    let site_bits = layout.register_width("q")? - 1;
    let velocity = layout.register_qubit_with_weight("q", site_bits)?;

    // Swap amplitudes of the ancilla and velocity qubits: on the combined
    // sub-index (ancilla, velocity) the middle two basis states exchange.
    let swap = UnitaryOp::permutation(vec![0, 2, 1, 3], vec![ancilla, velocity])?;
    let h = UnitaryOp::dense(hadamard(), vec![ancilla])?;
    let state = state.apply(&swap)?.apply(&h)?;

    let (state, p_ancilla) = state.postselect(ancilla, false)?;
    let (state, p_velocity) = state.postselect(velocity, false)?;

    let m = 1usize << site_bits;
    let scale = std::f64::consts::SQRT_2 * encoded_norm * state.norm_ledger();
    let values: Vec<f64> = (0..m).map(|x| scale * state.amplitude(x).re).collect();
    Ok((LatticeField::new(values)?, p_ancilla * p_velocity))
}

/// Instrumentation for one quantum lattice Boltzmann step.
#[derive(Debug, Clone, Serialize)]
pub struct QLBMStepReport {
    /// 1-based step number within a run (1 for a standalone step).
    pub step: usize,
    /// Probability that the collision postselection succeeds,
    /// `|| A psi ||^2`.
    pub collision_success_prob: f64,
    /// Joint probability that the two readout postselections succeed.
    pub readout_success_prob: f64,
    /// Product of the square roots of all postselection probabilities — the
    /// factor relating surviving-branch amplitudes to physical ones.
    pub norm_ledger: f64,
    /// Always true: the pipeline postselects instead of amplifying, so the
    /// reported probabilities assume ideal, repeat-until-success execution.
    pub norm_ledger_idealized: bool,
    /// Qubits in the circuit: ancilla, velocity, and the position register.
    pub qubit_count: usize,
    /// Multi-controlled NOT count for the streaming permutation.
    pub streaming_mcx_gates: usize,
    /// Largest control count among the streaming gates.
    pub streaming_max_controls: usize,
    /// Largest per-site deviation of the step output from its classical
    /// reference (for a standalone step, the classical step of the same
    /// input; within a run, the independently evolved classical trajectory).
    pub max_delta_vs_classical: f64,
    /// Absolute change in total mass across the step.
    pub mass_delta: f64,
    /// Always true: each step encodes a fresh state from the previous output
    /// field rather than continuing the collapsed state.
    pub reinitialization: bool,
}

fn step_pipeline(
    field: &LatticeField,
    params: &D1Q2Params,
    ops: &CollisionOps,
) -> Result<(LatticeField, f64, f64)> {
    for (site, &phi) in field.values().iter().enumerate() {
        if !(phi > 0.0) {
            return Err(Error::NonPositiveField(site));
        }
    }
    let dist = DistributionVector::duplicated(field, params)?;
    let (state, encoded_norm) = encode_distribution(&dist)?;
    let (state, p_collision) = collide(state, ops)?;
    let state = stream(state)?;
    let (out, p_readout) = macroscopic_readout(state, encoded_norm)?;
    Ok((out, p_collision, p_readout))
}

fn step_report(
    step: usize,
    params: &D1Q2Params,
    p_collision: f64,
    p_readout: f64,
    max_delta: f64,
    mass_delta: f64,
) -> QLBMStepReport {
    let cost = streaming_cost(params.site_bits());
    QLBMStepReport {
        step,
        collision_success_prob: p_collision,
        readout_success_prob: p_readout,
        norm_ledger: (p_collision * p_readout).sqrt(),
        norm_ledger_idealized: true,
        qubit_count: 2 + params.site_bits(),
        streaming_mcx_gates: cost.mcx_gates,
        streaming_max_controls: cost.max_controls,
        max_delta_vs_classical: max_delta,
        mass_delta,
        reinitialization: true,
    }
}

/// One full quantum step — encode the duplicated field, collide, stream, read
/// out — on a strictly positive concentration field. The report compares the
/// output against the classical step of the same input.
pub fn quantum_lbm_step(
    field: &LatticeField,
    params: &D1Q2Params,
) -> Result<(LatticeField, QLBMStepReport)> {
    let ops = build_collision(params)?;
    let (out, p_collision, p_readout) = step_pipeline(field, params, &ops)?;
    let reference = classical_lbm_step(field, params)?;
    let report = step_report(
        1,
        params,
        p_collision,
        p_readout,
        out.max_abs_diff(&reference)?,
        (out.mass() - field.mass()).abs(),
    );
    Ok((out, report))
}

/// A multi-step run: the quantum trajectory, a classical trajectory evolved
/// independently from the same initial field, and one report per step whose
/// deviation column compares the two trajectories at matching times.
#[derive(Debug, Clone)]
pub struct QLBMRun {
    /// Quantum fields; entry 0 is the initial field, entry `k` the state
    /// after `k` steps.
    pub quantum: Vec<LatticeField>,
    /// Classical fields on the same footing.
    pub classical: Vec<LatticeField>,
    pub reports: Vec<QLBMStepReport>,
}

/// Runs `steps` quantum steps from `initial`, reinitializing each step from
/// the previous quantum output, alongside an independent classical run.
pub fn qlbm_run(initial: &LatticeField, params: &D1Q2Params, steps: usize) -> Result<QLBMRun> {
    if steps == 0 {
        return Err(Error::EmptyInput);
    }
    let ops = build_collision(params)?;
    let mut quantum = vec![initial.clone()];
    let mut classical = vec![initial.clone()];
    let mut reports = Vec::with_capacity(steps);
    for step in 1..=steps {
        let (q_next, p_collision, p_readout) =
            step_pipeline(quantum.last().expect("trajectory is non-empty"), params, &ops)?;
        let c_next = classical_lbm_step(classical.last().expect("trajectory is non-empty"), params)?;
        let report = step_report(
            step,
            params,
            p_collision,
            p_readout,
            q_next.max_abs_diff(&c_next)?,
            (q_next.mass() - quantum[step - 1].mass()).abs(),
        );
        quantum.push(q_next);
        classical.push(c_next);
        reports.push(report);
    }
    Ok(QLBMRun {
        quantum,
        classical,
        reports,
    })
}
