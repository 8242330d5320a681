use thiserror::Error;

/// Errors reported by the simulation library.
///
/// Every fallible operation returns [`Result`]; none panic on bad input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("register `{0}` not found in layout")]
    UnknownRegister(String),

    #[error("register `{0}` declared with zero width")]
    EmptyRegister(String),

    #[error("duplicate register name `{0}` in layout")]
    DuplicateRegister(String),

    #[error("layout requests {requested} qubits, cap is {cap}")]
    QubitCapExceeded { requested: usize, cap: usize },

    #[error("qubit index {index} out of range for {total}-qubit state")]
    QubitOutOfRange { index: usize, total: usize },

    #[error("basis index {index} out of range for dimension {dim}")]
    BasisIndexOutOfRange { index: usize, dim: usize },

    #[error("amplitude vector has length {got}, layout dimension is {want}")]
    DimensionMismatch { got: usize, want: usize },

    #[error("state norm {norm} deviates from 1 beyond tolerance")]
    NotNormalized { norm: f64 },

    #[error("matrix is not unitary: max deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("matrix is not Hermitian: max deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("diagonal entry {index} has modulus {modulus}, expected 1")]
    NotUnitModulus { index: usize, modulus: f64 },

    #[error("permutation table is not a bijection (problem near entry {0})")]
    NotAPermutation(usize),

    #[error("target qubit list contains a repeated index {0}")]
    RepeatedTarget(usize),

    #[error("control qubit {0} collides with a target of the wrapped operator")]
    ControlOverlapsTarget(usize),

    #[error("operator expects dimension {want}, got {got}")]
    OperatorDimensionMismatch { got: usize, want: usize },

    #[error("post-selected branch has probability {probability:.3e}, below threshold {threshold:.1e}")]
    ImpossibleOutcome { probability: f64, threshold: f64 },

    #[error("partial trace selection is empty")]
    EmptyTraceSelection,

    #[error("partial trace selection is not contiguous in the layout")]
    NonContiguousTraceSelection,

    #[error("dense transform capped at {cap} qubits, requested {requested}")]
    DenseCapExceeded { requested: usize, cap: usize },

    #[error("value {value} does not fit flavor `{flavor}` with width {width}")]
    EncodingOutOfRange {
        value: String,
        flavor: &'static str,
        width: usize,
    },

    #[error("flavor `{flavor}` does not support {operation}")]
    EncodingFlavorMismatch {
        flavor: &'static str,
        operation: &'static str,
    },

    #[error("input entry {index} = {value} lies outside [0, 1]")]
    SampleOutOfUnitRange { index: usize, value: f64 },

    #[error("input vector is empty")]
    EmptyInput,

    #[error("input vector norm is zero")]
    ZeroNorm,

    #[error("subnormalization alpha = {alpha} is below the spectral norm {norm}")]
    AlphaBelowNorm { alpha: f64, norm: f64 },

    #[error("phase register width {0} must be at least 1")]
    EmptyPhaseRegister(usize),

    #[error("median repetition count {0} must be odd and at least 1")]
    BadMedianCount(usize),

    #[error("amplitude estimation needs at least one sample")]
    NoSamples,

    #[error("time mesh is empty or inverted: horizon {horizon}, {n_primary} primary / {n_secondary} secondary")]
    BadTimeMesh {
        horizon: f64,
        n_primary: usize,
        n_secondary: usize,
    },

    #[error("Taylor order {requested} exceeds the configured maximum {max}")]
    TaylorOrderTooLarge { requested: usize, max: usize },

    #[error("driver degree {degree} exceeds the configured maximum {max}")]
    DriverDegreeTooLarge { degree: usize, max: usize },

    #[error("monomial references variable {var}, system dimension is {dim}")]
    MonomialOutOfRange { var: usize, dim: usize },

    #[error("grid needs at least 3 points, got {0}")]
    GridTooSmall(usize),

    #[error("scheme `{scheme}` is not supported for `{equation}`")]
    UnsupportedScheme {
        scheme: &'static str,
        equation: &'static str,
    },

    #[error("state vector has {got} entries, expected {want}")]
    StateDimensionMismatch { got: usize, want: usize },

    #[error("evolution time step {0} must be positive and at most 0.2")]
    EpsilonOutOfRange(f64),

    #[error("interaction tensor declared anti-Hermitian but deviates by {0:.3e}")]
    NotAntiHermitian(f64),

    #[error("copy dimension {0} must be a power of two for statevector embedding")]
    CopyDimensionNotPowerOfTwo(usize),

    #[error("quadratic map coefficient index ({alpha}, {k}, {l}) out of range for {n_vars} variables")]
    CoefficientOutOfRange {
        alpha: usize,
        k: usize,
        l: usize,
        n_vars: usize,
    },

    #[error("matrix is singular within tolerance {0:.1e}")]
    SingularMatrix(f64),

    #[error("no closed form registered under `{0}`")]
    UnknownClosedForm(String),

    #[error("equation {0} has an empty sample set")]
    EmptySampleSet(usize),

    #[error("sample x = {x} lies outside the declared domain [{lo}, {hi}]")]
    SampleOutsideDomain { x: f64, lo: f64, hi: f64 },

    #[error("derivative order {0} exceeds the supported maximum {1}")]
    DerivativeOrderTooLarge(usize, usize),

    #[error("scale parameter must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("spatial domain [{lo}, {hi}] is empty or inverted")]
    EmptyDomain { lo: f64, hi: f64 },

    #[error("zoom shrink factor {0} must lie strictly between 0 and 1")]
    ShrinkOutOfRange(f64),

    #[error("spin vector has {got} entries, encoding expects {want}")]
    SpinCountMismatch { got: usize, want: usize },

    #[error("spin value at position {0} is not +1/-1")]
    BadSpinValue(usize),

    #[error("exhaustive search capped at {cap} spins, problem has {requested}")]
    SpinCapExceeded { requested: usize, cap: usize },

    #[error("Butcher tableau weights sum to {0}, expected 1")]
    InconsistentTableau(f64),

    #[error("tableau stage count {a} does not match weight count {b}")]
    TableauShapeMismatch { a: usize, b: usize },

    #[error("binary-window solve requires affine stage dynamics")]
    NonAffineDynamics,

    #[error("lattice size {0} must be a power of two of at least 2 sites")]
    BadLatticeSize(usize),

    #[error("advection speed |u| = {u} exceeds the lattice sound-speed bound {bound}")]
    SpeedOutOfRange { u: f64, bound: f64 },

    #[error("distribution vector has {got} entries, lattice expects {want}")]
    DistributionSizeMismatch { got: usize, want: usize },

    #[error("field must be strictly positive to admit an equilibrium split; site {0} is not")]
    NonPositiveField(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
