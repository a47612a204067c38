use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),
    #[error("site {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("operator `{label}` undefined on a site of dimension {dim}")]
    LabelUndefined { label: String, dim: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not Hermitian (relative deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("state is not normalized (norm deviation {0:.3e})")]
    NotNormalized(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("invalid basis label `{0}`")]
    InvalidLabel(String),
    #[error("invalid device at `{path}`: {message}")]
    Validation { path: String, message: String },
    #[error("device file: {0}")]
    DeviceFile(String),
    #[error("flux slope is singular at phi_dc = {0}")]
    SingularSlope(f64),
    #[error("coupler frequency {coupler_ghz} GHz is resonant with a qubit at {qubit_ghz} GHz")]
    Resonance { coupler_ghz: f64, qubit_ghz: f64 },
    #[error("drive amplitude {amplitude} Phi0 exceeds the guard {guard} Phi0")]
    AmplitudeGuard { amplitude: f64, guard: f64 },
    #[error("bond {bond} out of range for {n_bonds} bonds")]
    BondOutOfRange { bond: usize, n_bonds: usize },
    #[error("time step {dt} ns too coarse; need dt <= {max_dt} ns")]
    StepTooCoarse { dt: f64, max_dt: f64 },
    #[error("invalid time span: {0}")]
    InvalidTimeSpan(String),
    #[error("negative decay rate: {0}")]
    NegativeRate(String),
    #[error("pulse-level model limited to 3 qubits and 2 couplers, requested {0} qubits")]
    DimensionCap(usize),
    #[error("drive targets coupler {0}, which is not part of the simulated sites")]
    ExcludedCoupler(usize),
    #[error("series too short: {0} samples, need at least 3")]
    SeriesTooShort(usize),
    #[error("horizon {horizon} ns exceeds trajectory end {end} ns")]
    HorizonExceedsTrajectory { horizon: f64, end: f64 },
    #[error("empty sweep grid")]
    EmptyGrid,
    #[error("unequal coupling strengths: {0}")]
    UnequalStrengths(String),
    #[error("calibration fit failed for triple {triple}: {reason}")]
    FitFailure { triple: usize, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
