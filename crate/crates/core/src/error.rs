use thiserror::Error;

/// Errors produced by the zefcode library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} qubits, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dense operation on {qubits} qubits exceeds the {limit}-qubit limit")]
    DenseLimit { qubits: usize, limit: usize },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix has a negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("invalid qubit index {index} for a {num_qubits}-qubit register")]
    QubitIndex { index: usize, num_qubits: usize },

    #[error("invalid bitstring {0:?}")]
    InvalidBitString(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("Kraft inequality violated: sum = {0}")]
    KraftViolation(f64),

    #[error("code is not prefix-free: {0}")]
    NotPrefixFree(String),

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("codeword of length {length} does not fit a register of {l_max} qubits")]
    LengthOverflow { length: usize, l_max: usize },

    #[error("state leaks {weight:e} of its weight outside the codeword subspace")]
    Leakage { weight: f64 },

    #[error("state lies outside the image of condensation (lost weight {0:e})")]
    OutsideImage(f64),

    #[error("operator is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("operator is not a projector (deviation {0:e})")]
    NotProjector(f64),

    #[error("switch qubit {0} overlaps the controlled subsystem")]
    OverlappingSubsystems(usize),

    #[error("deadline {deadline} too small: {detail}")]
    DeadlineTooSmall { deadline: u64, detail: String },

    #[error("machine diverged: register {register} holds no codeword within {l_max} qubits")]
    Divergence { register: usize, l_max: usize },

    #[error("side condition violated: {0}")]
    SideCondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by desk-scale size limits rather than bad input.
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::DenseLimit { .. } | Error::ResourceLimit(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
