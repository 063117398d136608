use thiserror::Error;

use crate::statevec::MAX_QUBITS;

/// Everything that can go wrong inside the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("register size {0} is outside 1..={MAX_QUBITS}")]
    QubitCount(usize),
    #[error("bit string {bits:?} does not describe a {n_qubits}-qubit basis state")]
    InvalidBits { bits: String, n_qubits: usize },
    #[error("qubit {index} is out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("control and target are the same qubit ({0})")]
    ControlIsTarget(usize),
    #[error("matrix is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("amplitudes are not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("amplitude vector of length {0} is not a power of two")]
    BadLength(usize),
    #[error("non-finite amplitude encountered")]
    NonFinite,
    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },
    #[error("Pauli string has length {len}, register has {n_qubits} qubits")]
    PauliLength { len: usize, n_qubits: usize },
    #[error("cannot measure the all-identity Pauli string")]
    IdentityPauliString,
    #[error("invalid Pauli label {0:?}")]
    PauliLabel(char),
    #[error("sampled measurement branch has vanishing norm ({prob:e})")]
    DegenerateBranch { prob: f64 },
    #[error("general error parameters e1 and e2 are both zero")]
    ZeroErrorVector,
    #[error("decay rate {0} is outside (0, 1]")]
    DecayRate(f64),
    #[error("decay time {0} must be finite and non-negative")]
    DecayTime(f64),
    #[error("rotation angle must be finite, got {0}")]
    RotationAngle(f64),
    #[error("placement needs at least one cell")]
    NoCells,
    #[error("cannot place {errors} exclusive errors in {cells} cells")]
    TooManyFermions { cells: usize, errors: usize },
    #[error("decay applied {count} times to qubit {qubit}; at most once is allowed")]
    DecayOccupancy { qubit: usize, count: usize },
    #[error("no recovery entry for syndrome {0}")]
    MissingSyndrome(String),
    #[error("syndrome has {got} bits, code has {expected} stabilizers")]
    SyndromeLength { got: usize, expected: usize },
    #[error("unknown code {0:?} (expected shor9, steane7 or uncoded)")]
    UnknownCode(String),
    #[error("logical amplitudes are not normalized (|alpha|^2+|beta|^2 = {0})")]
    LogicalNorm(f64),
    #[error("probability {0} is outside (0, 1)")]
    Probability(f64),
    #[error("sensitivity register size {0} is outside 2..=10")]
    SensitivityQubits(usize),
    #[error("power-law fit: {0}")]
    PowerLaw(String),
    #[error("experiment configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
