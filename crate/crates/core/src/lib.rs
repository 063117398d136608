//! Dense state-vector simulation of small quantum error-correcting codes
//! under analog, decaying, and statistically correlated errors.
//!
//! - [`statevec`]: the register, gates, projective measurement, fidelity.
//! - [`noise`]: error operators, decay, and Bose-Einstein/Fermi placement.
//! - [`codes`]: Shor 9-qubit and Steane 7-qubit encoders, syndromes, recovery.
//! - [`experiments`]: Monte Carlo sweeps and the derived experiments.

pub mod codes;
pub mod error;
pub mod experiments;
pub mod noise;
pub mod statevec;

pub use codes::{CodeName, CodeSpec, LogicalQubit, Syndrome, SyndromeResult};
pub use error::{Error, Result};
pub use experiments::{Estimator, ExperimentConfig, SweepResult, SweepRow};
pub use noise::{Axis, ErrorKind, ErrorModel, Flip, Placement};
pub use statevec::{Pauli, PauliString, StateVector, Unitary2};
