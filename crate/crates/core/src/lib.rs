//! Determinant-space emulation of Trotterized quantum phase estimation.
//!
//! Amplitudes are stored only over determinants with fixed alpha and beta
//! electron counts, and each Hamiltonian term is exponentiated directly on
//! those amplitudes: diagonal terms as phases, off-diagonal terms as 2x2
//! rotations between the configuration pairs they connect. A dense oracle
//! reproduces every piece on small spaces.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below pin the common instantiations.

pub mod determinant;
pub mod error;
pub mod hamiltonian;
pub mod oracle;
pub mod qpe;
pub mod readout;
pub mod scalar;
pub mod trotter;

pub use determinant::{Determinant, DeterminantSpace, OccupationMask};
pub use error::{Error, Result};
pub use hamiltonian::{expand_and_classify, parse_fcidump, serialize_fcidump, ClassifiedHamiltonian, IntegralSet};
pub use qpe::{Ansatz, PhaseDistribution, QpeConfig, QpeMode};
pub use scalar::Real;
pub use trotter::{OffsetPolicy, StateVector, TermOrdering, TrotterConfig, TrotterEngine};

pub type IntegralSet64 = IntegralSet<f64>;
pub type IntegralSet32 = IntegralSet<f32>;
pub type Hamiltonian64 = ClassifiedHamiltonian<f64>;
pub type Hamiltonian32 = ClassifiedHamiltonian<f32>;
pub type StateVector64 = StateVector<f64>;
pub type StateVector32 = StateVector<f32>;
