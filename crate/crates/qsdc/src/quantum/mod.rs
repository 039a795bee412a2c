//! Dense state vectors, density matrices, and unitaries over small
//! composite spaces (joint dimension at most 16), plus the Bell pairs the
//! protocol is built on.
//!
//! Conventions used throughout the crate:
//! * basis order is row-major with the first-listed subsystem most
//!   significant;
//! * the four Bell outcomes are always ordered PsiPlus, PsiMinus, PhiPlus,
//!   PhiMinus;
//! * global phase is physically meaningless but never normalized away from
//!   stored amplitudes;
//! * algebraic checks use [`ALGEBRAIC_TOL`], state comparisons up to global
//!   phase use [`GLOBAL_PHASE_TOL`].

mod density;
mod layout;
mod state;
mod unitary;

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use density::{born_probabilities, density_of, partial_trace, DensityMatrix};
pub use layout::{LayoutError, SubsystemId, SubsystemLayout, MAX_TOTAL_DIM};
pub use state::{apply_unitary, global_phase_equiv, measure_in_basis, tensor, StateVector};
pub use unitary::UnitaryOp;

pub(crate) use state::branch_decomposition;
pub(crate) use unitary::orthonormal_completion;

/// Tolerance for algebraic identities (norms, orthogonality, unitarity).
pub const ALGEBRAIC_TOL: f64 = 1e-12;

/// Tolerance for state equality up to a global phase.
pub const GLOBAL_PHASE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("expected {expected} amplitudes for this layout, got {got}")]
    WrongAmplitudeCount { expected: usize, got: usize },
    #[error("amplitude {index} is not finite")]
    AmplitudeNotFinite { index: usize },
    #[error("expected {expected} matrix entries, got {got}")]
    WrongEntryCount { expected: usize, got: usize },
    #[error("matrix entry ({row}, {col}) is not finite")]
    EntryNotFinite { row: usize, col: usize },
    #[error("basis state index {index} out of range for dimension {dim}")]
    BasisIndexOutOfRange { index: usize, dim: usize },
    #[error("operand dimensions {got:?} do not match the expected {expected:?}")]
    DimensionMismatch { expected: Vec<usize>, got: Vec<usize> },
    #[error("basis has {got} elements but the measured space has dimension {expected}")]
    IncompleteBasis { expected: usize, got: usize },
    #[error("basis elements {i} and {j} are not orthonormal (deviation {deviation:.3e})")]
    NonOrthonormalBasis { i: usize, j: usize, deviation: f64 },
    #[error("state is not normalized (norm^2 = {norm_sq})")]
    NotNormalized { norm_sq: f64 },
    #[error("cannot normalize a state with near-zero norm")]
    ZeroNorm,
    #[error("operator is not unitary (max deviation {max_deviation:.3e})")]
    NotUnitary { max_deviation: f64 },
    #[error("matrix is not hermitian (max deviation {max_deviation:.3e})")]
    NotHermitian { max_deviation: f64 },
    #[error("matrix trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },
    #[error("column {index} specified more than once")]
    DuplicateColumn { index: usize },
    #[error("specified vectors do not admit an orthonormal completion")]
    NoOrthonormalCompletion,
}

/// The four Bell pairs, in the fixed outcome order used everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellLabel {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl BellLabel {
    pub const COUNT: usize = 4;

    pub fn all() -> [BellLabel; 4] {
        [
            BellLabel::PsiPlus,
            BellLabel::PsiMinus,
            BellLabel::PhiPlus,
            BellLabel::PhiMinus,
        ]
    }

    /// Position in the fixed outcome order.
    pub fn index(self) -> usize {
        match self {
            BellLabel::PsiPlus => 0,
            BellLabel::PsiMinus => 1,
            BellLabel::PhiPlus => 2,
            BellLabel::PhiMinus => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BellLabel::PsiPlus => "PsiPlus",
            BellLabel::PsiMinus => "PsiMinus",
            BellLabel::PhiPlus => "PhiPlus",
            BellLabel::PhiMinus => "PhiMinus",
        }
    }

    /// True for the pair states with anticorrelated qubits.
    pub fn is_psi_family(self) -> bool {
        matches!(self, BellLabel::PsiPlus | BellLabel::PsiMinus)
    }

    pub fn same_family(self, other: BellLabel) -> bool {
        self.is_psi_family() == other.is_psi_family()
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn bell_amplitudes(label: BellLabel) -> [Complex64; 4] {
    let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    match label {
        BellLabel::PsiPlus => [z, r, r, z],
        BellLabel::PsiMinus => [z, r, -r, z],
        BellLabel::PhiPlus => [r, z, z, r],
        BellLabel::PhiMinus => [r, z, z, -r],
    }
}

/// Bell pair over two named qubits, the first id most significant.
pub fn make_bell_on(
    label: BellLabel,
    first: impl Into<SubsystemId>,
    second: impl Into<SubsystemId>,
) -> Result<StateVector, QuantumError> {
    let layout = SubsystemLayout::new(vec![(first.into(), 2), (second.into(), 2)])?;
    StateVector::new(layout, bell_amplitudes(label).to_vec())
}

/// Bell pair over the default qubit names "A" and "B".
pub fn make_bell(label: BellLabel) -> StateVector {
    make_bell_on(label, "A", "B").expect("distinct default ids")
}

/// All four Bell pairs over two named qubits, in the fixed outcome order.
pub fn bell_basis_on(
    first: impl Into<SubsystemId>,
    second: impl Into<SubsystemId>,
) -> Result<[StateVector; 4], QuantumError> {
    let first = first.into();
    let second = second.into();
    let mut states = BellLabel::all()
        .into_iter()
        .map(|label| make_bell_on(label, first.clone(), second.clone()));
    Ok([
        states.next().unwrap()?,
        states.next().unwrap()?,
        states.next().unwrap()?,
        states.next().unwrap()?,
    ])
}
