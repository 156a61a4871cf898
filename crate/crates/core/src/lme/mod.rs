//! LME states, their Z-generated basis, stabilizers and basis conversion.

mod basis;
mod index;
mod spec;
mod state;

pub use basis::{
    basis_matrix, build_state, fidelity, from_lme_coeffs, lme_basis_vector,
    neighbor_phase_signs, stabilizer_operator, to_lme_coeffs, DenseOperator, LmeCoeffMatrix,
};
pub use index::MultiIndex;
pub use spec::{LmesSpec, SpecDocument, DEFAULT_MAX_QUBITS};
pub use state::{DensityMatrix, StateVector};

pub(crate) use spec::{full_mask, mask_subsets};
