//! Dense statevector engine.
//!
//! Qubit 0 is the least-significant bit of the amplitude index. Rotations use
//! `R_a(θ) = exp(-iθσ_a/2)`.

mod gate;
mod layout;
mod state;

pub use gate::{
    hermiticity_deviation, rotation_matrix, unitarity_deviation, Axis, Control, FixedGate,
    GateKind, GateOp, Polarity, UnitaryMatrix,
};
pub use layout::{LayoutBuilder, QubitLayout, Register};
pub use state::{operator_matrix, sample_index, StateVector};

/// Numerical tolerances shared across the crate.
pub mod tol {
    /// Unitarity, Hermiticity and norm checks.
    pub const UNITARY: f64 = 1e-10;
    pub const NORM: f64 = 1e-10;
    /// Elementwise state comparison.
    pub const STATE: f64 = 1e-8;
}
