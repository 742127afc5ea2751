//! Statevector simulation of quantum training protocols for parameterized
//! circuits: Grover adaptive search over quantized parameters and an
//! adaptive QAOA over digitized continuous-variable mixers.

pub mod acqaoa;
pub mod encoders;
pub mod error;
pub mod gas;
pub mod harness;
pub mod oracles;
pub mod param;
pub mod sv;

pub use error::{Error, Result};
