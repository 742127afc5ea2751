use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::confidence_bits;

/// Query-complexity model of a full search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasResources {
    pub eps0: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub params: usize,
    pub solutions: f64,
    /// `N = (1/ε₀)^r`.
    pub configurations: f64,
    /// `n′ = ⌈log₂(1/ε₂)⌉`.
    pub precision_bits: usize,
    /// `t = n′ + ⌈log₂(2 + 1/(2ε₁))⌉`.
    pub amplitude_bits: usize,
    /// `2(2^{t+1} − 1)`.
    pub n0_exact: f64,
    /// `2^{n′+2}(2 + 1/(2ε₁)) − 2`.
    pub n0_approx: f64,
    /// `2/(ε₂ε₁)`.
    pub n0_small_eps1: f64,
    /// `(1/(ε₂ε₁))·√(N/s)`.
    pub cqnn_runs: f64,
    /// `(1/ε₂)(r·log₂(1/ε₀))^{1.5}`.
    pub qnn_runs: f64,
    /// `(r·log₂(1/ε₀))^{1.5}`.
    pub measurements: f64,
}

pub fn gas_resources(eps0: f64, eps1: f64, eps2: f64, params: usize, solutions: f64) -> Result<GasResources> {
    for (name, v) in [("eps0", eps0), ("eps1", eps1), ("eps2", eps2)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InvalidArgument(format!("{name} = {v} must lie in (0, 1)")));
        }
    }
    if !(solutions >= 1.0) {
        return Err(Error::InvalidArgument(format!("solution count {solutions} must be at least 1")));
    }
    let configurations = (1.0 / eps0).powi(params as i32);
    let precision_bits = (1.0 / eps2).log2().ceil() as usize;
    let amplitude_bits = precision_bits + confidence_bits(eps1);
    let log_n = params as f64 * (1.0 / eps0).log2();
    Ok(GasResources {
        eps0,
        eps1,
        eps2,
        params,
        solutions,
        configurations,
        precision_bits,
        amplitude_bits,
        n0_exact: 2.0 * ((amplitude_bits as f64 + 1.0).exp2() - 1.0),
        n0_approx: (precision_bits as f64 + 2.0).exp2() * (2.0 + 1.0 / (2.0 * eps1)) - 2.0,
        n0_small_eps1: 2.0 / (eps2 * eps1),
        cqnn_runs: (configurations / solutions).sqrt() / (eps2 * eps1),
        qnn_runs: log_n.powf(1.5) / eps2,
        measurements: log_n.powf(1.5),
    })
}
