use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bits most significant first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring(Vec<bool>);

impl Bitstring {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn from_value(value: usize, width: usize) -> Self {
        Self((0..width).map(|k| (value >> (width - 1 - k)) & 1 == 1).collect())
    }

    pub fn value(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidArgument(format!("'{c}' is not a bit"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl Serialize for Bitstring {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bitstring {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn default_bits() -> usize {
    1
}

/// `r` parameters quantized to `d` bits each.
///
/// Parameter `k` takes the angles `θ̄_k · c / 2^d` for `c ∈ [0, 2^d)`. In the
/// parameter register parameter 0 occupies the most significant `d` bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRaw", into = "GridRaw")]
pub struct ParamGridSpec {
    bits: usize,
    max_angles: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GridRaw {
    params: usize,
    #[serde(default = "default_bits")]
    bits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_angles: Option<Vec<f64>>,
}

impl TryFrom<GridRaw> for ParamGridSpec {
    type Error = Error;

    fn try_from(raw: GridRaw) -> Result<Self> {
        match raw.max_angles {
            Some(angles) => {
                if angles.len() != raw.params {
                    return Err(Error::InvalidGrid(format!(
                        "{} max angles for {} parameters",
                        angles.len(),
                        raw.params
                    )));
                }
                Self::with_max_angles(raw.bits, angles)
            }
            None => Self::new(raw.params, raw.bits),
        }
    }
}

impl From<ParamGridSpec> for GridRaw {
    fn from(g: ParamGridSpec) -> Self {
        let uniform_pi = g.max_angles.iter().all(|&a| a == PI);
        GridRaw {
            params: g.max_angles.len(),
            bits: g.bits,
            max_angles: (!uniform_pi).then_some(g.max_angles),
        }
    }
}

impl ParamGridSpec {
    /// Grid with every maximum angle set to π.
    pub fn new(params: usize, bits: usize) -> Result<Self> {
        Self::with_max_angles(bits, vec![PI; params])
    }

    pub fn with_max_angles(bits: usize, max_angles: Vec<f64>) -> Result<Self> {
        if bits == 0 {
            return Err(Error::InvalidGrid("bits per parameter must be at least 1".into()));
        }
        if let Some(a) = max_angles.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::InvalidGrid(format!("max angle {a} must be positive")));
        }
        if bits * max_angles.len() > 30 {
            return Err(Error::GridTooLarge {
                bits: bits * max_angles.len(),
                limit: 30,
            });
        }
        Ok(Self { bits, max_angles })
    }

    pub fn params(&self) -> usize {
        self.max_angles.len()
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn max_angle(&self, k: usize) -> f64 {
        self.max_angles[k]
    }

    pub fn max_angles(&self) -> &[f64] {
        &self.max_angles
    }

    /// Width of the parameter register, `d·r`.
    pub fn total_bits(&self) -> usize {
        self.bits * self.params()
    }

    /// Number of grid points `N = 2^{dr}`.
    pub fn size(&self) -> usize {
        1 << self.total_bits()
    }

    /// Relative resolution `ε₀ = 2^{-d}`.
    pub fn resolution(&self) -> f64 {
        (-(self.bits as f64)).exp2()
    }

    fn chunk(&self, value: usize, k: usize) -> usize {
        let shift = (self.params() - 1 - k) * self.bits;
        (value >> shift) & ((1 << self.bits) - 1)
    }

    pub fn encode_theta(&self, j: &Bitstring) -> Result<Vec<f64>> {
        if j.len() != self.total_bits() {
            return Err(Error::BitstringLength {
                expected: self.total_bits(),
                got: j.len(),
            });
        }
        Ok(self.angles(j.value()))
    }

    /// Angle tuple of the configuration with register value `index`.
    pub fn angles(&self, index: usize) -> Vec<f64> {
        let scale = self.resolution();
        (0..self.params())
            .map(|k| self.max_angles[k] * self.chunk(index, k) as f64 * scale)
            .collect()
    }

    pub fn decode_theta(&self, theta: &[f64]) -> Result<Bitstring> {
        self.index_of(theta)
            .map(|v| Bitstring::from_value(v, self.total_bits()))
    }

    /// Register value of a grid point.
    pub fn index_of(&self, theta: &[f64]) -> Result<usize> {
        if theta.len() != self.params() {
            return Err(Error::DimensionMismatch {
                expected: self.params(),
                got: theta.len(),
            });
        }
        let levels = 1usize << self.bits;
        let mut value = 0usize;
        for (k, &angle) in theta.iter().enumerate() {
            let c = angle / self.max_angles[k] * levels as f64;
            let rounded = c.round();
            if !(rounded >= 0.0 && rounded < levels as f64) || (c - rounded).abs() > 1e-9 {
                return Err(Error::OffGrid { param: k, angle });
            }
            value = (value << self.bits) | rounded as usize;
        }
        Ok(value)
    }
}
