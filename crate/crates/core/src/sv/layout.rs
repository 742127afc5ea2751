use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Role of a contiguous block of qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Register {
    SwapAncilla,
    HadamardAncilla,
    Parameter,
    Amplitude,
    LcuAncilla,
    PhaseAncilla,
    Qnn1,
    Qnn2,
    /// Index register of the phase-oracle series.
    SeriesIndex,
    /// Amplitude-reduction qubit used by oblivious amplitude amplification.
    SeriesFlag,
}

impl Register {
    pub const fn label(self) -> &'static str {
        match self {
            Register::SwapAncilla => "swap-ancilla",
            Register::HadamardAncilla => "hadamard-ancilla",
            Register::Parameter => "parameter",
            Register::Amplitude => "amplitude",
            Register::LcuAncilla => "lcu-ancilla",
            Register::PhaseAncilla => "phase-ancilla",
            Register::Qnn1 => "qnn1",
            Register::Qnn2 => "qnn2",
            Register::SeriesIndex => "series-index",
            Register::SeriesFlag => "series-flag",
        }
    }
}

impl fmt::Display for Register {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Named registers over a qubit array.
///
/// Qubit 0 is the least-significant bit of the amplitude index. Registers are
/// allocated contiguously in declaration order. Inside a register the first
/// qubit is the most significant one, so the register value of an amplitude
/// index is simply `(index >> start) & mask`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitLayout {
    registers: Vec<(Register, Range<usize>)>,
    total: usize,
}

impl QubitLayout {
    pub fn builder() -> LayoutBuilder {
        LayoutBuilder::default()
    }

    /// Layout holding a single register.
    pub fn single(register: Register, width: usize) -> Self {
        Self {
            registers: vec![(register, 0..width)],
            total: width,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.total
    }

    pub fn dim(&self) -> usize {
        1usize << self.total
    }

    pub fn registers(&self) -> impl Iterator<Item = (Register, Range<usize>)> + '_ {
        self.registers.iter().cloned()
    }

    pub fn contains(&self, register: Register) -> bool {
        self.registers.iter().any(|(r, _)| *r == register)
    }

    pub fn range(&self, register: Register) -> Result<Range<usize>> {
        self.registers
            .iter()
            .find(|(r, _)| *r == register)
            .map(|(_, range)| range.clone())
            .ok_or(Error::UnknownRegister(register))
    }

    pub fn width(&self, register: Register) -> Result<usize> {
        self.range(register).map(|r| r.len())
    }

    /// Width of `register`, or zero when the layout does not declare it.
    pub fn width_or_zero(&self, register: Register) -> usize {
        self.range(register).map(|r| r.len()).unwrap_or(0)
    }

    /// Global index of the `k`-th qubit of `register`, counting from the most
    /// significant one.
    pub fn qubit(&self, register: Register, k: usize) -> Result<usize> {
        let range = self.range(register)?;
        if k >= range.len() {
            return Err(Error::IndexOutOfRange {
                index: k,
                total: range.len(),
            });
        }
        Ok(range.end - 1 - k)
    }

    /// Qubits of `register`, most significant first.
    pub fn qubits(&self, register: Register) -> Result<Vec<usize>> {
        let range = self.range(register)?;
        Ok(range.rev().collect())
    }

    /// Qubits of several registers concatenated, skipping undeclared ones.
    pub fn qubits_of(&self, registers: &[Register]) -> Vec<usize> {
        registers
            .iter()
            .filter_map(|r| self.qubits(*r).ok())
            .flatten()
            .collect()
    }

    pub fn mask(&self, register: Register) -> Result<usize> {
        let range = self.range(register)?;
        Ok(((1usize << range.len()) - 1) << range.start)
    }

    /// Value held by `register` in amplitude index `index`.
    pub fn value(&self, register: Register, index: usize) -> Result<usize> {
        let range = self.range(register)?;
        Ok((index >> range.start) & ((1usize << range.len()) - 1))
    }

    /// Amplitude index with `register` set to `value` and everything else zero.
    pub fn index_of(&self, register: Register, value: usize) -> Result<usize> {
        let range = self.range(register)?;
        if value >> range.len() != 0 {
            return Err(Error::InvalidArgument(format!(
                "value {value} does not fit in {} bits of {register}",
                range.len()
            )));
        }
        Ok(value << range.start)
    }
}

#[derive(Debug, Default)]
pub struct LayoutBuilder {
    registers: Vec<(Register, usize)>,
}

impl LayoutBuilder {
    pub fn register(mut self, register: Register, width: usize) -> Self {
        self.registers.push((register, width));
        self
    }

    pub fn build(self) -> Result<QubitLayout> {
        let mut registers = Vec::with_capacity(self.registers.len());
        let mut next = 0;
        for (reg, width) in self.registers {
            if registers.iter().any(|(r, _): &(Register, Range<usize>)| *r == reg) {
                return Err(Error::DuplicateRegister(reg));
            }
            registers.push((reg, next..next + width));
            next += width;
        }
        if next > 30 {
            return Err(Error::InvalidArgument(format!(
                "{next} qubits exceed the simulator limit of 30"
            )));
        }
        Ok(QubitLayout {
            registers,
            total: next,
        })
    }
}
