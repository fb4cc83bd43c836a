//! Gate-list circuit representation, validation, and the one-pass
//! reference evaluator.
//!
//! Gates are numbered `0..n` and every gate reads only lower-numbered
//! gates. The interval `a..c` always means gates `a, a+1, ..., c-1`.
//! Fan-in and fan-out are both capped at two; `Dup` gates buy extra
//! fan-out.

mod edges;
mod text;

pub use edges::{count_cross_edges, count_interval_edges, EdgeCount};
pub use text::{format_circuit, parse_circuit, TextError};

use thiserror::Error;

/// A single gate. Source operands are indexes of lower-numbered gates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    /// Reads circuit input `input_index`.
    Input(usize),
    Const(bool),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    /// Wire duplicator: repeats its source value, providing fan-out.
    Dup(usize),
}

impl Gate {
    /// Source gate indexes, in port order.
    pub fn sources(self) -> impl Iterator<Item = usize> {
        let srcs: [Option<usize>; 2] = match self {
            Gate::Input(_) | Gate::Const(_) => [None, None],
            Gate::Not(s) | Gate::Dup(s) => [Some(s), None],
            Gate::And(a, b) | Gate::Or(a, b) => [Some(a), Some(b)],
        };
        srcs.into_iter().flatten()
    }
}

/// Anything that can describe a circuit gate-by-gate.
///
/// A materialized [`Circuit`] implements this, and so does
/// [`DescriptorCircuit`], which computes each gate on demand from its
/// index. Every operation in the crate accepts either form.
pub trait GateSource {
    fn gate_count(&self) -> usize;
    fn num_inputs(&self) -> usize;
    fn gate(&self, index: usize) -> Gate;
}

/// Materialized circuit: an ordered gate list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    gates: Vec<Gate>,
    num_inputs: usize,
    output_gate: usize,
}

impl Circuit {
    /// Builds a circuit with the output defaulting to the last gate.
    /// Structural invariants are checked by [`validate`], not here.
    pub fn new(gates: Vec<Gate>, num_inputs: usize) -> Self {
        let output_gate = gates.len().saturating_sub(1);
        Self {
            gates,
            num_inputs,
            output_gate,
        }
    }

    pub fn with_output(mut self, output_gate: usize) -> Self {
        self.output_gate = output_gate;
        self
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn output_gate(&self) -> usize {
        self.output_gate
    }
}

impl GateSource for Circuit {
    fn gate_count(&self) -> usize {
        self.gates.len()
    }

    fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    fn gate(&self, index: usize) -> Gate {
        self.gates[index]
    }
}

/// Circuit described by a gate-index callback instead of a stored list.
/// Mirrors the on-demand interface a uniform circuit family provides.
pub struct DescriptorCircuit<F: Fn(usize) -> Gate> {
    gate_count: usize,
    num_inputs: usize,
    descriptor: F,
}

impl<F: Fn(usize) -> Gate> DescriptorCircuit<F> {
    pub fn new(gate_count: usize, num_inputs: usize, descriptor: F) -> Self {
        Self {
            gate_count,
            num_inputs,
            descriptor,
        }
    }
}

impl<F: Fn(usize) -> Gate> GateSource for DescriptorCircuit<F> {
    fn gate_count(&self) -> usize {
        self.gate_count
    }

    fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    fn gate(&self, index: usize) -> Gate {
        (self.descriptor)(index)
    }
}

impl<C: GateSource + ?Sized> GateSource for &C {
    fn gate_count(&self) -> usize {
        (**self).gate_count()
    }

    fn num_inputs(&self) -> usize {
        (**self).num_inputs()
    }

    fn gate(&self, index: usize) -> Gate {
        (**self).gate(index)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ValidateError {
    #[error("gate {0} reads a gate at or above its own index")]
    NonTopological(usize),
    #[error("gate {0} has more than two source operands")]
    FanInExceeded(usize),
    #[error("gate {0} feeds more than two destinations")]
    FanOutExceeded(usize),
    #[error("gate {0} reads an input index outside the declared input count")]
    BadInputIndex(usize),
    #[error("output gate {0} is out of range")]
    BadOutputGate(usize),
    #[error("circuit has no gates")]
    Empty,
}

/// Checks every structural invariant: topological sources, fan-in and
/// fan-out caps, and input indexes. Reports the first offending gate in
/// index order (per-gate rules first, then the fan-out scan).
pub fn validate<C: GateSource + ?Sized>(circuit: &C) -> Result<(), ValidateError> {
    let n = circuit.gate_count();
    if n == 0 {
        return Err(ValidateError::Empty);
    }
    let mut fan_out = vec![0u8; n];
    for i in 0..n {
        let gate = circuit.gate(i);
        let mut fan_in = 0;
        for src in gate.sources() {
            fan_in += 1;
            if src >= i {
                return Err(ValidateError::NonTopological(i));
            }
            fan_out[src] = fan_out[src].saturating_add(1);
        }
        if fan_in > 2 {
            return Err(ValidateError::FanInExceeded(i));
        }
        if let Gate::Input(j) = gate {
            if j >= circuit.num_inputs() {
                return Err(ValidateError::BadInputIndex(i));
            }
        }
    }
    if let Some(gate) = fan_out.iter().position(|&count| count > 2) {
        return Err(ValidateError::FanOutExceeded(gate));
    }
    Ok(())
}

/// Validates a materialized circuit including its output designation.
pub fn validate_circuit(circuit: &Circuit) -> Result<(), ValidateError> {
    validate(circuit)?;
    if circuit.output_gate() >= circuit.gate_count() {
        return Err(ValidateError::BadOutputGate(circuit.output_gate()));
    }
    Ok(())
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("expected {expected} input bits, got {got}")]
    InputLengthMismatch { expected: usize, got: usize },
}

/// Evaluates every gate in one forward pass. This is the ground-truth
/// oracle for every other evaluator in the crate.
pub fn naive_eval<C: GateSource + ?Sized>(
    circuit: &C,
    input_bits: &[bool],
) -> Result<Vec<bool>, EvalError> {
    if input_bits.len() != circuit.num_inputs() {
        return Err(EvalError::InputLengthMismatch {
            expected: circuit.num_inputs(),
            got: input_bits.len(),
        });
    }
    let mut values: Vec<bool> = Vec::with_capacity(circuit.gate_count());
    for i in 0..circuit.gate_count() {
        let value = match circuit.gate(i) {
            Gate::Input(j) => input_bits[j],
            Gate::Const(b) => b,
            Gate::Not(s) => !values[s],
            Gate::And(a, b) => values[a] && values[b],
            Gate::Or(a, b) => values[a] || values[b],
            Gate::Dup(s) => values[s],
        };
        values.push(value);
    }
    Ok(values)
}

/// Parses a bit string such as `"0110"` into bits, most significant first
/// in the written order.
pub fn parse_bits(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

/// Renders bits in the same order [`parse_bits`] reads them.
pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[cfg(test)]
pub(crate) fn c4() -> Circuit {
    Circuit::new(
        vec![Gate::Input(0), Gate::Input(1), Gate::And(0, 1), Gate::Not(2)],
        2,
    )
}
