//! Incremental circuit construction with automatic fan-out management.

use crate::circuit::{Circuit, Gate};

/// Builds circuits gate by gate. Every logical value keeps a chain of
/// `Dup` gates so it can be read any number of times without ever
/// exceeding the fan-out cap of two: the chain head always has a spare
/// slot for the next extension.
pub struct CircuitBuilder {
    gates: Vec<Gate>,
    fan_out: Vec<u8>,
    /// Current dup-chain head for each produced gate.
    head: Vec<usize>,
    num_inputs: usize,
}

impl CircuitBuilder {
    pub fn new(num_inputs: usize) -> Self {
        Self {
            gates: Vec::new(),
            fan_out: Vec::new(),
            head: Vec::new(),
            num_inputs,
        }
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    fn push_raw(&mut self, gate: Gate) -> usize {
        let index = self.gates.len();
        self.gates.push(gate);
        self.fan_out.push(0);
        self.head.push(index);
        index
    }

    /// Returns a gate carrying `value` with a free fan-out slot, growing
    /// the dup chain when the current head would otherwise fill up.
    fn tap(&mut self, value: usize) -> usize {
        let h = self.head[value];
        if self.fan_out[h] == 0 {
            self.fan_out[h] = 1;
            h
        } else {
            debug_assert_eq!(self.fan_out[h], 1);
            self.fan_out[h] = 2;
            let dup = self.push_raw(Gate::Dup(h));
            self.fan_out[dup] = 1;
            self.head[value] = dup;
            dup
        }
    }

    pub fn input(&mut self, index: usize) -> usize {
        debug_assert!(index < self.num_inputs);
        self.push_raw(Gate::Input(index))
    }

    pub fn constant(&mut self, bit: bool) -> usize {
        self.push_raw(Gate::Const(bit))
    }

    pub fn not(&mut self, value: usize) -> usize {
        let s = self.tap(value);
        self.push_raw(Gate::Not(s))
    }

    pub fn and(&mut self, x: usize, y: usize) -> usize {
        let a = self.tap(x);
        let b = self.tap(y);
        self.push_raw(Gate::And(a, b))
    }

    pub fn or(&mut self, x: usize, y: usize) -> usize {
        let a = self.tap(x);
        let b = self.tap(y);
        self.push_raw(Gate::Or(a, b))
    }

    /// `x XOR y` as `(x OR y) AND NOT (x AND y)`.
    pub fn xor(&mut self, x: usize, y: usize) -> usize {
        let either = self.or(x, y);
        let both = self.and(x, y);
        let not_both = self.not(both);
        self.and(either, not_both)
    }

    /// Fresh `Dup` gate repeating `value`; used to pin outputs at known
    /// positions.
    pub fn pin(&mut self, value: usize) -> usize {
        let s = self.tap(value);
        self.push_raw(Gate::Dup(s))
    }

    pub fn finish(self, output_gate: usize) -> Circuit {
        Circuit::new(self.gates, self.num_inputs).with_output(output_gate)
    }
}
