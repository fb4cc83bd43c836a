//! Line-oriented circuit text format.
//!
//! ```text
//! circuit n=4 inputs=2 output=3
//! 0 INPUT 0
//! 1 INPUT 1
//! 2 AND 0 1
//! 3 NOT 2
//! ```
//!
//! `#` starts a comment. The writer emits the canonical form above;
//! parsing the canonical form reproduces the circuit bit-for-bit.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Circuit, Gate, GateSource};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TextError {
    #[error("line {0}: missing or malformed header")]
    BadHeader(usize),
    #[error("line {0}: malformed gate line")]
    BadGateLine(usize),
    #[error("line {0}: gate index out of order (expected {1})")]
    BadGateIndex(usize, usize),
    #[error("expected {expected} gates, found {found}")]
    GateCountMismatch { expected: usize, found: usize },
}

pub fn format_circuit(circuit: &Circuit) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "circuit n={} inputs={} output={}",
        circuit.gate_count(),
        circuit.num_inputs(),
        circuit.output_gate()
    )
    .unwrap();
    for (i, gate) in circuit.gates().iter().enumerate() {
        match gate {
            Gate::Input(j) => writeln!(out, "{i} INPUT {j}"),
            Gate::Const(b) => writeln!(out, "{i} CONST {}", u8::from(*b)),
            Gate::Not(s) => writeln!(out, "{i} NOT {s}"),
            Gate::And(a, b) => writeln!(out, "{i} AND {a} {b}"),
            Gate::Or(a, b) => writeln!(out, "{i} OR {a} {b}"),
            Gate::Dup(s) => writeln!(out, "{i} DUP {s}"),
        }
        .unwrap();
    }
    out
}

pub fn parse_circuit(text: &str) -> Result<Circuit, TextError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(no, line)| (no + 1, line.split('#').next().unwrap_or("").trim()))
        .filter(|(_, line)| !line.is_empty());

    let (header_no, header) = lines.next().ok_or(TextError::BadHeader(1))?;
    let (n, inputs, output) = parse_header(header).ok_or(TextError::BadHeader(header_no))?;

    let mut gates = Vec::with_capacity(n);
    for (no, line) in lines {
        let mut fields = line.split_whitespace();
        let index: usize = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or(TextError::BadGateLine(no))?;
        if index != gates.len() {
            return Err(TextError::BadGateIndex(no, gates.len()));
        }
        let kind = fields.next().ok_or(TextError::BadGateLine(no))?;
        let mut arg = || -> Result<usize, TextError> {
            fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or(TextError::BadGateLine(no))
        };
        let gate = match kind {
            "INPUT" => Gate::Input(arg()?),
            "CONST" => match arg()? {
                0 => Gate::Const(false),
                1 => Gate::Const(true),
                _ => return Err(TextError::BadGateLine(no)),
            },
            "NOT" => Gate::Not(arg()?),
            "AND" => Gate::And(arg()?, arg()?),
            "OR" => Gate::Or(arg()?, arg()?),
            "DUP" => Gate::Dup(arg()?),
            _ => return Err(TextError::BadGateLine(no)),
        };
        if fields.next().is_some() {
            return Err(TextError::BadGateLine(no));
        }
        gates.push(gate);
    }

    if gates.len() != n {
        return Err(TextError::GateCountMismatch {
            expected: n,
            found: gates.len(),
        });
    }
    Ok(Circuit::new(gates, inputs).with_output(output))
}

fn parse_header(line: &str) -> Option<(usize, usize, usize)> {
    let mut fields = line.split_whitespace();
    if fields.next()? != "circuit" {
        return None;
    }
    let mut n = None;
    let mut inputs = None;
    let mut output = None;
    for field in fields {
        let (key, value) = field.split_once('=')?;
        let value: usize = value.parse().ok()?;
        match key {
            "n" => n = Some(value),
            "inputs" => inputs = Some(value),
            "output" => output = Some(value),
            _ => return None,
        }
    }
    Some((n?, inputs?, output?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::c4;

    #[test]
    fn canonical_roundtrip() {
        let c = c4();
        let text = format_circuit(&c);
        let parsed = parse_circuit(&text).unwrap();
        assert_eq!(parsed, c);
        assert_eq!(format_circuit(&parsed), text);
    }

    #[test]
    fn comments_and_blanks_tolerated() {
        let text = "# a comment\ncircuit n=2 inputs=1 output=1\n\n0 INPUT 0 # trailing\n1 NOT 0\n";
        let parsed = parse_circuit(text).unwrap();
        assert_eq!(parsed.gate_count(), 2);
        assert_eq!(parsed.gate(1), Gate::Not(0));
    }

    #[test]
    fn malformed_gate_line_reports_line_number() {
        let text = "circuit n=1 inputs=0 output=0\n0 XOR 1 2\n";
        assert_eq!(parse_circuit(text), Err(TextError::BadGateLine(2)));
    }

    #[test]
    fn out_of_order_index_rejected() {
        let text = "circuit n=2 inputs=0 output=1\n1 CONST 0\n0 CONST 1\n";
        assert_eq!(parse_circuit(text), Err(TextError::BadGateIndex(2, 0)));
    }
}
