//! Machine semantics: configurations, the micro-step runner, table-driven
//! transitions, and the JSON program and trace formats.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::circuit::parse_bits;

use super::RamError;

/// One machine action. Only `ReadTape` costs time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    ReadTape(u64),
    WriteTape(u64, bool),
    ReadInput(u64),
    Halt(Vec<bool>),
}

/// Pure transition function: `(state, last read bit) -> (next state,
/// action)`. Determinism and totality over reachable pairs are the
/// machine author's contract; a missing table row surfaces as
/// [`RamError::UndefinedTransition`].
pub trait Transition {
    fn step(&self, state: u64, last_read: Option<bool>) -> Result<(u64, Action), RamError>;
}

/// The machine: sizes, read-only input, and the transition function.
pub struct MachineSpec {
    /// Shapes the default block-simulation base threshold `n^((1+delta)/2)`.
    pub delta: f64,
    /// Internal storage size in bits, at most 64 in this implementation.
    pub internal_bits: u32,
    /// Tape length is `2^tape_addr_bits`.
    pub tape_addr_bits: u32,
    pub input: Vec<bool>,
    pub transition: Box<dyn Transition + Send + Sync>,
}

impl MachineSpec {
    pub fn initial_config(&self) -> MachineConfig {
        MachineConfig {
            state: 0,
            last_read: None,
            halted: None,
        }
    }

    fn check_addr(&self, addr: u64) -> Result<(), RamError> {
        if self.tape_addr_bits >= 64 || addr < 1u64 << self.tape_addr_bits {
            Ok(())
        } else {
            Err(RamError::AddressOutOfRange {
                addr,
                bits: self.tape_addr_bits,
            })
        }
    }
}

/// Machine registers at a time boundary: the internal state and the result
/// of the most recent read. The tape is not part of this; simulators
/// resolve tape contents through their own machinery.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MachineConfig {
    pub state: u64,
    pub last_read: Option<bool>,
    pub halted: Option<Vec<bool>>,
}

impl MachineConfig {
    pub fn state_bit(&self, bit: u32) -> bool {
        self.state >> bit & 1 == 1
    }
}

/// Drives micro-steps up to the next charged read. The caller answers
/// each read explicitly, which keeps tape policy (oracle, stored list,
/// sparse map) out of the machine semantics.
pub(crate) struct MicroRunner<'s> {
    spec: &'s MachineSpec,
    pub config: MachineConfig,
    /// Absolute index of the next charged read.
    pub reads_done: u64,
    pending: Option<(u64, u64)>,
    chunk_limit: u64,
}

pub(crate) enum NextRead {
    /// The machine wants to read `addr`; commit or abandon.
    At { addr: u64 },
    Halted,
}

impl<'s> MicroRunner<'s> {
    pub fn new(spec: &'s MachineSpec, config: MachineConfig, start_time: u64, chunk_limit: u64) -> Self {
        Self {
            spec,
            config,
            reads_done: start_time,
            pending: None,
            chunk_limit,
        }
    }

    /// Runs free actions (writes via `on_write`, stamped with the current
    /// time) until the machine asks to read the tape or halts. The
    /// transition leading into a read is not applied until
    /// [`Self::commit_read`], so abandoning a pass leaves the
    /// configuration at a clean boundary.
    pub fn next_read(
        &mut self,
        on_write: &mut dyn FnMut(u64, bool, u64),
    ) -> Result<NextRead, RamError> {
        debug_assert!(self.pending.is_none(), "previous read not committed");
        if self.config.halted.is_some() {
            return Ok(NextRead::Halted);
        }
        let mut chunk_steps = 0u64;
        loop {
            chunk_steps += 1;
            if chunk_steps > self.chunk_limit {
                return Err(RamError::ChunkStepLimitExceeded {
                    limit: self.chunk_limit,
                });
            }
            let (next_state, action) = self
                .spec
                .transition
                .step(self.config.state, self.config.last_read)?;
            match action {
                Action::ReadTape(addr) => {
                    self.spec.check_addr(addr)?;
                    self.pending = Some((next_state, addr));
                    return Ok(NextRead::At { addr });
                }
                Action::WriteTape(addr, bit) => {
                    self.spec.check_addr(addr)?;
                    self.config.state = next_state;
                    on_write(addr, bit, self.reads_done);
                }
                Action::ReadInput(pos) => {
                    let bit = *self.spec.input.get(pos as usize).ok_or(
                        RamError::InputOutOfRange {
                            pos,
                            len: self.spec.input.len(),
                        },
                    )?;
                    self.config.state = next_state;
                    self.config.last_read = Some(bit);
                }
                Action::Halt(output) => {
                    self.config.state = next_state;
                    self.config.halted = Some(output);
                    return Ok(NextRead::Halted);
                }
            }
        }
    }

    /// Completes the pending read with `bit`.
    pub fn commit_read(&mut self, bit: bool) {
        let (next_state, _addr) = self.pending.take().expect("a read is pending");
        self.config.state = next_state;
        self.config.last_read = Some(bit);
        self.reads_done += 1;
    }
}

pub(crate) const DEFAULT_CHUNK_LIMIT: u64 = 1 << 20;

// ---------------------------------------------------------------------
// Table-driven machines and the JSON program format.
// ---------------------------------------------------------------------

/// Transition table keyed by `(state, last read)`.
pub struct TableTransition {
    rows: HashMap<(u64, Option<bool>), (u64, Action)>,
}

impl Transition for TableTransition {
    fn step(&self, state: u64, last_read: Option<bool>) -> Result<(u64, Action), RamError> {
        self.rows
            .get(&(state, last_read))
            .cloned()
            .ok_or(RamError::UndefinedTransition {
                state,
                last: last_read,
            })
    }
}

/// One table row in the JSON program format.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ProgramRow {
    pub state: u64,
    /// `null` for "no read yet", otherwise 0 or 1.
    pub last: Option<u8>,
    pub next_state: u64,
    pub action: ActionJson,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ActionJson {
    ReadTape { addr: u64 },
    WriteTape { addr: u64, bit: u8 },
    ReadInput { pos: u64 },
    Halt { output: String },
}

/// On-disk machine program: sizes, input bits, and the transition table.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProgramFile {
    pub schema: u32,
    pub delta: f64,
    pub internal_bits: u32,
    pub tape_addr_bits: u32,
    pub input: String,
    pub rows: Vec<ProgramRow>,
}

impl ProgramFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("program serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, RamError> {
        serde_json::from_str(text).map_err(|e| RamError::BadProgram(e.to_string()))
    }

    pub fn into_machine(self) -> Result<MachineSpec, RamError> {
        if self.schema != 1 {
            return Err(RamError::BadProgram(format!(
                "unsupported schema {}",
                self.schema
            )));
        }
        if self.internal_bits == 0 || self.internal_bits > 64 {
            return Err(RamError::BadProgram(format!(
                "internal_bits {} outside 1..=64",
                self.internal_bits
            )));
        }
        if self.tape_addr_bits == 0 || self.tape_addr_bits > 48 {
            return Err(RamError::BadProgram(format!(
                "tape_addr_bits {} outside 1..=48",
                self.tape_addr_bits
            )));
        }
        if !(0.0..1.0).contains(&self.delta) || self.delta <= 0.0 {
            return Err(RamError::BadProgram(format!(
                "delta {} outside (0, 1)",
                self.delta
            )));
        }
        let input = parse_bits(&self.input)
            .ok_or_else(|| RamError::BadProgram("input must be a 0/1 string".into()))?;
        let mut rows = HashMap::with_capacity(self.rows.len());
        for row in &self.rows {
            let last = match row.last {
                None => None,
                Some(0) => Some(false),
                Some(1) => Some(true),
                Some(other) => {
                    return Err(RamError::BadProgram(format!("last bit {other} not 0/1")));
                }
            };
            let action = match &row.action {
                ActionJson::ReadTape { addr } => Action::ReadTape(*addr),
                ActionJson::WriteTape { addr, bit } => match bit {
                    0 => Action::WriteTape(*addr, false),
                    1 => Action::WriteTape(*addr, true),
                    other => {
                        return Err(RamError::BadProgram(format!("write bit {other} not 0/1")));
                    }
                },
                ActionJson::ReadInput { pos } => Action::ReadInput(*pos),
                ActionJson::Halt { output } => Action::Halt(
                    parse_bits(output)
                        .ok_or_else(|| RamError::BadProgram("halt output must be 0/1".into()))?,
                ),
            };
            if rows.insert((row.state, last), (row.next_state, action)).is_some() {
                return Err(RamError::BadProgram(format!(
                    "duplicate row for state {} last {:?}",
                    row.state, row.last
                )));
            }
        }
        Ok(MachineSpec {
            delta: self.delta,
            internal_bits: self.internal_bits,
            tape_addr_bits: self.tape_addr_bits,
            input,
            transition: Box::new(TableTransition { rows }),
        })
    }
}

// ---------------------------------------------------------------------
// Access traces.
// ---------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AccessOp {
    Read,
    Write,
}

/// One tape access. `step` is the number of charged reads completed
/// before the access, so a read's step is its own index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub step: u64,
    pub op: AccessOp,
    pub addr: u64,
    pub bit: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
    /// Total charged reads recorded.
    pub reads: u64,
}

/// One access per line: `{"step":s,"op":"R","addr":a,"bit":b}`.
pub fn trace_to_jsonl(trace: &Trace) -> String {
    let mut out = String::new();
    for entry in &trace.entries {
        let op = match entry.op {
            AccessOp::Read => "R",
            AccessOp::Write => "W",
        };
        out.push_str(&format!(
            "{{\"step\":{},\"op\":\"{}\",\"addr\":{},\"bit\":{}}}\n",
            entry.step,
            op,
            entry.addr,
            u8::from(entry.bit)
        ));
    }
    out
}

pub fn parse_trace_jsonl(text: &str) -> Result<Trace, RamError> {
    #[derive(Deserialize)]
    struct Line {
        step: u64,
        op: String,
        addr: u64,
        bit: u8,
    }
    let mut trace = Trace::default();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let parsed: Line =
            serde_json::from_str(line).map_err(|e| RamError::BadProgram(e.to_string()))?;
        let op = match parsed.op.as_str() {
            "R" => AccessOp::Read,
            "W" => AccessOp::Write,
            other => return Err(RamError::BadProgram(format!("bad op {other}"))),
        };
        if op == AccessOp::Read {
            trace.reads = trace.reads.max(parsed.step + 1);
        }
        trace.entries.push(TraceEntry {
            step: parsed.step,
            op,
            addr: parsed.addr,
            bit: parsed.bit == 1,
        });
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_then_read_program() -> ProgramFile {
        // Write 1 to address 5 for free, then read it back and halt.
        let rows = vec![
            ProgramRow {
                state: 0,
                last: None,
                next_state: 1,
                action: ActionJson::WriteTape { addr: 5, bit: 1 },
            },
            ProgramRow {
                state: 1,
                last: None,
                next_state: 2,
                action: ActionJson::ReadTape { addr: 5 },
            },
            ProgramRow {
                state: 2,
                last: Some(1),
                next_state: 3,
                action: ActionJson::Halt { output: "1".into() },
            },
            ProgramRow {
                state: 2,
                last: Some(0),
                next_state: 3,
                action: ActionJson::Halt { output: "0".into() },
            },
        ];
        ProgramFile {
            schema: 1,
            delta: 0.5,
            internal_bits: 4,
            tape_addr_bits: 4,
            input: String::new(),
            rows,
        }
    }

    #[test]
    fn program_json_roundtrip() {
        let file = write_then_read_program();
        let json = file.to_json();
        let parsed = ProgramFile::from_json(&json).unwrap();
        assert_eq!(parsed, file);
        parsed.into_machine().unwrap();
    }

    #[test]
    fn trace_jsonl_roundtrip() {
        let trace = Trace {
            entries: vec![
                TraceEntry {
                    step: 0,
                    op: AccessOp::Write,
                    addr: 5,
                    bit: true,
                },
                TraceEntry {
                    step: 0,
                    op: AccessOp::Read,
                    addr: 5,
                    bit: true,
                },
            ],
            reads: 1,
        };
        let text = trace_to_jsonl(&trace);
        assert_eq!(parse_trace_jsonl(&text).unwrap(), trace);
    }

    #[test]
    fn undefined_transition_reported() {
        let file = ProgramFile {
            schema: 1,
            delta: 0.5,
            internal_bits: 4,
            tape_addr_bits: 4,
            input: String::new(),
            rows: vec![],
        };
        let machine = file.into_machine().unwrap();
        let err = machine.transition.step(0, None).unwrap_err();
        assert!(matches!(err, RamError::UndefinedTransition { state: 0, .. }));
    }
}
