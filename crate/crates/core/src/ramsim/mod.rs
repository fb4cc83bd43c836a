//! Unit-cost single-bit-access machine model and its simulator tower.
//!
//! The machine owns a read-only input, a small internal state, and a
//! zero-initialized random-access bit tape. Reading one tape bit costs one
//! time unit; tape writes, input reads, and internal processing are free.
//! Time `t` means "after `t` charged reads", and the interval `a..c`
//! covers reads `a, a+1, ..., c-1` together with the free processing that
//! precedes each of them.
//!
//! Three simulators agree bit-for-bit on every reachable configuration:
//!
//! * [`naive_run`] — direct simulation with a sparse tape and a full
//!   access trace; the ground truth.
//! * [`replay_run`] — stores only the sequence of read bits, re-running
//!   the machine once per read and tracking a single address per pass; no
//!   address map is ever held.
//! * [`block_sim`] — recursive interval simulation with checkpoint lists:
//!   per split, either recompute the lower half per demand or materialize
//!   the upper half's boundary reads as an entropy-coded stored-read list.

mod block;
mod edges;
mod machine;
mod naive;
mod replay;
mod stored;

pub use block::{
    block_sim, block_sim_search, ram_plan, BlockOptions, InitialState, ListConstruction,
    RamQuery, StartState,
};
pub use edges::{ram_edges, recursive_edges};
pub use machine::{
    parse_trace_jsonl, trace_to_jsonl, AccessOp, Action, ActionJson, MachineConfig,
    MachineSpec, ProgramFile, ProgramRow, TableTransition, Trace, TraceEntry, Transition,
};
pub use naive::{naive_run, run_to_halt, NaiveOutcome};
pub use replay::{replay_run, ReplayOutcome};
pub use stored::{
    choose_rice_k, decode_stored_list, encode_stored_list, stored_list_bits, EncodedList,
    ListEncoding, StoredRead, StoredReadList,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RamError {
    #[error("machine did not halt within {reads} charged reads")]
    BudgetExceeded { reads: u64, partial: Box<Trace> },
    #[error("exceeded {limit} machine steps between charged reads")]
    ChunkStepLimitExceeded { limit: u64 },
    #[error("exceeded the total step limit of {limit}")]
    StepLimitExceeded { limit: u64 },
    #[error("exceeded the space budget of {budget} bits")]
    SpaceBudgetExceeded { budget: u64 },
    #[error("no transition for state {state} with last read {last:?}")]
    UndefinedTransition { state: u64, last: Option<bool> },
    #[error("tape address {addr} exceeds the {bits}-bit address space")]
    AddressOutOfRange { addr: u64, bits: u32 },
    #[error("input position {pos} exceeds the input length {len}")]
    InputOutOfRange { pos: u64, len: usize },
    #[error("state bit {bit} exceeds the internal size {bits}")]
    StateBitOutOfRange { bit: u32, bits: u32 },
    #[error("program file: {0}")]
    BadProgram(String),
}

/// Space accounting for one metered simulation.
///
/// The meter counts checkpoint data: internal-state copies, stored read
/// bits, encoded stored-read lists, and address registers. Scratch used
/// only to determinize a checkpoint-list construction is excluded, and so
/// is host bookkeeping.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RamSpaceReport {
    pub peak_bits: u64,
    /// Most internal-state snapshots ever live at once.
    pub live_state_copies: u64,
    /// Most encoded stored-read-list bits ever live at once.
    pub stored_list_bits: u64,
}

/// Meter shared by the replay and block simulators.
#[derive(Debug)]
pub(crate) struct RamMeter {
    current_bits: u64,
    peak_bits: u64,
    current_copies: u64,
    peak_copies: u64,
    current_list_bits: u64,
    peak_list_bits: u64,
    budget: u64,
}

impl RamMeter {
    pub(crate) fn new(budget: Option<u64>) -> Self {
        Self {
            current_bits: 0,
            peak_bits: 0,
            current_copies: 0,
            peak_copies: 0,
            current_list_bits: 0,
            peak_list_bits: 0,
            budget: budget.unwrap_or(u64::MAX),
        }
    }

    /// Charges before checking the budget; a failed allocation still wants
    /// a matching `free`.
    pub(crate) fn alloc(&mut self, bits: u64) -> Result<(), RamError> {
        self.current_bits += bits;
        self.peak_bits = self.peak_bits.max(self.current_bits);
        if self.current_bits > self.budget {
            Err(RamError::SpaceBudgetExceeded { budget: self.budget })
        } else {
            Ok(())
        }
    }

    pub(crate) fn free(&mut self, bits: u64) {
        debug_assert!(self.current_bits >= bits);
        self.current_bits -= bits;
    }

    pub(crate) fn copy_in(&mut self, internal_bits: u32) -> Result<(), RamError> {
        self.current_copies += 1;
        self.peak_copies = self.peak_copies.max(self.current_copies);
        self.alloc(internal_bits as u64)
    }

    pub(crate) fn copy_out(&mut self, internal_bits: u32) {
        self.free(internal_bits as u64);
        self.current_copies -= 1;
    }

    pub(crate) fn list_in(&mut self, bits: u64) -> Result<(), RamError> {
        self.current_list_bits += bits;
        self.peak_list_bits = self.peak_list_bits.max(self.current_list_bits);
        self.alloc(bits)
    }

    pub(crate) fn list_out(&mut self, bits: u64) {
        self.free(bits);
        self.current_list_bits -= bits;
    }

    pub(crate) fn into_report(self) -> RamSpaceReport {
        RamSpaceReport {
            peak_bits: self.peak_bits,
            live_state_copies: self.peak_copies,
            stored_list_bits: self.peak_list_bits,
        }
    }
}
