//! Reference simulator: sparse tape, full access trace.

use std::collections::HashMap;

use super::machine::{MicroRunner, NextRead, DEFAULT_CHUNK_LIMIT};
use super::{AccessOp, MachineConfig, MachineSpec, RamError, Trace, TraceEntry};

/// Result of a direct simulation. `output` is set when the machine halted
/// within the budget; otherwise the run stopped exactly at the boundary
/// after `time` reads.
#[derive(Clone, Debug)]
pub struct NaiveOutcome {
    pub config: MachineConfig,
    /// Charged reads performed.
    pub time: u64,
    pub trace: Trace,
    pub output: Option<Vec<bool>>,
}

/// Runs until `Halt` or until `time_budget` charged reads have been
/// performed, whichever comes first. Ground truth for every other
/// simulator.
pub fn naive_run(spec: &MachineSpec, time_budget: u64) -> Result<NaiveOutcome, RamError> {
    let mut tape: HashMap<u64, bool> = HashMap::new();
    let mut trace = Trace::default();
    let mut runner = MicroRunner::new(spec, spec.initial_config(), 0, DEFAULT_CHUNK_LIMIT);

    while runner.reads_done < time_budget && runner.config.halted.is_none() {
        let entries = &mut trace.entries;
        let tape_ref = &mut tape;
        let next = runner.next_read(&mut |addr, bit, step| {
            tape_ref.insert(addr, bit);
            entries.push(TraceEntry {
                step,
                op: AccessOp::Write,
                addr,
                bit,
            });
        })?;
        match next {
            NextRead::Halted => break,
            NextRead::At { addr } => {
                let bit = tape.get(&addr).copied().unwrap_or(false);
                trace.entries.push(TraceEntry {
                    step: runner.reads_done,
                    op: AccessOp::Read,
                    addr,
                    bit,
                });
                runner.commit_read(bit);
            }
        }
    }
    trace.reads = runner.reads_done;
    Ok(NaiveOutcome {
        output: runner.config.halted.clone(),
        time: runner.reads_done,
        config: runner.config,
        trace,
    })
}

/// Like [`naive_run`] but demands a halt within `cap` reads.
pub fn run_to_halt(spec: &MachineSpec, cap: u64) -> Result<NaiveOutcome, RamError> {
    let outcome = naive_run(spec, cap)?;
    if outcome.output.is_some() {
        Ok(outcome)
    } else {
        Err(RamError::BudgetExceeded {
            reads: outcome.time,
            partial: Box::new(outcome.trace),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ramsim::machine::{ActionJson, ProgramFile, ProgramRow};

    fn program(rows: Vec<ProgramRow>) -> MachineSpec {
        ProgramFile {
            schema: 1,
            delta: 0.5,
            internal_bits: 4,
            tape_addr_bits: 4,
            input: String::new(),
            rows,
        }
        .into_machine()
        .unwrap()
    }

    fn row(state: u64, last: Option<u8>, next_state: u64, action: ActionJson) -> ProgramRow {
        ProgramRow {
            state,
            last,
            next_state,
            action,
        }
    }

    #[test]
    fn write_then_read_returns_one() {
        let spec = program(vec![
            row(0, None, 1, ActionJson::WriteTape { addr: 5, bit: 1 }),
            row(1, None, 2, ActionJson::ReadTape { addr: 5 }),
            row(2, Some(1), 3, ActionJson::Halt { output: "1".into() }),
            row(2, Some(0), 3, ActionJson::Halt { output: "0".into() }),
        ]);
        let outcome = run_to_halt(&spec, 8).unwrap();
        assert_eq!(outcome.time, 1);
        assert_eq!(outcome.output, Some(vec![true]));
        assert_eq!(outcome.config.last_read, Some(true));
        // Write at step 0, then the read at step 0.
        assert_eq!(outcome.trace.entries.len(), 2);
        assert_eq!(outcome.trace.entries[1].op, AccessOp::Read);
        assert!(outcome.trace.entries[1].bit);
    }

    #[test]
    fn fresh_tape_reads_zero() {
        let spec = program(vec![
            row(0, None, 1, ActionJson::ReadTape { addr: 7 }),
            row(1, Some(0), 2, ActionJson::Halt { output: "0".into() }),
            row(1, Some(1), 2, ActionJson::Halt { output: "1".into() }),
        ]);
        let outcome = run_to_halt(&spec, 8).unwrap();
        assert_eq!(outcome.output, Some(vec![false]));
        assert!(!outcome.trace.entries[0].bit);
    }

    #[test]
    fn budget_stops_at_boundary() {
        // Endless read loop at address 0.
        let spec = program(vec![
            row(0, None, 0, ActionJson::ReadTape { addr: 0 }),
            row(0, Some(0), 0, ActionJson::ReadTape { addr: 0 }),
        ]);
        let outcome = naive_run(&spec, 5).unwrap();
        assert_eq!(outcome.time, 5);
        assert!(outcome.output.is_none());
        assert_eq!(outcome.trace.entries.len(), 5);
        assert!(matches!(
            run_to_halt(&spec, 5),
            Err(RamError::BudgetExceeded { reads: 5, .. })
        ));
    }
}
