//! Replay simulation: `m` reads in `O(m)` stored bits, no address map.
//!
//! The machine is re-run once per read. Each pass answers the known
//! prefix from the stored read-bit sequence, tracks the single address
//! whose read comes next (its value starts at the tape's initial value
//! and follows any writes the pass re-executes), appends that read's bit,
//! and notes the address of the following read for the next pass.

use crate::blockeval::{Interval, Plan};

use super::block::{block_eval_direct, InitialState};
use super::{BlockOptions, MachineConfig, MachineSpec, RamError, RamSpaceReport};

#[derive(Clone, Debug)]
pub struct ReplayOutcome {
    pub config: MachineConfig,
    /// Bits returned by the interval's reads, in order. Shorter than `m`
    /// when the machine halts early.
    pub read_bits: Vec<bool>,
    pub report: RamSpaceReport,
}

/// Simulates `m` charged reads from the initial configuration. The final
/// configuration equals the reference simulator's at the same time.
pub fn replay_run(spec: &MachineSpec, m: u64) -> Result<ReplayOutcome, RamError> {
    if m == 0 {
        return Ok(ReplayOutcome {
            config: spec.initial_config(),
            read_bits: Vec::new(),
            report: RamSpaceReport::default(),
        });
    }
    let plan = Plan::Direct(Interval::new(0, m as usize));
    block_eval_direct(spec, &plan, &mut InitialState, &BlockOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ramsim::machine::{ActionJson, ProgramFile, ProgramRow};
    use crate::ramsim::naive_run;

    fn fresh_reader(count: u64) -> MachineSpec {
        // Reads `count` distinct fresh addresses, then halts.
        let mut rows = Vec::new();
        for i in 0..count {
            for last in [None, Some(0u8), Some(1u8)] {
                rows.push(ProgramRow {
                    state: i,
                    last,
                    next_state: i + 1,
                    action: ActionJson::ReadTape { addr: 100 + i },
                });
            }
        }
        for last in [Some(0u8), Some(1u8)] {
            rows.push(ProgramRow {
                state: count,
                last,
                next_state: count,
                action: ActionJson::Halt { output: "".into() },
            });
        }
        ProgramFile {
            schema: 1,
            delta: 0.5,
            internal_bits: 8,
            tape_addr_bits: 8,
            input: String::new(),
            rows,
        }
        .into_machine()
        .unwrap()
    }

    #[test]
    fn one_step_stores_one_bit() {
        let spec = fresh_reader(4);
        let outcome = replay_run(&spec, 1).unwrap();
        assert_eq!(outcome.read_bits, vec![false]);
        assert_eq!(outcome.config.last_read, Some(false));
    }

    #[test]
    fn fresh_reads_are_all_zero() {
        let spec = fresh_reader(8);
        let outcome = replay_run(&spec, 8).unwrap();
        assert_eq!(outcome.read_bits, vec![false; 8]);
        let oracle = naive_run(&spec, 8).unwrap();
        assert_eq!(outcome.config, oracle.config);
    }

    #[test]
    fn zero_steps_echoes_initial() {
        let spec = fresh_reader(2);
        let outcome = replay_run(&spec, 0).unwrap();
        assert_eq!(outcome.config, spec.initial_config());
        assert!(outcome.read_bits.is_empty());
    }

    #[test]
    fn peak_under_documented_bound() {
        let spec = fresh_reader(16);
        let m = 16u64;
        let outcome = replay_run(&spec, m).unwrap();
        let bound =
            spec.internal_bits as u64 + m + 2 * spec.tape_addr_bits as u64;
        assert!(
            outcome.report.peak_bits <= bound,
            "peak {} exceeds {bound}",
            outcome.report.peak_bits
        );
        assert_eq!(outcome.report.live_state_copies, 1);
    }
}
