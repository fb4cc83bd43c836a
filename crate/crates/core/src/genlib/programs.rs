//! Machine program families.
//!
//! Both generators emit only the states their machine actually reaches.
//! Wherever a charged read steers control, rows exist for both bit values:
//! the true one continues the path and, for reads whose value the
//! generator can predict, the other halts with an over-long all-ones trap
//! output, so a simulator that feeds a wrong bit lands in a visibly wrong
//! configuration instead of silently agreeing.

use std::collections::HashSet;

use crate::ramsim::{ActionJson, MachineSpec, ProgramFile, ProgramRow};
use crate::rng::SplitMix64;

/// Generated machine plus layout metadata for closed-form checks.
pub struct ProgramArtifact {
    pub machine: MachineSpec,
    pub file: ProgramFile,
    /// Charged reads the program performs before halting.
    pub expected_reads: u64,
    pub pointer_chase: Option<PointerChaseLayout>,
}

/// The permutation table a pointer-chase program was built around.
#[derive(Clone, Debug)]
pub struct PointerChaseLayout {
    pub table: Vec<u64>,
    pub entry_bits: u32,
    pub start: u64,
    pub hops: u64,
}

impl PointerChaseLayout {
    /// Closed-form chase: iterate the table from `start`.
    pub fn final_pointer(&self) -> u64 {
        let mut p = self.start;
        for _ in 0..self.hops {
            p = self.table[p as usize];
        }
        p
    }
}

struct PathBuilder {
    rows: Vec<ProgramRow>,
    next_id: u64,
    trap_output: String,
}

impl PathBuilder {
    fn new(trap_len: u32) -> Self {
        Self {
            rows: Vec::new(),
            next_id: 0,
            trap_output: "1".repeat(trap_len as usize),
        }
    }

    fn fresh(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// `state` acts the same whatever was last read.
    fn emit_any(&mut self, state: u64, next_state: u64, action: ActionJson) {
        for last in [None, Some(0u8), Some(1u8)] {
            self.rows.push(ProgramRow {
                state,
                last,
                next_state,
                action: action.clone(),
            });
        }
    }

    /// `state` consumes a read whose true value the generator knows; the
    /// other value halts with the trap output.
    fn emit_expect(&mut self, state: u64, true_bit: bool, next_state: u64, action: ActionJson) {
        self.rows.push(ProgramRow {
            state,
            last: Some(u8::from(true_bit)),
            next_state,
            action,
        });
        self.rows.push(ProgramRow {
            state,
            last: Some(u8::from(!true_bit)),
            next_state: state,
            action: ActionJson::Halt {
                output: self.trap_output.clone(),
            },
        });
    }

    /// `state` consumes a read with both values genuinely possible.
    fn emit_branch(
        &mut self,
        state: u64,
        on_zero: (u64, ActionJson),
        on_one: (u64, ActionJson),
    ) {
        self.rows.push(ProgramRow {
            state,
            last: Some(0),
            next_state: on_zero.0,
            action: on_zero.1,
        });
        self.rows.push(ProgramRow {
            state,
            last: Some(1),
            next_state: on_one.0,
            action: on_one.1,
        });
    }

    fn finish(self, tape_addr_bits: u32, input: String) -> ProgramFile {
        let internal_bits = (64 - self.next_id.leading_zeros()).clamp(8, 64);
        ProgramFile {
            schema: 1,
            delta: 0.5,
            internal_bits,
            tape_addr_bits,
            input,
            rows: self.rows,
        }
    }
}

/// Pointer chase over a seeded permutation table.
///
/// The tape is preloaded by free writes: entry `j` occupies addresses
/// `j*w .. (j+1)*w`, most significant bit first. Each hop reads the
/// current entry's `w` bits (charged), reads the target's visited flag
/// (charged) from the flag region above the table, folds that flag into a
/// running checksum, and marks the flag with a free write, so revisits on
/// permutation cycles read values written mid-run. The machine halts with
/// the final pointer and the checksum; total charged reads are
/// `hops * (w + 1)`.
pub fn pointer_chase(hops: usize, seed: u64) -> ProgramArtifact {
    let hops = hops.max(1) as u64;
    let table_len: u64 = 16.max((hops + 2).next_power_of_two());
    let entry_bits = 63 - table_len.leading_zeros();
    let w = entry_bits as u64;
    let flags_base = table_len * w;

    let mut rng = SplitMix64::new(seed);
    let mut table: Vec<u64> = (0..table_len).collect();
    for i in (1..table_len as usize).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        table.swap(i, j);
    }
    let start = rng.next_below(table_len);

    let mut b = PathBuilder::new(entry_bits + 2);
    let mut cur = b.fresh();

    // Preload the table with free writes.
    for j in 0..table_len {
        for k in 0..w {
            let bit = table[j as usize] >> (w - 1 - k) & 1 == 1;
            let next = b.fresh();
            b.emit_any(
                cur,
                next,
                ActionJson::WriteTape {
                    addr: j * w + k,
                    bit: u8::from(bit),
                },
            );
            cur = next;
        }
    }

    let mut pointer = start;
    let mut checksum = false;
    let mut visited: HashSet<u64> = HashSet::new();
    for hop in 0..hops {
        // Issue the first entry-bit read; `cur` arrived from a free write.
        let mut reader = b.fresh();
        b.emit_any(cur, reader, ActionJson::ReadTape { addr: pointer * w });
        let entry = table[pointer as usize];
        for k in 0..w {
            let true_bit = entry >> (w - 1 - k) & 1 == 1;
            let next = b.fresh();
            let action = if k + 1 < w {
                ActionJson::ReadTape {
                    addr: pointer * w + k + 1,
                }
            } else {
                ActionJson::ReadTape {
                    addr: flags_base + entry,
                }
            };
            b.emit_expect(reader, true_bit, next, action);
            reader = next;
        }
        // `reader` consumes the visited flag.
        let true_flag = visited.contains(&entry);
        checksum ^= true_flag;
        let marked = b.fresh();
        b.emit_expect(
            reader,
            true_flag,
            marked,
            ActionJson::WriteTape {
                addr: flags_base + entry,
                bit: 1,
            },
        );
        visited.insert(entry);
        pointer = entry;
        cur = marked;
        let _ = hop;
    }

    let mut output: String = (0..entry_bits)
        .rev()
        .map(|k| if pointer >> k & 1 == 1 { '1' } else { '0' })
        .collect();
    output.push(if checksum { '1' } else { '0' });
    b.emit_any(cur, cur, ActionJson::Halt { output });

    let max_addr = flags_base + table_len;
    let tape_addr_bits = (64 - max_addr.leading_zeros()).max(4);
    let file = b.finish(tape_addr_bits, String::new());
    let machine = file.clone().into_machine().expect("generated program is valid");
    ProgramArtifact {
        machine,
        file,
        expected_reads: hops * (w + 1),
        pointer_chase: Some(PointerChaseLayout {
            table,
            entry_bits,
            start,
            hops,
        }),
    }
}

/// Reads `2^log_width` input bits, writes each to the bit-reversed tape
/// address by free writes, then reads the block back in address order,
/// folding every read-back bit into a parity the machine halts with. The
/// read entries in the trace are the bit-reversal permutation of the
/// input.
pub fn bit_reversal_copy(log_width: usize) -> ProgramArtifact {
    let log_width = log_width.clamp(1, 12) as u32;
    let n = 1u64 << log_width;
    let mut b = PathBuilder::new(2);

    // Copy phase: read input i, write it to the reversed address.
    let mut cur = b.fresh();
    for i in 0..n {
        let writer = b.fresh();
        b.emit_any(cur, writer, ActionJson::ReadInput { pos: i });
        let next = b.fresh();
        b.emit_branch(
            writer,
            (
                next,
                ActionJson::WriteTape {
                    addr: bit_reverse(i, log_width),
                    bit: 0,
                },
            ),
            (
                next,
                ActionJson::WriteTape {
                    addr: bit_reverse(i, log_width),
                    bit: 1,
                },
            ),
        );
        cur = next;
    }

    // Read-back phase: parity-fold tape cells 0..n.
    // State ids here are allocated in pairs per position: parity 0 and 1.
    let fold_base = b.next_id;
    b.emit_any(cur, fold_base, ActionJson::ReadTape { addr: 0 });
    b.next_id += 2 * n;
    for i in 0..n {
        for parity in 0..2u64 {
            let state = fold_base + 2 * i + parity;
            let step = |new_parity: u64| -> (u64, ActionJson) {
                if i + 1 < n {
                    (
                        fold_base + 2 * (i + 1) + new_parity,
                        ActionJson::ReadTape { addr: i + 1 },
                    )
                } else {
                    (
                        fold_base + 2 * n,
                        ActionJson::Halt {
                            output: if new_parity == 1 { "1".into() } else { "0".into() },
                        },
                    )
                }
            };
            b.emit_branch(state, step(parity), step(parity ^ 1));
        }
    }

    let file = b.finish((log_width + 1).max(4), String::new());
    ProgramArtifact {
        machine: file.clone().into_machine().expect("generated program is valid"),
        file,
        expected_reads: n,
        pointer_chase: None,
    }
}

/// Bit-reversal of the low `width` bits.
pub fn bit_reverse(value: u64, width: u32) -> u64 {
    let mut out = 0;
    for k in 0..width {
        out |= (value >> k & 1) << (width - 1 - k);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::format_bits;
    use crate::ramsim::{naive_run, run_to_halt, AccessOp};

    #[test]
    fn single_hop_lands_on_table_entry() {
        let artifact = pointer_chase(1, 123);
        let layout = artifact.pointer_chase.as_ref().unwrap();
        let outcome = run_to_halt(&artifact.machine, artifact.expected_reads + 1).unwrap();
        let expected = layout.final_pointer();
        let mut want: String = (0..layout.entry_bits)
            .rev()
            .map(|k| if expected >> k & 1 == 1 { '1' } else { '0' })
            .collect();
        want.push('0');
        assert_eq!(format_bits(&outcome.output.unwrap()), want);
        assert_eq!(expected, layout.table[layout.start as usize]);
    }

    #[test]
    fn long_chase_matches_closed_form() {
        let artifact = pointer_chase(64, 7);
        let layout = artifact.pointer_chase.as_ref().unwrap();
        let outcome = run_to_halt(&artifact.machine, artifact.expected_reads + 1).unwrap();
        assert_eq!(outcome.time, artifact.expected_reads);
        let output = format_bits(&outcome.output.unwrap());
        let expected = layout.final_pointer();
        let want: String = (0..layout.entry_bits)
            .rev()
            .map(|k| if expected >> k & 1 == 1 { '1' } else { '0' })
            .collect();
        assert_eq!(&output[..layout.entry_bits as usize], want);
    }

    #[test]
    fn bit_reversal_readback_is_permuted_input() {
        let mut artifact = bit_reversal_copy(3);
        let input: Vec<bool> = "10110010".chars().map(|c| c == '1').collect();
        artifact.machine.input = input.clone();
        let outcome = run_to_halt(&artifact.machine, 16).unwrap();
        let readback: Vec<bool> = outcome
            .trace
            .entries
            .iter()
            .filter(|e| e.op == AccessOp::Read)
            .map(|e| e.bit)
            .collect();
        let expected: Vec<bool> = (0..8u64)
            .map(|i| input[bit_reverse(i, 3) as usize])
            .collect();
        assert_eq!(readback, expected);
    }

    #[test]
    fn deterministic_program_bytes() {
        let a = pointer_chase(16, 5).file.to_json();
        let b = pointer_chase(16, 5).file.to_json();
        assert_eq!(a, b);
        let c = pointer_chase(16, 6).file.to_json();
        assert_ne!(a, c);
    }

    #[test]
    fn chase_halts_within_declared_budget() {
        // The halt happens in the free section after the final read, so
        // the budget needs one extra read-slot of headroom to observe it.
        for (hops, seed) in [(1usize, 1u64), (5, 2), (20, 3)] {
            let artifact = pointer_chase(hops, seed);
            let outcome = naive_run(&artifact.machine, artifact.expected_reads + 1).unwrap();
            assert!(
                outcome.output.is_some(),
                "chase({hops},{seed}) still running at {}",
                outcome.time
            );
            assert_eq!(outcome.time, artifact.expected_reads);
        }
    }
}
