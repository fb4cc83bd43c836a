//! Edge counting over machine traces.
//!
//! An "edge" runs from the interval that last wrote a tape bit to an
//! interval that reads it; the count is per read access, so one address
//! read several times contributes several edges. Reads of never-written
//! addresses are counted as defined at step 0, the tape-initialization
//! boundary.

use std::collections::HashMap;
use std::ops::Range;

use super::{AccessOp, Trace};

/// Number of reads in `upper` whose address was last written during
/// `lower` (requires `lower.end <= upper.start`).
pub fn ram_edges(trace: &Trace, lower: Range<u64>, upper: Range<u64>) -> u64 {
    debug_assert!(lower.start <= lower.end);
    debug_assert!(lower.end <= upper.start);
    debug_assert!(upper.start <= upper.end);
    let mut last_write: HashMap<u64, u64> = HashMap::new();
    let mut count = 0;
    for entry in &trace.entries {
        match entry.op {
            AccessOp::Write => {
                last_write.insert(entry.addr, entry.step);
            }
            AccessOp::Read => {
                if upper.contains(&entry.step) {
                    let defined = last_write.get(&entry.addr).copied().unwrap_or(0);
                    if lower.contains(&defined) {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

/// Edge total accumulated by midpoint recursion: intervals at or below
/// `base_threshold` count one edge per read, and every split adds its
/// crossing count. With `base_threshold = 1` this is the fully recursive
/// total.
pub fn recursive_edges(trace: &Trace, interval: Range<u64>, base_threshold: u64) -> u64 {
    let len = interval.end - interval.start;
    if len <= base_threshold.max(1) {
        return len;
    }
    let mid = interval.start + len / 2;
    recursive_edges(trace, interval.start..mid, base_threshold)
        + recursive_edges(trace, mid..interval.end, base_threshold)
        + ram_edges(trace, interval.start..mid, mid..interval.end)
}
