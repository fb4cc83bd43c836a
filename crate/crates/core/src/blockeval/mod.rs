//! Recursive interval evaluation of a circuit under an explicit plan.
//!
//! A plan is a binary tree over gate intervals. Leaves evaluate their
//! interval directly, storing one bit per gate. Internal nodes split at
//! `b` and pick one of two strategies:
//!
//! * `A` — evaluate the upper half, recomputing the lower half from
//!   scratch for every crossing-wire demand; costs time, saves space.
//! * `B` — evaluate the lower half once, materializing one bit per
//!   crossing wire, then evaluate the upper half against that buffer.
//!
//! The space model prices a plan exactly in stored bits, the planner
//! minimizes it by dynamic programming, the executor replays a plan with
//! an instrumented meter, and the deepening evaluator searches strategy
//! choices under a growing space budget.

mod deepening;
mod exec;
mod model;
mod plan_text;
mod planner;
mod report;

pub use deepening::{eval_deepening, BudgetSchedule, DeepeningOptions, DeepeningResult};
pub use exec::{eval_with_plan, ExecError, ExecOptions};
pub use model::{model_space, PlanError};
pub use plan_text::{format_plan, parse_plan, PlanTextError};
pub use planner::{plan_optimal, SplitPolicy};
pub use report::SpaceReport;

use crate::Frac;

/// Half-open interval of gate indexes: contains `a, a+1, ..., c-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub a: usize,
    pub c: usize,
}

impl Interval {
    pub fn new(a: usize, c: usize) -> Self {
        debug_assert!(a < c, "interval {a}..{c} is empty");
        Self { a, c }
    }

    pub fn len(&self) -> usize {
        self.c - self.a
    }

    pub fn is_empty(&self) -> bool {
        self.a >= self.c
    }

    /// Midpoint split position.
    pub fn midpoint(&self) -> usize {
        self.a + self.len() / 2
    }

    pub fn contains(&self, gate: usize) -> bool {
        (self.a..self.c).contains(&gate)
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.a..self.c
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}..{}", self.a, self.c)
    }
}

/// Split strategy: `A` recomputes the lower half per demand, `B` stores
/// one bit per crossing wire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    A,
    B,
}

/// Decision tree over intervals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Plan {
    Direct(Interval),
    Split {
        interval: Interval,
        b: usize,
        strategy: Strategy,
        left: Box<Plan>,
        right: Box<Plan>,
    },
}

impl Plan {
    pub fn interval(&self) -> Interval {
        match self {
            Plan::Direct(iv) => *iv,
            Plan::Split { interval, .. } => *interval,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Plan::Direct(_) => 1,
            Plan::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Plan::Direct(_) => 1,
            Plan::Split { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }

    /// Checks that children partition each split at its `b` and that every
    /// split point is interior.
    pub fn is_well_formed(&self) -> bool {
        match self {
            Plan::Direct(iv) => !iv.is_empty(),
            Plan::Split {
                interval,
                b,
                left,
                right,
                ..
            } => {
                interval.a < *b
                    && *b < interval.c
                    && left.interval() == Interval::new(interval.a, *b)
                    && right.interval() == Interval::new(*b, interval.c)
                    && left.is_well_formed()
                    && right.is_well_formed()
            }
        }
    }
}

/// Cost parameters for the space model.
#[derive(Clone, Debug)]
pub struct SpaceModel {
    /// Intervals no longer than this are evaluated directly.
    pub base_threshold: usize,
    /// Bookkeeping bits charged per live frame; zero isolates the
    /// edge-storage term.
    pub frame_overhead_bits: u64,
    /// Contraction constant `k < 1` bounding how fast interval edge totals
    /// shrink under balanced splits; feeds the ratio recurrence.
    pub contraction: Frac,
    /// Starting space/edges ratio for the recurrence trace.
    pub epsilon0: Frac,
}

impl SpaceModel {
    /// Defaults for an `n`-gate circuit: base threshold `max(ceil(log2 n), 1)`
    /// and a frame charge of four index-sized slots.
    pub fn for_gate_count(n: usize) -> Self {
        let log2n = ceil_log2(n.max(1));
        Self {
            base_threshold: log2n.max(1),
            frame_overhead_bits: 4 * log2n as u64,
            contraction: Frac::new(5, 6),
            epsilon0: Frac::new(1, 1),
        }
    }

    pub fn with_base_threshold(mut self, base_threshold: usize) -> Self {
        self.base_threshold = base_threshold.max(1);
        self
    }

    pub fn with_frame_overhead(mut self, bits: u64) -> Self {
        self.frame_overhead_bits = bits;
        self
    }
}

/// `ceil(log2 x)` with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(x: usize) -> usize {
    if x <= 1 {
        0
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(0), 0);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(1024), 10);
    }

    #[test]
    fn plan_well_formedness() {
        let iv = Interval::new(0, 4);
        let good = Plan::Split {
            interval: iv,
            b: 2,
            strategy: Strategy::B,
            left: Box::new(Plan::Direct(Interval::new(0, 2))),
            right: Box::new(Plan::Direct(Interval::new(2, 4))),
        };
        assert!(good.is_well_formed());
        assert_eq!(good.depth(), 2);
        assert_eq!(good.node_count(), 3);

        let bad = Plan::Split {
            interval: iv,
            b: 2,
            strategy: Strategy::A,
            left: Box::new(Plan::Direct(Interval::new(0, 3))),
            right: Box::new(Plan::Direct(Interval::new(2, 4))),
        };
        assert!(!bad.is_well_formed());
    }
}
