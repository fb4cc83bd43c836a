//! Optimal plan construction by exact dynamic programming over intervals.

use std::collections::HashMap;

use crate::circuit::{count_cross_edges, GateSource};
use crate::Frac;

use super::{Interval, Plan, SpaceModel, Strategy};

/// How split positions are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitPolicy {
    /// Every split is at the interval midpoint.
    Midpoint,
    /// Search all positions `b` with `min(b-a, c-b) >= split_const*(c-a)`.
    /// The midpoint is always admissible as a fallback, so planning is
    /// total even when the constraint would otherwise be unsatisfiable.
    SearchAll { split_const: Frac },
}

impl SplitPolicy {
    pub fn search_all() -> Self {
        SplitPolicy::SearchAll {
            split_const: Frac::new(1, 4),
        }
    }
}

/// Returns the plan with minimal [`super::model_space`] over the decision
/// space allowed by `policy`: strategy `A` or `B` at every split, and the
/// split position under `SearchAll`. Ties prefer `B`, then the smaller
/// `b`, so plans are byte-for-byte reproducible.
pub fn plan_optimal<C: GateSource + ?Sized>(
    circuit: &C,
    interval: Interval,
    model: &SpaceModel,
    policy: SplitPolicy,
) -> Plan {
    debug_assert!(interval.c <= circuit.gate_count());
    match policy {
        SplitPolicy::Midpoint => plan_midpoint(circuit, interval, model).0,
        SplitPolicy::SearchAll { split_const } => {
            let mut memo = HashMap::new();
            let mut planner = SearchPlanner {
                circuit,
                model,
                split_const,
                memo: &mut memo,
            };
            planner.cost(interval);
            planner.build(interval)
        }
    }
}

fn plan_midpoint<C: GateSource + ?Sized>(
    circuit: &C,
    interval: Interval,
    model: &SpaceModel,
) -> (Plan, u64) {
    if interval.len() <= model.base_threshold {
        return (
            Plan::Direct(interval),
            interval.len() as u64 + model.frame_overhead_bits,
        );
    }
    let b = interval.midpoint();
    let (left, left_cost) = plan_midpoint(circuit, Interval::new(interval.a, b), model);
    let (right, right_cost) = plan_midpoint(circuit, Interval::new(b, interval.c), model);
    let crossing = count_cross_edges(circuit, interval.a..b, b..interval.c)
        .expect("midpoint split is ordered")
        .functional;
    let cost_a = left_cost + right_cost + model.frame_overhead_bits;
    let cost_b = left_cost.max(right_cost) + crossing + model.frame_overhead_bits;
    let strategy = if cost_b <= cost_a { Strategy::B } else { Strategy::A };
    (
        Plan::Split {
            interval,
            b,
            strategy,
            left: Box::new(left),
            right: Box::new(right),
        },
        cost_a.min(cost_b),
    )
}

struct SearchPlanner<'a, C: GateSource + ?Sized> {
    circuit: &'a C,
    model: &'a SpaceModel,
    split_const: Frac,
    memo: &'a mut HashMap<(usize, usize), (u64, Choice)>,
}

#[derive(Clone, Copy)]
enum Choice {
    Direct,
    Split(usize, Strategy),
}

/// Split positions `b` with `min(b-a, c-b) >= split_const*(c-a)`, compared
/// in exact integer arithmetic. Falls back to the midpoint when no
/// position qualifies, so callers always get at least one candidate.
pub(super) fn admissible_splits(interval: Interval, split_const: Frac) -> Vec<usize> {
    let len = interval.len() as u64;
    let num = *split_const.numer();
    let den = *split_const.denom();
    let mut splits: Vec<usize> = (interval.a + 1..interval.c)
        .filter(|&b| {
            let side = (b - interval.a).min(interval.c - b) as u64;
            side * den >= num * len
        })
        .collect();
    if splits.is_empty() {
        splits.push(interval.midpoint());
    }
    splits
}

impl<C: GateSource + ?Sized> SearchPlanner<'_, C> {
    /// Crossing-wire counts for every split position in one scan: wire
    /// `(s, g)` crosses `b` exactly when `s < b <= g`.
    fn crossings(&self, interval: Interval) -> Vec<u64> {
        let mut diff = vec![0i64; interval.len() + 1];
        for g in interval.range() {
            for s in self.circuit.gate(g).sources() {
                if s >= interval.a {
                    diff[s + 1 - interval.a] += 1;
                    diff[g + 1 - interval.a] -= 1;
                }
            }
        }
        let mut acc = 0i64;
        diff.iter()
            .map(|&d| {
                acc += d;
                acc as u64
            })
            .collect()
    }

    fn cost(&mut self, interval: Interval) -> u64 {
        if let Some(&(cost, _)) = self.memo.get(&(interval.a, interval.c)) {
            return cost;
        }
        let entry = if interval.len() <= self.model.base_threshold {
            (
                interval.len() as u64 + self.model.frame_overhead_bits,
                Choice::Direct,
            )
        } else {
            let crossings = self.crossings(interval);
            let mut best: Option<(u64, usize, Strategy)> = None;
            for b in admissible_splits(interval, self.split_const) {
                let left = self.cost(Interval::new(interval.a, b));
                let right = self.cost(Interval::new(b, interval.c));
                let crossing = crossings[b - interval.a];
                let cost_a = left + right + self.model.frame_overhead_bits;
                let cost_b = left.max(right) + crossing + self.model.frame_overhead_bits;
                let (cost, strategy) = if cost_b <= cost_a {
                    (cost_b, Strategy::B)
                } else {
                    (cost_a, Strategy::A)
                };
                if best.map_or(true, |(c, _, _)| cost < c) {
                    best = Some((cost, b, strategy));
                }
            }
            let (cost, b, strategy) = best.expect("at least one admissible split");
            (cost, Choice::Split(b, strategy))
        };
        self.memo.insert((interval.a, interval.c), entry);
        entry.0
    }

    fn build(&mut self, interval: Interval) -> Plan {
        match self.memo[&(interval.a, interval.c)].1 {
            Choice::Direct => Plan::Direct(interval),
            Choice::Split(b, strategy) => Plan::Split {
                interval,
                b,
                strategy,
                left: Box::new(self.build(Interval::new(interval.a, b))),
                right: Box::new(self.build(Interval::new(b, interval.c))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockeval::model_space;
    use crate::circuit::c4;

    fn zero_overhead(n: usize) -> SpaceModel {
        SpaceModel::for_gate_count(n).with_frame_overhead(0)
    }

    #[test]
    fn c4_midpoint_plan_ties_to_b() {
        let c = c4();
        let model = zero_overhead(4);
        let plan = plan_optimal(&c, Interval::new(0, 4), &model, SplitPolicy::Midpoint);
        assert_eq!(model_space(&c, &plan, &model).unwrap(), 4);
        match &plan {
            Plan::Split { b, strategy, .. } => {
                assert_eq!(*b, 2);
                assert_eq!(*strategy, Strategy::B);
            }
            Plan::Direct(_) => panic!("4 gates exceed the threshold of 2"),
        }
    }

    #[test]
    fn small_interval_forced_direct() {
        let c = c4();
        let model = zero_overhead(4).with_base_threshold(4);
        let plan = plan_optimal(&c, Interval::new(0, 4), &model, SplitPolicy::Midpoint);
        assert_eq!(plan, Plan::Direct(Interval::new(0, 4)));
    }

    #[test]
    fn search_all_never_worse_than_midpoint() {
        let c = c4();
        let model = zero_overhead(4);
        let mid = plan_optimal(&c, Interval::new(0, 4), &model, SplitPolicy::Midpoint);
        let all = plan_optimal(&c, Interval::new(0, 4), &model, SplitPolicy::search_all());
        assert!(
            model_space(&c, &all, &model).unwrap() <= model_space(&c, &mid, &model).unwrap()
        );
    }
}
