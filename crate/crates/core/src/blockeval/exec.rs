//! Plan executor with an instrumented space meter.
//!
//! The meter counts algorithmic bits, not process memory: one bit per gate
//! held in a direct buffer, one bit per crossing wire materialized by a
//! strategy-`B` split, plus the configured per-frame bookkeeping charge.
//! Peak usage therefore lines up with [`super::model_space`] whenever
//! query trimming does not shrink an interval.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::circuit::{Gate, GateSource};

use super::{Interval, Plan, SpaceReport, Strategy};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ExecError {
    #[error("expected {expected} input bits, got {got}")]
    InputLengthMismatch { expected: usize, got: usize },
    #[error("gate {gate} lies outside the plan interval {interval}")]
    GateOutOfPlan { gate: usize, interval: Interval },
    #[error("plan structure is inconsistent at {0}")]
    MalformedPlan(String),
    #[error("evaluation exceeded the step limit of {limit} gate evaluations")]
    StepLimitExceeded { limit: u64 },
    #[error("evaluation exceeded the space budget of {budget} bits")]
    SpaceBudgetExceeded { budget: u64 },
}

/// Executor knobs. `frame_overhead_bits` should match the space model the
/// plan was priced under when metered/modeled agreement matters.
#[derive(Clone, Debug)]
pub struct ExecOptions {
    pub frame_overhead_bits: u64,
    /// Guard against strategy-`A` recomputation blowup; `None` is unbounded.
    pub step_limit: Option<u64>,
    /// Abort as soon as metered bits exceed this; used by the deepening
    /// search. `None` is unbounded.
    pub space_budget: Option<u64>,
}

impl Default for ExecOptions {
    fn default() -> Self {
        Self {
            frame_overhead_bits: 0,
            step_limit: None,
            space_budget: None,
        }
    }
}

/// Evaluates `query_gate` under `plan`, returning the bit (identical to
/// the reference evaluator's) and the metered space report.
///
/// Query trimming is applied throughout: an interval is only ever
/// evaluated up to the highest gate demanded from it.
pub fn eval_with_plan<C: GateSource + ?Sized>(
    circuit: &C,
    input_bits: &[bool],
    plan: &Plan,
    query_gate: usize,
    options: &ExecOptions,
) -> Result<(bool, SpaceReport), ExecError> {
    if input_bits.len() != circuit.num_inputs() {
        return Err(ExecError::InputLengthMismatch {
            expected: circuit.num_inputs(),
            got: input_bits.len(),
        });
    }
    if !plan.is_well_formed() || plan.interval().c > circuit.gate_count() {
        return Err(ExecError::MalformedPlan(plan.interval().to_string()));
    }
    if !plan.interval().contains(query_gate) {
        return Err(ExecError::GateOutOfPlan {
            gate: query_gate,
            interval: plan.interval(),
        });
    }
    let mut exec = Exec {
        circuit,
        inputs: input_bits,
        meter: Meter::new(options.frame_overhead_bits, options.space_budget),
        steps: 0,
        step_limit: options.step_limit.unwrap_or(u64::MAX),
        below_root: None,
        root_a: plan.interval().a,
    };
    let mut layers = Vec::new();
    let answers = exec.run(plan, &[query_gate], &mut layers)?;
    debug_assert!(layers.is_empty());
    Ok((answers[0], exec.meter.into_report()))
}

/// One environment entry: how gates in `lo..hi` demanded from above are
/// resolved.
enum Layer<'p> {
    /// Strategy `B`: crossing-wire values, sorted by source gate.
    Materialized {
        lo: usize,
        hi: usize,
        wires: Vec<(usize, bool)>,
    },
    /// Strategy `A`: re-run the lower subplan per demand.
    Recompute {
        lo: usize,
        hi: usize,
        left: &'p Plan,
    },
}

impl Layer<'_> {
    fn covers(&self, gate: usize) -> bool {
        let (lo, hi) = match self {
            Layer::Materialized { lo, hi, .. } | Layer::Recompute { lo, hi, .. } => (*lo, *hi),
        };
        (lo..hi).contains(&gate)
    }
}

/// Shared by the plan executor and the deepening search.
pub(super) struct Meter {
    current_bits: u64,
    peak_bits: u64,
    current_frames: u64,
    peak_frames: u64,
    recompute_count: u64,
    per_interval: BTreeMap<(usize, usize), u64>,
    frame_overhead: u64,
    budget: u64,
}

impl Meter {
    pub(super) fn new(frame_overhead: u64, budget: Option<u64>) -> Self {
        Self {
            current_bits: 0,
            peak_bits: 0,
            current_frames: 0,
            peak_frames: 0,
            recompute_count: 0,
            per_interval: BTreeMap::new(),
            frame_overhead,
            budget: budget.unwrap_or(u64::MAX),
        }
    }

    /// Adds `bits` to the live total before any budget check, so a failed
    /// allocation is still rolled back with a matching `free`.
    pub(super) fn alloc(&mut self, bits: u64) -> Result<(), ExecError> {
        self.current_bits += bits;
        self.peak_bits = self.peak_bits.max(self.current_bits);
        if self.current_bits > self.budget {
            Err(ExecError::SpaceBudgetExceeded { budget: self.budget })
        } else {
            Ok(())
        }
    }

    pub(super) fn free(&mut self, bits: u64) {
        debug_assert!(self.current_bits >= bits);
        self.current_bits -= bits;
    }

    pub(super) fn enter_frame(&mut self) -> Result<(), ExecError> {
        self.current_frames += 1;
        self.peak_frames = self.peak_frames.max(self.current_frames);
        self.alloc(self.frame_overhead)
    }

    pub(super) fn exit_frame(&mut self) {
        self.free(self.frame_overhead);
        self.current_frames -= 1;
    }

    pub(super) fn count_recompute(&mut self) {
        self.recompute_count += 1;
    }

    fn note_interval(&mut self, interval: Interval, bits: u64) {
        let entry = self.per_interval.entry((interval.a, interval.c)).or_insert(0);
        *entry = (*entry).max(bits);
    }

    pub(super) fn into_report(self) -> SpaceReport {
        SpaceReport {
            peak_stored_bits: self.peak_bits,
            peak_frames: self.peak_frames,
            recompute_count: self.recompute_count,
            per_interval: self.per_interval,
        }
    }
}

struct Exec<'c, C: GateSource + ?Sized> {
    circuit: &'c C,
    inputs: &'c [bool],
    meter: Meter,
    steps: u64,
    step_limit: u64,
    /// Values of gates below the plan root, treated as external inputs and
    /// fetched outside the meter. Filled lazily by one forward pass.
    below_root: Option<Vec<bool>>,
    root_a: usize,
}

impl<'c, C: GateSource + ?Sized> Exec<'c, C> {
    /// Evaluates `plan` for the sorted, non-empty `queries`, all inside the
    /// plan's interval. Every push to `layers` is popped before returning.
    fn run<'p>(
        &mut self,
        plan: &'p Plan,
        queries: &[usize],
        layers: &mut Vec<Layer<'p>>,
    ) -> Result<Vec<bool>, ExecError> {
        debug_assert!(!queries.is_empty());
        debug_assert!(queries.windows(2).all(|w| w[0] < w[1]));
        let hi = queries.last().unwrap() + 1;
        debug_assert!(plan.interval().contains(hi - 1));

        match plan {
            Plan::Direct(iv) => self.run_direct(*iv, hi, queries, layers),
            Plan::Split {
                interval,
                b,
                strategy,
                left,
                right,
            } => {
                if hi <= *b {
                    // The whole demand lives below the split: the node is
                    // skipped, not entered.
                    return self.run(left, queries, layers);
                }
                self.meter.enter_frame()?;
                let split_at = queries.partition_point(|&q| q < *b);
                let (q_left, q_right) = queries.split_at(split_at);
                let result = match strategy {
                    Strategy::B => {
                        self.run_split_b(*interval, *b, hi, left, right, q_left, q_right, layers)
                    }
                    Strategy::A => self.run_split_a(left, right, *interval, *b, q_left, q_right, layers),
                };
                self.meter.exit_frame();
                result
            }
        }
    }

    fn run_direct<'p>(
        &mut self,
        iv: Interval,
        hi: usize,
        queries: &[usize],
        layers: &mut Vec<Layer<'p>>,
    ) -> Result<Vec<bool>, ExecError> {
        let hi = hi.min(iv.c);
        let len = hi - iv.a;
        self.meter.enter_frame()?;
        let alloc = self.meter.alloc(len as u64);
        if let Err(e) = alloc {
            self.meter.free(len as u64);
            self.meter.exit_frame();
            return Err(e);
        }
        self.meter.note_interval(iv, len as u64);
        let mut buf: Vec<bool> = Vec::with_capacity(len);
        let mut failure = None;
        for g in iv.a..hi {
            let step = self.charge_step();
            match step.and_then(|()| self.eval_gate(g, iv.a, &buf, layers)) {
                Ok(value) => buf.push(value),
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
        }
        let result = match failure {
            Some(e) => Err(e),
            None => Ok(queries.iter().map(|&q| buf[q - iv.a]).collect()),
        };
        self.meter.free(len as u64);
        self.meter.exit_frame();
        result
    }

    /// Evaluates one gate of a direct buffer; both operands are always
    /// fetched, so demand patterns are input-independent.
    fn eval_gate<'p>(
        &mut self,
        g: usize,
        base: usize,
        buf: &[bool],
        layers: &mut Vec<Layer<'p>>,
    ) -> Result<bool, ExecError> {
        let gate = self.circuit.gate(g);
        let mut fetch = |me: &mut Self, s: usize| -> Result<bool, ExecError> {
            if s >= base {
                Ok(buf[s - base])
            } else {
                me.resolve(s, layers)
            }
        };
        Ok(match gate {
            Gate::Input(j) => self.inputs[j],
            Gate::Const(bit) => bit,
            Gate::Not(s) => !fetch(self, s)?,
            Gate::Dup(s) => fetch(self, s)?,
            Gate::And(x, y) => {
                let a = fetch(self, x)?;
                let b = fetch(self, y)?;
                a && b
            }
            Gate::Or(x, y) => {
                let a = fetch(self, x)?;
                let b = fetch(self, y)?;
                a || b
            }
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn run_split_b<'p>(
        &mut self,
        interval: Interval,
        b: usize,
        hi: usize,
        left: &'p Plan,
        right: &'p Plan,
        q_left: &[usize],
        q_right: &[usize],
        layers: &mut Vec<Layer<'p>>,
    ) -> Result<Vec<bool>, ExecError> {
        debug_assert!(!q_right.is_empty());
        // Crossing wires into the trimmed upper half, canonical
        // (source, destination, port) order.
        let mut wires: Vec<(usize, usize, u8)> = Vec::new();
        for g in b..hi {
            for (port, s) in self.circuit.gate(g).sources().enumerate() {
                if (interval.a..b).contains(&s) {
                    wires.push((s, g, port as u8));
                }
            }
        }
        wires.sort_unstable();
        let stored_bits = wires.len() as u64;
        if let Err(e) = self.meter.alloc(stored_bits) {
            self.meter.free(stored_bits);
            return Err(e);
        }
        self.meter.note_interval(interval, stored_bits);

        let mut left_queries: Vec<usize> = q_left.to_vec();
        left_queries.extend(wires.iter().map(|&(s, _, _)| s));
        left_queries.sort_unstable();
        left_queries.dedup();

        let outcome = (|| {
            let left_vals = if left_queries.is_empty() {
                Vec::new()
            } else {
                self.run(left, &left_queries, layers)?
            };
            let lookup = |s: usize| {
                left_vals[left_queries.binary_search(&s).expect("queried source")]
            };
            let answers_left: Vec<bool> = q_left.iter().map(|&q| lookup(q)).collect();
            let stored: Vec<(usize, bool)> =
                wires.iter().map(|&(s, _, _)| (s, lookup(s))).collect();

            layers.push(Layer::Materialized {
                lo: interval.a,
                hi: b,
                wires: stored,
            });
            let answers_right = self.run(right, q_right, layers);
            layers.pop();
            let mut answers = answers_left;
            answers.extend(answers_right?);
            Ok(answers)
        })();
        self.meter.free(stored_bits);
        outcome
    }

    #[allow(clippy::too_many_arguments)]
    fn run_split_a<'p>(
        &mut self,
        left: &'p Plan,
        right: &'p Plan,
        interval: Interval,
        b: usize,
        q_left: &[usize],
        q_right: &[usize],
        layers: &mut Vec<Layer<'p>>,
    ) -> Result<Vec<bool>, ExecError> {
        debug_assert!(!q_right.is_empty());
        let mut answers = if q_left.is_empty() {
            Vec::new()
        } else {
            self.run(left, q_left, layers)?
        };
        layers.push(Layer::Recompute {
            lo: interval.a,
            hi: b,
            left,
        });
        let answers_right = self.run(right, q_right, layers);
        layers.pop();
        answers.extend(answers_right?);
        Ok(answers)
    }

    /// Resolves a demand for a gate below the current interval: the
    /// topmost covering layer answers it, either from a materialized
    /// crossing buffer or by re-running the lower subplan.
    fn resolve<'p>(
        &mut self,
        gate: usize,
        layers: &mut Vec<Layer<'p>>,
    ) -> Result<bool, ExecError> {
        enum Hit<'p> {
            Bit(bool),
            Rerun(&'p Plan),
        }
        let mut hit = None;
        for layer in layers.iter().rev() {
            if layer.covers(gate) {
                hit = Some(match layer {
                    Layer::Materialized { wires, .. } => {
                        let idx = wires.partition_point(|&(s, _)| s < gate);
                        debug_assert!(
                            idx < wires.len() && wires[idx].0 == gate,
                            "demand for gate {gate} missing from crossing buffer"
                        );
                        Hit::Bit(wires[idx].1)
                    }
                    Layer::Recompute { left, .. } => Hit::Rerun(left),
                });
                break;
            }
        }
        match hit {
            Some(Hit::Bit(bit)) => Ok(bit),
            Some(Hit::Rerun(left)) => {
                self.meter.recompute_count += 1;
                Ok(self.run(left, &[gate], layers)?[0])
            }
            None => Ok(self.below_root(gate)),
        }
    }

    /// Gates below the plan root are external inputs to the evaluated
    /// region; they are fetched by one unmetered forward pass.
    fn below_root(&mut self, gate: usize) -> bool {
        debug_assert!(gate < self.root_a);
        if self.below_root.is_none() {
            let mut values: Vec<bool> = Vec::with_capacity(self.root_a);
            for i in 0..self.root_a {
                let value = match self.circuit.gate(i) {
                    Gate::Input(j) => self.inputs[j],
                    Gate::Const(b) => b,
                    Gate::Not(s) => !values[s],
                    Gate::And(a, b) => values[a] && values[b],
                    Gate::Or(a, b) => values[a] || values[b],
                    Gate::Dup(s) => values[s],
                };
                values.push(value);
            }
            self.below_root = Some(values);
        }
        self.below_root.as_ref().unwrap()[gate]
    }

    fn charge_step(&mut self) -> Result<(), ExecError> {
        self.steps += 1;
        if self.steps > self.step_limit {
            Err(ExecError::StepLimitExceeded {
                limit: self.step_limit,
            })
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{c4, naive_eval};

    fn c4_split(strategy: Strategy) -> Plan {
        Plan::Split {
            interval: Interval::new(0, 4),
            b: 2,
            strategy,
            left: Box::new(Plan::Direct(Interval::new(0, 2))),
            right: Box::new(Plan::Direct(Interval::new(2, 4))),
        }
    }

    #[test]
    fn c4_strategy_b_meters_crossing_bits() {
        let c = c4();
        let plan = c4_split(Strategy::B);
        let (bit, report) =
            eval_with_plan(&c, &[true, true], &plan, 3, &ExecOptions::default()).unwrap();
        assert!(!bit);
        assert_eq!(report.per_interval[&(0, 4)], 2);
        assert_eq!(report.peak_stored_bits, 4);
        assert_eq!(report.recompute_count, 0);
    }

    #[test]
    fn c4_strategy_b_other_input() {
        let c = c4();
        let plan = c4_split(Strategy::B);
        let (bit, _) =
            eval_with_plan(&c, &[false, true], &plan, 3, &ExecOptions::default()).unwrap();
        assert!(bit);
    }

    #[test]
    fn c4_strategy_a_counts_recomputes() {
        let c = c4();
        let plan = c4_split(Strategy::A);
        let (bit, report) =
            eval_with_plan(&c, &[true, true], &plan, 3, &ExecOptions::default()).unwrap();
        assert!(!bit);
        // Gate 2 demands gates 0 and 1 across the boundary.
        assert_eq!(report.recompute_count, 2);
        assert_eq!(report.peak_stored_bits, 4);
    }

    #[test]
    fn trimming_skips_the_upper_half() {
        let c = c4();
        let plan = c4_split(Strategy::B);
        let (bit, report) =
            eval_with_plan(&c, &[true, false], &plan, 1, &ExecOptions::default()).unwrap();
        assert!(!bit);
        // Only the lower direct node runs, and only up to gate 1.
        assert_eq!(report.peak_stored_bits, 2);
        assert!(!report.per_interval.contains_key(&(0, 4)));
    }

    #[test]
    fn all_gates_match_reference() {
        let c = c4();
        for input in [[false, false], [false, true], [true, false], [true, true]] {
            let expected = naive_eval(&c, &input).unwrap();
            for strategy in [Strategy::A, Strategy::B] {
                let plan = c4_split(strategy);
                for gate in 0..4 {
                    let (bit, _) =
                        eval_with_plan(&c, &input, &plan, gate, &ExecOptions::default()).unwrap();
                    assert_eq!(bit, expected[gate], "gate {gate} {strategy:?} {input:?}");
                }
            }
        }
    }

    #[test]
    fn query_outside_plan_rejected() {
        let c = c4();
        let plan = Plan::Direct(Interval::new(0, 2));
        let err = eval_with_plan(&c, &[true, true], &plan, 3, &ExecOptions::default());
        assert!(matches!(err, Err(ExecError::GateOutOfPlan { gate: 3, .. })));
    }

    #[test]
    fn step_limit_enforced() {
        let c = c4();
        let plan = c4_split(Strategy::A);
        let options = ExecOptions {
            step_limit: Some(2),
            ..ExecOptions::default()
        };
        let err = eval_with_plan(&c, &[true, true], &plan, 3, &options);
        assert!(matches!(err, Err(ExecError::StepLimitExceeded { limit: 2 })));
    }
}
