//! Deterministic search replacement for the nondeterministic strategy
//! choices: depth-first search over split decisions under a space budget,
//! restarting with a larger budget until the evaluation fits.

use thiserror::Error;

use crate::circuit::{Gate, GateSource};

use super::exec::{ExecError, Meter};
use super::planner::admissible_splits;
use super::{Interval, SpaceReport, SplitPolicy, SpaceModel, Strategy};

/// How the space budget grows between restarts. Doubling gives the same
/// asymptotics as unit increments with exponentially fewer restarts; the
/// unit schedule is kept for fidelity experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BudgetSchedule {
    Doubling,
    Increment,
}

#[derive(Clone, Debug)]
pub struct DeepeningOptions {
    pub model: SpaceModel,
    pub policy: SplitPolicy,
    pub schedule: BudgetSchedule,
    pub step_limit: Option<u64>,
}

impl DeepeningOptions {
    pub fn for_gate_count(n: usize) -> Self {
        Self {
            model: SpaceModel::for_gate_count(n).with_frame_overhead(0),
            policy: SplitPolicy::Midpoint,
            schedule: BudgetSchedule::Doubling,
            step_limit: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DeepeningResult {
    pub value: bool,
    /// Space budget at which the search first succeeded.
    pub budget: u64,
    /// Number of budget levels attempted, the successful one included.
    pub attempts: u32,
    pub report: SpaceReport,
}

#[derive(Debug, Error)]
enum SearchFail {
    /// Current branch exceeded the budget; backtrack and try another.
    #[error("budget exhausted")]
    Budget,
    #[error(transparent)]
    Fatal(ExecError),
}

/// Evaluates `query_gate` by budgeted search over strategy (and, under
/// `SearchAll`, split-position) choices. The result always equals the
/// reference evaluator's; the succeeding budget is at most one schedule
/// step above the cheapest decision tree's metered cost.
pub fn eval_deepening<C: GateSource + ?Sized>(
    circuit: &C,
    input_bits: &[bool],
    query_gate: usize,
    options: &DeepeningOptions,
) -> Result<DeepeningResult, ExecError> {
    if input_bits.len() != circuit.num_inputs() {
        return Err(ExecError::InputLengthMismatch {
            expected: circuit.num_inputs(),
            got: input_bits.len(),
        });
    }
    let n = circuit.gate_count();
    if query_gate >= n {
        return Err(ExecError::GateOutOfPlan {
            gate: query_gate,
            interval: Interval::new(0, n.max(1)),
        });
    }
    // Query trimming before anything else.
    let root = Interval::new(0, query_gate + 1);
    let cap = worst_case_budget(root.len(), &options.model);

    let mut attempts = 0;
    let mut budget = 1u64;
    let mut search = Search {
        circuit,
        inputs: input_bits,
        meter: Meter::new(options.model.frame_overhead_bits, Some(budget)),
        steps: 0,
        step_limit: options.step_limit.unwrap_or(u64::MAX),
        threshold: options.model.base_threshold,
        policy: options.policy,
    };
    loop {
        attempts += 1;
        search.meter = Meter::new(options.model.frame_overhead_bits, Some(budget));
        let mut layers = Vec::new();
        match search.run(root, &[query_gate], &mut layers) {
            Ok(values) => {
                let meter = std::mem::replace(&mut search.meter, Meter::new(0, None));
                return Ok(DeepeningResult {
                    value: values[0],
                    budget,
                    attempts,
                    report: meter.into_report(),
                });
            }
            Err(SearchFail::Fatal(e)) => return Err(e),
            Err(SearchFail::Budget) => {
                assert!(
                    budget < cap,
                    "search failed at budget {budget} >= worst-case bound {cap}"
                );
                budget = match options.schedule {
                    BudgetSchedule::Doubling => budget.saturating_mul(2),
                    BudgetSchedule::Increment => budget + 1,
                }
                .min(cap);
            }
        }
    }
}

/// Budget that always suffices: every interval evaluated with strategy `A`
/// down to direct leaves costs the interval length plus a frame charge per
/// node.
fn worst_case_budget(len: usize, model: &SpaceModel) -> u64 {
    fn node_count(len: usize, threshold: usize) -> u64 {
        if len <= threshold {
            1
        } else {
            let half = len / 2;
            1 + node_count(half, threshold) + node_count(len - half, threshold)
        }
    }
    len as u64 + model.frame_overhead_bits * node_count(len, model.base_threshold)
}

enum Layer {
    Materialized {
        lo: usize,
        hi: usize,
        wires: Vec<(usize, bool)>,
    },
    /// Re-search the covered interval per demand; each recomputation
    /// guesses its strategies afresh, as each recursive invocation would.
    Research { lo: usize, hi: usize },
}

impl Layer {
    fn covers(&self, gate: usize) -> bool {
        let (lo, hi) = match self {
            Layer::Materialized { lo, hi, .. } | Layer::Research { lo, hi } => (*lo, *hi),
        };
        (lo..hi).contains(&gate)
    }
}

struct Search<'c, C: GateSource + ?Sized> {
    circuit: &'c C,
    inputs: &'c [bool],
    meter: Meter,
    steps: u64,
    step_limit: u64,
    threshold: usize,
    policy: SplitPolicy,
}

impl<C: GateSource + ?Sized> Search<'_, C> {
    fn run(
        &mut self,
        interval: Interval,
        queries: &[usize],
        layers: &mut Vec<Layer>,
    ) -> Result<Vec<bool>, SearchFail> {
        debug_assert!(!queries.is_empty());
        let hi = queries.last().unwrap() + 1;
        let interval = Interval::new(interval.a, hi.min(interval.c));

        if interval.len() <= self.threshold {
            return self.run_direct(interval, queries, layers);
        }
        let candidates = match self.policy {
            SplitPolicy::Midpoint => vec![interval.midpoint()],
            SplitPolicy::SearchAll { split_const } => admissible_splits(interval, split_const),
        };
        for b in candidates {
            let split_at = queries.partition_point(|&q| q < b);
            let (q_left, q_right) = queries.split_at(split_at);
            // The interval was already trimmed to the highest query, so
            // every candidate split leaves demands above it.
            debug_assert!(!q_right.is_empty());
            for strategy in [Strategy::B, Strategy::A] {
                let outcome = self.try_split(interval, b, strategy, q_left, q_right, layers);
                match outcome {
                    Ok(v) => return Ok(v),
                    Err(SearchFail::Budget) => continue,
                    Err(fatal) => return Err(fatal),
                }
            }
        }
        Err(SearchFail::Budget)
    }

    fn try_split(
        &mut self,
        interval: Interval,
        b: usize,
        strategy: Strategy,
        q_left: &[usize],
        q_right: &[usize],
        layers: &mut Vec<Layer>,
    ) -> Result<Vec<bool>, SearchFail> {
        self.meter.enter_frame().map_err(|e| {
            self.meter.exit_frame();
            self.fail(e)
        })?;
        let result = match strategy {
            Strategy::B => self.try_split_b(interval, b, q_left, q_right, layers),
            Strategy::A => self.try_split_a(interval, b, q_left, q_right, layers),
        };
        self.meter.exit_frame();
        result
    }

    fn try_split_b(
        &mut self,
        interval: Interval,
        b: usize,
        q_left: &[usize],
        q_right: &[usize],
        layers: &mut Vec<Layer>,
    ) -> Result<Vec<bool>, SearchFail> {
        let mut wires: Vec<(usize, usize, u8)> = Vec::new();
        for g in b..interval.c {
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
            return Err(self.fail(e));
        }

        let mut left_queries: Vec<usize> = q_left.to_vec();
        left_queries.extend(wires.iter().map(|&(s, _, _)| s));
        left_queries.sort_unstable();
        left_queries.dedup();

        let outcome = (|| {
            let left_vals = if left_queries.is_empty() {
                Vec::new()
            } else {
                self.run(Interval::new(interval.a, b), &left_queries, layers)?
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
            let answers_right = self.run(Interval::new(b, interval.c), q_right, layers);
            layers.pop();
            let mut answers = answers_left;
            answers.extend(answers_right?);
            Ok(answers)
        })();
        self.meter.free(stored_bits);
        outcome
    }

    fn try_split_a(
        &mut self,
        interval: Interval,
        b: usize,
        q_left: &[usize],
        q_right: &[usize],
        layers: &mut Vec<Layer>,
    ) -> Result<Vec<bool>, SearchFail> {
        let mut answers = if q_left.is_empty() {
            Vec::new()
        } else {
            self.run(Interval::new(interval.a, b), q_left, layers)?
        };
        layers.push(Layer::Research {
            lo: interval.a,
            hi: b,
        });
        let answers_right = self.run(Interval::new(b, interval.c), q_right, layers);
        layers.pop();
        answers.extend(answers_right?);
        Ok(answers)
    }

    fn run_direct(
        &mut self,
        interval: Interval,
        queries: &[usize],
        layers: &mut Vec<Layer>,
    ) -> Result<Vec<bool>, SearchFail> {
        let len = interval.len();
        self.meter.enter_frame().map_err(|e| {
            self.meter.exit_frame();
            self.fail(e)
        })?;
        let outcome = (|| {
            self.meter.alloc(len as u64).map_err(|e| self.fail(e))?;
            let mut buf: Vec<bool> = Vec::with_capacity(len);
            for g in interval.range() {
                self.charge_step()?;
                let value = self.eval_gate(g, interval.a, &buf, layers)?;
                buf.push(value);
            }
            Ok(queries.iter().map(|&q| buf[q - interval.a]).collect())
        })();
        // alloc charges before it checks the budget, so the buffer is
        // freed on every path.
        self.meter.free(len as u64);
        self.meter.exit_frame();
        outcome
    }

    fn eval_gate(
        &mut self,
        g: usize,
        base: usize,
        buf: &[bool],
        layers: &mut Vec<Layer>,
    ) -> Result<bool, SearchFail> {
        // Both operands are always fetched; gate evaluation does not
        // short-circuit, so demand patterns match the plan executor's.
        let mut source = |me: &mut Self, s: usize| -> Result<bool, SearchFail> {
            if s >= base {
                Ok(buf[s - base])
            } else {
                me.resolve(s, layers)
            }
        };
        Ok(match self.circuit.gate(g) {
            Gate::Input(j) => self.inputs[j],
            Gate::Const(bit) => bit,
            Gate::Not(s) => !source(self, s)?,
            Gate::Dup(s) => source(self, s)?,
            Gate::And(x, y) => {
                let a = source(self, x)?;
                let b = source(self, y)?;
                a && b
            }
            Gate::Or(x, y) => {
                let a = source(self, x)?;
                let b = source(self, y)?;
                a || b
            }
        })
    }

    fn resolve(&mut self, gate: usize, layers: &mut Vec<Layer>) -> Result<bool, SearchFail> {
        enum Hit {
            Bit(bool),
            Research(usize, usize),
        }
        let mut hit = None;
        for layer in layers.iter().rev() {
            if layer.covers(gate) {
                hit = Some(match layer {
                    Layer::Materialized { wires, .. } => {
                        let idx = wires.partition_point(|&(s, _)| s < gate);
                        debug_assert!(idx < wires.len() && wires[idx].0 == gate);
                        Hit::Bit(wires[idx].1)
                    }
                    Layer::Research { lo, hi } => Hit::Research(*lo, *hi),
                });
                break;
            }
        }
        match hit {
            Some(Hit::Bit(bit)) => Ok(bit),
            Some(Hit::Research(lo, hi)) => {
                self.meter.count_recompute();
                Ok(self.run(Interval::new(lo, hi), &[gate], layers)?[0])
            }
            None => unreachable!("demand below the search root"),
        }
    }

    fn charge_step(&mut self) -> Result<(), SearchFail> {
        self.steps += 1;
        if self.steps > self.step_limit {
            Err(SearchFail::Fatal(ExecError::StepLimitExceeded {
                limit: self.step_limit,
            }))
        } else {
            Ok(())
        }
    }

    fn fail(&self, e: ExecError) -> SearchFail {
        match e {
            ExecError::SpaceBudgetExceeded { .. } => SearchFail::Budget,
            other => SearchFail::Fatal(other),
        }
    }
}
