//! Exact space pricing of a plan, with no evaluation performed.

use thiserror::Error;

use crate::circuit::{count_cross_edges, GateSource};

use super::{Plan, SpaceModel, Strategy};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("plan structure is inconsistent at {0}")]
    MalformedPlan(String),
    #[error("plan interval {0}..{1} exceeds the circuit's {2} gates")]
    OutOfRange(usize, usize, usize),
}

/// Modeled peak stored bits for executing `plan`:
///
/// * `Direct(a..c)` costs `c - a` plus the frame charge.
/// * Strategy `A` costs `left + right` plus the frame charge: the lower
///   half is re-run while the upper half is live.
/// * Strategy `B` costs `max(left, right)` plus one bit per crossing wire
///   plus the frame charge: the crossing buffer outlives both halves.
pub fn model_space<C: GateSource + ?Sized>(
    circuit: &C,
    plan: &Plan,
    model: &SpaceModel,
) -> Result<u64, PlanError> {
    if !plan.is_well_formed() {
        return Err(PlanError::MalformedPlan(plan.interval().to_string()));
    }
    if plan.interval().c > circuit.gate_count() {
        return Err(PlanError::OutOfRange(
            plan.interval().a,
            plan.interval().c,
            circuit.gate_count(),
        ));
    }
    Ok(price(circuit, plan, model))
}

fn price<C: GateSource + ?Sized>(circuit: &C, plan: &Plan, model: &SpaceModel) -> u64 {
    match plan {
        Plan::Direct(iv) => iv.len() as u64 + model.frame_overhead_bits,
        Plan::Split {
            interval,
            b,
            strategy,
            left,
            right,
        } => {
            let left_cost = price(circuit, left, model);
            let right_cost = price(circuit, right, model);
            match strategy {
                Strategy::A => left_cost + right_cost + model.frame_overhead_bits,
                Strategy::B => {
                    let crossing = count_cross_edges(circuit, interval.a..*b, *b..interval.c)
                        .expect("well-formed plan intervals")
                        .functional;
                    left_cost.max(right_cost) + crossing + model.frame_overhead_bits
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockeval::Interval;
    use crate::circuit::c4;

    fn split(strategy: Strategy) -> Plan {
        Plan::Split {
            interval: Interval::new(0, 4),
            b: 2,
            strategy,
            left: Box::new(Plan::Direct(Interval::new(0, 2))),
            right: Box::new(Plan::Direct(Interval::new(2, 4))),
        }
    }

    fn zero_overhead() -> SpaceModel {
        SpaceModel::for_gate_count(4).with_frame_overhead(0)
    }

    #[test]
    fn c4_direct_costs_four() {
        let c = c4();
        let plan = Plan::Direct(Interval::new(0, 4));
        assert_eq!(model_space(&c, &plan, &zero_overhead()).unwrap(), 4);
    }

    #[test]
    fn c4_split_costs() {
        let c = c4();
        // B: max(2, 2) + 2 crossing wires = 4.
        assert_eq!(model_space(&c, &split(Strategy::B), &zero_overhead()).unwrap(), 4);
        // A: 2 + 2 = 4.
        assert_eq!(model_space(&c, &split(Strategy::A), &zero_overhead()).unwrap(), 4);
    }

    #[test]
    fn overhead_charged_per_node() {
        let c = c4();
        let model = zero_overhead().with_frame_overhead(3);
        // Three nodes, each charging 3.
        assert_eq!(model_space(&c, &split(Strategy::A), &model).unwrap(), 4 + 9);
    }

    #[test]
    fn malformed_plan_rejected() {
        let c = c4();
        let bad = Plan::Split {
            interval: Interval::new(0, 4),
            b: 3,
            strategy: Strategy::B,
            left: Box::new(Plan::Direct(Interval::new(0, 2))),
            right: Box::new(Plan::Direct(Interval::new(2, 4))),
        };
        assert!(matches!(
            model_space(&c, &bad, &zero_overhead()),
            Err(PlanError::MalformedPlan(_))
        ));
    }
}
